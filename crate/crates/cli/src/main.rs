fn main() {
    std::process::exit(oodgate::run(std::env::args_os()));
}
