//! Flat `key = value` config files, spliced into the argument list right
//! after the subcommand so that flags given on the command line win.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use oodgate_core::{Error, Result};

/// Parses config text into command-line tokens. Keys may use `_` or `-`;
/// `true` turns a key into a bare flag and `false` drops it.
pub fn config_tokens(text: &str) -> Result<Vec<OsString>> {
    let mut tokens = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "config line {}: expected `key = value`",
                lineno + 1
            ))
        })?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(Error::Config(format!(
                "config line {}: invalid key `{key}`",
                lineno + 1
            )));
        }
        let value = value.trim();
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(value);
        match value {
            "true" => tokens.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                tokens.push(format!("--{key}").into());
                tokens.push(value.into());
            }
        }
    }
    Ok(tokens)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Returns `args` with the tokens of any `--config` file inserted after the
/// subcommand named in `subcommands`.
pub fn expand_config(args: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| Error::io(Path::new(&path), e))?;
    let tokens = config_tokens(&text)?;
    let Some(at) = args
        .iter()
        .skip(1)
        .position(|a| subcommands.iter().any(|s| a == *s))
    else {
        return Ok(args);
    };
    let at = at + 2;
    let mut out = args[..at].to_vec();
    out.extend(tokens);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[OsString]) -> Vec<String> {
        v.iter().map(|s| s.to_string_lossy().into_owned()).collect()
    }

    #[test]
    fn parses_pairs_and_flags() {
        let tokens = config_tokens("# comment\nlabel_noise = 0.3\nno-timestamp = true\nsvg = false\nlaw = \"balanced:5\"\n").unwrap();
        assert_eq!(
            strings(&tokens),
            [
                "--label-noise",
                "0.3",
                "--no-timestamp",
                "--law",
                "balanced:5"
            ]
        );
        assert!(config_tokens("oops").is_err());
    }

    #[test]
    fn splices_after_the_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(&path, "seed = 7\n").unwrap();
        let args: Vec<OsString> = [
            "oodgate",
            "--config",
            path.to_str().unwrap(),
            "synth",
            "--seed",
            "9",
        ]
        .iter()
        .map(OsString::from)
        .collect();
        let out = expand_config(args, &["synth"]).unwrap();
        assert_eq!(strings(&out)[3..], ["synth", "--seed", "7", "--seed", "9"]);
    }
}
