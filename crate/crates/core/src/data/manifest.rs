//! Dataset manifests: which file plays which role in an evaluation run.
//!
//! Line-oriented UTF-8, one `role<TAB>format<TAB>path` per line. `#` starts
//! a comment; a comment of the form `# name: <label>` names the dataset.
//! Relative paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::data::io::{read_feature_table, TableFormat};
use crate::data::table::FeatureTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Role {
    /// ID1: trains the classifier.
    IdTrainClassifier,
    /// ID2: fits detectors that need ID data (Mahalanobis).
    IdFitDetector,
    /// ID3: ID side of the evaluation.
    IdTest,
    /// A named OOD evaluation set.
    OodTest(String),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::IdTrainClassifier => f.write_str("ID_TRAIN_CLASSIFIER"),
            Role::IdFitDetector => f.write_str("ID_FIT_DETECTOR"),
            Role::IdTest => f.write_str("ID_TEST"),
            Role::OodTest(name) => write!(f, "OOD_TEST({name})"),
        }
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ID_TRAIN_CLASSIFIER" => Ok(Role::IdTrainClassifier),
            "ID_FIT_DETECTOR" => Ok(Role::IdFitDetector),
            "ID_TEST" => Ok(Role::IdTest),
            _ => {
                let name = s
                    .strip_prefix("OOD_TEST(")
                    .and_then(|rest| rest.strip_suffix(')'))
                    .filter(|name| !name.is_empty() && !name.contains(['\t', '(', ')']))
                    .ok_or_else(|| Error::Config(format!("unknown manifest role `{s}`")))?;
                Ok(Role::OodTest(name.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub role: Role,
    pub format: TableFormat,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(name: impl Into<String>) -> Self {
        DatasetManifest {
            name: name.into(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, role: Role, format: TableFormat, path: impl Into<PathBuf>) {
        self.entries.push(ManifestEntry {
            role,
            format,
            path: path.into(),
        });
    }

    /// Parses manifest text. Relative paths are joined onto `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut manifest = DatasetManifest::new("");
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(name) = comment.trim().strip_prefix("name:") {
                    manifest.name = name.trim().to_string();
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::Config(format!(
                    "manifest line {}: expected role<TAB>format<TAB>path",
                    lineno + 1
                )));
            }
            let role: Role = fields[0].trim().parse()?;
            let format: TableFormat = fields[1].trim().parse()?;
            let raw = Path::new(fields[2].trim());
            let path = if raw.is_absolute() {
                raw.to_path_buf()
            } else {
                base_dir.join(raw)
            };
            manifest.entries.push(ManifestEntry { role, format, path });
        }
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut manifest = Self::parse(&text, base)?;
        if manifest.name.is_empty() {
            manifest.name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(manifest)
    }

    /// Serialized text. Paths are written as stored.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.name.is_empty() {
            out.push_str(&format!("# name: {}\n", self.name));
        }
        out.push_str("# role\tformat\tpath\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                e.role,
                e.format.as_str(),
                e.path.display()
            ));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn entries_with(&self, role: &Role) -> impl Iterator<Item = &ManifestEntry> {
        let role = role.clone();
        self.entries.iter().filter(move |e| e.role == role)
    }

    pub fn single(&self, role: &Role) -> Result<&ManifestEntry> {
        let mut it = self.entries_with(role);
        match (it.next(), it.next()) {
            (Some(e), None) => Ok(e),
            (None, _) => Err(Error::Config(format!("manifest has no {role} entry"))),
            (Some(_), Some(_)) => Err(Error::Config(format!(
                "manifest has more than one {role} entry"
            ))),
        }
    }

    pub fn ood_entries(&self) -> Vec<(&str, &ManifestEntry)> {
        self.entries
            .iter()
            .filter_map(|e| match &e.role {
                Role::OodTest(name) => Some((name.as_str(), e)),
                _ => None,
            })
            .collect()
    }

    /// Checks the evaluation-run invariants: one ID_TEST, at least one
    /// uniquely named OOD_TEST, and detector-fit data disjoint from test
    /// data. With `check_content`, files are also compared by SHA-256.
    pub fn validate(&self, check_content: bool) -> Result<()> {
        let test = self.single(&Role::IdTest)?;
        let oods = self.ood_entries();
        if oods.is_empty() {
            return Err(Error::Config(
                "manifest needs at least one OOD_TEST entry".into(),
            ));
        }
        let mut names = HashSet::new();
        for (name, _) in &oods {
            if !names.insert(*name) {
                return Err(Error::Config(format!("duplicate OOD_TEST name `{name}`")));
            }
        }
        let test_key = path_key(&test.path);
        let test_hash = if check_content {
            Some(file_digest(&test.path)?)
        } else {
            None
        };
        for fit in self.entries_with(&Role::IdFitDetector) {
            if path_key(&fit.path) == test_key {
                return Err(Error::Config(format!(
                    "ID_FIT_DETECTOR and ID_TEST share the file {}",
                    fit.path.display()
                )));
            }
            if let Some(expected) = &test_hash {
                if &file_digest(&fit.path)? == expected {
                    return Err(Error::Config(format!(
                        "ID_FIT_DETECTOR {} has the same content as ID_TEST {}",
                        fit.path.display(),
                        test.path.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn read_table<T: Scalar>(&self, entry: &ManifestEntry) -> Result<FeatureTable<T>> {
        read_feature_table(&entry.path, entry.format)
    }
}

fn path_key(path: &Path) -> PathBuf {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

fn file_digest(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes).to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "# name: insects\n\
        # comment\n\
        ID_TRAIN_CLASSIFIER\tOODF\tid1.oodf\n\
        ID_FIT_DETECTOR\tOODF\tid2.oodf\n\
        ID_TEST\tCSV\t/abs/id3.csv\n\
        OOD_TEST(near)\tOODF\tood_near.oodf\n";

    #[test]
    fn parses_roles_formats_and_paths() {
        let m = DatasetManifest::parse(TEXT, Path::new("/data")).unwrap();
        assert_eq!(m.name, "insects");
        assert_eq!(m.entries.len(), 4);
        assert_eq!(m.entries[0].path, Path::new("/data/id1.oodf"));
        assert_eq!(m.entries[2].format, TableFormat::Csv);
        assert_eq!(m.entries[2].path, Path::new("/abs/id3.csv"));
        assert_eq!(m.entries[3].role, Role::OodTest("near".into()));
        m.validate(false).unwrap();
    }

    #[test]
    fn text_round_trip() {
        let m = DatasetManifest::parse(TEXT, Path::new("/data")).unwrap();
        assert_eq!(
            DatasetManifest::parse(&m.to_text(), Path::new("/elsewhere")).unwrap(),
            m
        );
    }

    #[test]
    fn rejects_unknown_role_and_bad_columns() {
        assert!(DatasetManifest::parse("ID_VALIDATE\tOODF\tx\n", Path::new(".")).is_err());
        assert!(DatasetManifest::parse("ID_TEST OODF x\n", Path::new(".")).is_err());
        assert!(DatasetManifest::parse("OOD_TEST()\tOODF\tx\n", Path::new(".")).is_err());
    }

    #[test]
    fn requires_one_id_test_and_some_ood() {
        let mut m = DatasetManifest::new("x");
        m.push(Role::IdTest, TableFormat::Binary, "a");
        assert!(m
            .validate(false)
            .unwrap_err()
            .to_string()
            .contains("OOD_TEST"));
        m.push(Role::OodTest("o".into()), TableFormat::Binary, "o");
        m.validate(false).unwrap();
        m.push(Role::IdTest, TableFormat::Binary, "b");
        assert!(m
            .validate(false)
            .unwrap_err()
            .to_string()
            .contains("more than one"));
    }

    #[test]
    fn fit_and_test_must_be_disjoint() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.oodf");
        let b = dir.path().join("b.oodf");
        fs::write(&a, b"same").unwrap();
        fs::write(&b, b"same").unwrap();

        let mut m = DatasetManifest::new("x");
        m.push(Role::IdFitDetector, TableFormat::Binary, &a);
        m.push(Role::IdTest, TableFormat::Binary, &a);
        m.push(Role::OodTest("o".into()), TableFormat::Binary, "o");
        assert!(m
            .validate(false)
            .unwrap_err()
            .to_string()
            .contains("share the file"));

        m.entries[1].path = b.clone();
        m.validate(false).unwrap();
        assert!(m
            .validate(true)
            .unwrap_err()
            .to_string()
            .contains("same content"));
    }
}
