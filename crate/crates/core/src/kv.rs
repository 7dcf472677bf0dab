//! Minimal flat `key = value` file parser shared by the config and
//! synthesis-spec readers. Lines starting with `#` and blank lines are
//! ignored; duplicate keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub(crate) struct KvFile {
    path: PathBuf,
    entries: BTreeMap<String, (String, usize)>,
}

impl KvFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                reason: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    reason: "empty key".into(),
                });
            }
            let value = value.trim().to_string();
            if entries.insert(key.clone(), (value, line_no)).is_some() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    reason: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
        })
    }

    pub fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((value, line)) => value
                .parse::<f64>()
                .map(Some)
                .map_err(|_| self.bad_value(key, &value, line)),
        }
    }

    pub fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some((value, line)) => value
                .parse::<usize>()
                .map(Some)
                .map_err(|_| self.bad_value(key, &value, line)),
        }
    }

    pub fn take_u64(&mut self, key: &str) -> Result<Option<u64>> {
        match self.take(key) {
            None => Ok(None),
            Some((value, line)) => value
                .parse::<u64>()
                .map(Some)
                .map_err(|_| self.bad_value(key, &value, line)),
        }
    }

    fn bad_value(&self, key: &str, value: &str, line: usize) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            reason: format!("invalid value `{value}` for key `{key}`"),
        }
    }

    /// Errors on the first (by line) key nobody consumed.
    pub fn finish(self) -> Result<()> {
        if let Some((key, (_, line))) = self.entries.iter().min_by_key(|(_, (_, line))| *line) {
            return Err(Error::Parse {
                path: self.path.clone(),
                line: *line,
                reason: format!("unknown key `{key}`"),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<KvFile> {
        KvFile::parse(Path::new("test.cfg"), text)
    }

    #[test]
    fn parses_comments_and_blanks() {
        let mut kv = parse("# header\n\n a = 1 \nb=two\n").unwrap();
        assert_eq!(kv.take_f64("a").unwrap(), Some(1.0));
        assert_eq!(kv.take("b").unwrap().0, "two");
        kv.finish().unwrap();
    }

    #[test]
    fn rejects_duplicates_and_junk() {
        assert!(parse("a = 1\na = 2\n").is_err());
        assert!(parse("just some words\n").is_err());
        assert!(parse("= 3\n").is_err());
    }

    #[test]
    fn unknown_key_reported_with_line() {
        let kv = parse("a = 1\n").unwrap();
        let err = kv.finish().unwrap_err();
        assert!(err.to_string().contains("unknown key `a`"));
    }

    #[test]
    fn bad_number_names_the_key() {
        let mut kv = parse("count = many\n").unwrap();
        let err = kv.take_usize("count").unwrap_err();
        assert!(err.to_string().contains("`count`"));
    }
}
