//! File helpers shared by the persisted formats.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Writes a file through a sibling temp file and a rename, so readers never
/// observe a half-written output.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let tmp = temp_sibling(path);
    let result = (|| {
        let file = File::create(&tmp)?;
        let mut writer = BufWriter::new(file);
        fill(&mut writer)?;
        writer.flush()?;
        writer
            .into_inner()
            .map_err(|e| e.into_error())?
            .sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Reads all lines with 1-based line numbers, stripping `\n` / `\r\n`.
pub(crate) fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let reader = open(path)?;
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        out.push((i + 1, line.trim_end_matches('\r').to_string()));
    }
    Ok(out)
}

/// Ordered `key=value` sidecar describing how an artifact was built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets a key, replacing an existing value in place.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| {
            for (k, v) in &self.entries {
                writeln!(w, "{k}={v}")?;
            }
            Ok(())
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut meta = Metadata::new();
        for (lineno, line) in read_lines(path)? {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::format(path, lineno, "expected key=value"))?;
            meta.set(k.trim(), v.trim());
        }
        Ok(meta)
    }

    /// Parses a required key, reporting a format error against `path`.
    pub fn parse<T: std::str::FromStr>(&self, key: &str, path: &Path) -> Result<T> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::format(path, 0, format!("missing metadata key `{key}`")))?;
        raw.parse()
            .map_err(|_| Error::format(path, 0, format!("bad value for `{key}`: {raw}")))
    }
}

/// Path of the `.meta` sidecar that accompanies a TSV artifact.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}
