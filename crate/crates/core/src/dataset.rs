//! `path,label` CSV manifests. Relative paths resolve against the manifest's
//! directory. A header row is optional.

use std::path::{Path, PathBuf};

use crate::classifier::Label;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Label,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Manifest> {
        let path = path.as_ref();
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let file = std::fs::File::open(path)?;
        Self::parse(file, &base)
    }

    pub fn parse(reader: impl std::io::Read, base: &Path) -> Result<Manifest> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut entries = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Dataset(format!("row {}: expected path,label", line + 1)));
            }
            let label = match record[1].parse::<u32>() {
                Ok(l) => Label(l),
                Err(_) if line == 0 => continue,
                Err(_) => {
                    return Err(Error::Dataset(format!("row {}: bad label {:?}", line + 1, &record[1])));
                }
            };
            let p = PathBuf::from(&record[0]);
            let path = if p.is_absolute() { p } else { base.join(p) };
            entries.push(ManifestEntry { path, label });
        }
        Ok(Manifest { entries })
    }

    /// Writes `path,label` rows with paths exactly as stored.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["path", "label"])?;
        for e in &self.entries {
            w.write_record([e.path.display().to_string(), e.label.0.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
