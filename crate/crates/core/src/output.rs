//! CSV output shared by every module.
//!
//! Each file starts with a `# schema=<id>` comment line, followed by a plain
//! column header and comma-separated rows. Floats carry 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A float with 17 significant digits, round-trip exact.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
    columns: usize,
}

impl CsvWriter {
    pub fn create(path: impl AsRef<Path>, schema: &str, columns: &[&str]) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut writer = Self {
            path,
            out: BufWriter::new(file),
            columns: columns.len(),
        };
        writer.line(&format!("# schema={schema}"))?;
        writer.line(&columns.join(","))?;
        Ok(writer)
    }

    fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "{text}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        assert_eq!(fields.len(), self.columns, "row width differs from header");
        let text = fields.join(",");
        self.line(&text)
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// Rows of a CSV written by [`CsvWriter`], header lines skipped.
pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut w = CsvWriter::create(&path, "test.v1", &["a", "b"]).unwrap();
        w.row(&["1".into(), float(0.5)]).unwrap();
        w.finish().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# schema=test.v1\na,b\n"));
        assert_eq!(read_rows(&path).unwrap(), vec![vec!["1".to_string(), float(0.5)]]);
    }
}
