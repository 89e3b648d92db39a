use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.txt";
pub const MANIFEST_SCHEMA: &str = "qboltz.manifest.v1";

/// Provenance of one run, in the same `key = value` grammar as the config.
#[derive(Clone, Debug, Default)]
pub struct Manifest {
    pub command: String,
    /// `None` on success, the error text on failure.
    pub failure: Option<String>,
    pub config_hash: String,
    pub git_describe: String,
    pub wall_time_s: f64,
    pub threads: usize,
    /// `(file name, schema id)` of every artifact.
    pub files: Vec<(String, String)>,
    pub summary: Vec<(String, String)>,
    pub config: Vec<(String, String)>,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut s = format!("# schema={MANIFEST_SCHEMA}\n");
        let status = if self.failure.is_some() { "failed" } else { "ok" };
        for (k, v) in [
            ("command", self.command.as_str()),
            ("status", status),
            ("config_hash", self.config_hash.as_str()),
            ("git_describe", self.git_describe.as_str()),
        ] {
            s.push_str(&format!("{k} = {v}\n"));
        }
        if let Some(err) = &self.failure {
            s.push_str(&format!("error = {}\n", err.replace('\n', " ")));
        }
        s.push_str(&format!(
            "wall_time_s = {:.3}\nthreads = {}\n",
            self.wall_time_s, self.threads
        ));
        for (title, rows) in [
            ("files", &self.files),
            ("summary", &self.summary),
            ("config", &self.config),
        ] {
            s.push_str(&format!("\n[{title}]\n"));
            for (k, v) in rows {
                s.push_str(&format!("{k} = {v}\n"));
            }
        }
        s
    }

    /// Write via a temporary file and a rename, so a reader never sees a
    /// partial manifest.
    pub fn write_atomic(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        let tmp = dir.join(format!(".{MANIFEST_NAME}.tmp"));
        let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        file.write_all(self.render().as_bytes())
            .map_err(|e| Error::io(&tmp, e))?;
        file.sync_all().map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// `git describe --always --dirty` of the working directory, or `unknown`.
pub fn git_describe() -> String {
    Process::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}
