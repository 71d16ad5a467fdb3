//! Report writers. JSON is pretty-printed with a trailing newline; CSV cells
//! use 17 significant digits and `NaN` for missing values.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

/// Formats a float for CSV.
pub fn cell(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Collects written files for the manifest.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        fs::write(self.root.join(name), bytes)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        s.push('\n');
        self.put(name, s.as_bytes())
    }

    /// Writes a header and float rows.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(header).map_err(io::Error::other)?;
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            w.write_record(row.iter().map(|v| cell(*v))).map_err(io::Error::other)?;
        }
        let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        self.put(name, &bytes)
    }

    pub fn text(&mut self, name: &str, body: &str) -> io::Result<()> {
        self.put(name, body.as_bytes())
    }
}

/// Written next to every set of outputs. Not byte-stable: it records the
/// wall clock.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub seed: u64,
    pub resolved: serde_json::Value,
    pub tool_version: &'static str,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub exit_code: i32,
    pub outputs: Vec<String>,
}

pub struct ManifestClock {
    start: Instant,
    started_unix_seconds: u64,
}

impl ManifestClock {
    pub fn start() -> Self {
        Self {
            start: Instant::now(),
            started_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }

    pub fn finish(
        self,
        command: &str,
        config_path: &Path,
        seed: u64,
        resolved: serde_json::Value,
        exit_code: i32,
        outputs: &[String],
    ) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            config_path: config_path.display().to_string(),
            seed,
            resolved,
            tool_version: env!("CARGO_PKG_VERSION"),
            started_unix_seconds: self.started_unix_seconds,
            wall_clock_seconds: self.start.elapsed().as_secs_f64(),
            exit_code,
            outputs: outputs.to_vec(),
        }
    }
}

/// Fixed-width text table.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = Vec::new();
    let line = |cells: Vec<&str>, out: &mut Vec<u8>| {
        let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header.to_vec(), &mut out);
    line(width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect(), &mut out);
    for r in rows {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    String::from_utf8(out).expect("ascii table")
}
