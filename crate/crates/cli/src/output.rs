use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;

pub const OUTPUT_DIR_ENV: &str = "QST_OUTPUT_DIR";
const DEFAULT_DIR: &str = "results";

/// `--out`, else `$QST_OUTPUT_DIR`, else `./results`.
pub fn resolve_dir(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_DIR.into()),
    }
}

/// Writes datasets into one directory, each stamped with tool version,
/// experiment name and the full configuration.
pub struct Output {
    dir: PathBuf,
    experiment: &'static str,
    config: Value,
    generated: String,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: PathBuf, experiment: &'static str, config: Value) -> CliResult<Self> {
        fs::create_dir_all(&dir)?;
        let generated = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        Ok(Self { dir, experiment, config, generated, written: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// CSV with `#` comment lines ahead of the column header. The timestamp
    /// is the last comment line so reruns differ only there.
    pub fn csv<R: Serialize>(
        &mut self,
        name: &str,
        header: &str,
        notes: &[String],
        rows: impl IntoIterator<Item = R>,
    ) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        let mut file = BufWriter::new(File::create(&path)?);
        writeln!(file, "# qst {} {}", env!("CARGO_PKG_VERSION"), self.experiment)?;
        writeln!(file, "# config: {}", serde_json::to_string(&self.config)?)?;
        writeln!(file, "# units: time in 1/J, energies and fields in J")?;
        for note in notes {
            writeln!(file, "# {note}")?;
        }
        writeln!(file, "# generated: {}", self.generated)?;
        writeln!(file, "{header}")?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// JSON document wrapping `results` with the same metadata as the CSV headers.
    pub fn summary_document(&self, results: &Value) -> Value {
        serde_json::json!({
            "tool": "qst",
            "version": env!("CARGO_PKG_VERSION"),
            "experiment": self.experiment,
            "config": self.config,
            "generated": self.generated,
            "results": results,
        })
    }

    pub fn json(&mut self, name: &str, results: &Value) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(&self.summary_document(results))?;
        text.push('\n');
        fs::write(&path, text)?;
        self.written.push(path.clone());
        Ok(path)
    }
}

/// `steps` equal intervals from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![lo];
    }
    (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect()
}

/// `points` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_endpoints() {
        let x = linspace(0.0, 10.0, 200);
        assert_eq!(x.len(), 201);
        assert_eq!((x[0], x[200]), (0.0, 10.0));
        let g = geomspace(5.0, 80.0, 5);
        assert!((g[4] - 80.0).abs() < 1e-12 && (g[2] - 20.0).abs() < 1e-12);
    }

    #[test]
    fn flag_beats_environment() {
        assert_eq!(resolve_dir(Some(Path::new("x"))), PathBuf::from("x"));
    }
}
