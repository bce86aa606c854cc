//! Run manifests and diff-stable tab-separated tables.

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Format a float with nine significant digits so reruns diff cleanly.
pub fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Provenance record written next to every output table.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub cutoff_charge: usize,
    pub cutoff_flux: usize,
    pub tolerance: f64,
    pub version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

/// One CLI run: hashes its configuration, names outputs
/// `<run-id>.<analysis>.tsv`, and finishes by writing the manifest.
pub struct Run {
    out_dir: PathBuf,
    run_id: String,
    manifest: RunManifest,
    started: Instant,
}

impl Run {
    /// `config_bytes` feeds the run hash: it should cover every input that
    /// affects the numbers (file contents and flags).
    pub fn new(
        out_dir: &Path,
        command: &str,
        config_bytes: &[u8],
        seed: u64,
        cutoffs: (usize, usize),
        tolerance: f64,
    ) -> Result<Run> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("cannot create out dir {}", out_dir.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update(config_bytes);
        hasher.update(seed.to_le_bytes());
        hasher.update((cutoffs.0 as u64).to_le_bytes());
        hasher.update((cutoffs.1 as u64).to_le_bytes());
        hasher.update(tolerance.to_le_bytes());
        let digest = hasher.finalize();
        let config_hash: String = digest[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        let run_id = format!("{command}-{config_hash}");
        Ok(Run {
            out_dir: out_dir.to_path_buf(),
            run_id: run_id.clone(),
            manifest: RunManifest {
                command: command.to_string(),
                config_hash,
                seed,
                cutoff_charge: cutoffs.0,
                cutoff_flux: cutoffs.1,
                tolerance,
                version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_s: 0.0,
                outputs: Vec::new(),
            },
            started: Instant::now(),
        })
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn run_id(&self) -> &str {
        &self.run_id
    }

    /// Start a table named `<run-id>.<analysis>.tsv`.
    pub fn table(&mut self, analysis: &str) -> Table {
        let name = format!("{}.{analysis}.tsv", self.run_id);
        self.manifest.outputs.push(name.clone());
        Table {
            path: self.out_dir.join(name),
            text: format!("# run: {}\n# analysis: {analysis}\n", self.run_id),
        }
    }

    /// Write a non-tabular text output (e.g. a netlist).
    pub fn write_text(&mut self, name_suffix: &str, text: &str) -> Result<PathBuf> {
        let name = format!("{}.{name_suffix}", self.run_id);
        let path = self.out_dir.join(&name);
        std::fs::write(&path, text)
            .with_context(|| format!("cannot write {}", path.display()))?;
        self.manifest.outputs.push(name);
        Ok(path)
    }

    /// Write `<run-id>.manifest.json` and return its path.
    pub fn finish(mut self) -> Result<PathBuf> {
        self.manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        let path = self.out_dir.join(format!("{}.manifest.json", self.run_id));
        let json = serde_json::to_string_pretty(&self.manifest)?;
        std::fs::write(&path, json)
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

/// Tab-separated table with `#`-prefixed header metadata.
pub struct Table {
    path: PathBuf,
    text: String,
}

impl Table {
    /// Add a `# key: value` metadata line.
    pub fn meta(&mut self, key: &str, value: &str) -> &mut Self {
        let _ = writeln!(self.text, "# {key}: {value}");
        self
    }

    /// Add the `# col1<TAB>col2...` column-name line.
    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        let _ = writeln!(self.text, "# {}", names.join("\t"));
        self
    }

    /// Add one data row; floats are formatted with nine significant digits.
    pub fn row(&mut self, values: &[f64]) -> &mut Self {
        let cells: Vec<String> = values.iter().map(|v| sig9(*v)).collect();
        let _ = writeln!(self.text, "{}", cells.join("\t"));
        self
    }

    /// Add a row with a leading integer label.
    pub fn row_indexed(&mut self, index: usize, values: &[f64]) -> &mut Self {
        let cells: Vec<String> = values.iter().map(|v| sig9(*v)).collect();
        let _ = writeln!(self.text, "{index}\t{}", cells.join("\t"));
        self
    }

    pub fn save(&self) -> Result<PathBuf> {
        std::fs::write(&self.path, &self.text)
            .with_context(|| format!("cannot write {}", self.path.display()))?;
        Ok(self.path.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(2.5), "2.50000000e0");
        assert_eq!(sig9(-0.000123456789), "-1.23456789e-4");
    }

    #[test]
    fn run_writes_manifest_and_tables() {
        let dir = tempfile::tempdir().unwrap();
        let mut run =
            Run::new(dir.path(), "spectrum", b"cfg", 7, (10, 31), 1e-10).unwrap();
        let mut t = run.table("spectrum");
        t.meta("note", "test").columns(&["k", "value"]).row_indexed(0, &[1.25]);
        let table_path = t.save().unwrap();
        let manifest_path = run.finish().unwrap();

        let table = std::fs::read_to_string(table_path).unwrap();
        assert!(table.contains("# k\tvalue"));
        assert!(table.contains("0\t1.25000000e0"));
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(manifest_path).unwrap()).unwrap();
        assert_eq!(manifest["seed"], 7);
        assert_eq!(manifest["outputs"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn same_config_same_run_id() {
        let dir = tempfile::tempdir().unwrap();
        let a = Run::new(dir.path(), "gate", b"x", 1, (5, 9), 1e-8).unwrap();
        let b = Run::new(dir.path(), "gate", b"x", 1, (5, 9), 1e-8).unwrap();
        let c = Run::new(dir.path(), "gate", b"y", 1, (5, 9), 1e-8).unwrap();
        assert_eq!(a.run_id(), b.run_id());
        assert_ne!(a.run_id(), c.run_id());
    }
}
