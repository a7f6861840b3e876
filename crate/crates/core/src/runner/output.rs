use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::vqd::{StateResult, StopReason};

/// Decimal rendering with 12 significant digits. Switches to exponent
/// notation outside `1e-5 ..= 1e12`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // the exponent after rounding to 12 digits
    let sci = format!("{:.11e}", x);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        sci
    }
}

#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, self.to_csv_string().as_bytes())
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    /// Geometry or input the state belongs to.
    pub input: String,
    pub extraction_index: usize,
    pub energy: f64,
    pub converged: bool,
    pub stop: StopReason,
    pub iterations: usize,
    pub evaluations: usize,
    pub total_evaluations: usize,
    pub restart: usize,
}

impl StateSummary {
    pub fn from_state(input: &str, s: &StateResult) -> Self {
        Self {
            input: input.to_string(),
            extraction_index: s.extraction_index,
            energy: s.energy,
            converged: s.converged,
            stop: s.stop,
            iterations: s.iterations,
            evaluations: s.evaluations,
            total_evaluations: s.total_evaluations,
            restart: s.restart,
        }
    }
}

/// Written next to every output set. Nothing in it depends on the clock
/// except `wall_time_seconds`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub config: Option<FileDigest>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<String>,
    pub success: bool,
    pub errors: Vec<String>,
    pub states: Vec<StateSummary>,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            config: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            success: true,
            errors: Vec::new(),
            states: Vec::new(),
            wall_time_seconds: 0.0,
        }
    }

    pub fn fail(&mut self, message: impl Into<String>) {
        self.success = false;
        self.errors.push(message.into());
    }

    /// Write `table` under `out` and record it.
    pub fn emit(&mut self, out: &Path, name: &str, table: &CsvTable) -> Result<PathBuf> {
        let path = out.join(name);
        table.write(&path)?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn emit_json<T: Serialize>(&mut self, out: &Path, name: &str, value: &T) -> Result<PathBuf> {
        let path = out.join(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(e.to_string()))?;
        write_file(&path, (text + "\n").as_bytes())?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn write(&self, out: &Path) -> Result<PathBuf> {
        let path = out.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Numerical(e.to_string()))?;
        write_file(&path, (text + "\n").as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-1.137283834488), "-1.13728383449");
        assert_eq!(format_sig(2532.06), "2532.06000000");
        assert_eq!(format_sig(16.0 / 6.0), "2.66666666667");
        assert_eq!(format_sig(4194304.0 / 7315.0), "573.384005468");
        assert_eq!(format_sig(9.9999999999999), "10.0000000000");
        assert_eq!(format_sig(1.5e-7), "1.50000000000e-7");
        assert_eq!(format_sig(0.00123), "0.00123000000000");
        for x in [3.3e-3, -7.25, 1e11, 123456.789, 6.02e23] {
            let back: f64 = format_sig(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-11);
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec!["1".into(), "x".into()]);
        assert_eq!(t.to_csv_string(), "a,b\n1,x\n");
    }

    #[test]
    fn digest_is_stable() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.txt");
        fs::write(&p, b"abc").unwrap();
        assert_eq!(
            FileDigest::of(&p).unwrap().sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
