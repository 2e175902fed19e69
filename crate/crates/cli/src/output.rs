//! In-memory output files, written together with a digest manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

use synth_core::metrics::WignerGrid;

/// `f64` in fixed 17-significant-digit scientific notation.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// CSV with a header row and LF line endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: format!("{}\n", header.join(",")),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Long-form `(x, p, W)` rows, x-major.
pub fn wigner_csv(grid: &WignerGrid) -> Vec<u8> {
    let mut csv = Csv::new(&["x_natural", "p_natural", "wigner"]);
    for (i, &x) in grid.xs.iter().enumerate() {
        for (j, &p) in grid.ps.iter().enumerate() {
            csv.row(&[num(x), num(p), num(grid.at(i, j))]);
        }
    }
    csv.into_bytes()
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable output");
    bytes.push(b'\n');
    bytes
}

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub engine: &'a str,
    pub threads: usize,
    pub config: &'a C,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for b in digest.iter() {
        write!(hex, "{b:02x}").expect("write to string");
    }
    hex
}

/// Collected outputs of one command.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    /// Writes every file, then the manifest listing them with digests.
    pub fn write<C: Serialize>(
        self,
        dir: &Path,
        command: &str,
        engine: &str,
        threads: usize,
        config: &C,
        wall_clock_seconds: f64,
    ) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut outputs = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
            outputs.push(OutputEntry {
                file: name.clone(),
                bytes: bytes.len(),
                sha256: sha256_hex(bytes),
            });
        }
        let manifest = Manifest {
            tool: "msynth",
            version: env!("CARGO_PKG_VERSION"),
            command,
            engine,
            threads,
            config,
            wall_clock_seconds,
            outputs,
        };
        std::fs::write(dir.join(MANIFEST_FILE), json_bytes(&manifest))
    }
}
