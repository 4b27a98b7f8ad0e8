//! CSV and JSON emission. Floats are printed with 17 significant digits so
//! golden files round-trip exactly; every CSV carries a metadata comment row
//! (version, seed, config hash) plus a timestamp row that determinism checks
//! are expected to strip.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::AppError;

/// 17-significant-digit float formatting (exact f64 round trip).
pub fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_g17(x: Option<f64>) -> String {
    match x {
        Some(v) => g17(v),
        None => "na".to_string(),
    }
}

pub struct CsvDocument {
    pub command: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub workers: usize,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvDocument {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let seed = match self.seed {
            Some(s) => s.to_string(),
            None => "none".to_string(),
        };
        out.push_str(&format!(
            "# fermineg v{} command={} config_sha256={} seed={} workers={}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.config_sha256,
            seed,
            self.workers
        ));
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        out.push_str(&format!("# generated unix={stamp}\n"));
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), AppError> {
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| AppError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| AppError::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
