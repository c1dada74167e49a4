//! Deterministic report assembly.
//!
//! Every command writes `#`-prefixed metadata (tool version, a SHA-256 of
//! the raw config bytes, the resolved seed) followed by its payload. Floats
//! go through the standard shortest round-trip formatting and nothing
//! time- or host-dependent is emitted, so a rerun with the same config and
//! seed produces byte-identical output.

use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Accumulates one report: metadata comments first, then payload lines.
pub struct Report {
    text: String,
}

impl Report {
    /// Starts a report with the standard metadata header.
    pub fn new(config_bytes: &[u8], seed: u64) -> Self {
        let digest = Sha256::digest(config_bytes);
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        let text = format!(
            "# acn {}\n# config sha256: {hex}\n# seed: {seed}\n",
            env!("CARGO_PKG_VERSION")
        );
        Self { text }
    }

    /// Appends one metadata comment.
    pub fn comment(&mut self, line: &str) {
        self.text.push_str("# ");
        self.text.push_str(line);
        self.text.push('\n');
    }

    /// Appends one payload line.
    pub fn line(&mut self, line: &str) {
        self.text.push_str(line);
        self.text.push('\n');
    }

    /// Writes the report to the given path, or to stdout when none is set.
    pub fn write(self, out: Option<&Path>) -> Result<(), CliError> {
        match out {
            Some(path) => std::fs::write(path, self.text.as_bytes()).map_err(|e| {
                CliError::Usage(format!("cannot write {}: {e}", path.display()))
            }),
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(self.text.as_bytes())
                    .and_then(|()| lock.flush())
                    .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}")))
            }
        }
    }
}
