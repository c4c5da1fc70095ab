//! Run manifests and deterministic output plumbing.
//!
//! Every data file starts with a comment block naming the command, the
//! tool version, a content hash of each input, and the full parameter
//! set. Two runs with the same manifest write byte-identical data files;
//! the wall-clock timestamp lives in a separate `run.stamp` sidecar so it
//! never perturbs the data.

use sha2::{Digest, Sha256};
use std::fmt::Display;
use std::fs;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub struct Manifest {
    lines: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            lines: vec![
                format!("# ergoshift {command}"),
                format!("# version {}", env!("CARGO_PKG_VERSION")),
            ],
        }
    }

    /// Records an input under `label` by the hash of its canonical bytes.
    pub fn input(mut self, label: &str, name: &str, canonical: &[u8]) -> Self {
        self.lines.push(format!("# {label} {name} sha256={}", hex_digest(canonical)));
        self
    }

    pub fn param(mut self, key: &str, value: impl Display) -> Self {
        self.lines.push(format!("# param {key}={value}"));
        self
    }

    /// The finished comment block, trailing newline included.
    pub fn header(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Writes `text` to `dir/name`, or to stdout when no directory was asked
/// for. Files are written whole, one writer, in call order.
pub fn emit(dir: Option<&Path>, name: &str, text: &str) -> io::Result<()> {
    match dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            fs::write(d.join(name), text)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Timestamp sidecar: the only place the wall clock is allowed to appear.
pub fn write_stamp(dir: &Path, command: &str) -> io::Result<()> {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    fs::create_dir_all(dir)?;
    fs::write(dir.join("run.stamp"), format!("{command} {now}\n"))
}
