//! Versioned, human-readable checkpoint files for the streaming
//! subcommands. A checkpoint records the inputs and the next iteration, so
//! a killed run can be resumed with identical total output; the digest is a
//! running FNV-1a hash of everything emitted so far.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use num_bigint::BigUint;

const HEADER: &str = "enbound-checkpoint v1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Checkpoint {
    GStream {
        n: u32,
        next_m: u64,
        digest: u64,
    },
    Xi {
        n: BigUint,
        normalized: bool,
        zero_emitted: bool,
        next_m: u64,
        digest: u64,
    },
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        match self {
            Checkpoint::GStream { n, next_m, digest } => {
                let _ = writeln!(out, "command = g-stream");
                let _ = writeln!(out, "n = {n}");
                let _ = writeln!(out, "next_m = {next_m}");
                let _ = writeln!(out, "digest = {digest:016x}");
            }
            Checkpoint::Xi {
                n,
                normalized,
                zero_emitted,
                next_m,
                digest,
            } => {
                let _ = writeln!(out, "command = xi");
                let _ = writeln!(out, "n = {n}");
                let _ = writeln!(out, "normalized = {normalized}");
                let _ = writeln!(out, "zero_emitted = {zero_emitted}");
                let _ = writeln!(out, "next_m = {next_m}");
                let _ = writeln!(out, "digest = {digest:016x}");
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Checkpoint, String> {
        let mut lines = text.lines();
        if lines.next() != Some(HEADER) {
            return Err(format!("missing `{HEADER}` header"));
        }
        let mut fields = std::collections::BTreeMap::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once(" = ")
                .ok_or_else(|| format!("malformed line `{line}`"))?;
            fields.insert(key.to_string(), value.to_string());
        }
        let get = |key: &str| {
            fields
                .get(key)
                .cloned()
                .ok_or_else(|| format!("missing field `{key}`"))
        };
        match get("command")?.as_str() {
            "g-stream" => Ok(Checkpoint::GStream {
                n: parse_field(&get("n")?, "n")?,
                next_m: parse_field(&get("next_m")?, "next_m")?,
                digest: parse_digest(&get("digest")?)?,
            }),
            "xi" => Ok(Checkpoint::Xi {
                n: get("n")?.parse().map_err(|_| "bad field `n`".to_string())?,
                normalized: parse_field(&get("normalized")?, "normalized")?,
                zero_emitted: parse_field(&get("zero_emitted")?, "zero_emitted")?,
                next_m: parse_field(&get("next_m")?, "next_m")?,
                digest: parse_digest(&get("digest")?)?,
            }),
            other => Err(format!("unknown command `{other}`")),
        }
    }

    /// Load a checkpoint; `Ok(None)` when the file does not exist yet.
    pub fn load(path: &Path) -> io::Result<Option<Checkpoint>> {
        match fs::read_to_string(path) {
            Ok(text) => Checkpoint::parse(&text)
                .map(Some)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Atomically replace the checkpoint file.
    pub fn save(&self, path: &Path) -> io::Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_text())?;
        fs::rename(&tmp, path)
    }
}

fn parse_field<T: std::str::FromStr>(value: &str, key: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad field `{key}`"))
}

fn parse_digest(value: &str) -> Result<u64, String> {
    u64::from_str_radix(value, 16).map_err(|_| "bad field `digest`".to_string())
}

/// Running FNV-1a over emitted records.
pub fn fnv1a(mut digest: u64, data: &str) -> u64 {
    if digest == 0 {
        digest = 0xcbf2_9ce4_8422_2325;
    }
    for byte in data.bytes() {
        digest ^= byte as u64;
        digest = digest.wrapping_mul(0x0000_0100_0000_01b3);
    }
    digest
}
