//! Element files: newline-separated decimal integers, or raw little-endian
//! 8-byte records.

use crate::error::{CliError, Result};

/// Parses a text element file. Blank lines are ignored.
pub fn parse_text(text: &str, w: u32) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: u64 = t
            .parse()
            .map_err(|e| CliError::Parse(format!("line {}: `{t}`: {e}", i + 1)))?;
        check_range(v, w).map_err(|m| CliError::Parse(format!("line {}: {m}", i + 1)))?;
        out.push(v);
    }
    Ok(out)
}

pub fn parse_binary(bytes: &[u8], w: u32) -> Result<Vec<u64>> {
    if bytes.len() % 8 != 0 {
        return Err(CliError::Parse(format!(
            "binary input length {} is not a multiple of 8",
            bytes.len()
        )));
    }
    bytes
        .chunks_exact(8)
        .enumerate()
        .map(|(i, c)| {
            let v = u64::from_le_bytes(c.try_into().expect("8 bytes"));
            check_range(v, w).map_err(|m| CliError::Parse(format!("record {}: {m}", i + 1)))?;
            Ok(v)
        })
        .collect()
}

fn check_range(v: u64, w: u32) -> std::result::Result<(), String> {
    if w < 64 && v >> w != 0 {
        Err(format!("{v} does not fit in {w} bits"))
    } else {
        Ok(())
    }
}

/// A 32-hex-digit seed, or a decimal `u64`.
pub fn parse_seed(s: &str) -> Result<[u8; 16]> {
    if s.len() == 32 {
        if let Ok(b) = hex::decode(s) {
            return Ok(b.try_into().expect("16 bytes"));
        }
    }
    let v: u64 = s
        .parse()
        .map_err(|_| CliError::BadParameter(format!("seed `{s}` is neither 32 hex digits nor a u64")))?;
    let mut out = [0u8; 16];
    out[..8].copy_from_slice(&v.to_le_bytes());
    Ok(out)
}

/// Set names are `[A-Za-z0-9_]+`.
pub fn check_name(name: &str) -> Result<()> {
    if !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        Ok(())
    } else {
        Err(CliError::BadParameter(format!("invalid set name `{name}`")))
    }
}
