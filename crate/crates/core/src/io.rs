//! Coefficient vector files: ASCII (one value per line) or raw little-endian `f64`.

use std::path::Path;

use crate::{Error, Result};

pub fn write_coefficients_ascii(path: impl AsRef<Path>, c: &[f64]) -> Result<()> {
    let mut s = String::with_capacity(c.len() * 25);
    for v in c {
        s.push_str(&format!("{v:.17e}\n"));
    }
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_coefficients_ascii(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.trim().parse().map_err(|e| Error::Parse { line: i + 1, msg: format!("{e}") }))
        .collect()
}

pub fn write_coefficients_binary(path: impl AsRef<Path>, c: &[f64]) -> Result<()> {
    let bytes: Vec<u8> = c.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(path, bytes)?;
    Ok(())
}

pub fn read_coefficients_binary(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse {
            line: 0,
            msg: format!("{} bytes is not a whole number of f64 values", bytes.len()),
        });
    }
    Ok(bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
}
