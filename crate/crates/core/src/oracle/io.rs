//! Slice files: CSV with the time in a leading comment line, or a compact
//! little-endian binary layout
//!
//! ```text
//! b"MKDV1" | n: u64 | t: f64 | x[0..n]: f64 | q[0..n]: f64
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::solver::FieldSlice;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"MKDV1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceFormat {
    Csv,
    Binary,
}

impl SliceFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            SliceFormat::Csv => "csv",
            SliceFormat::Binary => "bin",
        }
    }
}

pub fn slice_to_csv(slice: &FieldSlice) -> String {
    let mut out = String::with_capacity(48 * slice.x.len() + 64);
    let _ = writeln!(out, "# t = {:.16e}", slice.t);
    out.push_str("x,q\n");
    for (x, q) in slice.x.iter().zip(&slice.q) {
        let _ = writeln!(out, "{x:.16e},{q:.16e}");
    }
    out
}

pub fn slice_from_csv(text: &str) -> Result<FieldSlice> {
    let mut lines = text.lines();
    let t = lines
        .next()
        .and_then(|l| l.strip_prefix("# t ="))
        .and_then(|v| v.trim().parse::<f64>().ok())
        .ok_or_else(|| Error::domain("slice CSV must start with '# t = <time>'"))?;
    if lines.next().map(str::trim) != Some("x,q") {
        return Err(Error::domain("slice CSV header must be 'x,q'"));
    }
    let (mut x, mut q) = (Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| s.and_then(|v| v.trim().parse::<f64>().ok());
        match (parse(parts.next()), parse(parts.next())) {
            (Some(a), Some(b)) => {
                x.push(a);
                q.push(b);
            }
            _ => return Err(Error::domain(format!("malformed slice CSV row {}", i + 3))),
        }
    }
    let slice = FieldSlice { t, x, q };
    slice.validate()?;
    Ok(slice)
}

pub fn slice_to_bytes(slice: &FieldSlice) -> Vec<u8> {
    let n = slice.x.len();
    let mut out = Vec::with_capacity(MAGIC.len() + 16 + 16 * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&slice.t.to_le_bytes());
    for v in slice.x.iter().chain(&slice.q) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn slice_from_bytes(bytes: &[u8]) -> Result<FieldSlice> {
    let body = bytes.strip_prefix(MAGIC.as_slice()).ok_or_else(|| Error::domain("missing MKDV1 magic"))?;
    if body.len() < 16 {
        return Err(Error::domain("truncated binary slice header"));
    }
    let word = |i: usize| -> [u8; 8] { body[8 * i..8 * i + 8].try_into().expect("eight bytes") };
    let n = u64::from_le_bytes(word(0)) as usize;
    if body.len() != 16 + 16 * n {
        return Err(Error::domain(format!("binary slice declares {n} samples but holds {} bytes", body.len())));
    }
    let t = f64::from_le_bytes(word(1));
    let x = (0..n).map(|i| f64::from_le_bytes(word(2 + i))).collect();
    let q = (0..n).map(|i| f64::from_le_bytes(word(2 + n + i))).collect();
    let slice = FieldSlice { t, x, q };
    slice.validate()?;
    Ok(slice)
}

pub fn write_slice_csv(path: &Path, slice: &FieldSlice) -> Result<()> {
    Ok(fs::write(path, slice_to_csv(slice))?)
}

pub fn read_slice_csv(path: &Path) -> Result<FieldSlice> {
    slice_from_csv(&fs::read_to_string(path)?)
}

pub fn write_slice_binary(path: &Path, slice: &FieldSlice) -> Result<()> {
    Ok(fs::write(path, slice_to_bytes(slice))?)
}

pub fn read_slice_binary(path: &Path) -> Result<FieldSlice> {
    slice_from_bytes(&fs::read(path)?)
}

/// Reads either format, recognising binary files by their magic.
pub fn read_slice(path: &Path) -> Result<FieldSlice> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        slice_from_bytes(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::domain(format!("{} is neither CSV nor MKDV1", path.display())))?;
        slice_from_csv(&text)
    }
}

pub fn write_slice(path: &Path, slice: &FieldSlice, format: SliceFormat) -> Result<()> {
    match format {
        SliceFormat::Csv => write_slice_csv(path, slice),
        SliceFormat::Binary => write_slice_binary(path, slice),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FieldSlice {
        let x: Vec<f64> = (0..64).map(|i| -4.0 + 0.125 * i as f64).collect();
        let q = x.iter().map(|v: &f64| (v * 1.7).sin() / 3.0).collect();
        FieldSlice { t: 1.0 / 3.0, x, q }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let s = sample();
        let text = slice_to_csv(&s);
        assert!(text.starts_with("# t = 3.3333333333333331e-1\nx,q\n"));
        assert_eq!(slice_from_csv(&text).unwrap(), s);
    }

    #[test]
    fn binary_round_trip_and_layout() {
        let s = sample();
        let bytes = slice_to_bytes(&s);
        assert_eq!(&bytes[..5], b"MKDV1");
        assert_eq!(bytes.len(), 5 + 16 + 16 * 64);
        assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 64);
        assert_eq!(slice_from_bytes(&bytes).unwrap(), s);
        assert!(slice_from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(slice_from_bytes(b"MKDV2").is_err());
    }

    #[test]
    fn files_detected_by_magic() {
        let dir = tempfile::tempdir().unwrap();
        let s = sample();
        let a = dir.path().join("a.bin");
        let b = dir.path().join("b.csv");
        write_slice(&a, &s, SliceFormat::Binary).unwrap();
        write_slice(&b, &s, SliceFormat::Csv).unwrap();
        assert_eq!(read_slice(&a).unwrap(), s);
        assert_eq!(read_slice(&b).unwrap(), s);
        assert_eq!(read_slice_binary(&a).unwrap(), read_slice_csv(&b).unwrap());
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(slice_from_csv("x,q\n1,2\n").is_err());
        assert!(slice_from_csv("# t = 1\nx,q\n1,2\n2,oops\n").is_err());
        assert!(slice_from_csv("# t = 1\nx,q\n2,0\n1,0\n").is_err());
    }
}
