//! Signal serialization.
//!
//! Raw format (`.scs`), all little-endian:
//!
//! | offset | size | field                                        |
//! |--------|------|----------------------------------------------|
//! | 0      | 4    | magic `SCS1`                                 |
//! | 4      | 4    | dimension `d` (u32, 1 or 2)                  |
//! | 8      | 4    | extent of axis 0 (u32)                       |
//! | 12     | 4    | extent of axis 1 (u32, 0 when `d = 1`)       |
//! | 16     | 8    | spacing Δ (f64)                              |
//! | 24     | 8    | reserved, zero                               |
//! | 32     | 16·N | samples as (re, im) f64 pairs, row-major     |
//!
//! PGM ingestion accepts binary `P5` with maxval ≤ 255 and maps pixel value
//! `v` to the real sample `v/255` on a unit-spacing grid (rows = axis 0).

use std::io::{Read, Write};
use std::path::Path;

use super::{Complex64, Grid, Signal};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SCS1";
pub const HEADER_LEN: usize = 32;

pub fn encode(signal: &Signal) -> Vec<u8> {
    let grid = signal.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * grid.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.extents()[0] as u32).to_le_bytes());
    let second = if grid.dim() == 2 {
        grid.extents()[1]
    } else {
        0
    };
    out.extend_from_slice(&(second as u32).to_le_bytes());
    out.extend_from_slice(&grid.spacing().to_le_bytes());
    out.extend_from_slice(&[0u8; 8]);
    for z in signal.samples() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Signal> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format("truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected SCS1".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let dim = u32_at(4);
    let extents: Vec<usize> = match dim {
        1 => vec![u32_at(8)],
        2 => vec![u32_at(8), u32_at(12)],
        _ => return Err(Error::Format(format!("unsupported dimension {dim}"))),
    };
    let spacing = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let grid = Grid::new(&extents, spacing)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 16 * grid.len() {
        return Err(Error::Format(format!(
            "expected {} sample bytes, found {}",
            16 * grid.len(),
            body.len()
        )));
    }
    let samples = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Signal::new(grid, samples)
}

pub fn write_signal(path: &Path, signal: &Signal) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(signal)).map_err(|e| Error::io(path, e))
}

pub fn read_signal(path: &Path) -> Result<Signal> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

pub fn parse_pgm(bytes: &[u8]) -> Result<Signal> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        fields.push(
            std::str::from_utf8(&bytes[start..pos])
                .unwrap_or("")
                .to_string(),
        );
    }
    if fields[0] != "P5" {
        return Err(Error::Format(format!(
            "unsupported PGM type {:?}",
            fields[0]
        )));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad PGM header field {s:?}")))
    };
    let (width, height, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!(
            "only 8-bit PGM supported, maxval {maxval}"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let raster = bytes
        .get(pos..pos + width * height)
        .ok_or_else(|| Error::Format("truncated PGM raster".into()))?;
    let grid = Grid::new(&[height, width], 1.0)?;
    let values: Vec<f64> = raster.iter().map(|&v| v as f64 / 255.0).collect();
    Signal::from_real(&grid, &values)
}

pub fn read_pgm(path: &Path) -> Result<Signal> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes)
}

/// Renders the real part of a 2-D signal as an 8-bit PGM, linearly mapping
/// `[min, max]` to `[0, 255]`.
pub fn encode_pgm(signal: &Signal) -> Result<Vec<u8>> {
    let grid = signal.grid();
    if grid.dim() != 2 {
        return Err(Error::Format("PGM export needs a 2-D signal".into()));
    }
    let (rows, cols) = (grid.extents()[0], grid.extents()[1]);
    let re: Vec<f64> = signal.samples().iter().map(|z| z.re).collect();
    let lo = re.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = re.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(re.iter().map(|v| (255.0 * (v - lo) / span).round() as u8));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(&[4, 8], 0.25).unwrap();
        let bytes = encode(&Signal::zeros(&g));
        assert_eq!(bytes.len(), 32 + 16 * 32);
        assert_eq!(&bytes[..4], b"SCS1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 0.25);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(decode(b"SCS1").is_err());
        let mut bytes = encode(&Signal::zeros(&Grid::line(4, 1.0).unwrap()));
        bytes[0] = b'X';
        assert!(decode(&bytes).is_err());
        let mut bytes = encode(&Signal::zeros(&Grid::line(4, 1.0).unwrap()));
        bytes.pop();
        assert!(decode(&bytes).is_err());
    }

    #[test]
    fn pgm_maps_to_unit_interval() {
        let mut bytes = b"P5\n# comment\n4 2\n255\n".to_vec();
        bytes.extend([0u8, 51, 255, 102, 0, 0, 0, 255]);
        let s = parse_pgm(&bytes).unwrap();
        assert_eq!(s.grid().extents(), &[2, 4]);
        assert_eq!(s.grid().spacing(), 1.0);
        assert_eq!(s.samples()[1].re, 0.2);
        assert_eq!(s.samples()[2].re, 1.0);
        assert_eq!(s.samples()[3].re, 102.0 / 255.0);
    }

    proptest! {
        #[test]
        fn raw_round_trip(vals in prop::collection::vec(-1e6f64..1e6, 32), two_d in any::<bool>()) {
            let grid = if two_d { Grid::new(&[4, 4], 0.5).unwrap() } else { Grid::line(16, 0.5).unwrap() };
            let samples = vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
            let s = Signal::new(grid, samples).unwrap();
            prop_assert_eq!(decode(&encode(&s)).unwrap(), s);
        }
    }
}
