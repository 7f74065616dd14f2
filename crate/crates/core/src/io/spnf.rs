//! SPNF binary field files.
//!
//! Little-endian layout:
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 4    | magic `SPNF`                              |
//! | 4      | 4    | version (`u32`, currently 1)              |
//! | 8      | 1    | layout: 0 physical, 1 spectral            |
//! | 9      | 12   | `n₁ n₂ n₃` (`u32`)                        |
//! | 21     | 24   | `L₁ L₂ L₃` (`f64`)                        |
//! | 45     | 8    | time (`f64`)                              |
//! | 53     | 32   | reserved, zero                            |
//! | 85     | …    | payload, component-major, x fastest       |
//!
//! Physical payloads hold one `f64` per site and component; spectral payloads
//! hold the full complex box as interleaved `(re, im)` pairs.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, Lattice, PhysicalVectorField, SpectralVectorField, C64};

pub const MAGIC: [u8; 4] = *b"SPNF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 85;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Physical = 0,
    Spectral = 1,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Physical(PhysicalVectorField),
    Spectral(SpectralVectorField),
}

impl FieldData {
    pub fn layout(&self) -> Layout {
        match self {
            FieldData::Physical(_) => Layout::Physical,
            FieldData::Spectral(_) => Layout::Spectral,
        }
    }

    pub fn lattice(&self) -> Lattice {
        match self {
            FieldData::Physical(u) => u.lattice,
            FieldData::Spectral(u) => u.lattice,
        }
    }

    pub fn to_spectral(&self) -> SpectralVectorField {
        match self {
            FieldData::Physical(u) => forward_transform(u),
            FieldData::Spectral(u) => u.clone(),
        }
    }

    /// Spectral data goes through the Hermitian-checked inverse transform.
    pub fn to_physical(&self) -> Result<PhysicalVectorField> {
        match self {
            FieldData::Physical(u) => Ok(u.clone()),
            FieldData::Spectral(u) => inverse_transform(u),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub time: f64,
    pub data: FieldData,
}

fn payload_len(lattice: &Lattice, layout: Layout) -> usize {
    let per = match layout {
        Layout::Physical => 8,
        Layout::Spectral => 16,
    };
    3 * lattice.len() * per
}

pub fn encode(data: &FieldData, time: f64) -> Vec<u8> {
    let lat = data.lattice();
    let mut out = Vec::with_capacity(HEADER_LEN + payload_len(&lat, data.layout()));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(data.layout() as u8);
    for n in lat.n() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for l in lat.l() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.extend_from_slice(&time.to_le_bytes());
    out.extend_from_slice(&[0u8; 32]);
    match data {
        FieldData::Physical(u) => {
            for comp in &u.data {
                for v in comp {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        FieldData::Spectral(u) => {
            for comp in &u.coeff {
                for z in comp {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<FieldFile> {
    let truncated = |expected: usize| Error::TruncatedFile {
        path: path.to_path_buf(),
        expected: expected as u64,
        actual: bytes.len() as u64,
    };
    if bytes.len() < 4 {
        return Err(truncated(HEADER_LEN));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::BadMagic { path: path.to_path_buf(), found: bytes[..4].try_into().expect("4 bytes") });
    }
    if bytes.len() < HEADER_LEN {
        return Err(truncated(HEADER_LEN));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::VersionMismatch { path: path.to_path_buf(), found: version });
    }
    let layout = match bytes[8] {
        0 => Layout::Physical,
        1 => Layout::Spectral,
        other => return Err(Error::BadLayout { path: path.to_path_buf(), found: other }),
    };
    let n = [u32_at(bytes, 9) as usize, u32_at(bytes, 13) as usize, u32_at(bytes, 17) as usize];
    let l = [f64_at(bytes, 21), f64_at(bytes, 29), f64_at(bytes, 37)];
    let time = f64_at(bytes, 45);
    let lattice = Lattice::new(n, l).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: format!("header at byte 9: {e}"),
    })?;
    let expected = HEADER_LEN + payload_len(&lattice, layout);
    if bytes.len() < expected {
        return Err(truncated(expected));
    }
    if bytes.len() > expected {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("{} trailing bytes after offset {expected}", bytes.len() - expected),
        });
    }
    let body = &bytes[HEADER_LEN..];
    let len = lattice.len();
    let data = match layout {
        Layout::Physical => {
            let comp = |c: usize| (0..len).map(|i| f64_at(body, 8 * (c * len + i))).collect::<Vec<_>>();
            FieldData::Physical(PhysicalVectorField { lattice, data: [comp(0), comp(1), comp(2)] })
        }
        Layout::Spectral => {
            let comp = |c: usize| {
                (0..len)
                    .map(|i| {
                        let at = 16 * (c * len + i);
                        C64::new(f64_at(body, at), f64_at(body, at + 8))
                    })
                    .collect::<Vec<_>>()
            };
            FieldData::Spectral(SpectralVectorField { lattice, coeff: [comp(0), comp(1), comp(2)] })
        }
    };
    Ok(FieldFile { time, data })
}

pub fn write_field(path: &Path, data: &FieldData, time: f64) -> Result<()> {
    super::atomic_write(path, &encode(data, time))
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}
