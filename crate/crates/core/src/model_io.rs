//! `NCAW` weight files.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0  | 4 | magic `NCAW` |
//! | 4  | 2 | format version (u16, currently 1) |
//! | 6  | 1 | task tag (u8, 0 = segmentation, 1 = depth) |
//! | 7  | 2 | channels `C` (u16) |
//! | 9  | 2 | MLP hidden units `H` (u16) |
//! | 11 | 4 | fire rate (f32) |
//! | 15 | … | f32 payload: bank A (`C·9`), bank B (`C·9`), w1 (`3C·H`), b1 (`H`), w2 (`H·C`) |
//! | end-4 | 4 | CRC32 (IEEE) of every preceding byte |

use serde::Serialize;

use crate::error::{Error, FormatError, Result};
use crate::grid::MIN_CHANNELS;
use crate::model::{ModelSpec, Task, TAPS};

pub const MAGIC: [u8; 4] = *b"NCAW";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 4 + 2 + 1 + 2 + 2 + 4;
pub const CRC_BYTES: usize = 4;
/// Hard ceiling for deployable models.
pub const DEFAULT_SIZE_BUDGET: usize = 65_536;

fn payload_floats(channels: usize, hidden: usize) -> usize {
    2 * channels * TAPS + 3 * channels * hidden + hidden + hidden * channels
}

/// Exact file length for the given dimensions.
pub fn file_len(channels: usize, hidden: usize) -> usize {
    HEADER_BYTES + 4 * payload_floats(channels, hidden) + CRC_BYTES
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub bytes_total: usize,
    pub bytes_by_section: Vec<(&'static str, usize)>,
}

/// Byte accounting that matches [`serialize`] output exactly.
pub fn size_report(spec: &ModelSpec) -> SizeReport {
    let mut sections = vec![("header", HEADER_BYTES)];
    sections.extend(spec.sections().iter().map(|(name, v)| (*name, 4 * v.len())));
    sections.push(("crc32", CRC_BYTES));
    SizeReport {
        bytes_total: sections.iter().map(|(_, b)| b).sum(),
        bytes_by_section: sections,
    }
}

/// Encodes `spec`, rejecting it if the file would exceed [`DEFAULT_SIZE_BUDGET`].
pub fn serialize(spec: &ModelSpec) -> Result<Vec<u8>> {
    serialize_with_budget(spec, DEFAULT_SIZE_BUDGET)
}

pub fn serialize_with_budget(spec: &ModelSpec, budget: usize) -> Result<Vec<u8>> {
    spec.validate()?;
    for (name, value) in [("channels", spec.channels), ("mlp_hidden", spec.mlp_hidden)] {
        if value > u16::MAX as usize {
            return Err(Error::Config(format!("{name} {value} does not fit in u16")));
        }
    }
    let total = file_len(spec.channels, spec.mlp_hidden);
    if total > budget {
        return Err(FormatError::SizeBudget {
            actual: total,
            allowed: budget,
        }
        .into());
    }

    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(spec.task.tag());
    out.extend_from_slice(&(spec.channels as u16).to_le_bytes());
    out.extend_from_slice(&(spec.mlp_hidden as u16).to_le_bytes());
    out.extend_from_slice(&spec.fire_rate.to_le_bytes());
    for (_, values) in spec.sections() {
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    debug_assert_eq!(out.len(), total);
    Ok(out)
}

fn u16_at(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn f32_at(bytes: &[u8], at: usize) -> f32 {
    f32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// Decodes and validates a weight file. Never panics on arbitrary input.
pub fn deserialize(bytes: &[u8]) -> Result<ModelSpec, FormatError> {
    if bytes.len() < MAGIC.len() {
        return Err(FormatError::Truncated {
            expected: HEADER_BYTES + CRC_BYTES,
            actual: bytes.len(),
        });
    }
    if bytes[..4] != MAGIC {
        return Err(FormatError::BadMagic {
            found: bytes[..4].to_vec(),
        });
    }
    if bytes.len() < HEADER_BYTES + CRC_BYTES {
        return Err(FormatError::Truncated {
            expected: HEADER_BYTES + CRC_BYTES,
            actual: bytes.len(),
        });
    }
    let version = u16_at(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let task = Task::from_tag(bytes[6]).ok_or(FormatError::UnknownTask(bytes[6]))?;
    let channels = u16_at(bytes, 7) as usize;
    let mlp_hidden = u16_at(bytes, 9) as usize;
    let fire_rate = f32_at(bytes, 11);
    if channels < MIN_CHANNELS {
        return Err(FormatError::InvalidHeader(format!(
            "channels {channels} below minimum {MIN_CHANNELS}"
        )));
    }
    if mlp_hidden == 0 {
        return Err(FormatError::InvalidHeader("mlp_hidden is zero".into()));
    }
    if !(fire_rate > 0.0 && fire_rate <= 1.0) {
        return Err(FormatError::InvalidHeader(format!(
            "fire_rate {fire_rate} outside (0, 1]"
        )));
    }

    let expected = file_len(channels, mlp_hidden);
    if bytes.len() < expected {
        return Err(FormatError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(FormatError::TrailingBytes {
            expected,
            actual: bytes.len(),
        });
    }
    let body = &bytes[..expected - CRC_BYTES];
    let stored = u32::from_le_bytes(bytes[expected - CRC_BYTES..].try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(FormatError::CrcMismatch { stored, computed });
    }

    let mut spec = ModelSpec::zeros(task, channels, mlp_hidden);
    spec.fire_rate = fire_rate;
    let mut at = HEADER_BYTES;
    for (name, section) in [
        ("bank_a", &mut spec.bank_a),
        ("bank_b", &mut spec.bank_b),
        ("mlp_w1", &mut spec.w1),
        ("mlp_b1", &mut spec.b1),
        ("mlp_w2", &mut spec.w2),
    ] {
        for (i, v) in section.iter_mut().enumerate() {
            *v = f32_at(bytes, at);
            if !v.is_finite() {
                return Err(FormatError::NonFiniteWeight { section: name, index: i });
            }
            at += 4;
        }
    }
    Ok(spec)
}

/// Loads a weight file from disk.
pub fn load(path: impl AsRef<std::path::Path>) -> Result<ModelSpec> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(deserialize(&bytes)?)
}
