//! On-disk encoding of a compiled interpolant.
//!
//! Fixed little-endian layout, 56 bytes of framing plus 8 bytes per stored
//! value:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "PLIF"
//!      4     2  version (currently 1)
//!      6     2  flags (bit 0: payload is fixed-point i64)
//!      8     4  dimension d
//!     12     4  polynomial degree ell
//!     16     8  cells per axis m
//!     24     8  smoothness beta (f64)
//!     32     8  smoothness scale L (f64)
//!     40     4  fixed-point fraction bits (0 when payload is f64)
//!     44     8  value range bound B (f64)
//!     52  8·m^d·M  payload: f64 values, or i64 levels value·2^precision
//!    end     4  CRC-32 of the payload bytes
//! ```
//!
//! The header stores no timestamps or host details, so equal inputs give
//! byte-identical files. The checksum covers the payload only; header
//! fields are each validated on read.

use std::io::{Read, Write};

use super::{GridGeometry, InterpError, PiecewiseInterpolant, Provenance, MAX_PRECISION};
use crate::holder::HolderSpec;
use crate::lattice::DEFAULT_NODE_CAP;

const MAGIC: [u8; 4] = *b"PLIF";
const VERSION: u16 = 1;
const FLAG_QUANTIZED: u16 = 1;
const HEADER_BYTES: u64 = 52;
const TRAILER_BYTES: u64 = 4;
const IO_CHUNK: usize = 1024;

/// Largest fixed-point level magnitude written to disk. Comfortably inside
/// both `i64` and the contiguous integer range of `f64`.
const LEVEL_LIMIT: f64 = 9.0e15;

pub(crate) fn serialized_len(value_count: u64) -> u64 {
    HEADER_BYTES + 8 * value_count + TRAILER_BYTES
}

/// Round `v` to `p` fraction bits, rejecting values outside `[-bound, bound]`
/// or whose level would not be exactly representable. The error carries the
/// offending value.
pub(crate) fn quantize_checked(v: f64, p: u32, bound: f64) -> Result<f64, f64> {
    let scale = (p as f64).exp2();
    if v.is_nan() || v.abs() > bound || v.abs() * scale >= LEVEL_LIMIT {
        return Err(v);
    }
    Ok((v * scale).round() / scale)
}

/// Suggested fraction bits for quantized storage at sample count `n`:
/// enough that rounding error stays well below the statistical error
/// `n^{-beta/(2beta+d)}` the surrogate already carries.
pub fn default_precision(n: u64, beta: f64, dim: usize) -> u32 {
    let n = n.max(2) as f64;
    let bits = n.log2() * beta / (2.0 * beta + dim as f64);
    (bits.ceil() as u32 + 4).clamp(8, MAX_PRECISION)
}

pub(crate) fn write<W: Write>(fi: &PiecewiseInterpolant, w: &mut W) -> Result<(), InterpError> {
    let quantized = fi.precision().is_some();
    let flags = if quantized { FLAG_QUANTIZED } else { 0 };

    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&flags.to_le_bytes())?;
    w.write_all(&(fi.geometry().dim() as u32).to_le_bytes())?;
    w.write_all(&fi.geometry().ell().to_le_bytes())?;
    w.write_all(&(fi.geometry().cells_per_axis() as u64).to_le_bytes())?;
    w.write_all(&fi.spec().beta.to_le_bytes())?;
    w.write_all(&fi.spec().l.to_le_bytes())?;
    w.write_all(&fi.precision().unwrap_or(0).to_le_bytes())?;
    w.write_all(&fi.value_bound().to_le_bytes())?;

    let mut hasher = crc32fast::Hasher::new();
    let mut buf = Vec::with_capacity(IO_CHUNK * 8);
    let scale = fi.precision().map(|p| (p as f64).exp2());
    for &v in fi.values() {
        let bytes = match scale {
            None => v.to_le_bytes(),
            Some(s) => {
                let level = v * s;
                debug_assert!(
                    level.abs() < LEVEL_LIMIT && level == level.round(),
                    "stored values are quantized at construction"
                );
                (level as i64).to_le_bytes()
            }
        };
        buf.extend_from_slice(&bytes);
        if buf.len() >= IO_CHUNK * 8 {
            hasher.update(&buf);
            w.write_all(&buf)?;
            buf.clear();
        }
    }
    if !buf.is_empty() {
        hasher.update(&buf);
        w.write_all(&buf)?;
    }
    w.write_all(&hasher.finalize().to_le_bytes())?;
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N], InterpError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub(crate) fn read<R: Read>(r: &mut R) -> Result<PiecewiseInterpolant, InterpError> {
    if read_array::<4, _>(r)? != MAGIC {
        return Err(InterpError::BadMagic);
    }
    let version = u16::from_le_bytes(read_array(r)?);
    if version != VERSION {
        return Err(InterpError::BadVersion(version));
    }
    let flags = u16::from_le_bytes(read_array(r)?);
    if flags & !FLAG_QUANTIZED != 0 {
        return Err(InterpError::BadFlags(flags));
    }
    let quantized = flags & FLAG_QUANTIZED != 0;
    let dim = u32::from_le_bytes(read_array(r)?) as usize;
    let ell = u32::from_le_bytes(read_array(r)?);
    let m = u64::from_le_bytes(read_array(r)?);
    let beta = f64::from_le_bytes(read_array(r)?);
    let l = f64::from_le_bytes(read_array(r)?);
    let precision = u32::from_le_bytes(read_array(r)?);
    let value_bound = f64::from_le_bytes(read_array(r)?);

    let spec = HolderSpec::new(beta, l, dim)
        .map_err(|e| InterpError::BadHeader(format!("smoothness fields: {e}")))?;
    if spec.ell() != ell {
        return Err(InterpError::BadHeader(format!(
            "beta {beta} implies degree {}, header says {ell}",
            spec.ell()
        )));
    }
    if m == 0 || m > usize::MAX as u64 {
        return Err(InterpError::BadHeader(format!("cells per axis {m}")));
    }
    let geometry =
        GridGeometry::with_caps(dim, m as usize, ell, DEFAULT_NODE_CAP, super::DEFAULT_VALUE_CAP)?;
    match (quantized, precision) {
        (false, 0) => {}
        (true, p) if (1..=MAX_PRECISION).contains(&p) => {}
        (_, p) => return Err(InterpError::BadPrecision(p)),
    }
    if !(value_bound.is_finite() && value_bound > 0.0) {
        return Err(InterpError::BadHeader(format!("value bound {value_bound}")));
    }

    let total = geometry.value_count();
    let mut values = Vec::with_capacity(total);
    let mut hasher = crc32fast::Hasher::new();
    let mut remaining = total;
    let mut buf = [0u8; IO_CHUNK * 8];
    let scale_inv = if quantized {
        (-(precision as f64)).exp2()
    } else {
        1.0
    };
    while remaining > 0 {
        let take = remaining.min(IO_CHUNK);
        let chunk = &mut buf[..take * 8];
        r.read_exact(chunk)?;
        hasher.update(chunk);
        for raw in chunk.chunks_exact(8) {
            let raw: [u8; 8] = raw.try_into().expect("chunks_exact(8)");
            let v = if quantized {
                let level = i64::from_le_bytes(raw) as f64 * scale_inv;
                // The range bound constrains fixed-point payloads only;
                // f64 payloads carry whatever the oracle produced.
                if level.abs() > value_bound * (1.0 + 1e-9) + scale_inv {
                    return Err(InterpError::BadHeader(format!(
                        "payload value {level} outside declared range ±{value_bound}"
                    )));
                }
                level
            } else {
                f64::from_le_bytes(raw)
            };
            if !v.is_finite() {
                return Err(InterpError::BadHeader(format!(
                    "payload value at index {} is not finite",
                    values.len()
                )));
            }
            values.push(v);
        }
        remaining -= take;
    }
    let computed = hasher.finalize();
    let stored = u32::from_le_bytes(read_array(r)?);
    if stored != computed {
        return Err(InterpError::ChecksumMismatch { stored, computed });
    }

    Ok(PiecewiseInterpolant::parts(
        geometry,
        spec,
        if quantized { Some(precision) } else { None },
        value_bound,
        values,
        Provenance {
            n: None,
            source: String::from("file"),
            built_at: None,
        },
    ))
}
