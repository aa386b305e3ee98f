//! Binary checkpoint format.
//!
//! ```text
//! offset  size  content
//!      0     4  magic "BSVK"
//!      4     2  version, u16 little-endian (currently 1)
//!      6     1  system kind: 0 NSE, 1 MHD, 2 Boussinesq
//!      7     1  dimension d
//!      8     4  points per dimension n, u32 LE
//!     12     1  number of named fields
//!     13     3  reserved, zero
//!     16     8  time t, f64 LE
//!     24     8  seed, u64 LE
//!     32     8  checksum: first 8 bytes of SHA-256(bytes[0..32] ++ payload)
//!     40     …  payload
//! ```
//!
//! The payload lists, for every component of every field in storage order
//! (`u`, then `b` or `theta`), the coefficients in [`Grid::canonical_order`]
//! as pairs of f64 LE `(re, im)`.

use rustfft::num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{make_grid, Grid};

use super::{SystemKind, SystemState};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"BSVK";
pub const CHECKPOINT_VERSION: u16 = 1;
const HEADER: usize = 40;

/// Decoded checkpoint.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub kind: SystemKind,
    pub seed: u64,
    pub state: SystemState,
}

fn checksum(header: &[u8], payload: &[u8]) -> [u8; 8] {
    let mut h = Sha256::new();
    h.update(header);
    h.update(payload);
    let digest = h.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    out
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_checkpoint(kind: SystemKind, state: &SystemState, seed: u64) -> Result<Vec<u8>> {
    let grid = state.grid();
    let fields = state.fields();
    let expected = kind.components(grid.dim());
    let comps: usize = fields.iter().map(|f| f.1.components()).sum();
    if comps != expected || fields.len() != kind.n_fields() {
        return Err(Error::DimensionMismatch(format!(
            "state does not match a {kind} system"
        )));
    }
    let order = grid.canonical_order();
    let mut payload = Vec::with_capacity(comps * grid.len() * 16);
    for (_, f) in &fields {
        for c in 0..f.components() {
            let cc = f.component_coeffs(c);
            for &idx in &order {
                payload.extend_from_slice(&cc[idx].re.to_le_bytes());
                payload.extend_from_slice(&cc[idx].im.to_le_bytes());
            }
        }
    }
    let mut out = Vec::with_capacity(HEADER + payload.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.push(kind.code());
    out.push(grid.dim() as u8);
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.push(fields.len() as u8);
    out.extend_from_slice(&[0u8; 3]);
    out.extend_from_slice(&state.t.to_le_bytes());
    out.extend_from_slice(&seed.to_le_bytes());
    let sum = checksum(&out[..32], &payload);
    out.extend_from_slice(&sum);
    out.extend_from_slice(&payload);
    Ok(out)
}

fn read_u64(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < HEADER {
        return Err(Error::Checkpoint(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let stored = &bytes[32..40];
    let computed = checksum(&bytes[..32], &bytes[HEADER..]);
    if stored != computed {
        return Err(Error::ChecksumMismatch {
            stored: hex(stored),
            computed: hex(&computed),
        });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let kind = SystemKind::from_code(bytes[6]).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let d = bytes[7] as usize;
    let n = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let n_fields = bytes[12] as usize;
    let t = f64::from_bits(read_u64(bytes, 16));
    let seed = read_u64(bytes, 24);
    let grid: Grid = make_grid(d, n).map_err(|e| Error::Checkpoint(e.to_string()))?;
    if n_fields != kind.n_fields() {
        return Err(Error::Checkpoint(format!("{n_fields} fields for a {kind} state")));
    }
    let comps = kind.components(d);
    let payload = &bytes[HEADER..];
    if payload.len() != comps * grid.len() * 16 {
        return Err(Error::Checkpoint(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            comps * grid.len() * 16
        )));
    }
    let order = grid.canonical_order();
    let len = grid.len();
    let mut coeffs = vec![Complex64::default(); comps * len];
    let mut at = 0;
    for c in 0..comps {
        for &idx in &order {
            let re = f64::from_bits(read_u64(payload, at));
            let im = f64::from_bits(read_u64(payload, at + 8));
            coeffs[c * len + idx] = Complex64::new(re, im);
            at += 16;
        }
    }
    let field = |range: std::ops::Range<usize>| -> Result<SpectralField> {
        SpectralField::from_coeffs(&grid, range.len(), coeffs[range.start * len..range.end * len].to_vec())
    };
    let u = field(0..d)?.with_divergence_free(true);
    let (b, theta) = match kind {
        SystemKind::Nse => (None, None),
        SystemKind::Mhd => (Some(field(d..2 * d)?.with_divergence_free(true)), None),
        SystemKind::Boussinesq => (None, Some(field(d..d + 1)?)),
    };
    Ok(Checkpoint {
        kind,
        seed,
        state: SystemState { t, u, b, theta },
    })
}
