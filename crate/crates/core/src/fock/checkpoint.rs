use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use super::sector::FockSector;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::output::{float, CsvWriter};
use crate::quasifree::CorrelationMatrix;

/// Binary layout: `M`, `n`, `dim` as little-endian `u64`, then `dim`
/// little-endian `(re, im)` pairs of `f64`.
pub fn write_checkpoint(path: impl AsRef<Path>, psi: &StateVector) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let sector = psi.sector();
    let mut buf = Vec::with_capacity(24 + 16 * sector.dim());
    for x in [sector.modes(), sector.particles(), sector.dim()] {
        buf.extend_from_slice(&(x as u64).to_le_bytes());
    }
    for a in psi.amplitudes() {
        buf.extend_from_slice(&a.re.to_le_bytes());
        buf.extend_from_slice(&a.im.to_le_bytes());
    }
    out.write_all(&buf)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<StateVector> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().expect("8 bytes") };
    if bytes.len() < 24 {
        return Err(Error::InvalidSector(format!("checkpoint {path:?} is truncated")));
    }
    let header: Vec<usize> = (0..3).map(|i| u64::from_le_bytes(word(i)) as usize).collect();
    let sector = Arc::new(FockSector::new(header[0], header[1])?);
    if sector.dim() != header[2] || bytes.len() != 24 + 16 * header[2] {
        return Err(Error::InvalidSector(format!(
            "checkpoint {path:?} header (M={}, n={}, dim={}) does not match its contents",
            header[0], header[1], header[2]
        )));
    }
    let amps = (0..header[2])
        .map(|i| C64::new(f64::from_le_bytes(word(3 + 2 * i)), f64::from_le_bytes(word(4 + 2 * i))))
        .collect();
    StateVector::new(sector, amps)
}

/// `ν` as `(row, col, re, im)` rows.
pub fn write_correlation_csv(path: impl AsRef<Path>, nu: &CorrelationMatrix) -> Result<()> {
    let mut out = CsvWriter::create(path, "qboltz.nu.v1", &["row", "col", "re", "im"])?;
    for p in 0..nu.modes() {
        for q in 0..nu.modes() {
            let v = nu.get(p, q);
            out.row(&[p.to_string(), q.to_string(), float(v.re), float(v.im)])?;
        }
    }
    out.finish().map(|_| ())
}
