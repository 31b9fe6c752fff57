//! Snapshot and observable file formats.
//!
//! Binary snapshot: little-endian `u64` dimension `d`, then `d * d` complex
//! entries in row-major order, each as two little-endian `f64` (re, im).
//!
//! Observable CSV columns: `time, energy, purity, entropy, rel_entropy`, then
//! one population column per shell (`p_<l>` for the linear rotor, `p_<m>` for
//! the planar rotor). A missing relative entropy is an empty field.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{DensityMatrix, ObservableSeries};
use crate::error::{Error, Result};
use crate::operator::{Basis, OperatorMatrix, C64};

/// Largest dimension written as JSON.
pub const JSON_MAX_DIM: usize = 400;

pub fn write_binary<W: Write>(mut w: W, m: &DMatrix<C64>) -> Result<()> {
    let d = m.nrows();
    w.write_all(&(d as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * d * d);
    for i in 0..d {
        for j in 0..d {
            buf.extend_from_slice(&m[(i, j)].re.to_le_bytes());
            buf.extend_from_slice(&m[(i, j)].im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<DMatrix<C64>> {
    let mut head = [0u8; 8];
    r.read_exact(&mut head)?;
    let d = u64::from_le_bytes(head) as usize;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if d.checked_mul(d).and_then(|n| n.checked_mul(16)) != Some(body.len()) {
        return Err(Error::Parse(format!(
            "snapshot header says dimension {d} but body has {} bytes",
            body.len()
        )));
    }
    let f = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    Ok(DMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        C64::new(f(k), f(k + 1))
    }))
}

/// JSON form of a small density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonSnapshot {
    pub basis: Basis,
    pub dim: usize,
    /// Row-major real parts.
    pub re: Vec<Vec<f64>>,
    /// Row-major imaginary parts.
    pub im: Vec<Vec<f64>>,
}

impl JsonSnapshot {
    pub fn from_state(rho: &DensityMatrix) -> Result<Self> {
        let d = rho.dim();
        if d > JSON_MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "JSON snapshots are limited to dimension {JSON_MAX_DIM}, got {d}"
            )));
        }
        let m = rho.matrix();
        Ok(Self {
            basis: rho.basis(),
            dim: d,
            re: (0..d).map(|i| (0..d).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| m[(i, j)].im).collect()).collect(),
        })
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        let d = self.dim;
        if self.re.len() != d || self.im.len() != d || self.re.iter().chain(&self.im).any(|r| r.len() != d) {
            return Err(Error::Parse("JSON snapshot rows do not match its dimension".into()));
        }
        let m = DMatrix::from_fn(d, d, |i, j| C64::new(self.re[i][j], self.im[i][j]));
        DensityMatrix::new(OperatorMatrix::new(self.basis, m)?)
    }
}

fn population_labels(basis: Basis, n: usize) -> Vec<String> {
    match basis {
        Basis::Planar(b) => b.momenta().map(|m| format!("p_{m}")).collect(),
        _ => (0..n).map(|l| format!("p_{l}")).collect(),
    }
}

/// Write an observable series as CSV.
pub fn write_observables_csv<W: Write>(mut w: W, basis: Basis, series: &ObservableSeries) -> Result<()> {
    let n = series.records.first().map_or(0, |r| r.populations.len());
    let mut header = vec!["time", "energy", "purity", "entropy", "rel_entropy"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    header.extend(population_labels(basis, n));
    writeln!(w, "{}", header.join(","))?;
    for r in &series.records {
        let mut row = vec![
            fmt(r.time),
            fmt(r.energy),
            fmt(r.purity),
            fmt(r.entropy),
            r.rel_entropy.map(fmt).unwrap_or_default(),
        ];
        row.extend(r.populations.iter().map(|&p| fmt(p)));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Shortest decimal that round-trips the `f64`.
pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}
