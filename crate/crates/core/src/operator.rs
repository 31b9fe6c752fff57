//! Matrix representations of rotor operators.
//!
//! Every quantum operator lives in a truncated, labeled basis. [`OperatorMatrix`]
//! is the dense form used at API boundaries; [`SparseOperator`] is the CSR form
//! the generator uses internally, since ladder and orientation operators only
//! couple neighbouring shells.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::LinearBasis;
use crate::error::{Error, Result};
use crate::planar::PlanarBasis;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Label of the truncated basis an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    /// `|l m>` states, `l = 0..=l_max`.
    Linear(LinearBasis),
    /// `|m>` states, `m = -m_max..=m_max`.
    Planar(PlanarBasis),
    /// Unlabeled basis of the given dimension.
    Generic { dim: usize },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::Linear(b) => b.dim(),
            Basis::Planar(b) => b.dim(),
            Basis::Generic { dim } => *dim,
        }
    }

    /// Positions of this basis' states inside a larger basis of the same family.
    pub fn indices_in(&self, larger: &Basis) -> Result<Vec<usize>> {
        let mismatch = || Error::DimensionMismatch {
            expected: larger.dim(),
            found: self.dim(),
        };
        match (self, larger) {
            (Basis::Linear(a), Basis::Linear(b)) if a.l_max <= b.l_max => Ok((0..a.dim()).collect()),
            (Basis::Planar(a), Basis::Planar(b)) if a.m_max <= b.m_max => {
                let off = b.m_max - a.m_max;
                Ok((off..off + a.dim()).collect())
            }
            (Basis::Generic { dim: a }, Basis::Generic { dim: b }) if a <= b => Ok((0..*a).collect()),
            _ => Err(mismatch()),
        }
    }
}

/// Dense complex matrix tied to a basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    basis: Basis,
    entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(basis: Basis, entries: DMatrix<C64>) -> Result<Self> {
        let d = basis.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(Self { basis, entries })
    }

    pub fn zeros(basis: Basis) -> Self {
        let d = basis.dim();
        Self {
            basis,
            entries: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(basis: Basis) -> Self {
        let d = basis.dim();
        Self {
            basis,
            entries: DMatrix::identity(d, d),
        }
    }

    pub fn from_diagonal(basis: Basis, diag: &[C64]) -> Result<Self> {
        let d = basis.dim();
        if diag.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: diag.len(),
            });
        }
        let mut entries = DMatrix::zeros(d, d);
        for (i, v) in diag.iter().enumerate() {
            entries[(i, i)] = *v;
        }
        Ok(Self { basis, entries })
    }

    pub fn from_fn(basis: Basis, f: impl FnMut(usize, usize) -> C64) -> Self {
        let d = basis.dim();
        Self {
            basis,
            entries: DMatrix::from_fn(d, d, f),
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis,
            entries: self.entries.adjoint(),
        }
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            basis: self.basis,
            entries: &self.entries * factor,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `self - self^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Restrict to a smaller basis of the same family. Used to cut operators
    /// built in an enlarged basis back to the reported one.
    pub fn project(&self, basis: Basis) -> Result<Self> {
        let keep = basis.indices_in(&self.basis)?;
        let d = keep.len();
        Ok(Self {
            basis,
            entries: DMatrix::from_fn(d, d, |i, j| self.entries[(keep[i], keep[j])]),
        })
    }

    /// Reinterpret the same entries in a different (equal-dimension) basis.
    pub fn relabel(mut self, basis: Basis) -> Result<Self> {
        if basis.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: basis.dim(),
            });
        }
        self.basis = basis;
        Ok(self)
    }

    pub fn to_sparse(&self) -> SparseOperator {
        SparseOperator::from_dense(&self.entries)
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        debug_assert_eq!(self.dim(), rhs.dim());
        // The operators here are sparse; going through CSR avoids the naive
        // dense complex product.
        let sparse = self.to_sparse();
        let mut out = DMatrix::zeros(self.dim(), rhs.dim());
        sparse.mul_dense_acc(&rhs.entries, ONE, &mut out);
        OperatorMatrix {
            basis: self.basis,
            entries: out,
        }
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            basis: self.basis,
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            basis: self.basis,
            entries: &self.entries - &rhs.entries,
        }
    }
}

/// Square complex matrix in compressed sparse row layout.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    /// Exact zeros are dropped; nothing else is.
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Submatrix on the given row/column indices, in that order.
    pub fn restrict(&self, keep: &[usize]) -> SparseOperator {
        let mut pos = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            pos[old] = new;
        }
        let mut trip = Vec::new();
        for (ni, &oi) in keep.iter().enumerate() {
            for (oj, v) in self.row(oi) {
                if pos[oj] != usize::MAX {
                    trip.push((ni, pos[oj], v));
                }
            }
        }
        SparseOperator::from_triplets(keep.len(), trip)
    }

    pub fn scaled(&self, factor: C64) -> SparseOperator {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= factor;
        }
        out
    }

    /// `self + other`.
    pub fn add(&self, other: &SparseOperator) -> SparseOperator {
        let mut trip: Vec<_> = (0..self.dim).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect();
        trip.extend((0..other.dim).flat_map(|i| other.row(i).map(move |(j, v)| (i, j, v))));
        SparseOperator::from_triplets(self.dim, trip)
    }

    pub fn zeros(dim: usize) -> SparseOperator {
        SparseOperator::from_triplets(dim, Vec::new())
    }

    pub fn identity(dim: usize) -> SparseOperator {
        SparseOperator::from_triplets(dim, (0..dim).map(|i| (i, i, ONE)).collect())
    }

    /// Diagonal entries if the matrix has no off-diagonal nonzeros.
    pub fn as_diagonal(&self) -> Option<Vec<C64>> {
        let mut d = vec![ZERO; self.dim];
        for (i, slot) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                if i != j {
                    return None;
                }
                *slot = v;
            }
        }
        Some(d)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn transpose(&self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz());
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                trip.push((j, i, v));
            }
        }
        Self::from_triplets(self.dim, trip)
    }

    pub fn adjoint(&self) -> Self {
        let mut t = self.transpose();
        for v in &mut t.vals {
            *v = v.conj();
        }
        t
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// `out += alpha * self * x`.
    pub fn mul_dense_acc(&self, x: &DMatrix<C64>, alpha: C64, out: &mut DMatrix<C64>) {
        let ncols = x.ncols();
        for c in 0..ncols {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for i in 0..self.dim {
                let mut acc = ZERO;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[k] * xc[self.cols[k]];
                }
                oc[i] += alpha * acc;
            }
        }
    }

    /// `out += alpha * x * self^dagger`.
    pub fn dense_mul_adjoint_acc(&self, x: &DMatrix<C64>, alpha: C64, out: &mut DMatrix<C64>) {
        // (x S^dag)[:, j] = sum_k conj(S[j, k]) x[:, k]
        let nrows = x.nrows();
        for j in 0..self.dim {
            for k in self.row_ptr[j]..self.row_ptr[j + 1] {
                let s = alpha * self.vals[k].conj();
                let src = self.cols[k];
                for r in 0..nrows {
                    let v = x[(r, src)];
                    out[(r, j)] += s * v;
                }
            }
        }
    }

    /// `out += alpha * x * self`.
    pub fn dense_mul_acc(&self, x: &DMatrix<C64>, alpha: C64, out: &mut DMatrix<C64>) {
        // (x S)[:, j] = sum_k x[:, k] S[k, j]
        let nrows = x.nrows();
        for k in 0..self.dim {
            for p in self.row_ptr[k]..self.row_ptr[k + 1] {
                let s = alpha * self.vals[p];
                let j = self.cols[p];
                for r in 0..nrows {
                    let v = x[(r, k)];
                    out[(r, j)] += s * v;
                }
            }
        }
    }

    /// `self * other` as a sparse product.
    pub fn mul_sparse(&self, other: &SparseOperator) -> SparseOperator {
        let mut trip = Vec::new();
        let mut acc = vec![ZERO; self.dim];
        let mut touched = Vec::new();
        let mut seen = vec![false; self.dim];
        for i in 0..self.dim {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !seen[j] {
                        seen[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != ZERO {
                    trip.push((i, j, acc[j]));
                }
                acc[j] = ZERO;
                seen[j] = false;
            }
            touched.clear();
        }
        SparseOperator::from_triplets(self.dim, trip)
    }
}
