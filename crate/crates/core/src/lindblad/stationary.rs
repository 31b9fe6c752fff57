//! Stationary states from the kernel of the superoperator.
//!
//! The superoperator splits into blocks that no generator entry connects
//! (for rotors: fixed `m_a - m_b`, fixed combined parity). Only blocks that
//! contain a diagonal element `|a><a|` can hold a trace-carrying stationary
//! state, so only those are factorized.

use nalgebra::DMatrix;

use super::{DensityMatrix, GeneratorMap};
use crate::error::{Error, Result};
use crate::operator::{OperatorMatrix, C64};

const DROP_REL: f64 = 1e-13;
const RANK_REL: f64 = 1e-9;

/// Kernel structure of a generator restricted to population-carrying blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryKernel {
    /// Total kernel dimension over all blocks containing a diagonal element.
    pub multiplicity: usize,
    /// Sizes of those blocks.
    pub block_sizes: Vec<usize>,
    /// Kernel vectors in column-stacked form, one per kernel direction.
    pub vectors: Vec<Vec<(usize, C64)>>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn scale_of(g: &GeneratorMap) -> f64 {
    let dense_max = |m: &crate::operator::SparseOperator| {
        (0..m.dim()).flat_map(|i| m.row(i).map(|(_, v)| v.norm()).collect::<Vec<_>>()).fold(0.0, f64::max)
    };
    let mut s = dense_max(&g.effective);
    for p in &g.prepared {
        s += p.weight.abs() * dense_max(&p.op).powi(2);
    }
    s.max(f64::MIN_POSITIVE)
}

/// Kernel of `L` on the blocks that contain diagonal elements.
pub fn analyze_kernel(g: &GeneratorMap) -> StationaryKernel {
    let d = g.dim();
    let n = d * d;
    let drop = DROP_REL * scale_of(g);
    let mut uf = UnionFind((0..n).collect());
    for e in 0..d {
        for c in 0..d {
            let col = c + d * e;
            for (i, j, _) in g.image_of_unit(c, e, drop) {
                uf.union(i + d * j, col);
            }
        }
    }
    let mut roots: Vec<usize> = (0..d).map(|a| uf.find(a + d * a)).collect();
    roots.sort_unstable();
    roots.dedup();

    let mut multiplicity = 0;
    let mut block_sizes = Vec::new();
    let mut vectors = Vec::new();
    for root in roots {
        let members: Vec<usize> = (0..n).filter(|&k| uf.find(k) == root).collect();
        let m = members.len();
        let mut local = std::collections::HashMap::with_capacity(m);
        for (pos, &k) in members.iter().enumerate() {
            local.insert(k, pos);
        }
        let mut s = DMatrix::<C64>::zeros(m, m);
        for (pos, &k) in members.iter().enumerate() {
            let (c, e) = (k % d, k / d);
            for (i, j, v) in g.image_of_unit(c, e, drop) {
                if let Some(&row) = local.get(&(i + d * j)) {
                    s[(row, pos)] += v;
                }
            }
        }
        let kernel = kernel_basis(s);
        multiplicity += kernel.len();
        block_sizes.push(m);
        for z in kernel {
            vectors.push(members.iter().copied().zip(z).collect());
        }
    }
    StationaryKernel {
        multiplicity,
        block_sizes,
        vectors,
    }
}

/// Basis of the right kernel of `a`, by full-pivot LU and back substitution.
fn kernel_basis(a: DMatrix<C64>) -> Vec<Vec<C64>> {
    let n = a.nrows();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return (0..n)
            .map(|k| (0..n).map(|i| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
    }
    let lu = a.full_piv_lu();
    let u = lu.u();
    let pivot0 = u[(0, 0)].norm();
    let rank = (0..n).take_while(|&i| u[(i, i)].norm() > RANK_REL * pivot0).count();
    let mut q = DMatrix::<C64>::identity(n, n);
    lu.q().permute_columns(&mut q);
    let mut out = Vec::new();
    for free in rank..n {
        let mut z = vec![C64::new(0.0, 0.0); n];
        z[free] = C64::new(1.0, 0.0);
        for i in (0..rank).rev() {
            let mut acc = u[(i, free)];
            for j in (i + 1)..rank {
                acc += u[(i, j)] * z[j];
            }
            z[i] = -acc / u[(i, i)];
        }
        let zv = nalgebra::DVector::from_vec(z);
        out.push((&q * zv).iter().copied().collect());
    }
    out
}

/// The unique trace-one stationary state of `g`. Fails with the measured
/// multiplicity when the kernel on population-carrying blocks is not
/// one-dimensional.
pub fn stationary_nullspace(g: &GeneratorMap) -> Result<DensityMatrix> {
    let kernel = analyze_kernel(g);
    if kernel.multiplicity != 1 {
        return Err(Error::KernelMultiplicity {
            multiplicity: kernel.multiplicity,
        });
    }
    let d = g.dim();
    let mut m = DMatrix::<C64>::zeros(d, d);
    for &(k, v) in &kernel.vectors[0] {
        m[(k % d, k / d)] = v;
    }
    let tr = m.trace();
    if tr.norm() < 1e-12 * m.iter().map(|z| z.norm()).fold(0.0, f64::max) {
        return Err(Error::InvalidState("stationary kernel element is traceless".into()));
    }
    m /= tr;
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let residual = g.apply_matrix(&h).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residual > 1e-10 * scale_of(g).max(1.0) {
        return Err(Error::NotConverged { residual });
    }
    Ok(DensityMatrix::from_trusted(OperatorMatrix::new(g.basis(), h)?))
}
