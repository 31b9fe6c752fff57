//! Lindblad generators, time propagation, stationary states, and observables.
//!
//! A generator is `L[rho] = -i[H, rho] + sum_k w_k sum_c (A_kc rho A_kc^+ - {A_kc^+ A_kc, rho}/2)`
//! where each term `k` carries a weight `w_k` and a list of component
//! operators `A_kc` (the Cartesian components of a vector Lindblad operator).
//! Superoperators use column stacking: `vec(rho)[a + d b] = rho[a, b]`.

mod density;
pub mod io;
mod observables;
mod propagate;
mod stationary;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{Basis, OperatorMatrix, SparseOperator, C64, I, ONE, ZERO};

pub use density::{trace_distance, trace_norm, DensityMatrix, POSITIVITY_TOL, TRACE_TOL};
pub use observables::{observables, observables_at, relative_entropy, von_neumann_entropy, ObservableRecord, ObservableSeries};
pub use propagate::{propagate, propagate_with, PropagationOptions, Propagator};
pub(crate) use propagate::{Dopri, Frame};
pub use stationary::{analyze_kernel, stationary_nullspace, StationaryKernel};

/// One vector Lindblad operator with its rate weight.
#[derive(Clone, Debug)]
pub struct LindbladTerm {
    pub weight: f64,
    pub operators: Vec<SparseOperator>,
}

impl LindbladTerm {
    pub fn new(weight: f64, operators: Vec<SparseOperator>) -> Self {
        Self { weight, operators }
    }
}

#[derive(Clone, Debug)]
struct PreparedOp {
    weight: f64,
    op: SparseOperator,
    /// Transpose of `op`, giving column access.
    op_t: SparseOperator,
}

/// Total Liouvillian `-i[H, .] + D`.
#[derive(Clone, Debug)]
pub struct GeneratorMap {
    basis: Basis,
    hamiltonian: SparseOperator,
    terms: Vec<LindbladTerm>,
    prepared: Vec<PreparedOp>,
    /// `H - (i/2) sum w A^+ A`.
    effective: SparseOperator,
    effective_t: SparseOperator,
    /// `-(i/2) sum w A^+ A` alone, for the interaction picture.
    damping: SparseOperator,
}

impl GeneratorMap {
    pub fn new(basis: Basis, hamiltonian: SparseOperator, terms: Vec<LindbladTerm>) -> Result<Self> {
        let d = basis.dim();
        let check = |found: usize| {
            if found != d {
                Err(Error::DimensionMismatch { expected: d, found })
            } else {
                Ok(())
            }
        };
        check(hamiltonian.dim())?;
        let mut damping = SparseOperator::zeros(d);
        let mut prepared = Vec::new();
        for term in &terms {
            if !term.weight.is_finite() {
                return Err(Error::InvalidArgument("non-finite Lindblad weight".into()));
            }
            for op in &term.operators {
                check(op.dim())?;
                if term.weight == 0.0 {
                    continue;
                }
                let ada = op.adjoint().mul_sparse(op);
                damping = damping.add(&ada.scaled(C64::new(0.0, -0.5 * term.weight)));
                prepared.push(PreparedOp {
                    weight: term.weight,
                    op: op.clone(),
                    op_t: op.transpose(),
                });
            }
        }
        let effective = hamiltonian.add(&damping);
        let effective_t = effective.transpose();
        Ok(Self {
            basis,
            hamiltonian,
            terms,
            prepared,
            effective,
            effective_t,
            damping,
        })
    }

    /// Purely unitary generator.
    pub fn unitary(basis: Basis, hamiltonian: SparseOperator) -> Result<Self> {
        Self::new(basis, hamiltonian, Vec::new())
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn hamiltonian(&self) -> &SparseOperator {
        &self.hamiltonian
    }

    pub fn hamiltonian_matrix(&self) -> OperatorMatrix {
        OperatorMatrix::new(self.basis, self.hamiltonian.to_dense()).expect("dimension checked")
    }

    pub fn terms(&self) -> &[LindbladTerm] {
        &self.terms
    }

    pub fn has_negative_weights(&self) -> bool {
        self.terms.iter().any(|t| t.weight < 0.0)
    }

    /// Diagonal of `H` when it is diagonal and real.
    pub(crate) fn diagonal_energies(&self) -> Option<Vec<f64>> {
        let d = self.hamiltonian.as_diagonal()?;
        if d.iter().any(|z| z.im != 0.0) {
            return None;
        }
        Some(d.iter().map(|z| z.re).collect())
    }

    /// `L[rho]` on a raw matrix.
    pub fn apply_matrix(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        self.apply_into(rho, &mut out, true);
        out
    }

    /// `out = L[rho]`, or only the dissipative part when `with_hamiltonian` is false.
    pub(crate) fn apply_into(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>, with_hamiltonian: bool) {
        out.fill(ZERO);
        let k = if with_hamiltonian { &self.effective } else { &self.damping };
        // -i K rho + i rho K^+
        k.mul_dense_acc(rho, -I, out);
        k.dense_mul_adjoint_acc(rho, I, out);
        let d = self.dim();
        let mut tmp = DMatrix::zeros(d, d);
        for p in &self.prepared {
            tmp.fill(ZERO);
            p.op.mul_dense_acc(rho, ONE, &mut tmp);
            p.op.dense_mul_adjoint_acc(&tmp, C64::new(p.weight, 0.0), out);
        }
    }

    /// Dissipator alone applied to a raw matrix.
    pub fn dissipator_matrix(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        self.apply_into(rho, &mut out, false);
        out
    }

    /// Column `L[|c><e|]` of the superoperator, as sparse `(row, col, value)`
    /// entries of the image matrix. Entries below `drop_tol` are discarded.
    pub(crate) fn image_of_unit(&self, c: usize, e: usize, drop_tol: f64) -> Vec<(usize, usize, C64)> {
        let mut acc: std::collections::HashMap<(usize, usize), C64> = std::collections::HashMap::new();
        // -i K E_ce: column c of K placed in column e.
        for (i, v) in self.effective_t.row(c) {
            *acc.entry((i, e)).or_insert(ZERO) += -I * v;
        }
        // i E_ce K^+: row c holds conj(K[j, e]).
        for (j, v) in self.effective_t.row(e) {
            *acc.entry((c, j)).or_insert(ZERO) += I * v.conj();
        }
        for p in &self.prepared {
            let w = C64::new(p.weight, 0.0);
            for (i, a) in p.op_t.row(c) {
                for (j, b) in p.op_t.row(e) {
                    *acc.entry((i, j)).or_insert(ZERO) += w * a * b.conj();
                }
            }
        }
        let mut out: Vec<_> = acc
            .into_iter()
            .filter(|(_, v)| v.norm() > drop_tol)
            .map(|((i, j), v)| (i, j, v))
            .collect();
        out.sort_by_key(|&(i, j, _)| (j, i));
        out
    }

    /// Full superoperator in column-stacking convention.
    pub fn superoperator(&self) -> SparseOperator {
        let d = self.dim();
        let mut trip = Vec::new();
        for e in 0..d {
            for c in 0..d {
                let col = c + d * e;
                for (i, j, v) in self.image_of_unit(c, e, 0.0) {
                    trip.push((i + d * j, col, v));
                }
            }
        }
        SparseOperator::from_triplets(d * d, trip)
    }

    /// Choi matrix `sum_ab |a><b| (x) L[|a><b|]`, indexed by `(a, i), (b, j)` as `a d + i`.
    pub fn choi_matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut choi = DMatrix::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                for (i, j, v) in self.image_of_unit(a, b, 0.0) {
                    choi[(a * d + i, b * d + j)] += v;
                }
            }
        }
        choi
    }

    /// Smallest eigenvalue of the Choi matrix projected onto the complement of
    /// the maximally entangled vector. A generator is of Lindblad form, hence
    /// generates completely positive maps, exactly when this is non-negative.
    pub fn cp_probe(&self) -> f64 {
        let d = self.dim();
        let choi = self.choi_matrix();
        let mut omega = DMatrix::<C64>::zeros(d * d, 1);
        for a in 0..d {
            omega[(a * d + a, 0)] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        let proj = DMatrix::<C64>::identity(d * d, d * d) - &omega * omega.adjoint();
        let m = &proj * choi * &proj;
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `L[rho]` as an operator in the generator's basis.
pub fn apply_generator(g: &GeneratorMap, rho: &DensityMatrix) -> Result<OperatorMatrix> {
    apply_generator_to(g, rho.operator())
}

/// `L[X]` for any operator `X` of matching dimension.
pub fn apply_generator_to(g: &GeneratorMap, x: &OperatorMatrix) -> Result<OperatorMatrix> {
    if x.dim() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: x.dim(),
        });
    }
    OperatorMatrix::new(g.basis(), g.apply_matrix(x.entries()))
}

/// Weighted Lindblad term whose components are the projections of operators
/// built in an enlarged basis. Forming `A^+ A` from the projected operators
/// keeps the generator exactly trace preserving on the reported basis.
pub(crate) fn project_components(ops: &[SparseOperator], keep: &[usize]) -> Vec<SparseOperator> {
    ops.iter().map(|o| o.restrict(keep)).collect()
}
