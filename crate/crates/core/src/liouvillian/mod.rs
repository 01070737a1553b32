//! Vectorized master equation dρ/dt = −i(Hρ − ρH†) + Σ_k (2c_kρc_k† − c_k†c_kρ − ρc_k†c_k)/2.
//!
//! Jump operators carry their rates, so c = √κ a gives the (κ/2)D[a] dissipator.
//! Vectorization is column stacking: vec(AρB) = (Bᵀ ⊗ A) vec(ρ).

mod convergence;
mod evolve;
mod steady;
mod tiers;

pub use convergence::{convergence_scan, ConvergenceRow, ConvergenceTable};
pub use evolve::evolve;
pub use steady::{steady_state, steady_state_with, SolveMethod, SolverChoice, SteadyOptions, SteadyState};
pub use tiers::{
    effective_observables, effective_steady, full_observables, full_steady, observables, MasterSolution,
    Observables,
};

use faer::sparse::SparseColMat;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::fock::{sparse_from_triplets, ExpectationTarget, HilbertSpace, OperatorMatrix, StateVector};
use crate::{c64, Error, Result, C64};

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: HilbertSpace,
    mat: Mat<C64>,
}

impl DensityMatrix {
    pub fn new(space: &HilbertSpace, mat: Mat<C64>) -> Result<Self> {
        let n = space.total_dim();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::LengthMismatch { expected: n, got: mat.nrows() });
        }
        Ok(Self { space: space.clone(), mat })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        let n = a.len();
        Self { space: psi.space().clone(), mat: Mat::from_fn(n, n, |i, j| a[i] * a[j].conj()) }
    }

    pub fn vacuum(space: &HilbertSpace) -> Self {
        Self::from_pure(&StateVector::vacuum(space))
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// max |ρ − ρ†|
    pub fn hermiticity_error(&self) -> f64 {
        (&self.mat - self.mat.adjoint()).norm_max()
    }

    pub fn hermitized(&self) -> Self {
        let m = faer::Scale(c64(0.5, 0.0)) * (&self.mat + self.mat.adjoint());
        Self { space: self.space.clone(), mat: m }
    }

    pub fn normalized(&self) -> Self {
        let t = self.trace();
        Self { space: self.space.clone(), mat: faer::Scale(c64(1.0, 0.0) / t) * &self.mat }
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hermitized();
        h.mat
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min))
    }

    /// Hermitian part with eigenvalues in [−tol, 0) set to zero; anything
    /// more negative is left alone so that genuine failures stay visible.
    pub fn clipped(&self, tol: f64) -> Result<Self> {
        let h = self.hermitized();
        let evd = h.mat.self_adjoint_eigen(faer::Side::Lower).map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        let u = evd.U();
        let s = evd.S();
        let n = self.dim();
        if (0..n).all(|i| !(s[i].re < 0.0 && s[i].re >= -tol)) {
            return Ok(h);
        }
        let lam: Vec<f64> = (0..n).map(|i| if s[i].re < 0.0 && s[i].re >= -tol { 0.0 } else { s[i].re }).collect();
        let scaled = Mat::from_fn(n, n, |i, k| u[(i, k)] * lam[k]);
        Ok(Self { space: self.space.clone(), mat: &scaled * u.adjoint() })
    }

    /// ½ Σ |eig(ρ − σ)| on the Hermitian parts.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                left: self.space.mode_dims().to_vec(),
                right: other.space.mode_dims().to_vec(),
            });
        }
        let d = Self { space: self.space.clone(), mat: &self.mat - &other.mat };
        Ok(0.5 * d.eigenvalues()?.iter().map(|v| v.abs()).sum::<f64>())
    }
}

impl ExpectationTarget for DensityMatrix {
    fn target_space(&self) -> &HilbertSpace {
        &self.space
    }

    fn expect_unchecked(&self, a: &OperatorMatrix) -> C64 {
        // Tr(Aρ) = Σ_ij A_ij ρ_ji
        a.entries().iter().map(|&(i, j, v)| v * self.mat[(j, i)]).sum()
    }
}

/// Column stacking.
pub fn vectorize(rho: &DensityMatrix) -> Vec<C64> {
    let n = rho.dim();
    let mut v = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            v.push(rho.mat[(i, j)]);
        }
    }
    v
}

pub fn devectorize(space: &HilbertSpace, v: &[C64]) -> Result<DensityMatrix> {
    let n = space.total_dim();
    if v.len() != n * n {
        return Err(Error::LengthMismatch { expected: n * n, got: v.len() });
    }
    Ok(DensityMatrix { space: space.clone(), mat: Mat::from_fn(n, n, |i, j| v[j * n + i]) })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// −i(Hρ − ρH)
    Commutator,
    /// −i(Hρ − ρH†)
    #[default]
    Sandwich,
}

/// L with L vec(ρ) = vec(Aρ + ρB + Σ cρc†).
#[derive(Clone, Debug)]
pub struct Superoperator {
    space: HilbertSpace,
    convention: Convention,
    matrix: SparseColMat<usize, C64>,
    left: Mat<C64>,
    right: Mat<C64>,
    jumps: Vec<Mat<C64>>,
}

pub fn build_liouvillian(h: &OperatorMatrix, collapse: &[OperatorMatrix], convention: Convention) -> Result<Superoperator> {
    let space = h.space().clone();
    for c in collapse {
        if c.space() != &space {
            return Err(Error::SpaceMismatch { left: space.mode_dims().to_vec(), right: c.space().mode_dims().to_vec() });
        }
    }
    let d = space.total_dim();
    let mut decay = OperatorMatrix::zeros(&space);
    for c in collapse {
        decay = decay.add(&c.adjoint().mul(c)?)?;
    }
    let half_decay = decay.scale(c64(-0.5, 0.0));
    let left = h.scale(c64(0.0, -1.0)).add(&half_decay)?;
    let coherent_right = match convention {
        Convention::Sandwich => h.adjoint(),
        Convention::Commutator => h.clone(),
    };
    let right = coherent_right.scale(c64(0.0, 1.0)).add(&half_decay)?;

    let mut trips = Vec::new();
    // I ⊗ A
    let le = left.entries();
    for j in 0..d {
        for &(i, k, v) in &le {
            trips.push((j * d + i, j * d + k, v));
        }
    }
    // Bᵀ ⊗ I
    for &(l, j, v) in &right.entries() {
        for i in 0..d {
            trips.push((j * d + i, l * d + i, v));
        }
    }
    // conj(c) ⊗ c
    for c in collapse {
        let ce = c.entries();
        for &(j, l, cv) in &ce {
            let cc = cv.conj();
            for &(i, k, v) in &ce {
                trips.push((j * d + i, l * d + k, cc * v));
            }
        }
    }
    Ok(Superoperator {
        space,
        convention,
        matrix: sparse_from_triplets(d * d, &trips),
        left: left.to_dense(),
        right: right.to_dense(),
        jumps: collapse.iter().map(|c| c.to_dense()).collect(),
    })
}

impl Superoperator {
    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Side length of the superoperator matrix, d².
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &SparseColMat<usize, C64> {
        &self.matrix
    }

    /// Sparse matrix–vector product y = L x.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let op = Superop(&self.matrix);
        op.apply(x, y);
    }

    pub fn apply_to(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.space != self.space {
            return Err(Error::SpaceMismatch {
                left: self.space.mode_dims().to_vec(),
                right: rho.space.mode_dims().to_vec(),
            });
        }
        let x = vectorize(rho);
        let mut y = vec![C64::default(); x.len()];
        self.apply(&x, &mut y);
        devectorize(&self.space, &y)
    }

    /// Matrix-free application on a d×d matrix; same operator as [`Self::apply`].
    pub(crate) fn apply_matrix(&self, x: &Mat<C64>) -> Mat<C64> {
        let mut r = &self.left * x + x * &self.right;
        for c in &self.jumps {
            r += c * x * c.adjoint();
        }
        r
    }

    pub(crate) fn left(&self) -> &Mat<C64> {
        &self.left
    }

    pub(crate) fn right(&self) -> &Mat<C64> {
        &self.right
    }

    /// max over columns of |(vec I)† L|; zero exactly when L preserves trace.
    pub fn trace_defect(&self) -> f64 {
        let n = self.space.total_dim();
        let cp = self.matrix.symbolic().col_ptr();
        let ri = self.matrix.symbolic().row_idx();
        let val = self.matrix.val();
        let mut worst: f64 = 0.0;
        for col in 0..self.dim() {
            let s: C64 = (cp[col]..cp[col + 1]).filter(|&k| ri[k] % (n + 1) == 0).map(|k| val[k]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }

    /// Largest entrywise difference between two superoperators.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), got: other.dim() });
        }
        let diff = faer::sparse::ops::sub(self.matrix.as_ref(), other.matrix.as_ref())
            .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
        Ok(diff.val().iter().map(|v| v.norm()).fold(0.0, f64::max))
    }
}

struct Superop<'a>(&'a SparseColMat<usize, C64>);

impl Superop<'_> {
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let m = self.0;
        let cp = m.symbolic().col_ptr();
        let ri = m.symbolic().row_idx();
        let val = m.val();
        y.iter_mut().for_each(|v| *v = C64::default());
        for j in 0..m.ncols() {
            let xj = x[j];
            if xj == C64::default() {
                continue;
            }
            for k in cp[j]..cp[j + 1] {
                y[ri[k]] += val[k] * xj;
            }
        }
    }
}
