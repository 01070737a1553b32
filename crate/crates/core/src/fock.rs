//! Truncated multimode Fock spaces and operators acting on them.
//!
//! Basis ordering is the Kronecker order of `mode_dims`: the first mode is the
//! most significant digit of the flat index. Models in this crate always use
//! (cavity c, cavity e, mechanics b).

use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par};

use crate::{c64, Error, Result, C64};

/// Operators on spaces of at least this total dimension are stored sparse.
pub const DENSE_LIMIT: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    mode_dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(mode_dims: &[usize]) -> Result<Self> {
        if mode_dims.is_empty() {
            return Err(Error::InvalidSpace("no modes given".into()));
        }
        if let Some((i, &d)) = mode_dims.iter().enumerate().find(|(_, &d)| d < 2) {
            return Err(Error::InvalidSpace(format!(
                "mode {i} has {d} level(s); every mode needs at least 2 (vacuum and one excitation)"
            )));
        }
        Ok(Self { mode_dims: mode_dims.to_vec() })
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn n_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.mode_dims.iter().product()
    }

    /// Flat index of the product state |n_0, n_1, ...>.
    pub fn index(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.n_modes() {
            return Err(Error::LengthMismatch { expected: self.n_modes(), got: levels.len() });
        }
        let mut idx = 0;
        for (&n, &d) in levels.iter().zip(&self.mode_dims) {
            if n >= d {
                return Err(Error::InvalidSpace(format!("level {n} exceeds truncation {d}")));
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    pub fn levels(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.n_modes()];
        for (slot, &d) in out.iter_mut().zip(&self.mode_dims).rev() {
            *slot = idx % d;
            idx /= d;
        }
        out
    }

    /// Stride of a mode in the flat index.
    fn stride(&self, mode: usize) -> usize {
        self.mode_dims[mode + 1..].iter().product()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(Error::BadModeIndex { index: mode, modes: self.n_modes() });
        }
        Ok(())
    }
}

pub fn make_space(mode_dims: &[usize]) -> Result<HilbertSpace> {
    HilbertSpace::new(mode_dims)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StorageKind {
    Dense,
    Sparse,
}

impl StorageKind {
    pub fn auto(dim: usize) -> Self {
        if dim < DENSE_LIMIT {
            StorageKind::Dense
        } else {
            StorageKind::Sparse
        }
    }
}

#[derive(Clone, Debug)]
pub enum Storage {
    Dense(Mat<C64>),
    Sparse(SparseColMat<usize, C64>),
}

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    space: HilbertSpace,
    data: Storage,
}

/// Binary and unary operations accepted by [`OperatorMatrix::combine`].
#[derive(Clone, Copy, Debug)]
pub enum Combine<'a> {
    Add(&'a OperatorMatrix),
    Multiply(&'a OperatorMatrix),
    Scale(C64),
    Adjoint,
    Commutator(&'a OperatorMatrix),
}

pub(crate) fn sparse_from_triplets(n: usize, trips: &[(usize, usize, C64)]) -> SparseColMat<usize, C64> {
    let t: Vec<Triplet<usize, usize, C64>> =
        trips.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    SparseColMat::try_new_from_triplets(n, n, &t).expect("triplet indices are in range")
}

/// Nonzero entries of a sparse matrix as (row, col, value).
pub(crate) fn sparse_entries(m: &SparseColMat<usize, C64>) -> Vec<(usize, usize, C64)> {
    let cp = m.symbolic().col_ptr();
    let ri = m.symbolic().row_idx();
    let val = m.val();
    let mut out = Vec::with_capacity(val.len());
    for j in 0..m.ncols() {
        for k in cp[j]..cp[j + 1] {
            out.push((ri[k], j, val[k]));
        }
    }
    out
}

fn dense_entries(m: &Mat<C64>) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != C64::new(0.0, 0.0) {
                out.push((i, j, v));
            }
        }
    }
    out
}

impl OperatorMatrix {
    pub fn from_dense(space: &HilbertSpace, m: Mat<C64>) -> Result<Self> {
        let n = space.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::LengthMismatch { expected: n, got: m.nrows() });
        }
        Ok(Self { space: space.clone(), data: Storage::Dense(m) })
    }

    /// Duplicate entries are summed.
    pub fn from_triplets(space: &HilbertSpace, trips: &[(usize, usize, C64)], kind: StorageKind) -> Result<Self> {
        let n = space.total_dim();
        if let Some(&(r, c, _)) = trips.iter().find(|(r, c, _)| *r >= n || *c >= n) {
            return Err(Error::InvalidSpace(format!("entry ({r}, {c}) outside a {n}-dimensional space")));
        }
        let data = match kind {
            StorageKind::Dense => {
                let mut m = Mat::<C64>::zeros(n, n);
                for &(r, c, v) in trips {
                    m[(r, c)] += v;
                }
                Storage::Dense(m)
            }
            StorageKind::Sparse => Storage::Sparse(sparse_from_triplets(n, trips)),
        };
        Ok(Self { space: space.clone(), data })
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let kind = StorageKind::auto(space.total_dim());
        Self::from_triplets(space, &[], kind).expect("empty operator")
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn storage(&self) -> &Storage {
        &self.data
    }

    pub fn kind(&self) -> StorageKind {
        match self.data {
            Storage::Dense(_) => StorageKind::Dense,
            Storage::Sparse(_) => StorageKind::Sparse,
        }
    }

    pub fn with_storage(&self, kind: StorageKind) -> Self {
        if kind == self.kind() {
            return self.clone();
        }
        Self::from_triplets(&self.space, &self.entries(), kind).expect("same space")
    }

    pub fn to_dense(&self) -> Mat<C64> {
        match &self.data {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(s) => s.to_dense(),
        }
    }

    /// Structurally nonzero entries as (row, col, value).
    pub fn entries(&self) -> Vec<(usize, usize, C64)> {
        match &self.data {
            Storage::Dense(m) => dense_entries(m),
            Storage::Sparse(s) => sparse_entries(s),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        match &self.data {
            Storage::Dense(m) => m[(row, col)],
            Storage::Sparse(s) => {
                let cp = s.symbolic().col_ptr();
                let ri = s.symbolic().row_idx();
                (cp[col]..cp[col + 1])
                    .find(|&k| ri[k] == row)
                    .map(|k| s.val()[k])
                    .unwrap_or_default()
            }
        }
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                left: self.space.mode_dims.clone(),
                right: other.space.mode_dims.clone(),
            });
        }
        Ok(())
    }

    fn wrap(&self, data: Storage) -> Self {
        Self { space: self.space.clone(), data }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(match (&self.data, &other.data) {
            (Storage::Sparse(a), Storage::Sparse(b)) => self.wrap(Storage::Sparse(
                faer::sparse::ops::add(a.as_ref(), b.as_ref())
                    .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?,
            )),
            _ => self.wrap(Storage::Dense(self.to_dense() + other.to_dense())),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(c64(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(match (&self.data, &other.data) {
            (Storage::Sparse(a), Storage::Sparse(b)) => self.wrap(Storage::Sparse(
                faer::sparse::linalg::matmul::sparse_sparse_matmul(a.as_ref(), b.as_ref(), c64(1.0, 0.0), Par::Seq)
                    .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?,
            )),
            (Storage::Dense(a), Storage::Dense(b)) => self.wrap(Storage::Dense(a * b)),
            _ => self.wrap(Storage::Dense(self.to_dense() * other.to_dense())),
        })
    }

    pub fn scale(&self, s: C64) -> Self {
        match &self.data {
            Storage::Dense(m) => self.wrap(Storage::Dense(faer::Scale(s) * m)),
            Storage::Sparse(m) => {
                let trips: Vec<_> = sparse_entries(m).into_iter().map(|(r, c, v)| (r, c, v * s)).collect();
                self.wrap(Storage::Sparse(sparse_from_triplets(self.dim(), &trips)))
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        match &self.data {
            Storage::Dense(m) => self.wrap(Storage::Dense(m.adjoint().to_owned())),
            Storage::Sparse(m) => {
                let trips: Vec<_> = sparse_entries(m).into_iter().map(|(r, c, v)| (c, r, v.conj())).collect();
                self.wrap(Storage::Sparse(sparse_from_triplets(self.dim(), &trips)))
            }
        }
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn combine(&self, op: Combine<'_>) -> Result<Self> {
        match op {
            Combine::Add(b) => self.add(b),
            Combine::Multiply(b) => self.mul(b),
            Combine::Scale(s) => Ok(self.scale(s)),
            Combine::Adjoint => Ok(self.adjoint()),
            Combine::Commutator(b) => self.commutator(b),
        }
    }

    /// (A + A†)/2
    pub fn hermitian_part(&self) -> Self {
        self.add(&self.adjoint()).expect("same space").scale(c64(0.5, 0.0))
    }

    /// (A − A†)/2
    pub fn anti_hermitian_part(&self) -> Self {
        self.sub(&self.adjoint()).expect("same space").scale(c64(0.5, 0.0))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_space(other)?;
        let d = self.sub(other)?;
        Ok(d.entries().iter().map(|e| e.2.norm()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()).map(|d| d <= tol).unwrap_or(false)
    }

    /// y = A x
    pub fn apply_slice(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::default());
        match &self.data {
            Storage::Dense(m) => {
                for j in 0..m.ncols() {
                    let xj = x[j];
                    if xj == C64::default() {
                        continue;
                    }
                    for i in 0..m.nrows() {
                        y[i] += m[(i, j)] * xj;
                    }
                }
            }
            Storage::Sparse(s) => {
                let cp = s.symbolic().col_ptr();
                let ri = s.symbolic().row_idx();
                let val = s.val();
                for j in 0..s.ncols() {
                    for k in cp[j]..cp[j + 1] {
                        y[ri[k]] += val[k] * x[j];
                    }
                }
            }
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if self.space != psi.space {
            return Err(Error::SpaceMismatch {
                left: self.space.mode_dims.clone(),
                right: psi.space.mode_dims.clone(),
            });
        }
        let mut out = vec![C64::default(); self.dim()];
        self.apply_slice(&psi.amps, &mut out);
        Ok(StateVector { space: self.space.clone(), amps: out })
    }
}

/// Kronecker embedding of a single-mode matrix at `mode`, identity elsewhere.
pub fn embed(space: &HilbertSpace, mode: usize, local: &Mat<C64>) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let d = space.mode_dims[mode];
    if local.nrows() != d || local.ncols() != d {
        return Err(Error::LengthMismatch { expected: d, got: local.nrows() });
    }
    let loc = dense_entries(local);
    let stride = space.stride(mode);
    let n = space.total_dim();
    let mut trips = Vec::with_capacity(loc.len() * (n / d));
    for col in 0..n {
        let level = (col / stride) % d;
        let base = col - level * stride;
        for &(r, c, v) in loc.iter().filter(|e| e.1 == level) {
            debug_assert_eq!(c, level);
            trips.push((base + r * stride, col, v));
        }
    }
    OperatorMatrix::from_triplets(space, &trips, StorageKind::auto(n))
}

fn local_lowering(d: usize) -> Mat<C64> {
    Mat::from_fn(d, d, |i, j| if j == i + 1 { c64((j as f64).sqrt(), 0.0) } else { C64::default() })
}

pub fn annihilation(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    embed(space, mode, &local_lowering(space.mode_dims[mode]))
}

pub fn creation(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    Ok(annihilation(space, mode)?.adjoint())
}

pub fn number(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    creation(space, mode)?.mul(&annihilation(space, mode)?)
}

pub fn identity(space: &HilbertSpace) -> OperatorMatrix {
    let n = space.total_dim();
    let trips: Vec<_> = (0..n).map(|i| (i, i, c64(1.0, 0.0))).collect();
    OperatorMatrix::from_triplets(space, &trips, StorageKind::auto(n)).expect("diagonal in range")
}

/// Q = b + b†
pub fn displacement_q(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    let b = annihilation(space, mode)?;
    b.add(&b.adjoint())
}

/// P = −i(b − b†)
pub fn momentum_p(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    let b = annihilation(space, mode)?;
    Ok(b.sub(&b.adjoint())?.scale(c64(0.0, -1.0)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: HilbertSpace,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(space: &HilbertSpace, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != space.total_dim() {
            return Err(Error::LengthMismatch { expected: space.total_dim(), got: amps.len() });
        }
        Ok(Self { space: space.clone(), amps })
    }

    pub fn basis(space: &HilbertSpace, levels: &[usize]) -> Result<Self> {
        let mut amps = vec![C64::default(); space.total_dim()];
        amps[space.index(levels)?] = c64(1.0, 0.0);
        Ok(Self { space: space.clone(), amps })
    }

    pub fn vacuum(space: &HilbertSpace) -> Self {
        Self::basis(space, &vec![0; space.n_modes()]).expect("vacuum exists")
    }

    /// Truncated, renormalized coherent state in `mode`, vacuum elsewhere.
    pub fn coherent(space: &HilbertSpace, mode: usize, alpha: C64) -> Result<Self> {
        space.check_mode(mode)?;
        let d = space.mode_dims[mode];
        let mut local = Vec::with_capacity(d);
        let mut coef = c64((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 0..d {
            if n > 0 {
                coef = coef * alpha / (n as f64).sqrt();
            }
            local.push(coef);
        }
        let mut amps = vec![C64::default(); space.total_dim()];
        let stride = space.stride(mode);
        for (n, a) in local.into_iter().enumerate() {
            amps[n * stride] = a;
        }
        let mut psi = Self { space: space.clone(), amps };
        psi.normalize();
        Ok(psi)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                left: self.space.mode_dims.clone(),
                right: other.space.mode_dims.clone(),
            });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Anything an operator expectation value can be taken in.
pub trait ExpectationTarget {
    fn target_space(&self) -> &HilbertSpace;
    fn expect_unchecked(&self, a: &OperatorMatrix) -> C64;
}

impl ExpectationTarget for StateVector {
    fn target_space(&self) -> &HilbertSpace {
        &self.space
    }

    fn expect_unchecked(&self, a: &OperatorMatrix) -> C64 {
        let mut out = vec![C64::default(); self.amps.len()];
        a.apply_slice(&self.amps, &mut out);
        self.amps.iter().zip(&out).map(|(x, y)| x.conj() * y).sum()
    }
}

/// Tr(Aρ) or ⟨ψ|A|ψ⟩.
pub fn expectation<T: ExpectationTarget + ?Sized>(a: &OperatorMatrix, state: &T) -> Result<C64> {
    if a.space() != state.target_space() {
        return Err(Error::SpaceMismatch {
            left: a.space().mode_dims.clone(),
            right: state.target_space().mode_dims.clone(),
        });
    }
    Ok(state.expect_unchecked(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn space_dims() {
        assert_eq!(make_space(&[6, 6]).unwrap().total_dim(), 36);
        assert_eq!(make_space(&[4, 4, 8]).unwrap().total_dim(), 128);
        assert!(make_space(&[1]).is_err());
        assert!(make_space(&[3, 0]).is_err());
        let s = make_space(&[3, 4, 2]).unwrap();
        for i in 0..s.total_dim() {
            assert_eq!(s.index(&s.levels(i)).unwrap(), i);
        }
    }

    #[test]
    fn ladder_action() {
        let s = make_space(&[3]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let out = a.apply(&StateVector::basis(&s, &[2]).unwrap()).unwrap();
        assert!(close(out.amplitudes()[1], c64(2f64.sqrt(), 0.0), 1e-15));
        let vac = a.apply(&StateVector::vacuum(&s)).unwrap();
        assert_eq!(vac.norm(), 0.0);
        assert!(annihilation(&s, 1).is_err());
    }

    #[test]
    fn second_mode_embedding_by_hand() {
        // dim-9 Kronecker product I ⊗ a written out: |m,n> -> sqrt(n)|m,n-1>
        let s = make_space(&[3, 3]).unwrap();
        let a1 = annihilation(&s, 1).unwrap().to_dense();
        let mut expected = Mat::<C64>::zeros(9, 9);
        for m in 0..3 {
            for n in 1..3 {
                expected[(3 * m + n - 1, 3 * m + n)] = c64((n as f64).sqrt(), 0.0);
            }
        }
        assert_eq!((a1 - &expected).norm_max(), 0.0);
        let out = annihilation(&s, 1).unwrap().apply(&StateVector::basis(&s, &[0, 2]).unwrap()).unwrap();
        assert_eq!(out, {
            let mut v = StateVector::basis(&s, &[0, 1]).unwrap();
            v.amps[1] = c64(2f64.sqrt(), 0.0);
            v
        });
    }

    #[test]
    fn number_q_p() {
        let s = make_space(&[4]).unwrap();
        let n = number(&s, 0).unwrap().to_dense();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { i as f64 } else { 0.0 };
                assert!(close(n[(i, j)], c64(want, 0.0), 1e-15));
            }
        }
        let q = displacement_q(&s, 0).unwrap();
        assert!(q.is_hermitian(0.0));
        assert!(close(q.get(1, 0), c64(1.0, 0.0), 1e-15));
        assert!(momentum_p(&s, 0).unwrap().is_hermitian(0.0));
    }

    #[test]
    fn commutator_truncation_defect() {
        let s = make_space(&[4]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let c = a.combine(Combine::Commutator(&creation(&s, 0).unwrap())).unwrap().to_dense();
        let diag = [1.0, 1.0, 1.0, -3.0];
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { diag[i] } else { 0.0 };
                assert!(close(c[(i, j)], c64(want, 0.0), 1e-14));
            }
        }
    }

    #[test]
    fn scale_and_adjoint() {
        let s = make_space(&[3, 2]).unwrap();
        let a = annihilation(&s, 0).unwrap().add(&number(&s, 1).unwrap().scale(c64(0.3, 2.0))).unwrap();
        let k = c64(1.5, -0.7);
        let lhs = a.scale(k).adjoint();
        let rhs = a.adjoint().scale(k.conj());
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15);
        assert_eq!(a.combine(Combine::Scale(C64::default())).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn expectations() {
        let s = make_space(&[5]).unwrap();
        let n = number(&s, 0).unwrap();
        let two = StateVector::basis(&s, &[2]).unwrap();
        assert!(close(expectation(&n, &two).unwrap(), c64(2.0, 0.0), 1e-14));
        let a = annihilation(&s, 0).unwrap();
        assert_eq!(expectation(&a, &StateVector::vacuum(&s)).unwrap(), C64::default());

        // independent sum: <n> = Σ n |α|^{2n}/n! / Σ |α|^{2n}/n! over the kept levels
        let s10 = make_space(&[10]).unwrap();
        let alpha = 0.3f64;
        let psi = StateVector::coherent(&s10, 0, c64(alpha, 0.0)).unwrap();
        let (mut num, mut den, mut fact) = (0.0, 0.0, 1.0);
        for k in 0..10 {
            if k > 0 {
                fact *= k as f64;
            }
            let w = alpha.powi(2 * k) / fact;
            num += k as f64 * w;
            den += w;
        }
        let got = expectation(&number(&s10, 0).unwrap(), &psi).unwrap().re;
        assert!((got - num / den).abs() < 1e-12);
        assert!((got - 0.09).abs() < 1e-6);
        assert!(psi.norm() <= 1.0 + 1e-12);

        let other = make_space(&[4]).unwrap();
        assert!(expectation(&number(&other, 0).unwrap(), &two).is_err());
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let a = annihilation(&make_space(&[3]).unwrap(), 0).unwrap();
        let b = annihilation(&make_space(&[4]).unwrap(), 0).unwrap();
        assert!(a.add(&b).is_err());
        assert!(a.combine(Combine::Multiply(&b)).is_err());
        assert!(a.commutator(&b).is_err());
    }

    #[test]
    fn storage_choice() {
        assert_eq!(annihilation(&make_space(&[6, 6]).unwrap(), 0).unwrap().kind(), StorageKind::Dense);
        assert_eq!(annihilation(&make_space(&[4, 4, 16]).unwrap(), 2).unwrap().kind(), StorageKind::Sparse);
    }
}
