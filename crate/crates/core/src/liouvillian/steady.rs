//! Steady states of L vec(ρ) = 0 under Tr ρ = 1.
//!
//! Both solvers replace the (0,0) equation by the trace row. The direct path
//! factorizes that sparse system. The iterative path runs restarted GMRES on
//! the same system in matrix form, right-preconditioned by the exact inverse
//! of ρ ↦ Aρ + ρB (the jump terms are the only part left to iterate on).

use faer::linalg::solvers::DenseSolveCore;
use faer::prelude::*;
use faer::Mat;
use serde::{Deserialize, Serialize};

use super::{devectorize, vectorize, DensityMatrix, Superoperator};
use crate::fock::sparse_from_triplets;
use crate::{c64, Error, Result, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    /// Iterative first; direct when that fails and the system is small enough.
    #[default]
    Auto,
    Direct,
    Iterative,
}

#[derive(Clone, Copy, Debug)]
pub struct SteadyOptions {
    pub solver: SolverChoice,
    /// Largest superoperator side length the direct solver will factorize.
    pub direct_limit: usize,
    /// Target for the preconditioned GMRES residual.
    pub gmres_tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self { solver: SolverChoice::Auto, direct_limit: 4096, gmres_tol: 1e-13, restart: 80, max_iter: 3000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Direct,
    Iterative { iterations: usize },
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    /// Trace-normalized and Hermitized solution.
    pub rho: DensityMatrix,
    /// ‖L vec ρ‖₂ / ‖vec ρ‖₂
    pub residual: f64,
    /// Same, leaving out the (0,0) equation that the trace row replaced.
    pub constrained_residual: f64,
    /// |Tr(L ρ)|: rate of trace change, nonzero only for trace-breaking L.
    pub trace_drift: f64,
    pub method: SolveMethod,
}

impl SteadyState {
    /// The state as reported: negative round-off eigenvalues clipped.
    pub fn reported(&self) -> Result<DensityMatrix> {
        self.rho.clipped(1e-8)
    }
}

pub fn steady_state(l: &Superoperator) -> Result<SteadyState> {
    steady_state_with(l, &SteadyOptions::default())
}

pub fn steady_state_with(l: &Superoperator, opts: &SteadyOptions) -> Result<SteadyState> {
    match opts.solver {
        SolverChoice::Direct => direct(l),
        SolverChoice::Iterative => iterative(l, opts),
        SolverChoice::Auto => match iterative(l, opts) {
            Ok(s) => Ok(s),
            Err(e) if l.dim() <= opts.direct_limit => direct(l).map_err(|d| match d {
                Error::DegenerateSteadyState(_) => d,
                _ => e,
            }),
            Err(e) => Err(e),
        },
    }
}

fn finish(l: &Superoperator, x: Vec<C64>, method: SolveMethod) -> Result<SteadyState> {
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::DegenerateSteadyState("solution is not finite; the steady manifold is not unique".into()));
    }
    let raw = devectorize(l.space(), &x)?;
    let tr = raw.trace();
    if tr.norm() == 0.0 {
        return Err(Error::DegenerateSteadyState("solution has zero trace".into()));
    }
    let rho = raw.normalized().hermitized();
    let v = vectorize(&rho);
    let mut lv = vec![C64::default(); v.len()];
    l.apply(&v, &mut lv);
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let full: f64 = lv.iter().map(|a| a.norm_sqr()).sum();
    let constrained = (full - lv[0].norm_sqr()).max(0.0).sqrt() / norm;
    let n = rho.dim();
    let drift: C64 = (0..n).map(|i| lv[i * n + i]).sum();
    Ok(SteadyState { rho, residual: full.sqrt() / norm, constrained_residual: constrained, trace_drift: drift.norm(), method })
}

fn direct(l: &Superoperator) -> Result<SteadyState> {
    let n2 = l.dim();
    let n = l.space().total_dim();
    let m = l.matrix();
    let cp = m.symbolic().col_ptr();
    let ri = m.symbolic().row_idx();
    let val = m.val();
    let mut trips = Vec::with_capacity(val.len() + n);
    for j in 0..n2 {
        for k in cp[j]..cp[j + 1] {
            if ri[k] != 0 {
                trips.push((ri[k], j, val[k]));
            }
        }
    }
    for i in 0..n {
        trips.push((0, i * n + i, c64(1.0, 0.0)));
    }
    let sys = sparse_from_triplets(n2, &trips);
    let lu = sys.sp_lu().map_err(|e| Error::DegenerateSteadyState(format!("sparse LU failed: {e:?}")))?;
    let mut rhs = Mat::<C64>::zeros(n2, 1);
    rhs[(0, 0)] = c64(1.0, 0.0);
    lu.solve_in_place(rhs.as_mut());
    let x: Vec<C64> = (0..n2).map(|i| rhs[(i, 0)]).collect();

    // a singular constrained system means more than one steady state
    let mut check = vec![C64::default(); n2];
    super::Superop(&sys).apply(&x, &mut check);
    check[0] -= c64(1.0, 0.0);
    let xn = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let rn = check.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if !(rn <= 1e-6 * xn.max(1.0)) {
        return Err(Error::DegenerateSteadyState(format!("trace-constrained system is singular (residual {rn:e})")));
    }
    finish(l, x, SolveMethod::Direct)
}

/// Exact inverse of X ↦ AX + XB through the eigenvectors of A and B.
struct SylvesterInverse {
    va: Mat<C64>,
    va_inv: Mat<C64>,
    wb: Mat<C64>,
    wb_inv: Mat<C64>,
    denom: Mat<C64>,
}

fn eigen(m: &Mat<C64>) -> Result<(Mat<C64>, Vec<C64>, Mat<C64>)> {
    let ev = m.eigen().map_err(|e| Error::LinearAlgebra(format!("eigendecomposition failed: {e:?}")))?;
    let v = ev.U().to_owned();
    let lam: Vec<C64> = (0..m.nrows()).map(|i| ev.S()[i]).collect();
    let vinv = v.partial_piv_lu().inverse();
    let n = m.nrows();
    let defect = (&vinv * &v - Mat::<C64>::identity(n, n)).norm_max();
    if !(defect < 1e-6) {
        return Err(Error::LinearAlgebra(format!("eigenvector basis is ill-conditioned (defect {defect:e})")));
    }
    Ok((v, lam, vinv))
}

impl SylvesterInverse {
    fn new(a: &Mat<C64>, b: &Mat<C64>, sandwich: bool) -> Result<Self> {
        let (va, lam, va_inv) = eigen(a)?;
        let (wb, mu, wb_inv) = if sandwich {
            // B = A†: reuse A's basis
            (va_inv.adjoint().to_owned(), lam.iter().map(|v| v.conj()).collect(), va.adjoint().to_owned())
        } else {
            eigen(b)?
        };
        let scale = lam.iter().chain(&mu).map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        let floor = 1e-14 * scale;
        let n = a.nrows();
        let denom = Mat::from_fn(n, n, |i, k| {
            let d = lam[i] + mu[k];
            if d.norm() < floor {
                c64(floor, 0.0)
            } else {
                d
            }
        });
        Ok(Self { va, va_inv, wb, wb_inv, denom })
    }

    fn apply(&self, y: &Mat<C64>) -> Mat<C64> {
        let t = &self.va_inv * y * &self.wb;
        let n = t.nrows();
        let scaled = Mat::from_fn(n, n, |i, k| t[(i, k)] / self.denom[(i, k)]);
        &self.va * scaled * &self.wb_inv
    }
}

fn dot(p: &Mat<C64>, q: &Mat<C64>) -> C64 {
    let mut acc = C64::default();
    for j in 0..p.ncols() {
        for i in 0..p.nrows() {
            acc += p[(i, j)].conj() * q[(i, j)];
        }
    }
    acc
}

fn norm(p: &Mat<C64>) -> f64 {
    dot(p, p).re.sqrt()
}

fn trace(x: &Mat<C64>) -> C64 {
    (0..x.nrows()).map(|i| x[(i, i)]).sum()
}

fn iterative(l: &Superoperator, opts: &SteadyOptions) -> Result<SteadyState> {
    let n = l.space().total_dim();
    let sandwich = l.convention() == super::Convention::Sandwich;
    let pre = SylvesterInverse::new(l.left(), l.right(), sandwich)?;
    // constrained operator on preconditioned coordinates
    let op = |y: &Mat<C64>| -> Mat<C64> {
        let x = pre.apply(y);
        let mut r = l.apply_matrix(&x);
        r[(0, 0)] = trace(&x);
        r
    };
    let mut b = Mat::<C64>::zeros(n, n);
    b[(0, 0)] = c64(1.0, 0.0);

    let m = opts.restart.max(2);
    let mut y = Mat::<C64>::zeros(n, n);
    let mut total = 0usize;
    let mut last_beta = f64::INFINITY;
    loop {
        let r0 = &b - op(&y);
        let beta = norm(&r0);
        if beta <= opts.gmres_tol {
            break;
        }
        // stagnation at the round-off floor
        if beta > 0.9 * last_beta && beta < 1e-9 {
            break;
        }
        if total >= opts.max_iter {
            return Err(Error::NotConverged { iterations: total, residual: beta });
        }
        last_beta = beta;
        let mut basis = vec![faer::Scale(c64(1.0 / beta, 0.0)) * &r0];
        let mut h = vec![vec![C64::default(); m]; m + 1];
        let mut cs = vec![C64::default(); m];
        let mut sn = vec![C64::default(); m];
        let mut g = vec![C64::default(); m + 1];
        g[0] = c64(beta, 0.0);
        let mut used = 0;
        for k in 0..m {
            total += 1;
            let mut w = op(&basis[k]);
            for (i, v) in basis.iter().enumerate() {
                let hik = dot(v, &w);
                h[i][k] = hik;
                w -= faer::Scale(hik) * v;
            }
            let hn = norm(&w);
            h[k + 1][k] = c64(hn, 0.0);
            for i in 0..k {
                let t = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let r = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if r == 0.0 {
                return Err(Error::NotConverged { iterations: total, residual: g[k].norm() });
            }
            cs[k] = a / r;
            sn[k] = bb / r;
            h[k][k] = c64(r, 0.0);
            h[k + 1][k] = C64::default();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            used = k + 1;
            if g[k + 1].norm() <= opts.gmres_tol || hn <= 1e-300 || total >= opts.max_iter {
                break;
            }
            basis.push(faer::Scale(c64(1.0 / hn, 0.0)) * &w);
        }
        let mut coef = vec![C64::default(); used];
        for i in (0..used).rev() {
            let mut acc = g[i];
            for j in i + 1..used {
                acc -= h[i][j] * coef[j];
            }
            coef[i] = acc / h[i][i];
        }
        for (c, v) in coef.iter().zip(&basis) {
            y += faer::Scale(*c) * v;
        }
    }
    let x = pre.apply(&y);
    let v: Vec<C64> = (0..n * n).map(|k| x[(k % n, k / n)]).collect();
    finish(l, v, SolveMethod::Iterative { iterations: total })
}
