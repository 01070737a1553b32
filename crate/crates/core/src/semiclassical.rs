//! Noise-free mean-field dynamics. Operators are replaced by their means
//! with the closure ⟨a†aa⟩ → |α|²α, so this tier says nothing about g².

use crate::model::SystemParams;
use crate::ode::{integrate, OdeOptions};
use crate::{c64, Error, Result, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanFieldState {
    pub q: f64,
    pub p: f64,
    pub alpha_c: C64,
    pub alpha_e: C64,
}

impl MeanFieldState {
    fn to_vec(self) -> Vec<C64> {
        vec![c64(self.q, 0.0), c64(self.p, 0.0), self.alpha_c, self.alpha_e]
    }

    fn from_slice(v: &[C64]) -> Self {
        Self { q: v[0].re, p: v[1].re, alpha_c: v[2], alpha_e: v[3] }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Time derivative of the three-mode mean field.
pub fn full_rhs(s: &MeanFieldState, p: &SystemParams) -> MeanFieldState {
    let i = c64(0.0, 1.0);
    let nc = s.alpha_c.norm_sqr();
    let loss = if p.kappa_c > 0.0 { 0.5 * (p.kappa_c + p.g_kappa * s.q) } else { 0.5 * p.g_kappa * s.q };
    MeanFieldState {
        q: p.omega_m * s.p,
        p: -p.g_omega * nc - p.omega_m * s.q - p.gamma * s.p,
        alpha_c: (i * (p.delta_c - p.g_omega * s.q) - loss) * s.alpha_c - i * p.j * s.alpha_e + p.eps_c,
        alpha_e: (i * p.delta_e - 0.5 * p.kappa_e) * s.alpha_e - i * p.j * s.alpha_c + p.eps_e,
    }
}

/// Coefficient of |α_c|²α_c left after adiabatically eliminating the mechanics.
pub fn nonlinear_coefficient(p: &SystemParams) -> C64 {
    c64(p.g_kappa * p.g_omega, 2.0 * p.g_omega * p.g_omega) / (2.0 * p.omega_m)
}

/// Time derivatives of the reduced optical mean field.
pub fn reduced_rhs(alpha_c: C64, alpha_e: C64, p: &SystemParams) -> (C64, C64) {
    let i = c64(0.0, 1.0);
    let dc = (i * p.delta_c - 0.5 * p.kappa_c) * alpha_c - i * p.j * alpha_e
        + p.eps_c
        + nonlinear_coefficient(p) * alpha_c.norm_sqr() * alpha_c;
    let de = (i * p.delta_e - 0.5 * p.kappa_e) * alpha_e - i * p.j * alpha_c + p.eps_e;
    (dc, de)
}

fn semiclassical_tolerance() -> OdeOptions {
    OdeOptions { rtol: 1e-10, atol: 1e-18, ..OdeOptions::default() }
}

pub fn evolve_full(p: &SystemParams, s0: &MeanFieldState, t_grid: &[f64]) -> Result<Vec<MeanFieldState>> {
    let rhs = |_: f64, y: &[C64], dy: &mut [C64]| {
        let d = full_rhs(&MeanFieldState::from_slice(y), p);
        dy.copy_from_slice(&d.to_vec());
    };
    let (traj, _) = integrate(rhs, t_grid, &s0.to_vec(), &semiclassical_tolerance())?;
    Ok(traj.iter().map(|v| MeanFieldState::from_slice(v)).collect())
}

pub fn evolve_reduced(p: &SystemParams, alpha0: (C64, C64), t_grid: &[f64]) -> Result<Vec<(C64, C64)>> {
    let rhs = |_: f64, y: &[C64], dy: &mut [C64]| {
        let (a, b) = reduced_rhs(y[0], y[1], p);
        dy[0] = a;
        dy[1] = b;
    };
    let (traj, _) = integrate(rhs, t_grid, &[alpha0.0, alpha0.1], &semiclassical_tolerance())?;
    Ok(traj.iter().map(|v| (v[0], v[1])).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPoint {
    pub alpha_c: C64,
    pub alpha_e: C64,
    /// |rhs| at the returned point.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves the linear problem with an extra diagonal term `chi` on the c mode.
fn linear_solve(p: &SystemParams, chi: C64) -> Result<(C64, C64)> {
    let i = c64(0.0, 1.0);
    let m11 = i * p.delta_c - 0.5 * p.kappa_c + chi;
    let m12 = -i * p.j;
    let m22 = i * p.delta_e - 0.5 * p.kappa_e;
    let det = m11 * m22 - m12 * m12;
    if det.norm() == 0.0 {
        return Err(Error::InvalidParams("mean-field linear system is singular".into()));
    }
    let (bc, be) = (c64(-p.eps_c, 0.0), c64(-p.eps_e, 0.0));
    Ok(((bc * m22 - m12 * be) / det, (m11 * be - m12 * bc) / det))
}

/// Fixed point of the reduced equations by damped self-consistent iteration,
/// starting from the solution without the nonlinearity.
pub fn reduced_fixed_point(p: &SystemParams) -> Result<FixedPoint> {
    let chi = nonlinear_coefficient(p);
    let (mut ac, mut ae) = linear_solve(p, C64::default())?;
    let max_iter = 10_000;
    for it in 1..=max_iter {
        let (nc, ne) = linear_solve(p, chi * ac.norm_sqr())?;
        let step = ((nc - ac).norm_sqr() + (ne - ae).norm_sqr()).sqrt();
        let size = (nc.norm_sqr() + ne.norm_sqr()).sqrt();
        ac = 0.5 * (ac + nc);
        ae = 0.5 * (ae + ne);
        if step <= 1e-14 * size || size == 0.0 {
            let (rc, re) = reduced_rhs(ac, ae, p);
            return Ok(FixedPoint { alpha_c: ac, alpha_e: ae, residual: (rc.norm_sqr() + re.norm_sqr()).sqrt(), iterations: it });
        }
    }
    let (rc, re) = reduced_rhs(ac, ae, p);
    Err(Error::NotConverged { iterations: max_iter, residual: (rc.norm_sqr() + re.norm_sqr()).sqrt() })
}

/// Integrates the full mean field from the origin for `t_end` and returns the end state.
pub fn full_long_time(p: &SystemParams, t_end: f64) -> Result<MeanFieldState> {
    Ok(*evolve_full(p, &MeanFieldState::default(), &[0.0, t_end])?.last().expect("two grid points"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3_point() -> SystemParams {
        SystemParams { gamma: 1e3, ..SystemParams::baseline().with_detuning(-1e5) }
    }

    #[test]
    fn undriven_origin_is_fixed() {
        let p = SystemParams { eps_c: 0.0, eps_e: 0.0, gamma: 10.0, ..SystemParams::baseline() };
        let d = full_rhs(&MeanFieldState::default(), &p);
        assert_eq!(d, MeanFieldState::default());
        let end = full_long_time(&p, 1e-3).unwrap();
        assert_eq!(end, MeanFieldState::default());
    }

    #[test]
    fn mechanics_decouple_without_dispersion() {
        let p = SystemParams { g_omega: 0.0, g_kappa: 0.0, gamma: 2e4, ..SystemParams::baseline() };
        let dark = SystemParams { eps_c: 0.0, eps_e: 0.0, ..p.clone() };
        let s0 = MeanFieldState { q: 1.0, ..Default::default() };
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 1e-5).collect();
        let lit = evolve_full(&p, &s0, &grid).unwrap();
        let off = evolve_full(&dark, &s0, &grid).unwrap();
        for (a, b) in lit.iter().zip(&off) {
            // step sequences differ, so only round-off separates them
            assert!((a.q - b.q).abs() < 1e-9 && (a.p - b.p).abs() < 1e-9);
        }
        // ring-down: mechanical energy decays at γ on average
        let end = evolve_full(&dark, &s0, &[0.0, 2e-4]).unwrap()[1];
        let energy = end.q * end.q + end.p * end.p;
        assert!((energy / (-p.gamma * 2e-4f64).exp() - 1.0).abs() < 0.05, "{energy}");
    }

    #[test]
    fn steady_displacement_follows_elimination() {
        let p = fig3_point();
        let s = full_long_time(&p, 50.0 / p.gamma).unwrap();
        let want = -p.g_omega * s.alpha_c.norm_sqr() / p.omega_m;
        assert!((s.q - want).abs() <= 1e-6 * want.abs(), "{} vs {want}", s.q);
    }

    #[test]
    fn linear_fixed_point_matches_closed_form() {
        let p = SystemParams { g_omega: 0.0, g_kappa: 0.0, ..SystemParams::baseline().with_detuning(-7e4) };
        let f = reduced_fixed_point(&p).unwrap();
        // Cramer's rule on (iΔ_c − κ_c/2)α_c − iJα_e = −ε_c and partner
        let i = c64(0.0, 1.0);
        let a = i * p.delta_c - 0.5 * p.kappa_c;
        let d = i * p.delta_e - 0.5 * p.kappa_e;
        let b = -i * p.j;
        let det = a * d - b * b;
        let ac = (-p.eps_c * d + b * p.eps_e) / det;
        let ae = (-a * p.eps_e + b * p.eps_c) / det;
        assert!((f.alpha_c - ac).norm() < 1e-13 * ac.norm());
        assert!((f.alpha_e - ae).norm() < 1e-13 * ae.norm());
        assert!(f.residual < 1e-9);
    }

    #[test]
    fn nonlinearity_vanishes_for_dark_cavity() {
        let p = SystemParams::baseline();
        let (a, _) = reduced_rhs(C64::default(), c64(0.3, 0.1), &p);
        let lin = SystemParams { g_omega: 0.0, g_kappa: 0.0, ..p.clone() };
        let (b, _) = reduced_rhs(C64::default(), c64(0.3, 0.1), &lin);
        assert_eq!(a, b);
    }

    #[test]
    fn nonlinear_gain_opposes_loss() {
        let p = SystemParams::baseline();
        let chi = nonlinear_coefficient(&p);
        assert_eq!(chi.re, p.g_kappa * p.g_omega / (2.0 * p.omega_m));
        assert!(chi.re > 0.0 && -0.5 * p.kappa_c < 0.0);
    }

    #[test]
    fn reduced_and_full_agree() {
        let p = fig3_point();
        let full = full_long_time(&p, 50.0 / p.gamma).unwrap();
        let red = reduced_fixed_point(&p).unwrap();
        let (a, b) = (full.alpha_c.norm_sqr(), red.alpha_c.norm_sqr());
        assert!((a - b).abs() / b < 1e-3, "{a} vs {b}");
    }

    #[test]
    fn weak_drive_is_linear() {
        let p = SystemParams::baseline().with_detuning(-1e5);
        let half = SystemParams { eps_c: p.eps_c / 2.0, eps_e: p.eps_e / 2.0, ..p.clone() };
        let a = reduced_fixed_point(&p).unwrap().alpha_c.norm();
        let b = reduced_fixed_point(&half).unwrap().alpha_c.norm();
        assert!((b / a - 0.5).abs() < 0.005);
    }
}
