//! Closed-form weak-driving results for κ = 0: two-photon amplitude
//! equations, their steady states, g²(0) in both cavities, and the effective
//! optical noise left after eliminating the mechanics.

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::Serialize;

use crate::model::{derived_couplings, thermal_occupation, SystemParams, HBAR, K_B};
use crate::ode::{integrate, OdeOptions};
use crate::{c64, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PoleStatus {
    /// J² = Δ_cΔ_e: single-photon amplitudes diverge.
    PoleDJ,
    /// f_A = 0: both g² diverge.
    PoleFA,
    /// J = −Δ_c: empty-cavity g² diverges.
    PoleJPlusDeltaC,
}

impl fmt::Display for PoleStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoleStatus::PoleDJ => "pole_DJ",
            PoleStatus::PoleFA => "pole_fA",
            PoleStatus::PoleJPlusDeltaC => "pole_JplusDeltaC",
        })
    }
}

/// Treats `x` as zero when it is round-off relative to `scale`.
fn vanishes(x: f64, scale: f64) -> bool {
    x.abs() <= 1e-13 * scale
}

fn fa_vanishes(p: &SystemParams) -> bool {
    let d = derived_couplings(p);
    let scale = (2.0 * p.omega_m * d.k * d.d_j).abs() + d.g.norm() * (d.d_j.abs() + p.delta_e * p.delta_e);
    d.f_a.norm() <= 1e-13 * scale
}

#[derive(Clone, Debug, PartialEq)]
pub struct G2Analytic {
    /// +∞ at a pole.
    pub g2_c: f64,
    pub g2_e: f64,
    pub poles: Vec<PoleStatus>,
}

pub fn g2_analytic(p: &SystemParams) -> G2Analytic {
    let d = derived_couplings(p);
    let jc = p.j + p.delta_c;
    let mut poles = Vec::new();
    let fa_zero = fa_vanishes(p);
    if fa_zero {
        poles.push(PoleStatus::PoleFA);
    }
    let jc_zero = vanishes(jc, p.j.abs().max(p.delta_c.abs()));
    if jc_zero {
        poles.push(PoleStatus::PoleJPlusDeltaC);
    }
    let g2_c = if fa_zero {
        f64::INFINITY
    } else {
        ((2.0 * p.omega_m * d.k * d.d_j) / d.f_a).norm_sqr()
    };
    let g2_e = if fa_zero || jc_zero {
        f64::INFINITY
    } else {
        let num = (d.g * d.f_b + 2.0 * p.omega_m * d.k * jc * jc) * d.d_j;
        (num / (d.f_a * (jc * jc))).norm_sqr()
    };
    G2Analytic { g2_c, g2_e, poles }
}

/// Amplitudes of |00>, |10>, |01>, |11>, |20>, |02>.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedState {
    pub c0: C64,
    pub cc: C64,
    pub ce: C64,
    pub cce: C64,
    pub ccc: C64,
    pub cee: C64,
}

impl TruncatedState {
    pub fn vacuum() -> Self {
        let z = C64::default();
        Self { c0: c64(1.0, 0.0), cc: z, ce: z, cce: z, ccc: z, cee: z }
    }

    pub fn to_vec(self) -> Vec<C64> {
        vec![self.c0, self.cc, self.ce, self.cce, self.ccc, self.cee]
    }

    fn from_slice(v: &[C64]) -> Self {
        Self { c0: v[0], cc: v[1], ce: v[2], cce: v[3], ccc: v[4], cee: v[5] }
    }

    /// 2|C_cc|²/|C_c|⁴.
    pub fn g2_c(&self) -> f64 {
        2.0 * self.ccc.norm_sqr() / self.cc.norm_sqr().powi(2)
    }

    /// 2|C_ee|²/|C_e|⁴.
    pub fn g2_e(&self) -> f64 {
        2.0 * self.cee.norm_sqr() / self.ce.norm_sqr().powi(2)
    }

    fn norm_sqr(&self) -> f64 {
        self.to_vec().iter().map(|v| v.norm_sqr()).sum()
    }

    /// Mean photon numbers of the normalized truncated state.
    pub fn occupations(&self) -> (f64, f64) {
        let z = self.norm_sqr();
        let n_c = (self.cc.norm_sqr() + self.cce.norm_sqr() + 2.0 * self.ccc.norm_sqr()) / z;
        let n_e = (self.ce.norm_sqr() + self.cce.norm_sqr() + 2.0 * self.cee.norm_sqr()) / z;
        (n_c, n_e)
    }

    /// Smallest ratio between successive excitation orders.
    pub fn hierarchy_ratio(&self) -> f64 {
        let one = self.cc.norm().max(self.ce.norm());
        let one_min = self.cc.norm().min(self.ce.norm());
        let two = self.cce.norm().max(self.ccc.norm()).max(self.cee.norm());
        (self.c0.norm() / one).min(one_min / two)
    }

    /// Diagnostic only: the weak-driving ordering holds with ratio ≥ 5.
    pub fn is_weakly_driven(&self) -> bool {
        self.hierarchy_ratio() >= 5.0
    }
}

/// Steady amplitudes for equal drives ε_c = ε_e.
pub fn amplitude_steady_states(p: &SystemParams) -> Result<TruncatedState> {
    if p.eps_c != p.eps_e {
        return Err(Error::InvalidParams(format!(
            "closed-form amplitudes need equal drives (eps_c = {}, eps_e = {})",
            p.eps_c, p.eps_e
        )));
    }
    let eps = p.eps_c;
    let d = derived_couplings(p);
    if vanishes(d.d_j, (p.j * p.j).max((p.delta_c * p.delta_e).abs())) {
        return Err(Error::Pole(PoleStatus::PoleDJ));
    }
    if fa_vanishes(p) {
        return Err(Error::Pole(PoleStatus::PoleFA));
    }
    let (j, dc, de, k, wm, g) = (p.j, p.delta_c, p.delta_e, d.k, p.omega_m, d.g);
    let den = d.f_a * d.d_j;
    let e2 = eps * eps;
    Ok(TruncatedState {
        c0: c64(1.0, 0.0),
        cc: c64(-eps * (j + de) / d.d_j, 0.0),
        ce: c64(-eps * (j + dc) / d.d_j, 0.0),
        cce: (g * (j + k) + 2.0 * k * wm * (j + dc)) * (e2 * (j + de)) / den,
        ccc: c64(SQRT_2 * k * e2 * wm * (j + de) * (j + de), 0.0) / den,
        cee: (g * (2.0 * j * (j + k) + k * dc) + 2.0 * k * wm * (j + dc) * (j + dc)) * e2 / (den * SQRT_2),
    })
}

/// Integrates the amplitude equations with C₀ held fixed.
///
/// `damping` adds a decay of `damping` per photon; zero gives the lossless
/// dynamics, which oscillate forever instead of settling.
pub fn amplitude_dynamics(
    p: &SystemParams,
    t_grid: &[f64],
    initial: &TruncatedState,
    damping: f64,
) -> Result<Vec<TruncatedState>> {
    let d = derived_couplings(p);
    let kerr = d.g / (2.0 * p.omega_m);
    let (ec, ee, j) = (p.eps_c, p.eps_e, p.j);
    let (dc, de) = (p.delta_c, p.delta_e);
    let mi = c64(0.0, -1.0);
    let rhs = |_: f64, y: &[C64], dy: &mut [C64]| {
        let s = TruncatedState::from_slice(y);
        dy[0] = C64::default();
        dy[1] = mi * (s.c0 * ec + s.ce * j - s.cc * dc) - s.cc * damping;
        dy[2] = mi * (s.c0 * ee + s.cc * j - s.ce * de) - s.ce * damping;
        dy[3] = mi * (s.cc * ee + s.ce * ec + (s.cee + s.ccc) * (SQRT_2 * j) - s.cce * (dc + de)) - s.cce * (2.0 * damping);
        dy[4] = mi * (s.cc * (SQRT_2 * ec) + s.cce * (SQRT_2 * j) - s.ccc * ((kerr + dc) * 2.0)) - s.ccc * (2.0 * damping);
        dy[5] = mi * (s.ce * (SQRT_2 * ee) + s.cce * (SQRT_2 * j) - s.cee * (2.0 * de)) - s.cee * (2.0 * damping);
    };
    let opts = OdeOptions { rtol: 1e-10, atol: 1e-16, ..OdeOptions::default() };
    let (traj, _) = integrate(rhs, t_grid, &initial.to_vec(), &opts)?;
    Ok(traj.iter().map(|v| TruncatedState::from_slice(v)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseReport {
    pub n_eff: f64,
    /// √n_eff
    pub xi_amp: f64,
    /// Kelvin.
    pub t_eff: f64,
    /// Thermal phonon number used.
    pub n_th: f64,
    /// A factorial-moment radicand was negative and set to zero.
    pub clamped: bool,
    /// The leading coefficient was complex; its contribution entered by modulus.
    pub term1_complex: bool,
}

pub fn effective_noise(p: &SystemParams, n_bar: f64, t_b: f64) -> Result<NoiseReport> {
    effective_noise_with(p, n_bar, t_b, p.omega_m)
}

/// Effective occupation of the optical bath for mean photon number `n_bar` and
/// phonon bath temperature `t_b`, converted to a temperature at `omega_ref`.
pub fn effective_noise_with(p: &SystemParams, n_bar: f64, t_b: f64, omega_ref: f64) -> Result<NoiseReport> {
    if !(n_bar >= 0.0) || !(t_b >= 0.0) {
        return Err(Error::InvalidParams(format!("need N_bar >= 0 and T_b >= 0 (got {n_bar}, {t_b})")));
    }
    let (wm, kc, gw, gk) = (p.omega_m, p.kappa_c, p.g_omega, p.g_kappa);
    let n_th = thermal_occupation(wm, t_b);
    let cubic = n_bar.powi(3) - 3.0 * n_bar * n_bar + 2.0 * n_bar;
    let pair = n_bar * n_bar - n_bar;
    let clamped = cubic < 0.0 || n_bar < 1.0 || pair < 0.0;

    let term1 = c64(gk.powi(4), 2.0 * gw * gk.powi(3)) / (16.0 * wm * wm * kc.powf(1.5));
    let term2 = (4.0 * gw * gw * gk * gk + gk.powi(4)) / (16.0 * wm * wm * kc);
    let term3 = (gk * gk + 4.0 * gw * gw) / (4.0 * wm * wm);
    let moments = (6.0 * cubic.max(0.0)).sqrt() - n_bar * (n_bar - 1.0).max(0.0).sqrt();
    let bracket = (term1 * moments).norm() + term2 * pair.max(0.0) + term3 * n_bar * n_th;
    let n_eff = if n_bar == 0.0 { 0.0 } else { bracket / kc };
    Ok(NoiseReport {
        n_eff,
        xi_amp: n_eff.sqrt(),
        t_eff: effective_temperature(n_eff, omega_ref),
        n_th,
        clamped,
        term1_complex: term1.im != 0.0,
    })
}

/// Temperature at which a mode of frequency `omega_ref` holds `n_eff` quanta.
pub fn effective_temperature(n_eff: f64, omega_ref: f64) -> f64 {
    if n_eff <= 0.0 {
        return 0.0;
    }
    HBAR * omega_ref / (K_B * (1.0 / n_eff).ln_1p())
}
