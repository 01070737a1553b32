//! Physical parameters, Hamiltonians and collapse operators.
//!
//! All rates are angular frequencies in rad/s with ħ = 1. Operators are built
//! on spaces ordered (c, e) for the effective model and (c, e, b) for the full
//! three-mode model.

use serde::{Deserialize, Serialize};

use crate::fock::{self, HilbertSpace, OperatorMatrix};
use crate::{c64, Error, Result, C64};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;

/// Mean thermal occupation of a mode of angular frequency `omega` at `temp` kelvin.
pub fn thermal_occupation(omega: f64, temp: f64) -> f64 {
    if temp <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * temp)).exp_m1()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub omega_m: f64,
    pub kappa_c: f64,
    pub kappa_e: f64,
    pub gamma: f64,
    pub g_omega: f64,
    pub g_kappa: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub delta_c: f64,
    pub delta_e: f64,
    pub eps_c: f64,
    pub eps_e: f64,
    pub n_th: f64,
    #[serde(rename = "T_b", default, skip_serializing_if = "Option::is_none")]
    pub t_b: Option<f64>,
}

impl SystemParams {
    /// Names accepted by [`Self::get`] and [`Self::set`], in config spelling.
    pub const FIELDS: &'static [&'static str] = &[
        "omega_m", "kappa_c", "kappa_e", "gamma", "g_omega", "g_kappa", "J", "delta_c", "delta_e", "eps_c",
        "eps_e", "n_th", "T_b",
    ];

    /// Reference parameter set shared by the figure presets, at zero detuning; no
    /// mechanical damping or thermal phonons.
    pub fn baseline() -> Self {
        Self {
            omega_m: 1e6,
            kappa_c: 5e3,
            kappa_e: 5e3,
            gamma: 0.0,
            g_omega: 200.0,
            g_kappa: 500.0,
            j: 2e5,
            delta_c: 0.0,
            delta_e: 0.0,
            eps_c: 5e3,
            eps_e: 5e3,
            n_th: 0.0,
            t_b: None,
        }
    }

    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.delta_c = delta;
        self.delta_e = delta;
        self
    }

    /// Sets T_b and the matching n_th.
    pub fn with_bath_temperature(mut self, t_b: f64) -> Self {
        self.t_b = Some(t_b);
        self.n_th = thermal_occupation(self.omega_m, t_b);
        self
    }

    /// Dispersive weight A = g_ω/κ_c.
    pub fn a_weight(&self) -> f64 {
        self.g_omega / self.kappa_c
    }

    /// Dissipative weight B = g_κ/κ_c.
    pub fn b_weight(&self) -> f64 {
        self.g_kappa / self.kappa_c
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "omega_m" => self.omega_m,
            "kappa_c" => self.kappa_c,
            "kappa_e" => self.kappa_e,
            "gamma" => self.gamma,
            "g_omega" => self.g_omega,
            "g_kappa" => self.g_kappa,
            "J" => self.j,
            "delta_c" => self.delta_c,
            "delta_e" => self.delta_e,
            "eps_c" => self.eps_c,
            "eps_e" => self.eps_e,
            "n_th" => self.n_th,
            "T_b" => return self.t_b,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "omega_m" => &mut self.omega_m,
            "kappa_c" => &mut self.kappa_c,
            "kappa_e" => &mut self.kappa_e,
            "gamma" => &mut self.gamma,
            "g_omega" => &mut self.g_omega,
            "g_kappa" => &mut self.g_kappa,
            "J" => &mut self.j,
            "delta_c" => &mut self.delta_c,
            "delta_e" => &mut self.delta_e,
            "eps_c" => &mut self.eps_c,
            "eps_e" => &mut self.eps_e,
            "n_th" => &mut self.n_th,
            "T_b" => {
                // keep the pair consistent when sweeping temperature
                *self = self.clone().with_bath_temperature(value);
                return Ok(());
            }
            _ => return Err(Error::InvalidParams(format!("no parameter named {name:?}"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for name in Self::FIELDS {
            if let Some(v) = self.get(name) {
                if !v.is_finite() {
                    return Err(Error::InvalidParams(format!("{name} = {v} is not finite")));
                }
            }
        }
        for (name, v) in [
            ("omega_m", self.omega_m),
            ("kappa_c", self.kappa_c),
            ("kappa_e", self.kappa_e),
            ("gamma", self.gamma),
            ("g_omega", self.g_omega),
            ("g_kappa", self.g_kappa),
            ("J", self.j),
            ("n_th", self.n_th),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParams(format!("{name} = {v} must be nonnegative")));
            }
        }
        if let Some(t) = self.t_b {
            if t < 0.0 {
                return Err(Error::InvalidParams(format!("T_b = {t} must be nonnegative")));
            }
            let expected = thermal_occupation(self.omega_m, t);
            let scale = expected.abs().max(f64::MIN_POSITIVE);
            if (self.n_th - expected).abs() > 1e-6 * scale && !(expected == 0.0 && self.n_th == 0.0) {
                return Err(Error::InvalidParams(format!(
                    "n_th = {} inconsistent with T_b = {t} K (expected {expected})",
                    self.n_th
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedCouplings {
    /// 2g_ω² − i g_κ g_ω
    pub g: C64,
    /// Δ_c + Δ_e
    pub k: f64,
    /// J² − Δ_c Δ_e
    pub d_j: f64,
    pub f_a: C64,
    pub f_b: f64,
}

pub fn derived_couplings(p: &SystemParams) -> DerivedCouplings {
    let g = c64(2.0 * p.g_omega * p.g_omega, -p.g_kappa * p.g_omega);
    let k = p.delta_c + p.delta_e;
    let d_j = p.j * p.j - p.delta_c * p.delta_e;
    let f_a = (g + 2.0 * p.omega_m * k) * d_j - g * (p.delta_e * p.delta_e);
    let f_b = 2.0 * p.j * p.j + 2.0 * p.j * k + p.delta_c * k;
    DerivedCouplings { g, k, d_j, f_a, f_b }
}

fn expect_modes(space: &HilbertSpace, n: usize, what: &str) -> Result<()> {
    if space.n_modes() != n {
        return Err(Error::InvalidSpace(format!(
            "{what} needs a {n}-mode space, got {} modes",
            space.n_modes()
        )));
    }
    Ok(())
}

fn re(x: f64) -> C64 {
    c64(x, 0.0)
}

/// Terms shared by both Hamiltonians: drives, tunneling and the e-cavity detuning.
fn optical_terms(p: &SystemParams, space: &HilbertSpace) -> Result<OperatorMatrix> {
    let ac = fock::annihilation(space, 0)?;
    let ae = fock::annihilation(space, 1)?;
    let acd = ac.adjoint();
    let aed = ae.adjoint();
    let ne = aed.mul(&ae)?;
    let hop = acd.mul(&ae)?.add(&ac.mul(&aed)?)?;
    ne.scale(re(-p.delta_e))
        .add(&hop.scale(re(p.j)))?
        .add(&ac.add(&acd)?.scale(re(p.eps_c)))?
        .add(&ae.add(&aed)?.scale(re(p.eps_e)))
}

/// Two-mode Hamiltonian with the complex Kerr term −(G/2ω_m) a_c†a_c†a_c a_c.
pub fn build_effective_hamiltonian(p: &SystemParams, space: &HilbertSpace) -> Result<OperatorMatrix> {
    expect_modes(space, 2, "effective Hamiltonian")?;
    let dc = derived_couplings(p);
    let ac = fock::annihilation(space, 0)?;
    let acd = ac.adjoint();
    let nc = acd.mul(&ac)?;
    let pair = acd.mul(&acd)?.mul(&ac)?.mul(&ac)?;
    optical_terms(p, space)?
        .add(&nc.scale(re(-p.delta_c)))?
        .add(&pair.scale(-dc.g / (2.0 * p.omega_m)))
}

/// Three-mode Hermitian Hamiltonian with detuning Δ_c − g_ω Q.
pub fn build_full_hamiltonian(p: &SystemParams, space: &HilbertSpace) -> Result<OperatorMatrix> {
    expect_modes(space, 3, "full Hamiltonian")?;
    let nc = fock::number(space, 0)?;
    let q = fock::displacement_q(space, 2)?;
    let pm = fock::momentum_p(space, 2)?;
    let id = fock::identity(space);
    let detuning = id.scale(re(p.delta_c)).sub(&q.scale(re(p.g_omega)))?;
    let mech = q.mul(&q)?.add(&pm.mul(&pm)?)?.scale(re(p.omega_m / 2.0));
    optical_terms(p, space)?.sub(&detuning.mul(&nc)?)?.add(&mech)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseVariant {
    Standard,
    DisplacementModified,
}

/// Jump operators, omitting any with zero rate.
pub fn build_collapse_ops(p: &SystemParams, space: &HilbertSpace, variant: CollapseVariant) -> Result<Vec<OperatorMatrix>> {
    let modes = space.n_modes();
    if modes != 2 && modes != 3 {
        return Err(Error::InvalidSpace(format!("collapse operators need 2 or 3 modes, got {modes}")));
    }
    if variant == CollapseVariant::DisplacementModified && modes != 3 {
        return Err(Error::InvalidSpace("displacement-modified decay needs the mechanical mode".into()));
    }
    let ac = fock::annihilation(space, 0)?;
    let ae = fock::annihilation(space, 1)?;
    let mut out = Vec::new();
    match variant {
        CollapseVariant::Standard => {
            if p.kappa_c > 0.0 {
                out.push(ac.scale(re(p.kappa_c.sqrt())));
            }
        }
        CollapseVariant::DisplacementModified => {
            if p.g_kappa == 0.0 {
                if p.kappa_c > 0.0 {
                    out.push(ac.scale(re(p.kappa_c.sqrt())));
                }
            } else {
                if p.kappa_c <= 0.0 {
                    return Err(Error::InvalidParams("displacement-modified decay needs kappa_c > 0".into()));
                }
                let q = fock::displacement_q(space, 2)?;
                let amp = fock::identity(space)
                    .scale(re(p.kappa_c.sqrt()))
                    .add(&q.scale(re(p.g_kappa / (2.0 * p.kappa_c.sqrt()))))?;
                out.push(amp.mul(&ac)?);
            }
        }
    }
    if p.kappa_e > 0.0 {
        out.push(ae.scale(re(p.kappa_e.sqrt())));
    }
    if modes == 3 {
        let b = fock::annihilation(space, 2)?;
        if p.gamma > 0.0 {
            out.push(b.scale(re((p.gamma * (p.n_th + 1.0)).sqrt())));
            if p.n_th > 0.0 {
                out.push(b.adjoint().scale(re((p.gamma * p.n_th).sqrt())));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    /// Cavity length (m).
    pub l: f64,
    /// Input-coupler amplitude transmissivity.
    pub tau: f64,
    /// Speed of light (m/s).
    pub c_light: f64,
    /// Zero-point length (m).
    pub x_zpf: f64,
}

impl CavityGeometry {
    pub fn new(l: f64, tau: f64, c_light: f64, x_zpf: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::InvalidParams(format!("cavity length {l} must be positive")));
        }
        if tau.abs() > 1.0 {
            return Err(Error::InvalidParams(format!("|tau| = {} exceeds 1", tau.abs())));
        }
        Ok(Self { l, tau, c_light, x_zpf })
    }

    /// κ_c = c|τ|²/4L
    pub fn kappa_c(&self) -> f64 {
        self.c_light * self.tau * self.tau / (4.0 * self.l)
    }

    /// g_κ = −(κ_c/L) x_zpf
    pub fn g_kappa(&self) -> f64 {
        -self.kappa_c() / self.l * self.x_zpf
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionOrder {
    Exact,
    First,
}

pub fn kappa_of_displacement(geom: &CavityGeometry, x: f64, order: ExpansionOrder) -> Result<f64> {
    if geom.l + x <= 0.0 {
        return Err(Error::InvalidParams(format!("L + x = {} must be positive", geom.l + x)));
    }
    Ok(match order {
        ExpansionOrder::Exact => geom.c_light * geom.tau * geom.tau / (4.0 * (geom.l + x)),
        ExpansionOrder::First => geom.kappa_c() * (1.0 - x / geom.l),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionStatus {
    Valid,
    /// |g_κ Q/κ_c| ≥ 2: the expansion is outside its radius.
    OutsideValidity,
}

/// First-order √(κ_c + g_κ Q) ≈ √κ_c (1 + g_κ Q/2κ_c), from raw rates.
pub fn sqrt_kappa_first_order(kappa_c: f64, g_kappa: f64, q: f64) -> (f64, ExpansionStatus) {
    let x = g_kappa * q / kappa_c;
    let status = if x.abs() < 2.0 { ExpansionStatus::Valid } else { ExpansionStatus::OutsideValidity };
    (kappa_c.sqrt() * (1.0 + x / 2.0), status)
}

pub fn sqrt_kappa_expansion(geom: &CavityGeometry, q: f64) -> (f64, ExpansionStatus) {
    sqrt_kappa_first_order(geom.kappa_c(), geom.g_kappa(), q)
}
