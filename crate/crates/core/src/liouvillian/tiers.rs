//! Master-equation observables for the two model variants.

use super::{build_liouvillian, steady_state_with, Convention, DensityMatrix, SteadyOptions, SteadyState};
use crate::fock::{self, make_space};
use crate::model::{build_collapse_ops, build_effective_hamiltonian, build_full_hamiltonian, CollapseVariant, SystemParams};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables {
    pub g2_c: f64,
    pub g2_e: f64,
    pub n_c: f64,
    pub n_e: f64,
}

/// ⟨n⟩ and ⟨a†a†aa⟩/⟨n⟩² for the two optical modes (indices 0 and 1).
/// g² is NaN when the mode is empty.
pub fn observables(rho: &DensityMatrix) -> Result<Observables> {
    let s = rho.space();
    let mode = |m: usize| -> Result<(f64, f64)> {
        let a = fock::annihilation(s, m)?;
        let ad = a.adjoint();
        let n = fock::expectation(&ad.mul(&a)?, rho)?.re;
        let pair = fock::expectation(&ad.mul(&ad)?.mul(&a)?.mul(&a)?, rho)?.re;
        let g2 = if n > 0.0 { pair / (n * n) } else { f64::NAN };
        Ok((n, g2))
    };
    let (n_c, g2_c) = mode(0)?;
    let (n_e, g2_e) = mode(1)?;
    Ok(Observables { g2_c, g2_e, n_c, n_e })
}

#[derive(Clone, Debug)]
pub struct MasterSolution {
    pub observables: Observables,
    pub steady: SteadyState,
}

/// Two-mode model with `levels` Fock levels per cavity.
pub fn effective_steady(p: &SystemParams, levels: usize, convention: Convention, opts: &SteadyOptions) -> Result<MasterSolution> {
    let space = make_space(&[levels, levels])?;
    let h = build_effective_hamiltonian(p, &space)?;
    let c = build_collapse_ops(p, &space, CollapseVariant::Standard)?;
    let steady = steady_state_with(&build_liouvillian(&h, &c, convention)?, opts)?;
    Ok(MasterSolution { observables: observables(&steady.reported()?)?, steady })
}

/// Three-mode model; the mechanical mode needs damping for a unique steady state.
pub fn full_steady(
    p: &SystemParams,
    cavity_levels: usize,
    mechanics_levels: usize,
    variant: CollapseVariant,
    opts: &SteadyOptions,
) -> Result<MasterSolution> {
    if !(p.gamma > 0.0) {
        return Err(Error::InvalidParams("the full model needs gamma > 0 to have a unique steady state".into()));
    }
    let space = make_space(&[cavity_levels, cavity_levels, mechanics_levels])?;
    let h = build_full_hamiltonian(p, &space)?;
    let c = build_collapse_ops(p, &space, variant)?;
    let steady = steady_state_with(&build_liouvillian(&h, &c, Convention::Sandwich)?, opts)?;
    Ok(MasterSolution { observables: observables(&steady.reported()?)?, steady })
}

pub fn effective_observables(p: &SystemParams, levels: usize) -> Result<Observables> {
    Ok(effective_steady(p, levels, Convention::Sandwich, &SteadyOptions::default())?.observables)
}

pub fn full_observables(p: &SystemParams, cavity_levels: usize, mechanics_levels: usize) -> Result<Observables> {
    Ok(full_steady(p, cavity_levels, mechanics_levels, CollapseVariant::DisplacementModified, &SteadyOptions::default())?
        .observables)
}
