use super::{devectorize, vectorize, DensityMatrix, Superoperator};
use crate::ode::{integrate, OdeOptions};
use crate::{Error, Result};

/// Integrates d vec(ρ)/dt = L vec(ρ) and returns ρ at every time in `t_grid`,
/// starting from `rho0` at `t_grid[0]`. No normalization is applied, so the
/// trace drift of a trace-breaking L stays visible.
pub fn evolve(rho0: &DensityMatrix, l: &Superoperator, t_grid: &[f64], opts: &OdeOptions) -> Result<Vec<DensityMatrix>> {
    if rho0.space() != l.space() {
        return Err(Error::SpaceMismatch {
            left: l.space().mode_dims().to_vec(),
            right: rho0.space().mode_dims().to_vec(),
        });
    }
    let (traj, _) = integrate(|_, y, dy| l.apply(y, dy), t_grid, &vectorize(rho0), opts)?;
    traj.iter().map(|v| devectorize(l.space(), v)).collect()
}
