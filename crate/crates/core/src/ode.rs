//! Adaptive Dormand–Prince 5(4) integration of complex linear or nonlinear
//! systems y' = f(t, y). Shared by density-matrix evolution, the amplitude
//! equations and the mean-field tier.

use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-12, h_init: None, max_steps: 50_000_000 }
    }
}

impl OdeOptions {
    pub fn with_rtol(rtol: f64) -> Self {
        Self { rtol, ..Self::default() }
    }
}

#[derive(Clone, Debug, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy_into(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..out.len() {
        let mut acc = C64::default();
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

/// Integrates from `t_grid[0]` (where the state is `y0`) and returns the state
/// at every grid time, the first entry being `y0` itself.
pub fn integrate<F>(mut f: F, t_grid: &[f64], y0: &[C64], opts: &OdeOptions) -> Result<(Vec<Vec<C64>>, OdeStats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    if t_grid.is_empty() {
        return Ok((Vec::new(), OdeStats::default()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("time grid must be strictly increasing".into()));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t_grid[0];
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y.clone());
    let mut stats = OdeStats::default();
    if t_grid.len() == 1 || n == 0 {
        for _ in 1..t_grid.len() {
            out.push(y.clone());
        }
        return Ok((out, stats));
    }

    let zero = vec![C64::default(); n];
    let (mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero.clone());
    let mut tmp = zero.clone();
    let mut ynew = zero;
    f(t, &y, &mut k1);

    let span = t_grid[t_grid.len() - 1] - t;
    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            // Hairer–Wanner starting step: probe with one Euler step
            let rms = |v: &[C64], sc: &[f64]| (v.iter().zip(sc).map(|(a, s)| (a.norm() / s).powi(2)).sum::<f64>() / n as f64).sqrt();
            let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.norm()).collect();
            let (d0, d1) = (rms(&y, &sc), rms(&k1, &sc));
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { (0.01 * d0 / d1).min(span) };
            axpy_into(&mut tmp, &y, h0, &[(1.0, &k1)]);
            f(t + h0, &tmp, &mut k2);
            let diff: Vec<C64> = k2.iter().zip(&k1).map(|(a, b)| a - b).collect();
            let d2 = rms(&diff, &sc) / h0;
            let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6 * span) } else { (0.01 / d1.max(d2)).powf(0.2) };
            (100.0 * h0).min(h1).min(span)
        }
    };
    if !(h > 0.0) || !h.is_finite() {
        h = span * 1e-6;
    }

    for &target in &t_grid[1..] {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::StepUnderflow { t, h });
            }
            let last = t + h >= target;
            let hs = if last { target - t } else { h };
            if hs <= f64::EPSILON * t.abs().max(span) * 4.0 {
                if last {
                    // remaining gap below round-off: snap to the target
                    t = target;
                    break;
                }
                return Err(Error::StepUnderflow { t, h: hs });
            }

            axpy_into(&mut tmp, &y, hs, &[(A21, &k1)]);
            f(t + C2 * hs, &tmp, &mut k2);
            axpy_into(&mut tmp, &y, hs, &[(A31, &k1), (A32, &k2)]);
            f(t + C3 * hs, &tmp, &mut k3);
            axpy_into(&mut tmp, &y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            f(t + C4 * hs, &tmp, &mut k4);
            axpy_into(&mut tmp, &y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            f(t + C5 * hs, &tmp, &mut k5);
            axpy_into(&mut tmp, &y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            f(t + hs, &tmp, &mut k6);
            axpy_into(&mut ynew, &y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            f(t + hs, &ynew, &mut k7);

            let mut err: f64 = 0.0;
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
                let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
                err = err.max(e.norm() / sc);
            }
            if !err.is_finite() {
                stats.rejected += 1;
                h = hs * 0.2;
                continue;
            }
            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { target } else { t + hs };
                std::mem::swap(&mut y, &mut ynew);
                std::mem::swap(&mut k1, &mut k7);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // a step shortened to land on the grid says nothing about the next one
                h = if last { h.max(hs * fac) } else { hs * fac };
            } else {
                stats.rejected += 1;
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}
