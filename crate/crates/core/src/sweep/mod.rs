//! Parameter sweeps over the model tiers, CSV output and figure presets.
//!
//! A [`SweepSpec`] names one or two axes, each driving one or more linked
//! [`SystemParams`] fields, and the tiers to evaluate at every grid point.
//! Points run in parallel; rows come out in row-major order regardless.

pub mod checks;
pub mod config;
pub mod presets;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::g2_analytic;
use crate::liouvillian::{convergence_scan, effective_steady, full_steady, Convention, MasterSolution, Observables, SolverChoice, SteadyOptions};
use crate::model::{derived_couplings, CollapseVariant, SystemParams};
use crate::semiclassical::reduced_fixed_point;
use crate::{Error, Result};

pub use config::{parse_config, serialize_config};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    /// Fields set to the axis value together, e.g. both detunings.
    pub params: Vec<String>,
    pub label: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
}

impl Axis {
    pub fn linked(label: &str, params: &[&str], min: f64, max: f64, count: usize, scale: Scale) -> Self {
        Self { params: params.iter().map(|s| s.to_string()).collect(), label: label.into(), min, max, count, scale }
    }

    pub fn single(param: &str, min: f64, max: f64, count: usize) -> Self {
        Self::linked(param, &[param], min, max, count, Scale::Linear)
    }

    /// Grid values, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                if k == 0 {
                    return self.min;
                }
                if k + 1 == n {
                    return self.max;
                }
                let s = k as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * s,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * s).exp(),
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(format!("axis {:?}: {m}", self.label)));
        if self.params.is_empty() {
            return fail("needs at least one parameter".into());
        }
        for p in &self.params {
            if !SystemParams::FIELDS.contains(&p.as_str()) {
                return fail(format!("{p:?} is not a parameter"));
            }
        }
        if self.count < 2 {
            return fail(format!("count must be at least 2, got {}", self.count));
        }
        if !self.min.is_finite() || !self.max.is_finite() {
            return fail("range must be finite".into());
        }
        if self.scale == Scale::Log && !(self.min > 0.0 && self.max > 0.0) {
            return fail("log scale needs a positive range".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Analytic,
    MasterEffective,
    MasterFull,
    Semiclassical,
}

impl Tier {
    pub const ALL: [Tier; 4] = [Tier::Analytic, Tier::MasterEffective, Tier::MasterFull, Tier::Semiclassical];

    pub fn name(self) -> &'static str {
        match self {
            Tier::Analytic => "analytic",
            Tier::MasterEffective => "master_effective",
            Tier::MasterFull => "master_full",
            Tier::Semiclassical => "semiclassical",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncations {
    /// Levels per cavity in the two-mode model.
    pub effective: usize,
    pub full_cavity: usize,
    pub full_mechanics: usize,
}

impl Default for Truncations {
    fn default() -> Self {
        Self { effective: 6, full_cavity: 4, full_mechanics: 8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub method: SolverChoice,
    pub convention: Convention,
    pub collapse: CollapseVariant,
    pub gmres_tol: f64,
    pub direct_limit: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let o = SteadyOptions::default();
        Self {
            method: o.solver,
            convention: Convention::Sandwich,
            collapse: CollapseVariant::DisplacementModified,
            gmres_tol: o.gmres_tol,
            direct_limit: o.direct_limit,
        }
    }
}

impl SolverSettings {
    pub fn steady_options(&self) -> SteadyOptions {
        SteadyOptions { solver: self.method, gmres_tol: self.gmres_tol, direct_limit: self.direct_limit, ..SteadyOptions::default() }
    }
}

/// Truncation ladder evaluated at one point before a sweep runs.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    /// Levels per cavity for the two-mode model, in increasing order.
    pub truncations: Vec<usize>,
    /// (cavity, mechanics) levels for the three-mode model.
    pub full_truncations: Vec<(usize, usize)>,
    pub tol: f64,
    /// Overrides applied to the fixed parameters; the grid centre when empty.
    pub at: BTreeMap<String, f64>,
}

impl Default for Gate {
    fn default() -> Self {
        Self { truncations: vec![6, 12], full_truncations: Vec::new(), tol: 1e-3, at: BTreeMap::new() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub fixed: SystemParams,
    pub tiers: Vec<Tier>,
    pub truncations: Truncations,
    pub solver: SolverSettings,
    pub gate: Option<Gate>,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn new(fixed: SystemParams, axes: Vec<Axis>, tiers: Vec<Tier>) -> Self {
        Self {
            axes,
            fixed,
            tiers,
            truncations: Truncations::default(),
            solver: SolverSettings::default(),
            gate: None,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::Config(format!("need 1 or 2 axes, got {}", self.axes.len())));
        }
        for a in &self.axes {
            a.validate()?;
        }
        if self.tiers.is_empty() {
            return Err(Error::Config("no tiers requested".into()));
        }
        let t = &self.truncations;
        if t.effective < 2 || t.full_cavity < 2 || t.full_mechanics < 2 {
            return Err(Error::Config("truncations must be at least 2 levels".into()));
        }
        if let Some(g) = &self.gate {
            if g.truncations.iter().chain(g.full_truncations.iter().flat_map(|(a, b)| [a, b])).any(|&n| n < 2) {
                return Err(Error::Config("gate truncations must be at least 2 levels".into()));
            }
            if !(g.tol > 0.0) {
                return Err(Error::Config("gate tol must be positive".into()));
            }
            for k in g.at.keys() {
                if !SystemParams::FIELDS.contains(&k.as_str()) {
                    return Err(Error::Config(format!("gate.at: {k:?} is not a parameter")));
                }
            }
        }
        self.fixed.validate()
    }

    /// Grid points in row-major order (last axis fastest).
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let vals: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        match vals.as_slice() {
            [a] => a.iter().map(|&x| vec![x]).collect(),
            [a, b] => a.iter().flat_map(|&x| b.iter().map(move |&y| vec![x, y])).collect(),
            _ => Vec::new(),
        }
    }

    pub fn params_at(&self, coords: &[f64]) -> Result<SystemParams> {
        let mut p = self.fixed.clone();
        for (axis, &v) in self.axes.iter().zip(coords) {
            for name in &axis.params {
                p.set(name, v)?;
            }
        }
        Ok(p)
    }

    fn gate_params(&self, gate: &Gate) -> Result<SystemParams> {
        let centre: Vec<f64> = self.axes.iter().map(|a| a.values()[a.count / 2]).collect();
        let mut p = self.params_at(&centre)?;
        for (k, &v) in &gate.at {
            p.set(k, v)?;
        }
        Ok(p)
    }
}

/// One (grid point, tier) result. `None` cells are written empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coords: Vec<f64>,
    pub tier: Tier,
    pub g2_c: Option<f64>,
    pub g2_e: Option<f64>,
    pub n_c: Option<f64>,
    pub n_e: Option<f64>,
    /// Flags; empty means "ok".
    pub status: Vec<String>,
    pub residual: Option<f64>,
    /// Solver or parameter failure, as opposed to a flagged but well-defined result.
    pub hard_error: bool,
}

impl Row {
    fn blank(coords: &[f64], tier: Tier) -> Self {
        Row { coords: coords.to_vec(), tier, g2_c: None, g2_e: None, n_c: None, n_e: None, status: Vec::new(), residual: None, hard_error: false }
    }

    fn failed(coords: &[f64], tier: Tier, e: &Error) -> Self {
        let mut r = Self::blank(coords, tier);
        r.status.push(format!("error:{}", error_tag(e)));
        r.hard_error = true;
        r
    }

    pub fn status_text(&self) -> String {
        if self.status.is_empty() {
            "ok".into()
        } else {
            self.status.join(";")
        }
    }

    /// Keeps finite values, flagging the others under `name`.
    fn put(&mut self, name: &str, v: f64) -> Option<f64> {
        if v.is_finite() {
            Some(v)
        } else {
            self.status.push(format!("nonfinite_{name}"));
            None
        }
    }
}

fn error_tag(e: &Error) -> &'static str {
    match e {
        Error::InvalidParams(_) => "invalid_params",
        Error::Pole(_) => "pole",
        Error::DegenerateSteadyState(_) => "degenerate",
        Error::NotConverged { .. } => "not_converged",
        Error::StepUnderflow { .. } => "step_underflow",
        Error::LinearAlgebra(_) => "linear_algebra",
        _ => "other",
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub axis_labels: Vec<String>,
    pub rows: Vec<Row>,
}

/// Shortest decimal that parses back to the same f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v:?}")
}

fn cell(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

impl SweepResult {
    pub fn hard_errors(&self) -> usize {
        self.rows.iter().filter(|r| r.hard_error).count()
    }

    pub fn rows_for(&self, tier: Tier) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.tier == tier)
    }

    pub fn csv_header(&self) -> String {
        let axes = if self.axis_labels.len() == 2 { "axis1,axis2" } else { "axis1" };
        format!("{axes},tier,g2_c,g2_e,n_c,n_e,status,residual")
    }

    pub fn to_csv(&self) -> String {
        self.to_csv_with(false)
    }

    /// With `log10` set, two trailing columns carry log10 of each g² (empty
    /// where g² is missing or not positive).
    pub fn to_csv_with(&self, log10: bool) -> String {
        let mut out = self.csv_header();
        if log10 {
            out.push_str(",log10_g2_c,log10_g2_e");
        }
        out.push('\n');
        for r in &self.rows {
            for c in &r.coords {
                out.push_str(&fmt_float(*c));
                out.push(',');
            }
            let _ = write!(
                out,
                "{},{},{},{},{},{},{}",
                r.tier.name(),
                cell(r.g2_c),
                cell(r.g2_e),
                cell(r.n_c),
                cell(r.n_e),
                r.status_text(),
                cell(r.residual)
            );
            if log10 {
                let lg = |v: Option<f64>| cell(v.filter(|x| *x > 0.0).map(f64::log10));
                let _ = write!(out, ",{},{}", lg(r.g2_c), lg(r.g2_e));
            }
            out.push('\n');
        }
        out
    }
}

fn master_row(coords: &[f64], tier: Tier, sol: Result<MasterSolution>) -> Row {
    let sol = match sol {
        Ok(s) => s,
        Err(e) => return Row::failed(coords, tier, &e),
    };
    let mut r = Row::blank(coords, tier);
    let o = sol.observables;
    if o.n_c == 0.0 || o.n_e == 0.0 {
        r.status.push("empty_mode".into());
    }
    r.g2_c = if o.n_c > 0.0 { r.put("g2_c", o.g2_c) } else { None };
    r.g2_e = if o.n_e > 0.0 { r.put("g2_e", o.g2_e) } else { None };
    r.n_c = r.put("n_c", o.n_c);
    r.n_e = r.put("n_e", o.n_e);
    if sol.steady.trace_drift > 1e-8 {
        r.status.push("trace_drift".into());
    }
    if sol.steady.constrained_residual > 1e-6 {
        r.status.push("residual_high".into());
    }
    r.residual = Some(sol.steady.residual);
    r
}

fn analytic_row(coords: &[f64], p: &SystemParams) -> Row {
    let mut r = Row::blank(coords, Tier::Analytic);
    let g = g2_analytic(p);
    for pole in &g.poles {
        r.status.push(pole.to_string());
    }
    r.g2_c = g.g2_c.is_finite().then_some(g.g2_c);
    r.g2_e = g.g2_e.is_finite().then_some(g.g2_e);
    // first-order amplitudes of the κ = 0 weak-drive solution
    let d = derived_couplings(p);
    if d.d_j.abs() <= 1e-13 * (p.j * p.j).max((p.delta_c * p.delta_e).abs()) {
        r.status.push("pole_DJ".into());
    } else {
        let cc = -(p.eps_c * p.delta_e + p.j * p.eps_e) / d.d_j;
        let ce = -(p.eps_e * p.delta_c + p.j * p.eps_c) / d.d_j;
        r.n_c = Some(cc * cc);
        r.n_e = Some(ce * ce);
    }
    r
}

fn semiclassical_row(coords: &[f64], p: &SystemParams) -> Row {
    match reduced_fixed_point(p) {
        Ok(f) => {
            let mut r = Row::blank(coords, Tier::Semiclassical);
            // mean-field closure carries no g² information
            r.status.push("mean_field".into());
            r.n_c = r.put("n_c", f.alpha_c.norm_sqr());
            r.n_e = r.put("n_e", f.alpha_e.norm_sqr());
            r.residual = Some(f.residual);
            r
        }
        Err(e) => Row::failed(coords, Tier::Semiclassical, &e),
    }
}

pub fn evaluate(spec: &SweepSpec, coords: &[f64], tier: Tier) -> Row {
    match spec.params_at(coords) {
        Ok(p) => evaluate_params(&p, coords, tier, &spec.truncations, &spec.solver),
        Err(e) => Row::failed(coords, tier, &e),
    }
}

/// One tier at one parameter point; `coords` is only copied into the row.
pub fn evaluate_params(p: &SystemParams, coords: &[f64], tier: Tier, t: &Truncations, solver: &SolverSettings) -> Row {
    if let Err(e) = p.validate() {
        return Row::failed(coords, tier, &e);
    }
    let opts = solver.steady_options();
    match tier {
        Tier::Analytic => analytic_row(coords, p),
        Tier::MasterEffective => master_row(coords, tier, effective_steady(p, t.effective, solver.convention, &opts)),
        Tier::MasterFull => master_row(coords, tier, full_steady(p, t.full_cavity, t.full_mechanics, solver.collapse, &opts)),
        Tier::Semiclassical => semiclassical_row(coords, p),
    }
}

/// Worst relative g² change across the configured truncation ladders.
#[derive(Clone, Debug, PartialEq)]
pub struct GateReport {
    pub params: SystemParams,
    /// (label, observables) per ladder rung.
    pub rows: Vec<(String, Observables)>,
    pub max_delta: f64,
    pub passed: bool,
}

impl GateReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("truncation,g2_c,g2_e,n_c,n_e\n");
        for (label, o) in &self.rows {
            let _ = writeln!(out, "{label},{},{},{},{}", fmt_float(o.g2_c), fmt_float(o.g2_e), fmt_float(o.n_c), fmt_float(o.n_e));
        }
        let _ = writeln!(out, "# max relative g2 change {}; tol passed: {}", fmt_float(self.max_delta), self.passed);
        out
    }
}

pub fn run_gate(spec: &SweepSpec, gate: &Gate) -> Result<GateReport> {
    let p = spec.gate_params(gate)?;
    let opts = spec.solver.steady_options();
    let mut rows = Vec::new();
    let mut max_delta: f64 = 0.0;
    if !gate.truncations.is_empty() {
        let table = convergence_scan(|&n| Ok(effective_steady(&p, n, spec.solver.convention, &opts)?.observables), &gate.truncations)?;
        max_delta = max_delta.max(nan_as_inf(table.max_g2_delta(), &table.deltas));
        rows.extend(table.rows.iter().map(|r| (format!("effective:{}", r.truncation), r.observables)));
    }
    if !gate.full_truncations.is_empty() {
        let table = convergence_scan(
            |&(c, m)| Ok(full_steady(&p, c, m, spec.solver.collapse, &opts)?.observables),
            &gate.full_truncations,
        )?;
        max_delta = max_delta.max(nan_as_inf(table.max_g2_delta(), &table.deltas));
        rows.extend(table.rows.iter().map(|r| (format!("full:{}x{}", r.truncation.0, r.truncation.1), r.observables)));
    }
    Ok(GateReport { params: p, rows, passed: max_delta <= gate.tol, max_delta })
}

fn nan_as_inf(m: f64, deltas: &[Observables]) -> f64 {
    if deltas.iter().any(|d| d.g2_c.is_nan() || d.g2_e.is_nan()) {
        f64::INFINITY
    } else {
        m
    }
}

/// Evaluates every grid point on every tier. `threads` bounds the pool;
/// `None` uses the global one.
pub fn run_sweep(spec: &SweepSpec, threads: Option<usize>) -> Result<SweepResult> {
    spec.validate()?;
    if let Some(g) = &spec.gate {
        let report = run_gate(spec, g)?;
        if !report.passed {
            return Err(Error::ConvergenceGate(format!(
                "relative g2 change {} exceeds {} at the gate point",
                report.max_delta, g.tol
            )));
        }
    }
    let tasks: Vec<(Vec<f64>, Tier)> =
        spec.grid().into_iter().flat_map(|c| spec.tiers.iter().map(move |&t| (c.clone(), t))).collect();
    let work = || tasks.par_iter().map(|(c, t)| evaluate(spec, c, *t)).collect::<Vec<_>>();
    let rows = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    Ok(SweepResult { axis_labels: spec.axes.iter().map(|a| a.label.clone()).collect(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_axis(count: usize) -> SweepSpec {
        let axis = Axis::linked("delta", &["delta_c", "delta_e"], -3e5, -1e5, count, Scale::Linear);
        SweepSpec::new(SystemParams::baseline(), vec![axis], vec![Tier::Analytic])
    }

    #[test]
    fn three_point_analytic_sweep() {
        let r = run_sweep(&one_axis(3), Some(1)).unwrap();
        assert_eq!(r.rows.len(), 3);
        for row in &r.rows {
            assert!(row.g2_c.is_some_and(f64::is_finite) || !row.status.is_empty());
        }
        // the middle point is Δ = −J
        assert_eq!(r.rows[1].coords, vec![-2e5]);
        assert!(r.rows[1].status.contains(&"pole_JplusDeltaC".to_string()));
        assert_eq!(r.hard_errors(), 0);
    }

    #[test]
    fn grid_is_row_major() {
        let mut s = one_axis(5);
        s.axes = vec![Axis::single("delta_c", 0.0, 4.0, 5), Axis::single("delta_e", 10.0, 14.0, 5)];
        let g = s.grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[1], vec![0.0, 11.0]);
        assert_eq!(g[5], vec![1.0, 10.0]);
        let a = run_sweep(&s, Some(1)).unwrap().to_csv();
        let b = run_sweep(&s, Some(3)).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn log_axis_endpoints_exact() {
        let a = Axis { scale: Scale::Log, ..Axis::single("kappa_c", 1.0, 1e5, 6) };
        let v = a.values();
        assert_eq!((v[0], v[5]), (1.0, 1e5));
        assert!((v[2] - 100.0).abs() < 1e-9);
        assert!(Axis { min: 0.0, ..a }.validate().is_err());
    }

    #[test]
    fn rejects_bad_axes() {
        let mut s = one_axis(1);
        assert!(s.validate().is_err());
        s.axes[0].count = 2;
        s.axes[0].params.push("kapa_c".into());
        assert!(s.validate().is_err());
    }

    #[test]
    fn float_cells_round_trip() {
        for v in [0.1, 1e-20, 123456.789, -2e5, 4.0] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn solver_failure_stays_in_row() {
        // the full model without mechanical damping has no unique steady state
        let mut s = one_axis(2);
        s.tiers = vec![Tier::Analytic, Tier::MasterFull];
        let r = run_sweep(&s, Some(1)).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert_eq!(r.hard_errors(), 2);
        assert!(r.rows[1].status_text().starts_with("error:"));
        assert!(r.to_csv().lines().nth(2).unwrap().contains(",master_full,,,,,error:invalid_params,"));
    }

    #[test]
    fn pole_cells_are_empty() {
        let r = run_sweep(&one_axis(3), Some(1)).unwrap();
        let line = r.to_csv().lines().nth(2).unwrap().to_string();
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[3], "");
        assert!(cells[6].contains("pole_JplusDeltaC"));
    }
}
