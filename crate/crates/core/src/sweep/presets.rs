//! Figure presets: parameters, grids, output files and gnuplot scripts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{fmt_float, run_gate, run_sweep, serialize_config, Axis, Gate, Scale, SweepResult, SweepSpec, Tier};
use crate::analytic::effective_noise;
use crate::model::SystemParams;
use crate::{Error, Result};

pub const FIGURES: &[&str] = &["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

/// Dissipative coupling values of the multi-panel figures.
pub const G_KAPPA_PANELS: [f64; 4] = [0.0, 200.0, 400.0, 600.0];

/// One CSV file of a figure.
#[derive(Clone, Debug)]
pub struct Panel {
    pub stem: String,
    pub spec: SweepSpec,
}

fn detuning_axis(count: usize) -> Axis {
    Axis::linked("delta", &["delta_c", "delta_e"], -5e5, 5e5, count, Scale::Linear)
}

fn gate_at(pairs: &[(&str, f64)]) -> Gate {
    Gate { at: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(), ..Gate::default() }
}

fn with_gate(mut spec: SweepSpec, gate: Gate) -> SweepSpec {
    spec.gate = Some(gate);
    spec
}

/// Δ sweep comparing the closed form with the two-mode master equation.
pub fn fig3_spec() -> SweepSpec {
    let spec = SweepSpec::new(SystemParams::baseline(), vec![detuning_axis(401)], vec![Tier::Analytic, Tier::MasterEffective]);
    with_gate(spec, gate_at(&[("delta_c", -1e5), ("delta_e", -1e5)]))
}

/// (Δ_c, Δ_e) maps at g_ω = 400, one panel pair per g_κ.
fn detuning_maps(fig: &str, analytic_n: usize, master_n: usize) -> Vec<Panel> {
    let mut out = Vec::new();
    for gk in G_KAPPA_PANELS {
        let p = SystemParams { g_omega: 400.0, g_kappa: gk, ..SystemParams::baseline() };
        let axes = |n| vec![Axis::single("delta_c", -5e5, 5e5, n), Axis::single("delta_e", -5e5, 5e5, n)];
        out.push(Panel { stem: format!("{fig}_gk{gk}_analytic"), spec: SweepSpec::new(p.clone(), axes(analytic_n), vec![Tier::Analytic]) });
        let master = SweepSpec::new(p, axes(master_n), vec![Tier::MasterEffective]);
        out.push(Panel {
            stem: format!("{fig}_gk{gk}_master"),
            spec: with_gate(master, gate_at(&[("delta_c", -1e5), ("delta_e", -1e5)])),
        });
    }
    out
}

fn coupling_map(n: usize) -> Vec<Panel> {
    let p = SystemParams::baseline().with_detuning(-2e5);
    let axes = vec![Axis::single("g_omega", 0.0, 1000.0, n), Axis::single("g_kappa", 0.0, 1000.0, n)];
    let spec = SweepSpec::new(p, axes, vec![Tier::MasterEffective]);
    vec![Panel { stem: "fig6_master".into(), spec: with_gate(spec, gate_at(&[("g_omega", 1000.0), ("g_kappa", 1000.0)])) }]
}

fn loss_sweeps(n: usize) -> Vec<Panel> {
    G_KAPPA_PANELS
        .iter()
        .map(|&gk| {
            let p = SystemParams { g_kappa: gk, ..SystemParams::baseline().with_detuning(-2e5) };
            let axis = Axis::linked("kappa", &["kappa_c", "kappa_e"], 1.0, 1e5, n, Scale::Log);
            let spec = SweepSpec::new(p, vec![axis], vec![Tier::MasterEffective]);
            Panel { stem: format!("fig7_gk{gk}"), spec: with_gate(spec, gate_at(&[("kappa_c", 5e3), ("kappa_e", 5e3)])) }
        })
        .collect()
}

fn coupling_detuning_maps(analytic_n: usize, master_n: usize) -> Vec<Panel> {
    let axes = |n| vec![Axis::single("J", 0.0, 5e5, n), detuning_axis(n)];
    let p = SystemParams::baseline();
    let master = SweepSpec::new(p.clone(), axes(master_n), vec![Tier::MasterEffective]);
    vec![
        Panel { stem: "fig8_analytic".into(), spec: SweepSpec::new(p, axes(analytic_n), vec![Tier::Analytic]) },
        Panel {
            stem: "fig8_master".into(),
            spec: with_gate(master, gate_at(&[("J", 2e5), ("delta_c", -1e5), ("delta_e", -1e5)])),
        },
    ]
}

/// Grid sizes for the 2-D figures.
#[derive(Clone, Copy, Debug)]
pub struct GridSizes {
    pub analytic: usize,
    pub master: usize,
    /// Points along the single axis of the fig7 sweeps.
    pub line: usize,
}

impl Default for GridSizes {
    fn default() -> Self {
        Self { analytic: 101, master: 41, line: 41 }
    }
}

/// The g² panels of a figure; fig2 has none (it is a noise surface).
pub fn panels(fig: &str, sizes: GridSizes) -> Result<Vec<Panel>> {
    Ok(match fig {
        "fig2" => Vec::new(),
        "fig3" => vec![Panel { stem: "fig3".into(), spec: fig3_spec() }],
        "fig4" | "fig5" => detuning_maps(fig, sizes.analytic, sizes.master),
        "fig6" => coupling_map(sizes.master),
        "fig7" => loss_sweeps(sizes.line),
        "fig8" => coupling_detuning_maps(sizes.analytic, sizes.master),
        other => {
            let hint = super::config::nearest(other, FIGURES).map(|n| format!(" (nearest: {n})")).unwrap_or_default();
            return Err(Error::Config(format!("unknown figure {other:?}{hint}")));
        }
    })
}

/// n_eff and T_eff over mean photon number and bath temperature.
pub fn noise_surface(n_bar: &Axis, t_b: &Axis) -> Result<String> {
    let p = SystemParams::baseline();
    let mut out = String::from("n_bar,T_b,n_eff,T_eff,xi_amp,status\n");
    for &n in &n_bar.values() {
        for &t in &t_b.values() {
            let r = effective_noise(&p, n, t)?;
            let mut flags = Vec::new();
            if r.clamped {
                flags.push("clamped");
            }
            if r.term1_complex {
                flags.push("term1_modulus");
            }
            let status = if flags.is_empty() { "ok".to_string() } else { flags.join(";") };
            let _ = writeln!(out, "{},{},{},{},{},{status}", fmt_float(n), fmt_float(t), fmt_float(r.n_eff), fmt_float(r.t_eff), fmt_float(r.xi_amp));
        }
    }
    Ok(out)
}

pub fn fig2_axes() -> (Axis, Axis) {
    (Axis::single("n_bar", 0.0, 10.0, 51), Axis::single("T_b", 0.1, 20.0, 51))
}

/// Position of the smallest finite g2_c in each sweep.
pub fn minima_csv(panels: &[(f64, SweepResult)]) -> String {
    let mut out = String::from("g_kappa,kappa_min,g2_c_min\n");
    for (gk, res) in panels {
        if let Some((k, g)) = argmin_g2c(res, Tier::MasterEffective) {
            let _ = writeln!(out, "{},{},{}", fmt_float(*gk), fmt_float(k), fmt_float(g));
        }
    }
    out
}

/// (axis1, g2_c) at the first smallest finite g2_c of `tier`.
pub fn argmin_g2c(res: &SweepResult, tier: Tier) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for r in res.rows_for(tier) {
        if let Some(g) = r.g2_c {
            if best.is_none_or(|(_, b)| g < b) {
                best = Some((r.coords[0], g));
            }
        }
    }
    best
}

fn script(fig: &str, stems: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script for {fig}; run from the output directory");
    s.push_str("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,700\n");
    match fig {
        "fig2" => {
            s.push_str("set output 'fig2.png'\nset multiplot layout 1,2\nset pm3d map\nset xlabel 'N'\nset ylabel 'T_b (K)'\n");
            s.push_str("set title 'n_eff'\nsplot 'fig2.csv' using 1:2:3 with pm3d notitle\n");
            s.push_str("set title 'T_eff (K)'\nsplot 'fig2.csv' using 1:2:4 with pm3d notitle\nunset multiplot\n");
        }
        "fig3" => {
            s.push_str("set output 'fig3.png'\nset xlabel 'Delta/omega_m'\nset ylabel 'log10 g2_c'\n");
            s.push_str("plot 'fig3.csv' using ($1/1e6):(strcol(2) eq 'analytic' ? $9 : NaN) with lines dt 2 lc 'black' title 'analytic', \\\n");
            s.push_str("     'fig3.csv' using ($1/1e6):(strcol(2) eq 'master_effective' ? $9 : NaN) with lines lc 'red' title 'master'\n");
        }
        "fig7" => {
            s.push_str("set output 'fig7.png'\nset logscale x\nset xlabel 'kappa/omega_m'\nset ylabel 'log10 g2_c'\nplot \\\n");
            let lines: Vec<String> =
                stems.iter().map(|st| format!("  '{st}.csv' using ($1/1e6):9 with lines title '{st}'")).collect();
            s.push_str(&lines.join(", \\\n"));
            s.push_str("\n# per-panel minima in fig7_minima.csv\n");
        }
        _ => {
            // log10 g2_c is column 10 in 2-D files, log10 g2_e column 11
            let (col, levels) = match fig {
                "fig5" => (11, "-1.5"),
                "fig6" => (10, "-3,0"),
                "fig8" => (10, "-1,0.602"),
                _ => (10, "-1.5"),
            };
            let _ = writeln!(s, "# contour levels (log10 g2): {levels}");
            s.push_str("set view map\nset contour base\nset pm3d at b\nunset surface\nset dgrid3d\n");
            let _ = writeln!(s, "set cntrparam levels discrete {levels}");
            for st in stems {
                let _ = writeln!(s, "set output '{st}.png'\nset title '{st}'\nsplot '{st}.csv' using 1:2:{col} notitle");
            }
        }
    }
    s
}

#[derive(Clone, Debug, Default)]
pub struct ReproduceReport {
    pub files: Vec<PathBuf>,
    pub hard_errors: usize,
}

fn write(dir: &Path, name: &str, text: &str, report: &mut ReproduceReport) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text)?;
    report.files.push(path);
    Ok(())
}

/// Runs every panel of `fig` and writes CSVs, the panel configs, the gate
/// tables and a gnuplot script into `out_dir`.
pub fn reproduce(fig: &str, out_dir: &Path, threads: Option<usize>) -> Result<ReproduceReport> {
    reproduce_with(fig, out_dir, threads, GridSizes::default())
}

pub fn reproduce_with(fig: &str, out_dir: &Path, threads: Option<usize>, sizes: GridSizes) -> Result<ReproduceReport> {
    let panels = panels(fig, sizes)?;
    fs::create_dir_all(out_dir)?;
    let mut report = ReproduceReport::default();
    if fig == "fig2" {
        let (n, t) = fig2_axes();
        write(out_dir, "fig2.csv", &noise_surface(&n, &t)?, &mut report)?;
    }
    let mut results = Vec::new();
    for panel in &panels {
        let mut spec = panel.spec.clone();
        if let Some(gate) = spec.gate.take() {
            let g = run_gate(&spec, &gate)?;
            write(out_dir, &format!("{}_gate.csv", panel.stem), &g.to_csv(), &mut report)?;
            if !g.passed {
                return Err(Error::ConvergenceGate(format!(
                    "{}: relative g2 change {} between truncations {:?} exceeds {}",
                    panel.stem, g.max_delta, gate.truncations, gate.tol
                )));
            }
            spec.gate = Some(gate);
        }
        write(out_dir, &format!("{}.toml", panel.stem), &serialize_config(&panel.spec), &mut report)?;
        // gate already checked above
        spec.gate = None;
        let res = run_sweep(&spec, threads)?;
        report.hard_errors += res.hard_errors();
        write(out_dir, &format!("{}.csv", panel.stem), &res.to_csv_with(true), &mut report)?;
        results.push((panel.spec.fixed.g_kappa, res));
    }
    if fig == "fig7" {
        write(out_dir, "fig7_minima.csv", &minima_csv(&results), &mut report)?;
    }
    let stems: Vec<String> = panels.iter().map(|p| p.stem.clone()).collect();
    write(out_dir, &format!("{fig}.gp"), &script(fig, &stems), &mut report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_values() {
        let s = fig3_spec();
        let p = &s.fixed;
        assert_eq!((p.omega_m, p.kappa_c, p.j, p.eps_c, p.eps_e, p.g_omega, p.g_kappa), (1e6, 5e3, 2e5, 5e3, 5e3, 200.0, 500.0));
        assert_eq!(s.axes[0].count, 401);
        // the blockade detuning is a grid point
        assert!(s.axes[0].values().contains(&-2e5));
        let f4 = panels("fig4", GridSizes::default()).unwrap();
        assert_eq!(f4.len(), 8);
        assert!(f4.iter().all(|p| p.spec.fixed.g_omega == 400.0));
        assert!(panels("fig9", GridSizes::default()).is_err());
    }

    #[test]
    fn every_master_panel_is_gated() {
        for fig in FIGURES {
            for p in panels(fig, GridSizes::default()).unwrap() {
                let master = p.spec.tiers.iter().any(|t| matches!(t, Tier::MasterEffective | Tier::MasterFull));
                assert_eq!(master, p.spec.gate.is_some(), "{}", p.stem);
                p.spec.validate().unwrap();
            }
        }
    }

    #[test]
    fn fig2_surface_shape() {
        let (n, t) = fig2_axes();
        let csv = noise_surface(&Axis { count: 3, ..n }, &Axis { count: 2, ..t }).unwrap();
        assert_eq!(csv.lines().count(), 1 + 6);
        assert!(csv.lines().nth(1).unwrap().starts_with("0.0,0.1,0.0,0.0,"));
    }

    #[test]
    fn small_reproduce_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let sizes = GridSizes { analytic: 5, master: 3, line: 3 };
        let r = reproduce_with("fig8", dir.path(), Some(1), sizes).unwrap();
        assert_eq!(r.hard_errors, 0);
        for f in ["fig8_analytic.csv", "fig8_master.csv", "fig8_master_gate.csv", "fig8_master.toml", "fig8.gp"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let csv = fs::read_to_string(dir.path().join("fig8_analytic.csv")).unwrap();
        assert!(csv.starts_with("axis1,axis2,tier,g2_c,g2_e,n_c,n_e,status,residual,log10_g2_c,log10_g2_e\n"));
        assert_eq!(csv.lines().count(), 26);
    }
}
