//! Acceptance criteria 1–10, one PASS/FAIL line each.
//!
//! Failing criteria are reported, not hidden: the process exits 0 so the
//! rest of the test suite still runs, unless ACCEPTANCE_STRICT=1 is set.

use std::fs;
use std::path::Path;
use std::time::Instant;

use optoblock::sweep::checks::{self, CheckOutcome};
use optoblock::sweep::presets::{argmin_g2c, fig3_spec, panels, reproduce, GridSizes};
use optoblock::sweep::{run_sweep, SweepResult, Tier};

fn outcome(criterion: u32, name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { criterion, name: name.into(), passed, detail }
}

fn g2c_by_coord(res: &SweepResult, tier: Tier) -> Vec<(f64, Option<f64>)> {
    res.rows_for(tier).map(|r| (r.coords[0], r.g2_c)).collect()
}

fn fig3_reproduction(res: &SweepResult) -> CheckOutcome {
    let step = 1e6 / 400.0;
    let near = |x: f64| (x + 2e5).abs() <= step * 1.000001;
    let mut parts = Vec::new();
    let mut ok = true;
    let mut minima = Vec::new();
    for tier in [Tier::Analytic, Tier::MasterEffective] {
        match argmin_g2c(res, tier) {
            Some((x, g)) => {
                ok &= near(x);
                minima.push(g);
                parts.push(format!("{} min {:.4e} at D/w_m = {:+.4}", tier.name(), g, x / 1e6));
            }
            None => {
                ok = false;
                parts.push(format!("{}: no finite g2_c", tier.name()));
            }
        }
    }
    let deeper = minima.len() == 2 && minima[0] < minima[1];
    ok &= deeper;
    parts.push(format!("analytic deeper: {deeper}"));
    let mut tail: f64 = 0.0;
    for tier in [Tier::Analytic, Tier::MasterEffective] {
        for (x, g) in g2c_by_coord(res, tier) {
            if x > 0.25e6 {
                tail = tail.max(g.map_or(f64::INFINITY, |g| (g - 1.0).abs()));
            }
        }
    }
    ok &= tail < 0.2;
    parts.push(format!("max |g2_c - 1| beyond +0.25 = {tail:.2e} (<0.2); argmin tol one step = {step}"));
    outcome(3, "fig3 reproduction", ok, parts.join("; "))
}

fn tier_agreement(res: &SweepResult, j: f64) -> CheckOutcome {
    let a = g2c_by_coord(res, Tier::Analytic);
    let m = g2c_by_coord(res, Tier::MasterEffective);
    let mut worst = (0.0f64, f64::NAN);
    let mut compared = 0;
    for ((x, ga), (_, gm)) in a.iter().zip(&m) {
        // D_J = J² − Δ² vanishes at Δ = ±J
        if (x.abs() - j).abs() <= 0.02e6 {
            continue;
        }
        compared += 1;
        let d = match (ga, gm) {
            (Some(ga), Some(gm)) if *ga > 0.0 && *gm > 0.0 => (ga.log10() - gm.log10()).abs(),
            _ => f64::INFINITY,
        };
        if worst.1.is_nan() || d > worst.0 {
            worst = (d, *x);
        }
    }
    outcome(
        4,
        "tier agreement away from poles",
        worst.0 < 0.5,
        format!("{compared} points; max |dlog10 g2_c| = {:.3e} at D/w_m = {:+.4} (tol 0.5, window +-0.02 w_m around D = +-J)", worst.0, worst.1 / 1e6),
    )
}

fn fig7_trend() -> CheckOutcome {
    let run = || -> optoblock::Result<(bool, String)> {
        let mut locs = Vec::new();
        for p in panels("fig7", GridSizes::default())? {
            let res = run_sweep(&p.spec, None)?;
            let (k, g) = argmin_g2c(&res, Tier::MasterEffective).unwrap_or((f64::NAN, f64::NAN));
            locs.push((p.spec.fixed.g_kappa, k, g));
        }
        let ok = locs.windows(2).all(|w| w[1].1 >= w[0].1);
        let desc: Vec<String> = locs.iter().map(|(gk, k, g)| format!("g_k={gk}: kappa_min={k:.3e} (g2={g:.6})")).collect();
        Ok((ok, desc.join(", ")))
    };
    match run() {
        Ok((ok, d)) => outcome(5, "fig7 minimum location nondecreasing in g_kappa", ok, d),
        Err(e) => outcome(5, "fig7 minimum location nondecreasing in g_kappa", false, format!("error: {e}")),
    }
}

fn truncation_convergence(base: &SweepResult) -> CheckOutcome {
    let mut spec = fig3_spec();
    spec.gate = None;
    spec.tiers = vec![Tier::MasterEffective];
    spec.truncations.effective *= 2;
    spec.truncations.full_cavity *= 2;
    spec.truncations.full_mechanics *= 2;
    let doubled = match run_sweep(&spec, None) {
        Ok(r) => r,
        Err(e) => return outcome(9, "truncation convergence", false, format!("error: {e}")),
    };
    let mut worst = (0.0f64, f64::NAN);
    let (mut over, mut missing) = (0, 0);
    for ((x, a), (_, b)) in g2c_by_coord(base, Tier::MasterEffective).iter().zip(g2c_by_coord(&doubled, Tier::MasterEffective)) {
        match (a, b) {
            (Some(a), Some(b)) => {
                let d = (b - a).abs() / a.abs();
                over += usize::from(d >= 1e-3);
                if d > worst.0 {
                    worst = (d, *x);
                }
            }
            _ => missing += 1,
        }
    }
    outcome(
        9,
        "truncation convergence",
        over == 0 && missing == 0,
        format!(
            "levels 6 -> 12: max relative g2_c change {:.3e} at D/w_m = {:+.4} (tol 1e-3); {over} points over tol, {missing} unsolved",
            worst.0,
            worst.1 / 1e6
        ),
    )
}

fn csv_bytes(dir: &Path) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    files.into_iter().map(|p| Ok((p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p)?))).collect()
}

fn determinism() -> CheckOutcome {
    let run = || -> optoblock::Result<(bool, String)> {
        let a = tempfile::tempdir()?;
        let b = tempfile::tempdir()?;
        reproduce("fig4", a.path(), None)?;
        // a different pool size must not change the bytes either
        reproduce("fig4", b.path(), Some(1))?;
        let (fa, fb) = (csv_bytes(a.path())?, csv_bytes(b.path())?);
        let same = fa == fb && !fa.is_empty();
        Ok((same, format!("{} CSV files, byte-identical: {same}", fa.len())))
    };
    match run() {
        Ok((ok, d)) => outcome(10, "determinism of reproduce fig4", ok, d),
        Err(e) => outcome(10, "determinism of reproduce fig4", false, format!("error: {e}")),
    }
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<CheckOutcome> = Vec::new();
    let fast = checks::run_checks();
    let fig3 = run_sweep(&fig3_spec(), None);
    for c in 1..=10 {
        let t = Instant::now();
        let o = match c {
            3 | 4 | 9 => match &fig3 {
                Ok(res) => match c {
                    3 => fig3_reproduction(res),
                    4 => tier_agreement(res, fig3_spec().fixed.j),
                    _ => truncation_convergence(res),
                },
                Err(e) => outcome(c, "fig3 sweep", false, format!("error: {e}")),
            },
            5 => fig7_trend(),
            10 => determinism(),
            _ => fast.iter().find(|o| o.criterion == c).cloned().expect("fast check present"),
        };
        println!("{}  [{:.1}s]", o.line(), t.elapsed().as_secs_f64());
        results.push(o);
    }
    let passed = results.iter().filter(|o| o.passed).count();
    println!("acceptance: {passed}/{} criteria passed in {:.1}s", results.len(), start.elapsed().as_secs_f64());
    if passed < results.len() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
