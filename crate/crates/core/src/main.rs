use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use optoblock::model::SystemParams;
use optoblock::sweep::checks::run_checks;
use optoblock::sweep::presets::{reproduce, FIGURES};
use optoblock::sweep::{evaluate_params, fmt_float, parse_config, run_sweep, SolverSettings, Tier, Truncations};

#[derive(Parser)]
#[command(name = "optoblock", version, about = "Photon blockade in coupled optomechanical cavities")]
struct Cli {
    /// Worker threads for grid points (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every tier at one parameter point.
    G2 {
        /// Override a parameter of the reference baseline, e.g. --set delta_c=-2e5.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
        /// Shorthand for setting delta_c and delta_e together.
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        /// Levels per cavity in the two-mode master equation.
        #[arg(long, default_value_t = 6)]
        levels: usize,
    },
    /// Run a sweep described by a TOML config and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; falls back to `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate the data and plot script of one figure.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURES))]
        figure: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant suite.
    Check,
}

fn cell(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_else(|| "-".into())
}

fn g2(set: &[String], delta: Option<f64>, levels: usize) -> Result<bool, String> {
    let mut p = SystemParams::baseline();
    if let Some(d) = delta {
        p = p.with_detuning(d);
    }
    for kv in set {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {kv:?}"))?;
        let v: f64 = v.trim().parse().map_err(|_| format!("bad number in {kv:?}"))?;
        p.set(k.trim(), v).map_err(|e| e.to_string())?;
    }
    p.validate().map_err(|e| e.to_string())?;
    let t = Truncations { effective: levels, ..Truncations::default() };
    let solver = SolverSettings::default();
    println!("{:<17} {:>24} {:>24} {:>24} {:>24}  {:<28} residual", "tier", "g2_c", "g2_e", "n_c", "n_e", "status");
    let mut clean = true;
    for tier in Tier::ALL {
        if tier == Tier::MasterFull && p.gamma == 0.0 {
            println!("{:<17} skipped (needs gamma > 0; pass --set gamma=...)", tier.name());
            continue;
        }
        let r = evaluate_params(&p, &[], tier, &t, &solver);
        clean &= !r.hard_error;
        println!(
            "{:<17} {:>24} {:>24} {:>24} {:>24}  {:<28} {}",
            tier.name(),
            cell(r.g2_c),
            cell(r.g2_e),
            cell(r.n_c),
            cell(r.n_e),
            r.status_text(),
            cell(r.residual)
        );
    }
    Ok(clean)
}

fn sweep(config: &PathBuf, out: Option<PathBuf>, threads: Option<usize>) -> Result<bool, String> {
    let text = fs::read_to_string(config).map_err(|e| format!("{}: {e}", config.display()))?;
    let spec = parse_config(&text).map_err(|e| e.to_string())?;
    let out = out.or_else(|| spec.output.clone()).ok_or("no output path: pass --out or set `output` in the config")?;
    let res = run_sweep(&spec, threads).map_err(|e| e.to_string())?;
    fs::write(&out, res.to_csv()).map_err(|e| format!("{}: {e}", out.display()))?;
    let bad = res.hard_errors();
    eprintln!("{} rows written to {} ({bad} with hard errors)", res.rows.len(), out.display());
    Ok(bad == 0)
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::G2 { set, delta, levels } => g2(&set, delta, levels),
        Command::Sweep { config, out } => sweep(&config, out, cli.threads),
        Command::Reproduce { figure, out } => {
            let r = reproduce(&figure, &out, cli.threads).map_err(|e| e.to_string())?;
            for f in &r.files {
                eprintln!("wrote {}", f.display());
            }
            if r.hard_errors > 0 {
                eprintln!("{} rows with hard errors", r.hard_errors);
            }
            Ok(r.hard_errors == 0)
        }
        Command::Check => {
            let outcomes = run_checks();
            for o in &outcomes {
                println!("{}", o.line());
            }
            Ok(outcomes.iter().all(|o| o.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
