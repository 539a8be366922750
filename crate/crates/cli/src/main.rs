//! `synclab` — scenario-driven runner for the master–slave synchronization
//! experiments.
//!
//! Exit codes: 0 success, 1 threshold failure, 2 configuration error,
//! 3 simulation failure.

mod csvio;
mod report;
mod runner;
mod scenario;
mod svg;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use synclab_core::cycle::{adjoint_cycle, find_limit_cycle, monodromy};
use synclab_core::models;

use runner::{run_scenario, Overrides};

#[derive(Parser)]
#[command(name = "synclab", version, about = "Master-slave synchronization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write trace.csv, report.json, plot.svg.
    Run {
        /// Scenario TOML file.
        config: PathBuf,
        /// Output directory (overrides the scenario's out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// RNG seed override for Monte-Carlo certification.
        #[arg(long)]
        seed: Option<u64>,
        /// Suppress progress output.
        #[arg(long)]
        quiet: bool,
    },
    /// Run a parameter sweep and write one aggregated sweep.csv.
    Sweep {
        /// Sweep TOML file (base scenario plus grid).
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Locate a limit cycle of a builtin autonomous model and print its data.
    LimitCycle {
        /// Model name (fhn, chaotic_cnn, forced_master_nn).
        model: String,
        /// Seed state for the search, comma-separated (default for fhn: 5,-5).
        #[arg(long, value_name = "x,y,...")]
        seed: Option<String>,
        /// Period guess (default for fhn: 10).
        #[arg(long)]
        period_guess: Option<f64>,
        /// Also write limit_cycle.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Evaluate the gain certificate of a static scenario without simulating.
    Certify {
        /// Static-kind scenario TOML file with a [certify] table.
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        quiet: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, seed, quiet } => cmd_run(&config, out, seed, quiet),
        Command::Sweep { config, out, seed, quiet } => cmd_sweep(&config, out, seed, quiet),
        Command::LimitCycle {
            model,
            seed,
            period_guess,
            out,
            quiet,
        } => cmd_limit_cycle(&model, seed.as_deref(), period_guess, out, quiet),
        Command::Certify { config, seed, quiet } => cmd_certify(&config, seed, quiet),
    };
    ExitCode::from(code as u8)
}

fn cmd_run(config: &PathBuf, out: Option<PathBuf>, seed: Option<u64>, quiet: bool) -> i32 {
    let overrides = Overrides {
        out_dir: out,
        seed,
        quiet,
    };
    match run_scenario(config, &overrides) {
        Ok(outcome) => {
            if outcome.report.pass {
                0
            } else {
                if !quiet {
                    eprintln!("thresholds failed for {}", config.display());
                }
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_sweep(config: &PathBuf, out: Option<PathBuf>, seed: Option<u64>, quiet: bool) -> i32 {
    let overrides = Overrides {
        out_dir: out,
        seed,
        quiet,
    };
    match sweep::run_sweep(config, &overrides) {
        Ok(outcome) => {
            let path = outcome.out_dir.join("sweep.csv");
            if let Some(parent) = path.parent() {
                if let Err(e) = std::fs::create_dir_all(parent) {
                    eprintln!("error: cannot create {}: {e}", parent.display());
                    return 3;
                }
            }
            if let Err(e) = std::fs::write(&path, &outcome.csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 3;
            }
            if !quiet {
                println!("wrote {} ({} rows)", path.display(), outcome.rows);
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn parse_point(text: &str) -> Result<DVector<f64>, String> {
    let parts: Result<Vec<f64>, _> = text.split(',').map(|p| p.trim().parse::<f64>()).collect();
    match parts {
        Ok(v) if !v.is_empty() => Ok(DVector::from_column_slice(&v)),
        _ => Err(format!("cannot parse '{text}' as comma-separated floats")),
    }
}

fn cmd_limit_cycle(
    model: &str,
    seed: Option<&str>,
    period_guess: Option<f64>,
    out: Option<PathBuf>,
    quiet: bool,
) -> i32 {
    let Some(field) = models::by_name(model) else {
        eprintln!(
            "error: unknown model '{model}' (available: {})",
            models::MODEL_NAMES.join(", ")
        );
        return 2;
    };
    let (default_seed, default_guess) = match model {
        "fhn" => (Some("5,-5"), Some(10.0)),
        _ => (None, None),
    };
    let seed_text = match seed.or(default_seed) {
        Some(s) => s,
        None => {
            eprintln!("error: model '{model}' needs --seed x,y,... and --period-guess");
            return 2;
        }
    };
    let guess = match period_guess.or(default_guess) {
        Some(g) if g > 0.0 => g,
        _ => {
            eprintln!("error: model '{model}' needs a positive --period-guess");
            return 2;
        }
    };
    let seed_point = match parse_point(seed_text) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    if seed_point.len() != field.dim() {
        eprintln!(
            "error: seed has {} components, model '{model}' has dimension {}",
            seed_point.len(),
            field.dim()
        );
        return 2;
    }

    let cycle = match find_limit_cycle(field, &seed_point, guess) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    let floquet = match monodromy(&cycle) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    let adjoint = adjoint_cycle(&cycle).ok();

    if !quiet {
        println!("model: {model}");
        println!("period: {}", cycle.period());
        println!("anchor: {:?}", cycle.anchor().as_slice());
        print!("multipliers:");
        for m in &floquet.multipliers {
            print!(" {:.6}{:+.6}i", m.re, m.im);
        }
        println!();
        if let Some(adj) = &adjoint {
            println!("adjoint periodicity defect: {:.3e}", adj.periodicity_defect);
        }
    }

    if let Some(dir) = out {
        let json = serde_json::json!({
            "model": model,
            "period": cycle.period(),
            "anchor": cycle.anchor().as_slice(),
            "multipliers": floquet
                .multipliers
                .iter()
                .map(|m| serde_json::json!({"re": m.re, "im": m.im}))
                .collect::<Vec<_>>(),
            "adjoint_periodicity_defect": adjoint.as_ref().map(|a| a.periodicity_defect),
        });
        let path = dir.join("limit_cycle.json");
        if let Err(e) = std::fs::create_dir_all(&dir)
            .and_then(|()| std::fs::write(&path, format!("{json:#}\n")))
        {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 3;
        }
        if !quiet {
            println!("wrote {}", path.display());
        }
    }
    0
}

fn cmd_certify(config: &PathBuf, seed: Option<u64>, quiet: bool) -> i32 {
    use synclab_core::sliding::{
        certify_gains, BoxRegion, SlidingError, SlidingMode, StaticFeedback,
    };

    let scenario = match scenario::Scenario::load(config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let (Some(st), Some(cert_cfg), Some(reference)) =
        (&scenario.static_, &scenario.certify, &scenario.reference)
    else {
        eprintln!("error: certify needs a static scenario with [static], [certify], [reference]");
        return 2;
    };
    let slave = models::by_name(&scenario.models.slave).expect("validated");
    let master = models::by_name(&scenario.models.master).expect("validated");
    let y0ref = match runner::master_reference(&master, &reference.x0, st.t_end) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    let fb = match StaticFeedback::new(st.gains.clone(), SlidingMode::FilippovSliding) {
        Ok(fb) => fb,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let box_i = BoxRegion::new(cert_cfg.box_lo.clone(), cert_cfg.box_hi.clone());
    let used_seed = seed.unwrap_or(scenario.seed);
    match certify_gains(&fb, &slave, &master, &y0ref, &box_i, cert_cfg.samples, used_seed) {
        Ok(cert) => {
            if !quiet {
                println!("certificate: VALID");
                println!("  M_I        = {}", cert.m_bound);
                println!("  mu_I       = {}", cert.mu);
                println!("  worst V(0) = {}", cert.v0_worst);
                println!("  hit bound  = {}", cert.t_hit_bound_worst);
                println!("  samples    = {}", cert.samples);
            }
            0
        }
        Err(SlidingError::GainTooSmall { m_bound, mu }) => {
            if !quiet {
                println!("certificate: INVALID (gain too small)");
                println!("  M_I  = {m_bound}");
                println!("  mu_I = {mu} (needs mu_I < 0, i.e. b_i < -M_I)");
            }
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}
