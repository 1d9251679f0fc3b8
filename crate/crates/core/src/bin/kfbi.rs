use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kfbi::harness::validate::property_suite;
use kfbi::harness::{
    dump_field, emit_table, fill_orders, format_table, preset, presets, run_example, run_single,
    ConvergenceRow, ExperimentConfig,
};
use kfbi::{KfbiError, Result};

/// Caps the rayon pool when set to a positive integer.
const THREADS_ENV: &str = "KFBI_NUM_THREADS";

#[derive(Parser)]
#[command(
    name = "kfbi",
    version,
    about = "Kernel-free boundary integral solver for PDEs on parameterized surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one grid level and print its table row.
    Solve {
        /// TOML config file, or the name of a built-in preset.
        config: String,
        /// Grid size; defaults to the largest size in the config.
        #[arg(long)]
        n: Option<usize>,
        /// Write the grid solution here (overrides `dump` in the config).
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Run the refinement sweep and print the convergence table.
    Convergence {
        config: String,
        /// CSV destination (overrides `output` in the config).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Solve grid levels concurrently.
        #[arg(long)]
        parallel_rows: bool,
    },
    /// Run the built-in property checks.
    Validate,
    /// List built-in presets.
    Presets,
    /// Print a preset as a TOML config.
    Show { name: String },
}

fn load_config(arg: &str) -> Result<ExperimentConfig> {
    let path = Path::new(arg);
    if path.exists() {
        return ExperimentConfig::load(path);
    }
    preset(arg)
        .map(|p| p.config)
        .ok_or_else(|| KfbiError::Config(format!("no config file or preset named {arg:?}")))
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        KfbiError::Config(format!(
            "{THREADS_ENV} must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| KfbiError::Config(e.to_string()))
}

fn report_failures(rows: &[ConvergenceRow]) -> bool {
    let mut failed = false;
    for r in rows {
        if let Some(f) = &r.failure {
            eprintln!("kfbi: row N={} failed: {f}", r.n);
            failed = true;
        }
    }
    failed
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Solve { config, n, dump } => {
            let cfg = load_config(&config)?;
            cfg.validate()?;
            let n = n.unwrap_or_else(|| cfg.grids.iter().copied().max().unwrap_or(64));
            let out = run_single(&cfg, n)?;
            let mut rows = vec![ConvergenceRow {
                n,
                m: out.m,
                gmres_iterations: out.solution.stats.gmres_iterations,
                cpu_seconds: out.cpu_seconds,
                max_error: out.max_error,
                observed_order: None,
                failure: None,
            }];
            fill_orders(&mut rows);
            print!("{}", format_table(&rows));
            if let Some(path) = dump.or(cfg.dump) {
                dump_field(&out.solution.u, &path)?;
            }
            Ok(true)
        }
        Command::Convergence {
            config,
            output,
            parallel_rows,
        } => {
            let mut cfg = load_config(&config)?;
            cfg.parallel_rows |= parallel_rows;
            let rows = run_example(&cfg)?;
            print!("{}", format_table(&rows));
            if let Some(path) = output.or(cfg.output) {
                emit_table(&rows, &path)?;
            }
            Ok(!report_failures(&rows))
        }
        Command::Validate => {
            let mut ok = true;
            for c in property_suite() {
                println!(
                    "{} {} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
                ok &= c.passed;
            }
            Ok(ok)
        }
        Command::Presets => {
            for p in presets() {
                println!("{:<16} {}", p.config.name, p.description);
            }
            Ok(true)
        }
        Command::Show { name } => {
            let p = preset(&name)
                .ok_or_else(|| KfbiError::Config(format!("unknown preset {name:?}")))?;
            print!("{}", p.config.to_toml()?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error kind={} message={:?}", e.kind(), e.to_string());
            ExitCode::from(2)
        }
    }
}
