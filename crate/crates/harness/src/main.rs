use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tdope_core::colormap::Scale;
use tdope_core::entanglement::LogBase;
use tdope_harness::commands::{self, EssInput};
use tdope_harness::{DopingLevel, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "tdope", version, about = "Entanglement complexity of T-doped random Clifford circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Qubit counts, comma separated.
    #[arg(long = "n", global = true, value_delimiter = ',')]
    n: Vec<usize>,
    /// T-gate counts or "universal", comma separated.
    #[arg(long = "nt", global = true, value_delimiter = ',')]
    nt: Vec<DopingLevel>,
    /// Circuits per (N, n_T) point
    #[arg(long, global = true)]
    realizations: Option<usize>,
    /// Base seed; realization seeds are derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for tables, records and images
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Entropy log base: 2 (bits) or e (nats).
    #[arg(long = "log-base", global = true)]
    log_base: Option<LogBase>,
    /// Worker threads (0 = all cores, 1 = serial).
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    /// Also write gnuplot scripts next to the CSV tables.
    #[arg(long = "plot-script", global = true)]
    plot_script: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Heat states with doped circuits and record S̄ after every gate.
    Heat {
        /// Record S̄ every this many gates.
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Entanglement-spectrum statistics and D_KL against GUE.
    Ess {
        /// Reuse stored heat/ess run records instead of heating afresh.
        #[arg(long, num_args = 1..)]
        records: Vec<PathBuf>,
    },
    /// Temporal entanglement fluctuations under infinite-temperature scrambling.
    Fluct,
    /// Metropolis disentangling and reversibility.
    Cool {
        /// Universal-baseline manifest (default: <out>/baselines.json).
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Amplitude images of the Clifford / T-layer / re-scrambled stages.
    Render {
        #[arg(long)]
        scale: Option<Scale>,
    },
    /// Fitted threshold formulas over a range of N.
    Fits {
        #[arg(long, default_value_t = 8)]
        n_min: usize,
        #[arg(long, default_value_t = 40)]
        n_max: usize,
    },
}

fn resolve(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if !common.n.is_empty() {
        cfg.n_qubits = common.n.clone();
    }
    if !common.nt.is_empty() {
        cfg.n_t = common.nt.clone();
    }
    if let Some(r) = common.realizations {
        cfg.realizations = r;
    }
    if let Some(s) = common.seed {
        cfg.seed_base = s;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    if let Some(b) = common.log_base {
        cfg.log_base = b;
    }
    if let Some(p) = common.parallelism {
        cfg.parallelism = p;
    }
    cfg.plot_script |= common.plot_script;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = resolve(&cli.common)?;
    match cli.command {
        Command::Heat { stride } => {
            if let Some(s) = stride {
                cfg.stride = s;
            }
            let (rows, _) = commands::cmd_heat(&cfg)?;
            for r in rows {
                println!(
                    "N={:<3} n_T={:<9} gates={:<6} S̄_final={:.6} ± {:.6} {}",
                    r.n_qubits,
                    r.n_t,
                    r.gate_count,
                    r.final_entropy.mean,
                    r.final_entropy.sem,
                    cfg.log_base.unit()
                );
            }
        }
        Command::Ess { records } => {
            let input = if records.is_empty() { EssInput::Fresh } else { EssInput::Records(&records) };
            let (rows, _) = commands::cmd_ess(&cfg, input)?;
            for r in rows {
                let dkl = r.d_kl.map(|d| format!("{d:.5}")).unwrap_or_else(|| "undefined".into());
                println!(
                    "N={:<3} n_T={:<9} ratios={:<6} degenerate={:<6} D_KL={dkl} nats (fit {:.5})",
                    r.n_qubits, r.n_t, r.ratio_count, r.degenerate_count, r.d_kl_fit.value
                );
            }
        }
        Command::Fluct => {
            let (rows, _) = commands::cmd_fluct(&cfg)?;
            for r in rows {
                println!(
                    "N={:<3} n_T={:<9} Var={:.4e} ± {:.1e} (fit {:.4e}) {}²",
                    r.n_qubits,
                    r.n_t,
                    r.variance.mean,
                    r.variance.sem,
                    r.var_fit,
                    cfg.log_base.unit()
                );
            }
        }
        Command::Cool { baseline } => {
            if baseline.is_some() {
                cfg.baseline = baseline;
            }
            let (rows, _) = commands::cmd_cool(&cfg)?;
            for r in rows {
                println!(
                    "N={:<3} n_T={:<9} success={:.2} R={:.4} ± {:.4} (fit {:.4})",
                    r.n_qubits, r.n_t, r.success.mean, r.reversibility, r.reversibility_sem, r.reversibility_fit
                );
            }
        }
        Command::Render { scale } => {
            if let Some(s) = scale {
                cfg.render.scale = s;
            }
            let rows = commands::cmd_render(&cfg)?;
            for r in rows {
                println!(
                    "N={} n_T={} r={} {}x{} stage1==stage2: {} stage3 differs: {}",
                    r.n_qubits, r.n_t, r.realization, r.width, r.width, r.stage1_equals_stage2, r.stage3_differs
                );
            }
        }
        Command::Fits { n_min, n_max } => {
            let (rows, slopes) = commands::cmd_fits(&cfg, n_min, n_max)?;
            println!("{:>4} {:>8} {:>10} {:>10} {:>7} {:>7}", "N", "ESS", "variance", "revers.", "ESS*", "var*");
            for r in rows {
                println!(
                    "{:>4} {:>8} {:>10.4} {:>10.4} {:>7} {:>7}",
                    r.n_qubits, r.nt_min_ess, r.nt_min_var, r.nt_min_rev, r.solved_ess, r.solved_var
                );
            }
            for s in slopes {
                println!("{:?}: slope {:.4} over the table, {:.4} asymptotically", s.threshold, s.slope_table_range, s.slope_asymptotic);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
