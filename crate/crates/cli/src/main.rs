use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{ArgAction, Parser, Subcommand};
use raddamp_cli::{execute, read_manifest, Command, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "raddamp", version, about = "Confined particle coupled to a scalar wave field: runs and diagnostics")]
struct Cli {
    /// Scenario file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for randomly sampled directions.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Reject unknown config keys.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    strict: bool,
    /// Run artifact to analyse instead of simulating.
    #[arg(long, global = true)]
    artifact: Option<PathBuf>,
    /// Execute a JSON manifest; the other flags are ignored.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Integrate the coupled system and write the run artifact.
    Simulate,
    /// Compare the far-field routes on random directions.
    Farfield {
        #[arg(long, default_value_t = 8)]
        directions: usize,
        #[arg(long, default_value_t = 8)]
        times: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Scan the Fourier transform of the density for zeros.
    Wiener {
        #[arg(long, default_value_t = 4001)]
        samples: usize,
        #[arg(long)]
        k_max: Option<f64>,
        /// Fail when the scan finds a zero.
        #[arg(long, default_value_t = true, action = ArgAction::Set)]
        gate: bool,
    },
    /// Local energy balance against the outgoing flux.
    Audit {
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long)]
        t1: Option<f64>,
    },
    /// Cumulative radiated energy.
    Radiation {
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Decay-rate fits of the speed and the weighted deviation norm.
    Ratefit {
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 10)]
        norm_times: usize,
        #[arg(long)]
        r_trunc: Option<f64>,
    },
    /// Scattering remainder and its integrated bound.
    Scatter {
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
    },
    /// Linearized run and its conserved energy.
    Linear {
        #[arg(long, default_value_t = 6)]
        samples: usize,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Simulate => Command::Simulate,
            Cmd::Farfield { directions, times, tol } => Command::Farfield { directions, times, tol },
            Cmd::Wiener { samples, k_max, gate } => Command::Wiener { samples, k_max, gate },
            Cmd::Audit { radius, t0, t1 } => Command::Audit { radius, t0, t1 },
            Cmd::Radiation { t_end } => Command::Radiation { t_end },
            Cmd::Ratefit { alpha, eps, t_min, t_max, norm_times, r_trunc } => {
                Command::Ratefit { alpha, eps, t_min, t_max, norm_times, r_trunc }
            }
            Cmd::Scatter { alpha, eps } => Command::Scatter { alpha, eps },
            Cmd::Linear { samples, tol } => Command::Linear { samples, tol },
        }
    }
}

fn manifest(cli: Cli) -> Result<RunManifest> {
    if let Some(p) = cli.manifest {
        return read_manifest(&p);
    }
    let Some(cmd) = cli.command else {
        anyhow::bail!("no subcommand given (see --help)");
    };
    let mut m = RunManifest::new(cli.config, cli.out, vec![cmd.into()]);
    m.seed = cli.seed;
    m.strict = cli.strict;
    m.artifact = cli.artifact;
    Ok(m)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match manifest(cli).and_then(|m| execute(&m)) {
        Ok(summary) => {
            for c in &summary.checks {
                eprintln!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            println!("{}", serde_json::json!({"status": if summary.passed { "pass" } else { "fail" }, "failures": summary.failures}));
            if summary.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            println!("{}", serde_json::json!({"status": "error", "failures": [format!("{e:#}")]}));
            ExitCode::from(2)
        }
    }
}
