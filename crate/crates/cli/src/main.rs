use std::path::PathBuf;
use std::process::ExitCode;

use catbell_cli::config::parse_angles;
use catbell_cli::{commands, CliError, RunConfig};
use catbell_core::SettingAngles;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "catbell", version, about = "Bell-test simulations with macroscopic pair-coherent states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

/// Flags shared by every subcommand; they override values from `--config`.
#[derive(Args)]
struct Common {
    /// `key = value` config file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    r0: Option<f64>,
    /// Drive amplitude, repeatable; also used for beta
    #[arg(long = "alpha", global = true)]
    alphas: Vec<f64>,
    /// theta,phi,theta',phi' in radians; `pi/4` style shortcuts allowed
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_angles)]
    angles: Option<SettingAngles>,
    /// Photon-number threshold N0, repeatable
    #[arg(long = "n0", global = true)]
    n0_list: Vec<u32>,
    #[arg(long, global = true)]
    k_points: Option<usize>,
    #[arg(long, global = true)]
    sigma_factor: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Setting {
    Bb,
    Bg,
    Gb,
    Gg,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-drive CHSH value for each alpha and N0
    ScanAlpha,
    /// Limiting CHSH value, dead zone and outcome probabilities
    Asymptotic {
        /// Also write the joint quadrature densities
        #[arg(long)]
        export_density: bool,
    },
    /// Local hidden-variable assignments and random mixtures
    Lhv {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Distance between rescaled P(m,n) and the asymptote
    Convergence {
        /// Compare the asymptote with its own discretization
        #[arg(long)]
        self_test: bool,
    },
    /// Dump P(m,n) for one setting
    Pmn {
        #[arg(long, value_enum, default_value = "bb")]
        setting: Setting,
    },
}

fn build_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = common.r0 {
        cfg.r0 = v;
    }
    if !common.alphas.is_empty() {
        cfg.alphas = common.alphas.clone();
    }
    if let Some(v) = common.angles {
        cfg.angles = v;
    }
    if !common.n0_list.is_empty() {
        cfg.n0_list = common.n0_list.clone();
    }
    if let Some(v) = common.k_points {
        cfg.k_points = v;
    }
    if let Some(v) = common.sigma_factor {
        cfg.sigma_factor = v;
    }
    if let Some(v) = common.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = &common.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if common.workers.is_some() {
        cfg.workers = common.workers;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = build_config(&cli.common)?;
    match cli.command {
        Command::ScanAlpha => commands::scan_alpha(&cfg),
        Command::Asymptotic { export_density } => commands::asymptotic(&cfg, export_density),
        Command::Lhv { samples } => {
            if let Some(s) = samples {
                cfg.samples = s;
            }
            commands::lhv(&cfg)
        }
        Command::Convergence { self_test } => commands::convergence(&cfg, self_test),
        Command::Pmn { setting } => commands::pmn(&cfg, setting as usize),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("catbell: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
