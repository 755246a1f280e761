use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ris_isac::harness::{render, run, write_outputs, Command, Experiment, SimConfig};

#[derive(Parser)]
#[command(
    name = "ris-isac",
    version,
    about = "RIS-assisted location sensing and superimposed-pilot uplink simulator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Cramér–Rao bounds of the configured UEs.
    Crb(Common),
    /// One noisy sensing round per UE.
    Sense(Common),
    /// Closed-form and Monte-Carlo rates for a random RIS profile.
    Rate(Common),
    /// GA, SA and random-search phase optimisation.
    Optimize(Common),
    /// Multi-interval sense / optimise / communicate simulation.
    Frame(Common),
    /// Reproduce one figure experiment.
    Sweep {
        /// rmse-vs-crb, crb-vs-mr, ifft-vs-mle, rate-validate, rate-vs-mr,
        /// power-sweep or frame-sim.
        #[arg(long)]
        experiment: Experiment,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// `key=value` file layered over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV destination; a `.manifest` is written next to it. Stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the number of noise realisations per point.
    #[arg(long)]
    trials: Option<usize>,
    /// Paper-scale trial counts instead of the desk preset.
    #[arg(long)]
    full: bool,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn execute(cmd: Command, c: Common) -> ris_isac::Result<()> {
    let mut cfg = match &c.config {
        Some(p) => SimConfig::from_file(p, c.full)?,
        None => SimConfig::preset(c.full),
    };
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    for kv in &c.set {
        cfg.apply(kv)?;
    }
    let out = run(cmd, &cfg, c.seed)?;
    match &c.out {
        Some(path) => write_outputs(
            path,
            &out.rows,
            &cfg.to_text(),
            c.seed,
            &cmd.name(),
            &out.extras,
        )?,
        None => print!("{}", render(&out.rows)),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.cmd {
        Cmd::Crb(c) => (Command::Crb, c),
        Cmd::Sense(c) => (Command::Sense, c),
        Cmd::Rate(c) => (Command::Rate, c),
        Cmd::Optimize(c) => (Command::Optimize, c),
        Cmd::Frame(c) => (Command::Frame, c),
        Cmd::Sweep { experiment, common } => (Command::Sweep(experiment), common),
    };
    match execute(cmd, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
