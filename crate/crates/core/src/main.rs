use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;

use shiftlab::harness::{self, emit, Experiment, Overrides};

/// Runs one distribution-shift learning experiment and prints its report.
#[derive(Parser, Debug)]
#[command(name = "shiftlab", version)]
struct Cli {
    /// separation | codec | walk | bounds | distinguish | regularity
    experiment_name: Option<Experiment>,
    #[arg(long)]
    experiment: Option<Experiment>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    train_size: Option<u64>,
    /// Arm A training size in the separation experiment.
    #[arg(long)]
    range_train_size: Option<u64>,
    #[arg(long)]
    test_points: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    m: Option<u32>,
    /// hash | test
    #[arg(long)]
    prg: Option<String>,
    /// Hex key material for the hash PRG.
    #[arg(long)]
    prg_key: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    votes: Option<u64>,
    /// Hex payload for the codec experiment.
    #[arg(long)]
    payload: Option<String>,
    #[arg(long)]
    payload_bits: Option<u64>,
    /// Inverse failure probability for the regularity budget.
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    learner: Option<String>,
    /// Worker threads; defaults to all cores. Never changes the output.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Permit the insecure test PRG.
    #[arg(long)]
    allow_insecure: bool,
}

impl Cli {
    fn overrides(&self) -> Result<Overrides> {
        if let (Some(a), Some(b)) = (self.experiment_name, self.experiment) {
            if a != b {
                bail!("experiment given twice: {a} and {b}");
            }
        }
        let mut o = Overrides {
            experiment: self.experiment.or(self.experiment_name),
            n: self.n,
            train_size: self.train_size,
            range_train_size: self.range_train_size,
            test_points: self.test_points,
            trials: self.trials,
            m: self.m,
            prg_key: self.prg_key.clone(),
            seed: self.seed,
            votes: self.votes,
            payload: self.payload.clone(),
            payload_bits: self.payload_bits,
            q: self.q,
            learner: self.learner.clone(),
            allow_insecure: self.allow_insecure.then_some(true),
            ..Default::default()
        };
        if let Some(p) = &self.prg {
            o.set("prg", p)?;
        }
        if let Some(f) = &self.format {
            o.set("format", f)?;
        }
        Ok(o)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Overrides::parse_file(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => Overrides::default(),
    };
    let config = cli.overrides()?.or(file).resolve()?;

    let start = Instant::now();
    let report = harness::run(&config, cli.workers)?;
    let text = emit(&report, config.format)?;
    eprintln!("{} finished in {:.2?}", config.experiment, start.elapsed());

    match &cli.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}
