//! Experiment configuration, execution and result serialization.
//!
//! # Configuration
//!
//! Every experiment starts from its own defaults (see
//! [`ExperimentConfig::defaults`]). A config file, then command-line flags,
//! override them. Config files are flat `key = value` lines; keys are the
//! flag names without the leading dashes (`train-size = 500`). `#` starts a
//! comment.
//!
//! Advice payloads are hex strings read most significant bit first within
//! each digit (`"a"` is `1010`), cut to `payload-bits` bits. Without a
//! payload the codec draws a fresh random payload per trial. PRG keys are hex
//! as well.
//!
//! # Output
//!
//! CSV holds the experiment's table: a header row, then one line per row, in
//! the fixed column order listed below. JSON holds the whole
//! [`ExperimentReport`]: schema version, tool version, the effective config,
//! the table, scalar metrics and notes, with keys in that order.
//!
//! | experiment | columns |
//! |---|---|
//! | separation | `arm,learner,train_dist,train_size,trials,accuracy,ci99_half_width,predicted_accuracy` |
//! | codec | `payload_bits,samples,trials,successes,success_rate,ci99_half_width,decode_failures,bit_error_positions` |
//! | walk | `p,k,trials,mean_steps,ci99_half_width,expected_steps,within_3ci` |
//! | bounds | `n,p_samples,alpha,radius,ball_size,ball_size_log2,entropy_bound_log2,lower_bound,vacuous,exact_error` |
//! | distinguish | `arm,class,prg,train_size,trials,accuracy,ci99_half_width` |
//! | regularity | `family,n,p_samples,q,budget,trials,domination_rate,ci99_half_width,required` |
//!
//! Reports carry no timing information, so identical configs give identical
//! bytes whatever the worker count.

mod experiments;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::concepts::PrgKind;
use crate::error::{Error, Result};

pub use experiments::{
    run_bounds, run_codec, run_distinguish, run_regularity, run_separation, run_walk,
};
pub use report::{emit, parse_csv, parse_json, Cell, ExperimentReport, Metric, SCHEMA_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Separation,
    Codec,
    Walk,
    Bounds,
    Distinguish,
    Regularity,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Separation,
        Experiment::Codec,
        Experiment::Walk,
        Experiment::Bounds,
        Experiment::Distinguish,
        Experiment::Regularity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Separation => "separation",
            Experiment::Codec => "codec",
            Experiment::Walk => "walk",
            Experiment::Bounds => "bounds",
            Experiment::Distinguish => "distinguish",
            Experiment::Regularity => "regularity",
        }
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Experiment::Separation => &[
                "arm",
                "learner",
                "train_dist",
                "train_size",
                "trials",
                "accuracy",
                "ci99_half_width",
                "predicted_accuracy",
            ],
            Experiment::Codec => &[
                "payload_bits",
                "samples",
                "trials",
                "successes",
                "success_rate",
                "ci99_half_width",
                "decode_failures",
                "bit_error_positions",
            ],
            Experiment::Walk => &[
                "p",
                "k",
                "trials",
                "mean_steps",
                "ci99_half_width",
                "expected_steps",
                "within_3ci",
            ],
            Experiment::Bounds => &[
                "n",
                "p_samples",
                "alpha",
                "radius",
                "ball_size",
                "ball_size_log2",
                "entropy_bound_log2",
                "lower_bound",
                "vacuous",
                "exact_error",
            ],
            Experiment::Distinguish => &[
                "arm",
                "class",
                "prg",
                "train_size",
                "trials",
                "accuracy",
                "ci99_half_width",
            ],
            Experiment::Regularity => &[
                "family",
                "n",
                "p_samples",
                "q",
                "budget",
                "trials",
                "domination_rate",
                "ci99_half_width",
                "required",
            ],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown format {other:?}; expected csv or json"
            ))),
        }
    }
}

/// Effective configuration of one run. Serialized verbatim into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: u32,
    /// Training examples per trial. For the codec: samples per decode. For
    /// regularity: the number of draws from the adversarial law.
    pub train_size: u64,
    /// Arm A training size in the separation experiment.
    pub range_train_size: u64,
    /// Test inputs per trial, all scored against the same training set.
    pub test_points: u64,
    pub trials: u64,
    pub m: u32,
    pub prg: PrgKind,
    /// Hex key material mixed into the hash PRG; empty for none.
    pub prg_key: String,
    pub seed: u64,
    pub format: OutputFormat,
    /// Votes in the amplified learner (odd).
    pub votes: u64,
    /// Hex payload for the codec; empty for a random payload per trial.
    pub payload: String,
    pub payload_bits: u64,
    /// Inverse failure probability in the regularity budget `2·p·q + 1`.
    pub q: u64,
    /// Learner name; `suite` runs every learner the experiment supports.
    pub learner: String,
    /// Permits the insecure test PRG. Not part of the echoed config.
    #[serde(skip)]
    pub allow_insecure: bool,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            n: 16,
            train_size: 1000,
            range_train_size: 200,
            test_points: 1,
            trials: 10_000,
            m: 10,
            prg: PrgKind::HashBased,
            prg_key: String::new(),
            seed: 0,
            format: OutputFormat::Csv,
            votes: 3,
            payload: String::new(),
            payload_bits: 64,
            q: 10,
            learner: "suite".into(),
            allow_insecure: false,
        };
        match experiment {
            Experiment::Separation => base,
            Experiment::Codec => ExperimentConfig {
                n: 7,
                train_size: 100_000,
                trials: 100,
                ..base
            },
            Experiment::Walk => ExperimentConfig {
                n: 1,
                trials: 100_000,
                ..base
            },
            Experiment::Bounds => ExperimentConfig {
                n: 2,
                trials: 1,
                ..base
            },
            Experiment::Distinguish => ExperimentConfig {
                learner: "lookup".into(),
                ..base
            },
            Experiment::Regularity => ExperimentConfig {
                n: 8,
                train_size: 10,
                ..base
            },
        }
    }

    /// Checks counts and per-experiment limits.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.test_points == 0 {
            return bad("test-points must be positive".into());
        }
        if self.m == 0 {
            return bad("m must be positive".into());
        }
        if self.votes.is_multiple_of(2) {
            return bad(format!("votes must be odd, got {}", self.votes));
        }
        if self.q == 0 {
            return bad("q must be positive".into());
        }
        if self.prg == PrgKind::TestDeterministic && !self.allow_insecure {
            return bad("the test PRG is insecure; pass --allow-insecure to use it".into());
        }
        let max_n = match self.experiment {
            Experiment::Separation | Experiment::Distinguish => 24,
            Experiment::Codec => 20,
            Experiment::Walk => u32::MAX,
            Experiment::Bounds => crate::stats::MAX_BOUND_WIDTH,
            Experiment::Regularity => 20,
        };
        if self.n == 0 || self.n > max_n {
            return bad(format!(
                "n must be in 1..={max_n} for {}, got {}",
                self.experiment, self.n
            ));
        }
        if self.train_size == 0 && self.experiment != Experiment::Separation {
            return bad("train-size must be positive".into());
        }
        Ok(())
    }
}

/// Partial configuration from a config file or flags. `None` leaves the
/// underlying value alone.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub n: Option<u32>,
    pub train_size: Option<u64>,
    pub range_train_size: Option<u64>,
    pub test_points: Option<u64>,
    pub trials: Option<u64>,
    pub m: Option<u32>,
    pub prg: Option<PrgKind>,
    pub prg_key: Option<String>,
    pub seed: Option<u64>,
    pub format: Option<OutputFormat>,
    pub votes: Option<u64>,
    pub payload: Option<String>,
    pub payload_bits: Option<u64>,
    pub q: Option<u64>,
    pub learner: Option<String>,
    pub allow_insecure: Option<bool>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("bad value {value:?} for {key}: {e}")))
}

impl Overrides {
    /// Sets one key by its flag name (`train-size`; underscores also work).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match key.as_str() {
            "experiment" => self.experiment = Some(value.parse()?),
            "n" => self.n = Some(parse_value(&key, value)?),
            "train-size" => self.train_size = Some(parse_value(&key, value)?),
            "range-train-size" => self.range_train_size = Some(parse_value(&key, value)?),
            "test-points" => self.test_points = Some(parse_value(&key, value)?),
            "trials" => self.trials = Some(parse_value(&key, value)?),
            "m" => self.m = Some(parse_value(&key, value)?),
            "prg" => {
                self.prg = Some(
                    value
                        .parse()
                        .map_err(|e: Error| Error::Config(e.to_string()))?,
                )
            }
            "prg-key" => self.prg_key = Some(value.to_string()),
            "seed" => self.seed = Some(parse_value(&key, value)?),
            "format" => self.format = Some(value.parse()?),
            "votes" => self.votes = Some(parse_value(&key, value)?),
            "payload" => self.payload = Some(value.to_string()),
            "payload-bits" => self.payload_bits = Some(parse_value(&key, value)?),
            "q" => self.q = Some(parse_value(&key, value)?),
            "learner" => self.learner = Some(value.to_string()),
            "allow-insecure" => self.allow_insecure = Some(parse_value(&key, value)?),
            // Output paths and worker counts belong to the invocation, not
            // the experiment.
            "out" | "config" | "workers" => {
                return Err(Error::Config(format!(
                    "{key} cannot be set from a config file"
                )))
            }
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses flat `key = value` text.
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut out = Overrides::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            out.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(out)
    }

    /// `self` wins wherever both are set.
    pub fn or(self, lower: Overrides) -> Overrides {
        Overrides {
            experiment: self.experiment.or(lower.experiment),
            n: self.n.or(lower.n),
            train_size: self.train_size.or(lower.train_size),
            range_train_size: self.range_train_size.or(lower.range_train_size),
            test_points: self.test_points.or(lower.test_points),
            trials: self.trials.or(lower.trials),
            m: self.m.or(lower.m),
            prg: self.prg.or(lower.prg),
            prg_key: self.prg_key.or(lower.prg_key),
            seed: self.seed.or(lower.seed),
            format: self.format.or(lower.format),
            votes: self.votes.or(lower.votes),
            payload: self.payload.or(lower.payload),
            payload_bits: self.payload_bits.or(lower.payload_bits),
            q: self.q.or(lower.q),
            learner: self.learner.or(lower.learner),
            allow_insecure: self.allow_insecure.or(lower.allow_insecure),
        }
    }

    /// Applies the overrides to the defaults of the selected experiment.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let experiment = self
            .experiment
            .ok_or_else(|| Error::Config("no experiment selected".into()))?;
        let d = ExperimentConfig::defaults(experiment);
        let cfg = ExperimentConfig {
            experiment,
            n: self.n.unwrap_or(d.n),
            train_size: self.train_size.unwrap_or(d.train_size),
            range_train_size: self.range_train_size.unwrap_or(d.range_train_size),
            test_points: self.test_points.unwrap_or(d.test_points),
            trials: self.trials.unwrap_or(d.trials),
            m: self.m.unwrap_or(d.m),
            prg: self.prg.unwrap_or(d.prg),
            prg_key: self.prg_key.unwrap_or(d.prg_key),
            seed: self.seed.unwrap_or(d.seed),
            format: self.format.unwrap_or(d.format),
            votes: self.votes.unwrap_or(d.votes),
            payload: self.payload.unwrap_or(d.payload),
            payload_bits: self.payload_bits.unwrap_or(d.payload_bits),
            q: self.q.unwrap_or(d.q),
            learner: self.learner.unwrap_or(d.learner),
            allow_insecure: self.allow_insecure.unwrap_or(d.allow_insecure),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs the configured experiment on a pool of `workers` threads (all cores
/// when `None`).
pub fn run(config: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentReport> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match config.experiment {
        Experiment::Separation => run_separation(config),
        Experiment::Codec => run_codec(config),
        Experiment::Walk => run_walk(config),
        Experiment::Bounds => run_bounds(config),
        Experiment::Distinguish => run_distinguish(config),
        Experiment::Regularity => run_regularity(config),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let file = Overrides::parse_file(
            "# comment\nexperiment = walk\ntrials = 500\nseed=9  # trailing\ntrain_size = 3\n",
        )
        .unwrap();
        let mut flags = Overrides::default();
        flags.set("trials", "700").unwrap();
        let cfg = flags.or(file).resolve().unwrap();
        assert_eq!(cfg.experiment, Experiment::Walk);
        assert_eq!((cfg.trials, cfg.seed, cfg.train_size), (700, 9, 3));
        assert_eq!(cfg.m, ExperimentConfig::defaults(Experiment::Walk).m);
    }

    #[test]
    fn bad_config_lines_are_reported() {
        assert!(Overrides::parse_file("trials 5").is_err());
        assert!(Overrides::parse_file("colour = red").is_err());
        assert!(Overrides::parse_file("trials = many").is_err());
        assert!(Overrides::parse_file("workers = 2").is_err());
    }

    #[test]
    fn test_prg_needs_permission() {
        let mut o = Overrides {
            experiment: Some(Experiment::Separation),
            prg: Some(PrgKind::TestDeterministic),
            ..Default::default()
        };
        assert!(o.clone().resolve().is_err());
        o.allow_insecure = Some(true);
        assert!(o.resolve().is_ok());
    }

    #[test]
    fn validation_limits() {
        let mut cfg = ExperimentConfig::defaults(Experiment::Bounds);
        cfg.n = 11;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::defaults(Experiment::Separation);
        cfg.votes = 4;
        assert!(cfg.validate().is_err());
        cfg.votes = 3;
        cfg.n = 25;
        assert!(cfg.validate().is_err());
        for e in Experiment::ALL {
            ExperimentConfig::defaults(e).validate().unwrap();
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }
}
