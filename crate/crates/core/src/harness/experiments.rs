use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::report::{Cell, ExperimentReport};
use super::{Experiment, ExperimentConfig};
use crate::concepts::{
    exhaustive_class, first_bit_class, modified_class, random_function_class, ClassRef, PrgKind,
    PrgSpec,
};
use crate::distributions::{
    advice_decode, advice_decode_budget, min_samples_to_distinguish, payload_from_hex, AdviceCode,
    Distribution,
};
use crate::domain::{Precision, RiskEstimate, Seed};
use crate::error::{Error, Result};
use crate::learners::{
    bayes_optimal_learner, estimate_class_risk, index_recovery_learner, lookup_learner,
    majority_amplify, majority_success_probability, ConstantLearner, LearnerRef,
};
use crate::stats::{
    adversarial_family, ball_size, bayes_error_lower_bound, distinguishing_advantage,
    hitting_time_mean, random_transfer_checks, simulate_hitting_time, uniform_budget_for_width,
    WalkSpec,
};

fn expect(cfg: &ExperimentConfig, e: Experiment) -> Result<()> {
    cfg.validate()?;
    if cfg.experiment != e {
        return Err(Error::Config(format!(
            "config is for {}, not {e}",
            cfg.experiment
        )));
    }
    Ok(())
}

fn prg_spec(cfg: &ExperimentConfig) -> Result<PrgSpec> {
    let key = hex::decode(cfg.prg_key.trim())
        .map_err(|e| Error::Config(format!("prg-key is not hex: {e}")))?;
    PrgSpec::with_key(cfg.prg, cfg.n, &key)
}

fn insecure_note(report: &mut ExperimentReport, cfg: &ExperimentConfig) {
    if cfg.prg == PrgKind::TestDeterministic {
        report.notes.push(
            "test PRG in use: concepts are not pseudorandom and no security claim applies".into(),
        );
    }
}

/// Learners selectable by name, with the factor by which they consume
/// training data.
fn learner_by_name(name: &str, n: u32, votes: u64) -> Result<(LearnerRef, u64)> {
    Ok(match name {
        "lookup" => (Arc::new(lookup_learner()), 1),
        "amplified_lookup" => (Arc::new(majority_amplify(Arc::new(lookup_learner()), votes as usize)?), votes),
        "constant0" => (Arc::new(ConstantLearner(false)), 1),
        "constant1" => (Arc::new(ConstantLearner(true)), 1),
        "bayes" => (Arc::new(bayes_optimal_learner(exhaustive_class(n)?)), 1),
        other => {
            return Err(Error::Config(format!(
                "unknown learner {other:?}; expected lookup, amplified_lookup, constant0, constant1 or bayes"
            )))
        }
    })
}

/// Probability that `size` uniform draws over `2^n` points include a given
/// point.
fn collision_probability(n: u32, size: u64) -> f64 {
    -(size as f64 * (-(0.5f64.powi(n as i32))).ln_1p()).exp_m1()
}

/// Probability that `size` uniform draws from `{1..n}` cover every value,
/// by inclusion-exclusion.
fn coupon_completion(n: u32, size: u64) -> f64 {
    let mut total = 0.0;
    let mut choose = 1.0;
    for i in 0..=n {
        if i > 0 {
            choose *= f64::from(n - i + 1) / f64::from(i);
        }
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * choose * (1.0 - f64::from(i) / f64::from(n)).powf(size as f64);
    }
    total.clamp(0.0, 1.0)
}

/// Index recovery trained on `{1..n}` against lookup-style learners trained
/// on the uniform cube, all tested on the uniform cube, over the modified
/// first-bit class.
///
/// `predicted_accuracy` is the chance that Arm A sees every coordinate (a
/// lower bound on its accuracy) and, for Arm B, `1/2 + q/2` with `q` the
/// chance that the test point appeared in training (through the majority
/// formula for the amplified learner).
pub fn run_separation(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect(cfg, Experiment::Separation)?;
    let n = cfg.n;
    let base: ClassRef = Arc::new(first_bit_class(n, prg_spec(cfg)?)?);
    let class = Arc::new(modified_class(base)?);
    let m = Precision::new(cfg.m)?;
    let seed = Seed::new(cfg.seed);
    let uniform = Distribution::uniform_hypercube(n)?;
    let range = Distribution::uniform_range(n)?;
    let mut report = ExperimentReport::empty(cfg);

    let completion = coupon_completion(n, cfg.range_train_size);
    let arm_a = estimate_class_risk(
        &index_recovery_learner(class.clone()),
        class.as_ref(),
        &range,
        &uniform,
        cfg.range_train_size as usize,
        m,
        cfg.trials,
        cfg.test_points,
        &seed.derive(0),
    )?;
    push_arm(
        &mut report,
        "A",
        "index_recovery",
        "uniform_range",
        cfg.range_train_size,
        &arm_a,
        Some(completion),
    );

    let names: Vec<&str> = match cfg.learner.as_str() {
        "suite" => vec!["lookup", "amplified_lookup"],
        one => vec![one],
    };
    let q = collision_probability(n, cfg.train_size);
    let single = 0.5 + q / 2.0;
    let mut first_b: Option<RiskEstimate> = None;
    for name in &names {
        let (learner, factor) = learner_by_name(name, n, cfg.votes)?;
        let size = cfg.train_size * factor;
        // All Arm B learners share one stream: the amplified learner's
        // first chunk is the plain lookup's training set.
        let est = estimate_class_risk(
            learner.as_ref(),
            class.as_ref(),
            &uniform,
            &uniform,
            size as usize,
            m,
            cfg.trials,
            cfg.test_points,
            &seed.derive(1),
        )?;
        let predicted = match *name {
            "lookup" => Some(single),
            "amplified_lookup" => Some(majority_success_probability(single, cfg.votes as usize)),
            _ => None,
        };
        push_arm(
            &mut report,
            "B",
            name,
            "uniform_hypercube",
            size,
            &est,
            predicted,
        );
        first_b.get_or_insert(est);
    }
    let b = first_b.expect("at least one Arm B learner");
    let gap = arm_a.accuracy - b.accuracy;
    let gap_hw = (arm_a.half_width.powi(2) + b.half_width.powi(2)).sqrt();
    report.push_row(vec![
        "gap".into(),
        format!("index_recovery-{}", names[0]).into(),
        Cell::Null,
        Cell::Null,
        cfg.trials.into(),
        gap.into(),
        gap_hw.into(),
        Cell::Null,
    ]);

    let tv = f64::from(n) / (1u64 << n) as f64;
    report.metric("tv_bound", tv);
    report.metric(
        "min_samples_to_distinguish",
        min_samples_to_distinguish(tv, 0.25)?,
    );
    report.metric("coupon_completion", completion);
    report.metric("collision_probability", q);
    report.metric("arm_b_predicted_accuracy", single);
    report.metric("gap_lower_99", gap - gap_hw);
    report.metric("prg", cfg.prg.label());
    report.metric("prg_insecure", cfg.prg == PrgKind::TestDeterministic);
    insecure_note(&mut report, cfg);
    Ok(report)
}

fn push_arm(
    report: &mut ExperimentReport,
    arm: &str,
    learner: &str,
    dist: &str,
    size: u64,
    est: &RiskEstimate,
    predicted: Option<f64>,
) {
    report.push_row(vec![
        arm.into(),
        learner.into(),
        dist.into(),
        size.into(),
        est.trials.into(),
        est.accuracy.into(),
        est.half_width.into(),
        predicted.map_or(Cell::Null, Cell::float),
    ]);
}

/// Encode → sample → decode round trips. Trial `t` draws its payload (when
/// none is configured) from `seed.derive(t).derive(0)` and its samples from
/// `derive(1)`.
pub fn run_codec(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect(cfg, Experiment::Codec)?;
    let bits = usize::try_from(cfg.payload_bits)
        .map_err(|_| Error::Config("payload-bits too large".into()))?;
    let fixed = if cfg.payload.trim().is_empty() {
        None
    } else {
        Some(payload_from_hex(&cfg.payload, bits)?)
    };
    // fail early if the payload does not fit
    Distribution::advice(&vec![true; bits], cfg.n)?;
    let seed = Seed::new(cfg.seed);
    let samples = cfg.train_size;

    let zero = || (0u64, 0u64, vec![0u64; bits]);
    let (successes, failures, errors) = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, u64, Vec<u64>)> {
            let s = seed.derive(t);
            let payload = match &fixed {
                Some(p) => p.clone(),
                None => {
                    let mut rng = s.derive(0).rng();
                    (0..bits).map(|_| rng.gen::<bool>()).collect()
                }
            };
            let dist = Distribution::advice(&payload, cfg.n)?;
            let mut rng = s.derive(1).rng();
            let draws: Vec<_> = (0..samples).map(|_| dist.sample(&mut rng)).collect();
            let mut errs = vec![0u64; bits];
            match advice_decode(&draws, bits) {
                Ok(decoded) => {
                    for (i, (a, b)) in decoded.iter().zip(&payload).enumerate() {
                        errs[i] = u64::from(a != b);
                    }
                    Ok((u64::from(decoded == payload), 0, errs))
                }
                Err(Error::DecodeFailure(_)) => Ok((0, 1, errs)),
                Err(e) => Err(e),
            }
        })
        .try_reduce(zero, |a, b| {
            let errs = a.2.iter().zip(&b.2).map(|(x, y)| x + y).collect();
            Ok((a.0 + b.0, a.1 + b.1, errs))
        })?;

    let est = RiskEstimate::from_successes(successes, cfg.trials);
    let positions: Vec<String> = errors
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, c)| format!("{i}:{c}"))
        .collect();
    let mut report = ExperimentReport::empty(cfg);
    report.push_row(vec![
        cfg.payload_bits.into(),
        samples.into(),
        cfg.trials.into(),
        successes.into(),
        est.accuracy.into(),
        est.half_width.into(),
        failures.into(),
        if positions.is_empty() {
            "none".into()
        } else {
            positions.join(";").into()
        },
    ]);
    let worst = AdviceCode::new(&vec![true; bits])?;
    report.metric(
        "chernoff_budget_failure_0.01",
        advice_decode_budget(&worst, 0.01),
    );
    report
        .notes
        .push("bit_error_positions lists payload_index:error_count".into());
    Ok(report)
}

pub const WALK_PROBABILITIES: [f64; 4] = [0.1, 0.25, 0.5, 1.0];
pub const WALK_TARGETS: [u64; 3] = [1, 5, 10];

/// Simulated hitting times over the fixed `(p, k)` grid. Cell `i` (row
/// order) uses `seed.derive(i)`.
pub fn run_walk(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect(cfg, Experiment::Walk)?;
    let seed = Seed::new(cfg.seed);
    let mut report = ExperimentReport::empty(cfg);
    let mut all_within = true;
    let grid = WALK_PROBABILITIES
        .iter()
        .flat_map(|&p| WALK_TARGETS.iter().map(move |&k| (p, k)));
    for (i, (p, k)) in grid.enumerate() {
        let spec = WalkSpec::new(p, k)?;
        let est = simulate_hitting_time(spec, cfg.trials, &seed.derive(i as u64))?;
        let expected = hitting_time_mean(spec);
        let within = (est.mean - expected).abs() <= 3.0 * est.half_width;
        all_within &= within;
        report.push_row(vec![
            p.into(),
            k.into(),
            cfg.trials.into(),
            est.mean.into(),
            est.half_width.into(),
            expected.into(),
            within.into(),
        ]);
    }
    report.metric("all_within_3ci", all_within);
    Ok(report)
}

pub const BOUND_ALPHAS: [f64; 3] = [0.0, 0.125, 0.25];

/// Ball sizes, entropy bounds and the Bayes error lower bound for
/// `p_samples ∈ {1, 2, 4, …, 2^n}` and [`BOUND_ALPHAS`]. At `n ≤ 2` each row
/// also carries the exact optimal reconstruction error, and a bound above it
/// is an error.
pub fn run_bounds(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect(cfg, Experiment::Bounds)?;
    let n = cfg.n;
    let mut report = ExperimentReport::empty(cfg);
    let mut checked = 0u64;
    let mut vacuous_rows = 0u64;
    for p in (0..=n).map(|i| 1u64 << i) {
        for alpha in BOUND_ALPHAS {
            let ball = ball_size(n, alpha)?;
            let bound = bayes_error_lower_bound(n, p, alpha)?;
            let exact = if n <= 2 {
                let e = crate::learners::reconstruction_error(n, p as usize, alpha)?;
                if bound > e {
                    return Err(Error::Inconsistent(format!(
                        "lower bound {bound} exceeds exact error {e} at n={n} p={p} alpha={alpha}"
                    )));
                }
                checked += 1;
                Some(e)
            } else {
                None
            };
            vacuous_rows += u64::from(bound <= 0.0);
            let exact_int = u64::try_from(&ball.exact)
                .ok()
                .filter(|&v| i64::try_from(v).is_ok());
            report.push_row(vec![
                u64::from(n).into(),
                p.into(),
                alpha.into(),
                ball.radius.into(),
                exact_int.map_or(Cell::Null, Cell::int),
                ball.exact_log2().into(),
                ball.bound_log2.into(),
                bound.into(),
                (bound <= 0.0).into(),
                exact.map_or(Cell::Null, Cell::float),
            ]);
        }
    }
    report.metric("rows_checked_against_exact", checked);
    report.metric("vacuous_rows", vacuous_rows);
    report.notes.push(
        "radius is ceil(alpha*2^n); ball_size is empty when it exceeds 2^63, see ball_size_log2"
            .into(),
    );
    if n <= 2 {
        report.notes.push(
            "exact_error counts a miss when the reconstruction differs from the concept on more than floor(alpha*2^n) points"
                .into(),
        );
    }
    Ok(report)
}

/// Accuracy on the first-bit class minus accuracy on sampled random
/// functions, with paired trials (see
/// [`distinguishing_advantage`](crate::stats::distinguishing_advantage)).
pub fn run_distinguish(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect(cfg, Experiment::Distinguish)?;
    let n = cfg.n;
    let seed = Seed::new(cfg.seed);
    let pseudo = first_bit_class(n, prg_spec(cfg)?)?;
    let random = random_function_class(n, &seed.derive(1))?;
    let (learner, factor) = learner_by_name(&cfg.learner, n, cfg.votes)?;
    let size = cfg.train_size * factor;
    let adv = distinguishing_advantage(
        learner.as_ref(),
        &pseudo,
        &random,
        size as usize,
        Precision::new(cfg.m)?,
        cfg.trials,
        &seed.derive(0),
    )?;
    let mut report = ExperimentReport::empty(cfg);
    let prg = cfg.prg.label();
    for (arm, class, prg, est) in [
        ("pseudo", "first_bit", prg, &adv.pseudo),
        ("random", "random_function", "none", &adv.random),
    ] {
        report.push_row(vec![
            arm.into(),
            class.into(),
            prg.into(),
            size.into(),
            est.trials.into(),
            est.accuracy.into(),
            est.half_width.into(),
        ]);
    }
    report.push_row(vec![
        "advantage".into(),
        "first_bit-random_function".into(),
        prg.into(),
        size.into(),
        cfg.trials.into(),
        adv.advantage.into(),
        adv.half_width.into(),
    ]);
    report.metric("learner", cfg.learner.as_str());
    report.metric("advantage", adv.advantage);
    report.metric("prg_insecure", cfg.prg == PrgKind::TestDeterministic);
    insecure_note(&mut report, cfg);
    Ok(report)
}

/// Distinct-count domination over the adversarial family, with budget
/// `2·p·q + 1` (doubled on small cubes), plus randomized checks of the
/// expectation-transfer inequality at widths up to `min(n, 6)`.
pub fn run_regularity(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect(cfg, Experiment::Regularity)?;
    let n = cfg.n;
    let seed = Seed::new(cfg.seed);
    let budget = uniform_budget_for_width(n, cfg.train_size, cfg.q);
    let required = 1.0 - 1.0 / cfg.q as f64;
    let mut report = ExperimentReport::empty(cfg);
    let mut all_met = true;
    for (i, (name, dist)) in adversarial_family(n)?.into_iter().enumerate() {
        let est = crate::stats::distinct_domination_prob(
            &dist,
            cfg.train_size,
            budget,
            cfg.trials,
            &seed.derive(i as u64),
        )?;
        all_met &= est.accuracy + 3.0 * est.half_width >= required;
        report.push_row(vec![
            name.into(),
            u64::from(n).into(),
            cfg.train_size.into(),
            cfg.q.into(),
            budget.into(),
            cfg.trials.into(),
            est.accuracy.into(),
            est.half_width.into(),
            required.into(),
        ]);
    }
    let transfer = random_transfer_checks(cfg.trials, n.min(6), &seed.derive(1000))?;
    report.metric("domination_within_3ci", all_met);
    report.metric("transfer_instances", transfer.instances);
    report.metric("transfer_failures", transfer.failures);
    report.metric("transfer_min_slack", transfer.min_slack);
    Ok(report)
}
