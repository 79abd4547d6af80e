//! Monte-Carlo risk estimation. Trials run on the current rayon pool and are
//! aggregated with integer sums, so results do not depend on thread count.

use rayon::prelude::*;

use super::Learner;
use crate::concepts::{Concept, ConceptClass};
use crate::distributions::Distribution;
use crate::domain::{sample_training_set, Precision, RiskEstimate, Seed};
use crate::error::{Error, Result};

/// Fewest trials accepted by the estimators.
pub const MIN_TRIALS: u64 = 100;

fn check(n: u32, train: &Distribution, test: &Distribution, trials: u64) -> Result<()> {
    if train.n() != n || test.n() != n {
        return Err(Error::invalid(format!(
            "distribution widths ({}, {}) differ from concept width {n}",
            train.n(),
            test.n()
        )));
    }
    if trials < MIN_TRIALS {
        return Err(Error::invalid(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    Ok(())
}

/// Accuracy of `learner` on a fixed concept. Trial `t` draws a fresh
/// training set from `seed.derive(t).derive(0)`, one test point from
/// `derive(1)` and gives the learner `derive(2)`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_risk(
    learner: &dyn Learner,
    concept: &dyn Concept,
    train_dist: &Distribution,
    test_dist: &Distribution,
    train_size: usize,
    m: Precision,
    trials: u64,
    seed: &Seed,
) -> Result<RiskEstimate> {
    check(concept.n(), train_dist, test_dist, trials)?;
    let correct = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u64> {
            let s = seed.derive(t);
            let train = sample_training_set(concept, train_dist, train_size, &s.derive(0))?;
            let x = test_dist.sample(&mut s.derive(1).rng());
            Ok(u64::from(
                learner.predict(x, &train, m, &s.derive(2)) == concept.eval(x),
            ))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(RiskEstimate::from_successes(correct, trials))
}

/// One trial against a class: draw the concept index from `s.derive(0)`, the
/// training set from `derive(1)`, `test_points` test inputs from `derive(2)`,
/// and learner seeds `derive(3).derive(i)`. Returns the number correct.
#[allow(clippy::too_many_arguments)]
pub(crate) fn class_trial(
    learner: &dyn Learner,
    class: &dyn ConceptClass,
    train_dist: &Distribution,
    test_dist: &Distribution,
    train_size: usize,
    m: Precision,
    test_points: u64,
    s: &Seed,
) -> Result<u64> {
    let index = class.sample_index(&mut s.derive(0).rng());
    let concept = class.concept(index);
    let train = sample_training_set(concept.as_ref(), train_dist, train_size, &s.derive(1))?;
    let mut rng = s.derive(2).rng();
    let xs: Vec<_> = (0..test_points)
        .map(|_| test_dist.sample(&mut rng))
        .collect();
    let truth = concept.eval_batch(&xs);
    let learner_seeds = s.derive(3);
    Ok(xs
        .iter()
        .zip(truth)
        .enumerate()
        .filter(|(i, (x, y))| {
            learner.predict(**x, &train, m, &learner_seeds.derive(*i as u64)) == *y
        })
        .count() as u64)
}

/// Accuracy of `learner` against a concept drawn uniformly from `class` in
/// every trial. Each trial evaluates `test_points` test inputs against the
/// same training set; the interval uses the spread of per-trial accuracies.
#[allow(clippy::too_many_arguments)]
pub fn estimate_class_risk(
    learner: &dyn Learner,
    class: &dyn ConceptClass,
    train_dist: &Distribution,
    test_dist: &Distribution,
    train_size: usize,
    m: Precision,
    trials: u64,
    test_points: u64,
    seed: &Seed,
) -> Result<RiskEstimate> {
    check(class.n(), train_dist, test_dist, trials)?;
    if test_points == 0 {
        return Err(Error::invalid("test_points must be positive"));
    }
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, u64)> {
            let c = class_trial(
                learner,
                class,
                train_dist,
                test_dist,
                train_size,
                m,
                test_points,
                &seed.derive(t),
            )?;
            Ok((c, c * c))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(RiskEstimate::from_trial_sums(
        sum,
        sum_sq,
        trials,
        test_points,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{exhaustive_class, ConceptRef, ParityConcept};
    use crate::learners::{lookup_learner, ConstantLearner, OracleLearner};
    use std::sync::Arc;

    fn m() -> Precision {
        Precision::new(3).unwrap()
    }

    #[test]
    fn oracle_is_always_right() {
        let c: ConceptRef = Arc::new(ParityConcept::new(5));
        let d = Distribution::uniform_hypercube(5).unwrap();
        let r = estimate_risk(
            &OracleLearner::new(c.clone()),
            c.as_ref(),
            &d,
            &d,
            10,
            m(),
            200,
            &Seed::new(0),
        )
        .unwrap();
        assert_eq!((r.accuracy, r.half_width, r.risk()), (1.0, 0.0, 0.0));
    }

    #[test]
    fn guessing_on_parity_is_a_coin() {
        let c = ParityConcept::new(10);
        let d = Distribution::uniform_hypercube(10).unwrap();
        let r = estimate_risk(
            &ConstantLearner(false),
            &c,
            &d,
            &d,
            0,
            m(),
            20_000,
            &Seed::new(1),
        )
        .unwrap();
        assert!((r.accuracy - 0.5).abs() <= r.half_width + 1e-12, "{r:?}");
    }

    #[test]
    fn rejects_too_few_trials_and_width_mismatch() {
        let c = ParityConcept::new(4);
        let d = Distribution::uniform_hypercube(4).unwrap();
        let wide = Distribution::uniform_hypercube(5).unwrap();
        assert!(estimate_risk(&lookup_learner(), &c, &d, &d, 1, m(), 99, &Seed::new(0)).is_err());
        assert!(
            estimate_risk(&lookup_learner(), &c, &wide, &d, 1, m(), 100, &Seed::new(0)).is_err()
        );
    }

    #[test]
    fn class_risk_matches_exact_lookup_accuracy() {
        // lookup with one uniform example at n=2: 1/4 + 3/4 · 1/2
        let class = exhaustive_class(2).unwrap();
        let d = Distribution::uniform_hypercube(2).unwrap();
        let r = estimate_class_risk(
            &lookup_learner(),
            &class,
            &d,
            &d,
            1,
            m(),
            40_000,
            1,
            &Seed::new(2),
        )
        .unwrap();
        assert!((r.accuracy - 0.625).abs() <= r.half_width, "{r:?}");
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let class = exhaustive_class(3).unwrap();
        let d = Distribution::uniform_hypercube(3).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    estimate_class_risk(
                        &lookup_learner(),
                        &class,
                        &d,
                        &d,
                        4,
                        m(),
                        500,
                        3,
                        &Seed::new(9),
                    )
                    .unwrap()
                })
        };
        assert_eq!(run(1), run(3));
    }
}
