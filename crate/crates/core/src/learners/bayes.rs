//! Bayes-optimal prediction over the class of all Boolean functions, plus
//! exhaustive oracles used to check it.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use super::Learner;
use crate::concepts::{ConceptClass, ExhaustiveClass};
use crate::domain::{Input, LabeledExample, Precision, Seed, TrainingSet};
use crate::error::{Error, Result};

/// Posterior over concepts consistent with a training set, under the uniform
/// prior: every consistent concept has posterior `1 / consistent_count`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PosteriorSummary {
    /// Posterior probability that the label of the query point is 1.
    pub mass_one: f64,
    pub consistent_count: u64,
    /// Consistent concepts labeling the query point 1.
    pub ones: u64,
}

fn check_widths(class: &ExhaustiveClass, train: &TrainingSet, x: Option<Input>) -> Result<()> {
    let n = class.n();
    if train.n() != n || x.is_some_and(|x| x.n() != n) {
        return Err(Error::invalid(format!(
            "training set / query width differs from the class width {n}"
        )));
    }
    Ok(())
}

/// Truth tables are consistent with `train` iff they contain `must_one` and
/// avoid `must_zero`.
fn constraints(train: &TrainingSet) -> (u64, u64) {
    train.iter().fold((0u64, 0u64), |(one, zero), e| {
        let bit = 1u64 << e.x.value();
        if e.y {
            (one | bit, zero)
        } else {
            (one, zero | bit)
        }
    })
}

fn consistent_tables(class: &ExhaustiveClass, train: &TrainingSet) -> impl Iterator<Item = u64> {
    let (must_one, must_zero) = constraints(train);
    (0..class.size()).filter(move |j| j & must_one == must_one && j & must_zero == 0)
}

/// Enumerates all `2^(2^n)` concepts and summarizes the posterior at `x`.
pub fn bayes_posterior(
    class: &ExhaustiveClass,
    train: &TrainingSet,
    x: Input,
) -> Result<PosteriorSummary> {
    check_widths(class, train, Some(x))?;
    let (count, ones) = consistent_tables(class, train).fold((0u64, 0u64), |(c, o), j| {
        (c + 1, o + ((j >> x.value()) & 1))
    });
    if count == 0 {
        return Err(Error::Inconsistent(format!("{} examples", train.len())));
    }
    Ok(PosteriorSummary {
        mass_one: ones as f64 / count as f64,
        consistent_count: count,
        ones,
    })
}

/// Predicts 1 iff the posterior mass on label 1 exceeds 1/2; ties go to 0.
#[derive(Debug)]
pub struct BayesOptimalLearner {
    class: ExhaustiveClass,
    inconsistent: AtomicU64,
}

pub fn bayes_optimal_learner(class: ExhaustiveClass) -> BayesOptimalLearner {
    BayesOptimalLearner {
        class,
        inconsistent: AtomicU64::new(0),
    }
}

impl BayesOptimalLearner {
    pub fn decide(&self, x: Input, train: &TrainingSet) -> Result<bool> {
        let post = bayes_posterior(&self.class, train, x)?;
        Ok(2 * post.ones > post.consistent_count)
    }

    /// Calls whose training set no concept explains; those predict 0.
    pub fn inconsistent_calls(&self) -> u64 {
        self.inconsistent.load(Ordering::Relaxed)
    }
}

impl Learner for BayesOptimalLearner {
    fn name(&self) -> String {
        "bayes_optimal".into()
    }

    fn predict(&self, x: Input, train: &TrainingSet, _m: Precision, _seed: &Seed) -> bool {
        self.decide(x, train).unwrap_or_else(|_| {
            self.inconsistent.fetch_add(1, Ordering::Relaxed);
            false
        })
    }
}

/// Exact accuracy as a ratio of counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactAccuracy {
    pub correct: u64,
    pub total: u64,
}

impl ExactAccuracy {
    pub fn value(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

const MAX_ENUMERATION: u64 = 1 << 26;

/// Ordered input sequences of length `len` over `2^n` points, as base-`2^n`
/// digits of `index`.
fn sequence(n: u32, len: usize, mut index: u64) -> Vec<Input> {
    let base = 1u64 << n;
    (0..len)
        .map(|_| {
            let v = index % base;
            index /= base;
            Input::new_unchecked(n, v)
        })
        .collect()
}

fn label(n: u32, xs: &[Input], table: u64) -> TrainingSet {
    let examples = xs
        .iter()
        .map(|&x| LabeledExample {
            x,
            y: (table >> x.value()) & 1 == 1,
        })
        .collect();
    TrainingSet::from_examples(n, examples).expect("uniform width")
}

/// Average accuracy of `learner` over every concept on `n` bits, every
/// ordered uniform training sequence of `train_size` inputs, and every test
/// point, all weighted uniformly.
///
/// The learner's seed depends only on the training inputs and the test point,
/// never on the concept, so a coin-flipping learner is right on exactly half
/// the concepts that agree on the training set.
pub fn exhaustive_accuracy(
    learner: &dyn Learner,
    n: u32,
    train_size: usize,
    m: Precision,
    seed: &Seed,
) -> Result<ExactAccuracy> {
    if n == 0 || n > 3 {
        return Err(Error::Unsupported(format!(
            "exhaustive accuracy needs 1 <= n <= 3, got {n}"
        )));
    }
    let points = 1u64 << n;
    let concepts = 1u64 << points;
    let sequences = points
        .checked_pow(train_size as u32)
        .filter(|s| s.saturating_mul(concepts).saturating_mul(points) <= MAX_ENUMERATION)
        .ok_or_else(|| Error::Unsupported("enumeration too large".into()))?;
    let mut correct = 0u64;
    for s in 0..sequences {
        let xs = sequence(n, train_size, s);
        for table in 0..concepts {
            let t = label(n, &xs, table);
            for v in 0..points {
                let x = Input::new_unchecked(n, v);
                let pred = learner.predict(x, &t, m, &seed.derive(s).derive(v));
                correct += u64::from(pred == ((table >> v) & 1 == 1));
            }
        }
    }
    Ok(ExactAccuracy {
        correct,
        total: sequences * concepts * points,
    })
}

/// Largest Hamming distance allowed inside a ball of radius `alpha`: a
/// concept agreeing on at least a `1 − alpha` fraction of the `2^n` points.
pub(crate) fn ball_radius(n: u32, alpha: f64) -> u32 {
    ((alpha * (1u64 << n) as f64) + 1e-9).floor() as u32
}

/// The reconstruction that minimizes the posterior probability of landing
/// outside the `alpha`-ball of the true concept, i.e. the truth table whose
/// ball holds the most consistent concepts. Ties go to the smallest table.
pub fn optimal_reconstruction(
    class: &ExhaustiveClass,
    train: &TrainingSet,
    alpha: f64,
) -> Result<u64> {
    check_widths(class, train, None)?;
    if class.n() > 3 {
        return Err(Error::Unsupported(
            "reconstruction search needs n <= 3".into(),
        ));
    }
    let radius = ball_radius(class.n(), alpha);
    let consistent: Vec<u64> = consistent_tables(class, train).collect();
    if consistent.is_empty() {
        return Err(Error::Inconsistent(format!("{} examples", train.len())));
    }
    let mut best = (0u64, 0usize);
    for c in 0..class.size() {
        let mass = consistent
            .iter()
            .filter(|&&t| (t ^ c).count_ones() <= radius)
            .count();
        if mass > best.1 {
            best = (c, mass);
        }
    }
    Ok(best.0)
}

/// Exact probability that the optimal reconstruction from `p_samples`
/// uniform examples lies outside the `alpha`-ball of a uniformly drawn
/// concept on `n` bits.
pub fn reconstruction_error(n: u32, p_samples: usize, alpha: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha must be in [0, 1/2), got {alpha}"
        )));
    }
    let class = crate::concepts::exhaustive_class(n)?;
    if n > 3 {
        return Err(Error::Unsupported(
            "reconstruction error needs n <= 3".into(),
        ));
    }
    let points = 1u64 << n;
    let sequences = points
        .checked_pow(p_samples as u32)
        .filter(|s| s.saturating_mul(class.size()) <= MAX_ENUMERATION)
        .ok_or_else(|| Error::Unsupported("enumeration too large".into()))?;
    let radius = ball_radius(n, alpha);
    let mut errors = 0u64;
    for s in 0..sequences {
        let xs = sequence(n, p_samples, s);
        let support = xs.iter().fold(0u64, |m, x| m | (1 << x.value()));
        let mut cache: HashMap<u64, u64> = HashMap::new();
        for table in 0..class.size() {
            let key = table & support;
            let guess = match cache.get(&key) {
                Some(&g) => g,
                None => {
                    let g = optimal_reconstruction(&class, &label(n, &xs, table), alpha)?;
                    cache.insert(key, g);
                    g
                }
            };
            errors += u64::from((guess ^ table).count_ones() > radius);
        }
    }
    Ok(errors as f64 / (sequences * class.size()) as f64)
}
