//! Analytic bounds and the small stochastic processes behind them: entropy
//! and Hamming-ball sizes, the Bayes error lower bound, hitting times of a
//! Bernoulli walk, distinct-count domination, the expectation-transfer
//! inequality and the distinguishing experiment.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concepts::ConceptClass;
use crate::distributions::{Distribution, Neumaier};
use crate::domain::{Input, MeanEstimate, Precision, RiskEstimate, Seed, Z_99};
use crate::error::{Error, Result};
use crate::learners::{risk::class_trial, Learner};

/// Additive constant in the uniform sample budget `2·p·q + c`.
pub const BUDGET_CONSTANT: u64 = 1;

/// Widest `n` for exact ball sums and the Bayes bound.
pub const MAX_BOUND_WIDTH: u32 = 10;

/// Widest `n` for exact expectation-transfer enumeration.
pub const MAX_TRANSFER_WIDTH: u32 = 16;

/// Precision handed to learners in the distinguishing experiment.
pub const DEFAULT_DISTINGUISH_M: u32 = 10;

pub fn distinct_count(xs: &[Input]) -> usize {
    xs.iter().map(|x| x.value()).collect::<HashSet<_>>().len()
}

/// Walk `W_0 = 0`, `W_{i+1} = W_i + Bern(p)`, stopped on reaching `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkSpec {
    p: f64,
    k: u64,
}

impl WalkSpec {
    pub fn new(p: f64, k: u64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::invalid(format!(
                "walk probability must be in (0, 1], got {p}"
            )));
        }
        if k == 0 {
            return Err(Error::invalid("walk target must be positive"));
        }
        Ok(WalkSpec { p, k })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn k(&self) -> u64 {
        self.k
    }
}

/// Expected number of steps to reach `k`: `k / p`.
pub fn hitting_time_mean(spec: WalkSpec) -> f64 {
    spec.k as f64 / spec.p
}

/// Monte-Carlo mean of the hitting time. Trial `t` draws its steps from
/// `seed.derive(t)`.
pub fn simulate_hitting_time(spec: WalkSpec, trials: u64, seed: &Seed) -> Result<MeanEstimate> {
    if trials < 100 {
        return Err(Error::invalid(format!(
            "need at least 100 trials, got {trials}"
        )));
    }
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed.derive(t).rng();
            let (mut level, mut steps) = (0u64, 0u64);
            while level < spec.k {
                steps += 1;
                level += u64::from(rng.gen_bool(spec.p));
            }
            (u128::from(steps), u128::from(steps) * u128::from(steps))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(MeanEstimate::from_sums(sum, sum_sq, trials))
}

/// Uniform sample budget `2·p_samples·q_inverse + c` with `c = 1`.
pub fn uniform_budget(p_samples: u64, q_inverse: u64) -> u64 {
    2 * p_samples * q_inverse + BUDGET_CONSTANT
}

/// [`uniform_budget`] for inputs of width `n`. On small cubes, where
/// `2^n < 2·p_samples`, a fresh uniform draw is new with probability below
/// 1/2 and the base budget is doubled.
pub fn uniform_budget_for_width(n: u32, p_samples: u64, q_inverse: u64) -> u64 {
    let base = uniform_budget(p_samples, q_inverse);
    if n < 64 && (1u64 << n) < 2 * p_samples {
        2 * base
    } else {
        base
    }
}

/// Empirical probability that `p_samples` draws from `d` have no more
/// distinct values than `uniform_samples` uniform draws on the same cube.
/// Trial `t` uses `seed.derive(t).derive(0)` for `d` and `derive(1)` for
/// the uniform draws. The estimate's `accuracy` field is the rate.
pub fn distinct_domination_prob(
    d: &Distribution,
    p_samples: u64,
    uniform_samples: u64,
    trials: u64,
    seed: &Seed,
) -> Result<RiskEstimate> {
    if trials < 1000 {
        return Err(Error::invalid(format!(
            "need at least 1000 trials, got {trials}"
        )));
    }
    if p_samples == 0 || uniform_samples == 0 {
        return Err(Error::invalid("sample counts must be positive"));
    }
    let uniform = Distribution::uniform_hypercube(d.n())?;
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let s = seed.derive(t);
            let draw = |law: &Distribution, count: u64, s: Seed| {
                let mut rng = s.rng();
                (0..count)
                    .map(|_| law.sample(&mut rng).value())
                    .collect::<HashSet<_>>()
                    .len()
            };
            draw(d, p_samples, s.derive(0)) <= draw(&uniform, uniform_samples, s.derive(1))
        })
        .count() as u64;
    Ok(RiskEstimate::from_successes(hits, trials))
}

/// Distributions on which distinct-count domination is checked: a point
/// mass, two points, uniform over the first `2^(n/2)` values, and the full
/// cube.
pub fn adversarial_family(n: u32) -> Result<Vec<(&'static str, Distribution)>> {
    if !(2..=20).contains(&n) {
        return Err(Error::invalid(format!(
            "family width must be in 2..=20, got {n}"
        )));
    }
    let size = 1usize << n;
    let mut two = vec![0.0; size];
    two[0] = 0.5;
    two[size - 1] = 0.5;
    let half = 1usize << (n / 2);
    let mut sub = vec![0.0; size];
    sub[..half].fill(1.0 / half as f64);
    Ok(vec![
        ("point_mass", Distribution::point_mass(n, 0)?),
        ("two_point", Distribution::table(n, two)?),
        ("uniform_sqrt", Distribution::table(n, sub)?),
        ("uniform_hypercube", Distribution::uniform_hypercube(n)?),
    ])
}

/// Both sides of `E[f(X)] ≤ E[g(Y)] + B·P(f(X) > g(Y))` for independent `X`,
/// `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferCheck {
    pub left: f64,
    pub right: f64,
    /// `P(f(X) > g(Y))`.
    pub exceed_prob: f64,
    pub holds: bool,
}

/// Evaluates the expectation-transfer inequality exactly. Tables are indexed
/// by input value and must take values in `[0, bound]`.
pub fn expectation_transfer_holds(
    f_table: &[f64],
    g_table: &[f64],
    law_x: &Distribution,
    law_y: &Distribution,
    bound: f64,
) -> Result<TransferCheck> {
    if !(bound.is_finite() && bound > 0.0) {
        return Err(Error::invalid(format!(
            "bound must be positive, got {bound}"
        )));
    }
    for law in [law_x, law_y] {
        if law.n() > MAX_TRANSFER_WIDTH {
            return Err(Error::Unsupported(format!(
                "exact transfer check is limited to {MAX_TRANSFER_WIDTH} bits"
            )));
        }
    }
    let px = law_x.pmf_vector()?;
    let py = law_y.pmf_vector()?;
    for (table, p) in [(f_table, &px), (g_table, &py)] {
        if table.len() != p.len() {
            return Err(Error::invalid(format!(
                "table has {} entries, law has {}",
                table.len(),
                p.len()
            )));
        }
        if let Some(v) = table.iter().find(|v| !(0.0..=bound).contains(*v)) {
            return Err(Error::invalid(format!(
                "table value {v} outside [0, {bound}]"
            )));
        }
    }
    // P(f(X) > g(Y)) via g-values sorted with prefix sums of their mass.
    let mut gy: Vec<(f64, f64)> = g_table.iter().copied().zip(py.iter().copied()).collect();
    gy.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut below = Vec::with_capacity(gy.len() + 1);
    let mut acc = Neumaier::default();
    below.push(0.0);
    for &(_, p) in &gy {
        acc.add(p);
        below.push(acc.value());
    }
    let (mut left, mut right_mean, mut exceed) = (
        Neumaier::default(),
        Neumaier::default(),
        Neumaier::default(),
    );
    for (&f, &p) in f_table.iter().zip(&px) {
        left.add(p * f);
        let idx = gy.partition_point(|&(g, _)| g < f);
        exceed.add(p * below[idx]);
    }
    for (&g, &p) in g_table.iter().zip(&py) {
        right_mean.add(p * g);
    }
    let (left, exceed_prob) = (left.value(), exceed.value());
    let right = right_mean.value() + bound * exceed_prob;
    Ok(TransferCheck {
        left,
        right,
        exceed_prob,
        holds: left <= right + bound * crate::distributions::TABLE_SUM_TOLERANCE,
    })
}

/// Outcome of a batch of randomized expectation-transfer checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferSummary {
    pub instances: u64,
    pub failures: u64,
    /// Smallest `right − left` seen.
    pub min_slack: f64,
}

fn random_law<R: Rng>(rng: &mut R, n: u32) -> Result<Distribution> {
    let size = 1usize << n;
    let mut w: Vec<f64> = (0..size)
        .map(|_| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen::<f64>()
            }
        })
        .collect();
    let hit = rng.gen_range(0..size);
    w[hit] += 0.5;
    let total: f64 = w.iter().sum();
    Distribution::table(n, w.iter().map(|x| x / total).collect())
}

fn random_table<R: Rng>(rng: &mut R, n: u32, bound: f64) -> Vec<f64> {
    // half the tables take few values so ties between f and g are common
    let levels = if rng.gen_bool(0.5) {
        Some(rng.gen_range(1..=4u32))
    } else {
        None
    };
    (0..1usize << n)
        .map(|_| match levels {
            Some(l) => (bound * f64::from(rng.gen_range(0..=l)) / f64::from(l)).min(bound),
            None => rng.gen_range(0.0..=bound),
        })
        .collect()
}

/// Checks the expectation-transfer inequality on `instances` random
/// instances: widths up to `max_width`, random laws with zero-mass points,
/// random bounds and tables. Instance `t` is built from `seed.derive(t)`.
pub fn random_transfer_checks(
    instances: u64,
    max_width: u32,
    seed: &Seed,
) -> Result<TransferSummary> {
    if max_width == 0 || max_width > MAX_TRANSFER_WIDTH {
        return Err(Error::invalid(format!(
            "width must be in 1..={MAX_TRANSFER_WIDTH}, got {max_width}"
        )));
    }
    let (failures, min_slack) = (0..instances)
        .into_par_iter()
        .map(|t| -> Result<(u64, f64)> {
            let mut rng = seed.derive(t).rng();
            let n = rng.gen_range(1..=max_width);
            let bound = rng.gen_range(0.5..4.0);
            let (law_x, law_y) = (random_law(&mut rng, n)?, random_law(&mut rng, n)?);
            let f = random_table(&mut rng, n, bound);
            let g = random_table(&mut rng, n, bound);
            let c = expectation_transfer_holds(&f, &g, &law_x, &law_y, bound)?;
            Ok((u64::from(!c.holds), c.right - c.left))
        })
        .try_reduce(|| (0, f64::INFINITY), |a, b| Ok((a.0 + b.0, a.1.min(b.1))))?;
    Ok(TransferSummary {
        instances,
        failures,
        min_slack,
    })
}

/// `H(x) = −x·log2 x − (1−x)·log2(1−x)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&x),
        "entropy argument {x} outside [0, 1]"
    );
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// `⌈α·2^n⌉`, ignoring rounding noise below 1e-9.
pub fn ceil_radius(n: u32, alpha: f64) -> u64 {
    ((alpha * (1u64 << n) as f64) - 1e-9).ceil().max(0.0) as u64
}

/// Number of concepts within `radius = ⌈α·2^n⌉` truth-table flips of a
/// center, and the entropy-form upper bound `2^{2^n·H(radius/2^n)}·(radius+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallSize {
    pub n: u32,
    pub alpha: f64,
    pub radius: u64,
    pub exact: BigUint,
    pub bound_log2: f64,
}

impl BallSize {
    pub fn exact_log2(&self) -> f64 {
        biguint_log2(&self.exact)
    }

    /// May be infinite when the bound exceeds the `f64` range.
    pub fn bound(&self) -> f64 {
        self.bound_log2.exp2()
    }
}

fn biguint_log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().expect("fits").max(1) as f64).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("fits") as f64;
    top.log2() + shift as f64
}

pub fn ball_size(n: u32, alpha: f64) -> Result<BallSize> {
    check_bound_args(n, alpha)?;
    let points = 1u64 << n;
    let radius = ceil_radius(n, alpha);
    let mut term = BigUint::one();
    let mut exact = BigUint::one();
    for i in 1..=radius {
        term = term * (points - i + 1) / i;
        exact += &term;
    }
    let bound_log2 = points as f64 * binary_entropy(radius as f64 / points as f64)
        + ((radius + 1) as f64).log2();
    Ok(BallSize {
        n,
        alpha,
        radius,
        exact,
        bound_log2,
    })
}

fn check_bound_args(n: u32, alpha: f64) -> Result<()> {
    if n == 0 || n > MAX_BOUND_WIDTH {
        return Err(Error::invalid(format!(
            "n must be in 1..={MAX_BOUND_WIDTH}, got {n}"
        )));
    }
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha must be in [0, 1/2), got {alpha}"
        )));
    }
    Ok(())
}

/// `1 − 2^{2^n(H(r/2^n) − 1) + p}·(r + 1)` with `r = ⌈α·2^n⌉`. Returned as
/// computed; a value at or below zero means the bound says nothing.
pub fn bayes_error_lower_bound(n: u32, p_samples: u64, alpha: f64) -> Result<f64> {
    check_bound_args(n, alpha)?;
    let points = (1u64 << n) as f64;
    let r = ceil_radius(n, alpha);
    let exponent = points * (binary_entropy(r as f64 / points) - 1.0) + p_samples as f64;
    Ok(1.0 - exponent.exp2() * (r + 1) as f64)
}

/// A computed bound with the inputs that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: Vec<(String, f64)>,
    pub value: f64,
    pub notes: String,
}

pub fn bayes_bound_report(n: u32, p_samples: u64, alpha: f64) -> Result<BoundReport> {
    let value = bayes_error_lower_bound(n, p_samples, alpha)?;
    let r = ceil_radius(n, alpha);
    Ok(BoundReport {
        name: "bayes_error_lower_bound".into(),
        inputs: vec![
            ("n".into(), f64::from(n)),
            ("p_samples".into(), p_samples as f64),
            ("alpha".into(), alpha),
        ],
        value,
        notes: format!(
            "radius {r} of {}; exponent 2^n(H(r/2^n)-1)+p = {}{}",
            1u64 << n,
            (1u64 << n) as f64 * (binary_entropy(r as f64 / (1u64 << n) as f64) - 1.0)
                + p_samples as f64,
            if value <= 0.0 { "; vacuous" } else { "" }
        ),
    })
}

/// Outcome of the distinguishing experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Advantage {
    pub pseudo: RiskEstimate,
    pub random: RiskEstimate,
    /// `pseudo.accuracy − random.accuracy`.
    pub advantage: f64,
    /// 99% half-width of the paired per-trial differences.
    pub half_width: f64,
}

/// Accuracy of `learner` on concepts indexed uniformly from `pseudo` minus
/// its accuracy on concepts from `random`, with uniform training and test
/// inputs. Both arms of trial `t` share `seed.derive(t)`, so they see the
/// same training inputs, test point and learner coins and differ only in the
/// labels.
#[allow(clippy::too_many_arguments)]
pub fn distinguishing_advantage(
    learner: &dyn Learner,
    pseudo: &dyn ConceptClass,
    random: &dyn ConceptClass,
    train_size: usize,
    m: Precision,
    trials: u64,
    seed: &Seed,
) -> Result<Advantage> {
    let n = pseudo.n();
    if random.n() != n {
        return Err(Error::invalid(format!(
            "class widths differ: {} vs {}",
            n,
            random.n()
        )));
    }
    if trials < 1000 {
        return Err(Error::invalid(format!(
            "need at least 1000 trials, got {trials}"
        )));
    }
    let uniform = Distribution::uniform_hypercube(n)?;
    let (a, b, diff_sq) = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, u64, u64)> {
            let s = seed.derive(t);
            let a = class_trial(learner, pseudo, &uniform, &uniform, train_size, m, 1, &s)?;
            let b = class_trial(learner, random, &uniform, &uniform, train_size, m, 1, &s)?;
            Ok((a, b, u64::from(a != b)))
        })
        .try_reduce(|| (0, 0, 0), |x, y| Ok((x.0 + y.0, x.1 + y.1, x.2 + y.2)))?;
    let tf = trials as f64;
    let mean = (a as f64 - b as f64) / tf;
    let var = (diff_sq as f64 / tf - mean * mean).max(0.0);
    Ok(Advantage {
        pseudo: RiskEstimate::from_successes(a, trials),
        random: RiskEstimate::from_successes(b, trials),
        advantage: mean,
        half_width: Z_99 * (var / tf).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{exhaustive_class, first_bit_class, random_function_class, PrgSpec};
    use crate::learners::{lookup_learner, ConstantLearner};
    use num_bigint::BigUint;

    fn inputs(n: u32, vs: &[u64]) -> Vec<Input> {
        vs.iter().map(|&v| Input::new(n, v).unwrap()).collect()
    }

    #[test]
    fn distinct_examples() {
        assert_eq!(distinct_count(&[]), 0);
        assert_eq!(distinct_count(&inputs(3, &[3, 3, 3])), 1);
        assert_eq!(distinct_count(&inputs(3, &[1, 2, 3, 2])), 3);
    }

    #[test]
    fn hitting_time_formula() {
        assert_eq!(hitting_time_mean(WalkSpec::new(1.0, 7).unwrap()), 7.0);
        assert_eq!(hitting_time_mean(WalkSpec::new(0.25, 10).unwrap()), 40.0);
        assert_eq!(hitting_time_mean(WalkSpec::new(0.5, 1).unwrap()), 2.0);
        assert!(WalkSpec::new(0.0, 1).is_err());
        assert!(WalkSpec::new(1.5, 1).is_err());
        assert!(WalkSpec::new(0.5, 0).is_err());
    }

    #[test]
    fn deterministic_walk_has_no_spread() {
        let est =
            simulate_hitting_time(WalkSpec::new(1.0, 5).unwrap(), 100, &Seed::new(0)).unwrap();
        assert_eq!((est.mean, est.half_width), (5.0, 0.0));
        assert!(simulate_hitting_time(WalkSpec::new(1.0, 5).unwrap(), 99, &Seed::new(0)).is_err());
    }

    #[test]
    fn simulated_walks_converge() {
        let est = simulate_hitting_time(WalkSpec::new(0.25, 10).unwrap(), 100_000, &Seed::new(1))
            .unwrap();
        assert!((est.mean - 40.0).abs() <= 0.4, "{est:?}");
        let est =
            simulate_hitting_time(WalkSpec::new(0.5, 3).unwrap(), 100_000, &Seed::new(2)).unwrap();
        assert!((est.mean - 6.0).abs() <= 0.12, "{est:?}");
    }

    #[test]
    fn budget_examples() {
        assert_eq!(uniform_budget(10, 10), 201);
        assert_eq!(uniform_budget(1, 1), 3);
        assert_eq!(uniform_budget(50, 20), 2001);
        assert_eq!(uniform_budget_for_width(8, 10, 10), 201);
        assert_eq!(uniform_budget_for_width(3, 10, 10), 402);
    }

    #[test]
    fn point_mass_is_always_dominated() {
        let d = Distribution::point_mass(8, 17).unwrap();
        let r = distinct_domination_prob(&d, 50, 1, 1000, &Seed::new(0)).unwrap();
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn domination_examples() {
        let d = Distribution::uniform_hypercube(8).unwrap();
        let r =
            distinct_domination_prob(&d, 10, uniform_budget(10, 10), 2000, &Seed::new(1)).unwrap();
        assert!(r.accuracy >= 0.9, "{r:?}");
        let family = adversarial_family(8).unwrap();
        let r = distinct_domination_prob(
            &family[1].1,
            100,
            uniform_budget(100, 10),
            2000,
            &Seed::new(2),
        )
        .unwrap();
        assert!(r.accuracy >= 0.9, "{r:?}");
    }

    #[test]
    fn transfer_identical_and_extreme() {
        let d = Distribution::uniform_hypercube(3).unwrap();
        let f: Vec<f64> = (0..8).map(|v| v as f64 / 7.0).collect();
        let c = expectation_transfer_holds(&f, &f, &d, &d, 1.0).unwrap();
        assert!(c.holds && c.exceed_prob > 0.0);
        assert!((c.left - 0.5).abs() < 1e-15);
        // f(X) > f(Y) for independent uniform X, Y: (1 − 1/8)/2
        assert!((c.exceed_prob - 7.0 / 16.0).abs() < 1e-15);

        let top = vec![2.0; 8];
        let zero = vec![0.0; 8];
        let c = expectation_transfer_holds(&top, &zero, &d, &d, 2.0).unwrap();
        assert_eq!((c.left, c.right, c.exceed_prob), (2.0, 2.0, 1.0));
        assert!(c.holds);
    }

    #[test]
    fn transfer_rejects_out_of_range_values() {
        let d = Distribution::uniform_hypercube(1).unwrap();
        assert!(expectation_transfer_holds(&[0.0, 1.5], &[0.0, 0.0], &d, &d, 1.0).is_err());
        assert!(expectation_transfer_holds(&[0.0], &[0.0, 0.0], &d, &d, 1.0).is_err());
    }

    #[test]
    fn transfer_exceed_prob_matches_pairwise_sum() {
        let mut rng = Seed::new(3).rng();
        for _ in 0..200 {
            let n = rng.gen_range(1..=4u32);
            let size = 1usize << n;
            let rand_law = |rng: &mut rand_chacha::ChaCha8Rng| {
                let w: Vec<f64> = (0..size).map(|_| rng.gen::<f64>()).collect();
                let s: f64 = w.iter().sum();
                Distribution::table(n, w.iter().map(|x| x / s).collect()).unwrap()
            };
            let (dx, dy) = (rand_law(&mut rng), rand_law(&mut rng));
            // few distinct values so ties occur
            let f: Vec<f64> = (0..size)
                .map(|_| f64::from(rng.gen_range(0..4u8)))
                .collect();
            let g: Vec<f64> = (0..size)
                .map(|_| f64::from(rng.gen_range(0..4u8)))
                .collect();
            let c = expectation_transfer_holds(&f, &g, &dx, &dy, 3.0).unwrap();
            let (px, py) = (dx.pmf_vector().unwrap(), dy.pmf_vector().unwrap());
            let mut brute = 0.0;
            for i in 0..size {
                for j in 0..size {
                    if f[i] > g[j] {
                        brute += px[i] * py[j];
                    }
                }
            }
            assert!((brute - c.exceed_prob).abs() < 1e-12);
            assert!(c.holds);
        }
    }

    #[test]
    fn random_transfer_instances_all_hold() {
        let s = random_transfer_checks(2000, 6, &Seed::new(11)).unwrap();
        assert_eq!((s.instances, s.failures), (2000, 0));
        assert!(s.min_slack >= -1e-12);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        // 2 − (3/4)·log2 3, with log2 3 = 1.584962500721156181453738943947816...
        let expected = 2.0 - 0.75 * 1.584_962_500_721_156_2;
        assert!((binary_entropy(0.25) - expected).abs() < 1e-15);
        assert!((binary_entropy(0.25) - 0.811_278_124_459_132_8).abs() < 1e-15);
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((binary_entropy(x) - binary_entropy(1.0 - x)).abs() < 2f64.powi(-40));
        }
    }

    #[test]
    fn ball_examples() {
        assert_eq!(ball_size(2, 0.0).unwrap().exact, BigUint::from(1u32));
        assert_eq!(ball_size(2, 0.25).unwrap().exact, BigUint::from(5u32));
        let b = ball_size(3, 0.25).unwrap();
        assert_eq!((b.radius, b.exact.clone()), (2, BigUint::from(37u32)));
        // 2^(8·H(1/4))·3 = 3^(−6)·2^16·3
        let expected = 65536.0 / 729.0 * 3.0;
        assert!((b.bound() - expected).abs() < 1e-9, "{}", b.bound());
        assert!((b.bound() - 269.7).abs() < 0.5);
    }

    #[test]
    fn ball_below_entropy_bound_everywhere() {
        for n in 1..=8u32 {
            for i in 0..50 {
                let alpha = i as f64 * 0.5 / 50.0;
                let b = ball_size(n, alpha).unwrap();
                if b.radius >= 1 && b.radius <= 1 << (n - 1) {
                    assert!(b.exact_log2() <= b.bound_log2 + 1e-9, "n={n} alpha={alpha}");
                }
            }
        }
    }

    #[test]
    fn large_ball_log2_is_sane() {
        let b = ball_size(10, 0.49).unwrap();
        assert!(b.exact_log2() > 1000.0 && b.exact_log2() < 1024.0);
        assert!(b.bound().is_infinite() || b.bound() > 1e300);
    }

    #[test]
    fn bayes_bound_examples() {
        assert_eq!(bayes_error_lower_bound(2, 2, 0.0).unwrap(), 0.75);
        assert_eq!(bayes_error_lower_bound(3, 4, 0.0).unwrap(), 0.9375);
        assert_eq!(bayes_error_lower_bound(2, 16, 0.0).unwrap(), 1.0 - 4096.0);
        assert!(bayes_bound_report(2, 16, 0.0)
            .unwrap()
            .notes
            .contains("vacuous"));
    }

    #[test]
    fn bayes_bound_below_exact_error() {
        for p in [1u64, 2] {
            let bound = bayes_error_lower_bound(2, p, 0.0).unwrap();
            let exact = crate::learners::reconstruction_error(2, p as usize, 0.0).unwrap();
            assert!(bound <= exact, "p={p}: {bound} > {exact}");
        }
    }

    #[test]
    fn constant_learner_has_no_advantage() {
        let n = 6;
        let pseudo = first_bit_class(n, PrgSpec::hash_based(n).unwrap()).unwrap();
        let random = random_function_class(n, &Seed::new(4)).unwrap();
        let m = Precision::new(DEFAULT_DISTINGUISH_M).unwrap();
        let adv = distinguishing_advantage(
            &ConstantLearner(false),
            &pseudo,
            &random,
            10,
            m,
            4000,
            &Seed::new(5),
        )
        .unwrap();
        assert!(adv.advantage.abs() <= adv.half_width.max(1e-12), "{adv:?}");
    }

    #[test]
    fn identical_classes_have_exactly_zero_advantage() {
        let class = exhaustive_class(3).unwrap();
        let m = Precision::new(DEFAULT_DISTINGUISH_M).unwrap();
        let adv =
            distinguishing_advantage(&lookup_learner(), &class, &class, 4, m, 1000, &Seed::new(6))
                .unwrap();
        assert_eq!((adv.advantage, adv.half_width), (0.0, 0.0));
        let wide = exhaustive_class(4).unwrap();
        assert!(distinguishing_advantage(
            &lookup_learner(),
            &class,
            &wide,
            4,
            m,
            1000,
            &Seed::new(6)
        )
        .is_err());
    }
}
