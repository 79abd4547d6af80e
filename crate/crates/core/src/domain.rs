//! Domain types shared by every module, plus training-set sampling.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::concepts::Concept;
use crate::distributions::Distribution;
use crate::error::{Error, Result};

/// Largest bit-width any input may carry. Distributions and concept classes
/// apply their own, tighter, cutoffs.
pub const MAX_INPUT_BITS: u32 = 63;

/// Two-sided standard normal quantile for a 99% interval, `Φ⁻¹(0.995)`.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// A point of `{0,1}^n`.
///
/// Coordinate `u` (1-based) is bit `u - 1` of `value`, so the integers
/// `1..=n` name the distinguished inputs of the index-revealing class directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Input {
    n: u32,
    value: u64,
}

impl Input {
    pub fn new(n: u32, value: u64) -> Result<Self> {
        if n == 0 || n > MAX_INPUT_BITS {
            return Err(Error::invalid(format!(
                "input width must be in 1..={MAX_INPUT_BITS}, got {n}"
            )));
        }
        if value >> n != 0 {
            return Err(Error::invalid(format!(
                "value {value} does not fit in {n} bits"
            )));
        }
        Ok(Input { n, value })
    }

    /// Caller guarantees `1 <= n <= 63` and `value < 2^n`.
    pub(crate) fn new_unchecked(n: u32, value: u64) -> Self {
        debug_assert!((1..=MAX_INPUT_BITS).contains(&n) && value >> n == 0);
        Input { n, value }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Coordinate `u` of the point, 1-based.
    pub fn coordinate(&self, u: u32) -> bool {
        assert!(
            u >= 1 && u <= self.n,
            "coordinate {u} out of 1..={}",
            self.n
        );
        (self.value >> (u - 1)) & 1 == 1
    }
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.value, width = self.n as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledExample {
    pub x: Input,
    pub y: bool,
}

/// Ordered i.i.d. sample of labeled pairs. Duplicates are expected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSet {
    n: u32,
    examples: Vec<LabeledExample>,
}

impl TrainingSet {
    pub fn empty(n: u32) -> Self {
        TrainingSet {
            n,
            examples: Vec::new(),
        }
    }

    pub fn from_examples(n: u32, examples: Vec<LabeledExample>) -> Result<Self> {
        if let Some(bad) = examples.iter().find(|e| e.x.n() != n) {
            return Err(Error::invalid(format!(
                "example of width {} in a training set of width {n}",
                bad.x.n()
            )));
        }
        Ok(TrainingSet { n, examples })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabeledExample> {
        self.examples.iter()
    }

    pub fn inputs(&self) -> Vec<Input> {
        self.examples.iter().map(|e| e.x).collect()
    }

    /// Splits into `k` contiguous chunks whose sizes differ by at most one;
    /// earlier chunks take the remainder.
    pub fn split(&self, k: usize) -> Vec<TrainingSet> {
        assert!(k >= 1);
        let base = self.len() / k;
        let extra = self.len() % k;
        let mut start = 0;
        (0..k)
            .map(|i| {
                let len = base + usize::from(i < extra);
                let chunk = self.examples[start..start + len].to_vec();
                start += len;
                TrainingSet {
                    n: self.n,
                    examples: chunk,
                }
            })
            .collect()
    }
}

/// The accuracy parameter `m` carried as `1^m`: success means accuracy at
/// least `1 - 1/m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Precision(u32);

impl Precision {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("precision m must be at least 1"));
        }
        Ok(Precision(m))
    }

    pub fn get(&self) -> u32 {
        self.0
    }

    pub fn target_accuracy(&self) -> f64 {
        1.0 - 1.0 / f64::from(self.0)
    }
}

/// Splittable seed: a master value plus a derivation path.
///
/// The generator key is SHA-256 over a length-prefixed encoding of
/// `(master, path)`, so distinct paths give distinct keys, and the stream is
/// ChaCha8 under that key. Every randomized operation takes a `Seed`
/// explicitly; parallel work derives one child seed per task.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    master: u64,
    path: Vec<u64>,
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Seed {
            master,
            path: Vec::new(),
        }
    }

    pub fn with_path(master: u64, path: Vec<u64>) -> Self {
        Seed { master, path }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    pub fn derive(&self, index: u64) -> Seed {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(index);
        Seed {
            master: self.master,
            path,
        }
    }

    pub fn key(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"shiftlab/seed/v1");
        h.update(self.master.to_le_bytes());
        h.update((self.path.len() as u64).to_le_bytes());
        for p in &self.path {
            h.update(p.to_le_bytes());
        }
        h.finalize().into()
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key())
    }
}

/// Empirical accuracy `1 - R(A, c)` under the 0/1 loss, with a 99%
/// normal-approximation half-width.
///
/// `half_width = Z_99 * sqrt(v / trials)` where `v` is the plug-in variance of
/// the per-trial accuracies. With one evaluation per trial this is the
/// Bernoulli formula `Z_99 * sqrt(p(1-p)/trials)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub accuracy: f64,
    pub half_width: f64,
    pub trials: u64,
    /// Correct predictions across all evaluations.
    pub correct: u64,
    /// Total evaluations (`trials * points_per_trial`).
    pub evaluations: u64,
}

impl RiskEstimate {
    pub fn from_successes(correct: u64, trials: u64) -> Self {
        assert!(trials > 0 && correct <= trials);
        let p = correct as f64 / trials as f64;
        RiskEstimate {
            accuracy: p,
            half_width: Z_99 * (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            correct,
            evaluations: trials,
        }
    }

    /// `correct` is the sum over trials of the per-trial correct count and
    /// `correct_sq` the sum of its squares.
    pub fn from_trial_sums(
        correct: u64,
        correct_sq: u64,
        trials: u64,
        points_per_trial: u64,
    ) -> Self {
        assert!(trials > 0 && points_per_trial > 0);
        let evaluations = trials * points_per_trial;
        assert!(correct <= evaluations);
        let t = trials as f64;
        let k = points_per_trial as f64;
        let mean = correct as f64 / t / k;
        let second = correct_sq as f64 / t / (k * k);
        let var = (second - mean * mean).max(0.0);
        RiskEstimate {
            accuracy: mean,
            half_width: Z_99 * (var / t).sqrt(),
            trials,
            correct,
            evaluations,
        }
    }

    /// Empirical 0/1 risk on the same evaluations.
    pub fn risk(&self) -> f64 {
        (self.evaluations - self.correct) as f64 / self.evaluations as f64
    }
}

/// Monte-Carlo mean with a 99% normal-approximation half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub trials: u64,
}

impl MeanEstimate {
    /// From integer sums so aggregation order never changes the result.
    pub fn from_sums(sum: u128, sum_sq: u128, trials: u64) -> Self {
        assert!(trials > 0);
        let t = trials as f64;
        let mean = sum as f64 / t;
        let var = (sum_sq as f64 / t - mean * mean).max(0.0);
        MeanEstimate {
            mean,
            half_width: Z_99 * (var / t).sqrt(),
            trials,
        }
    }
}

/// Draws `size` inputs i.i.d. from `dist` and labels them with `concept`.
pub fn sample_training_set(
    concept: &dyn Concept,
    dist: &Distribution,
    size: usize,
    seed: &Seed,
) -> Result<TrainingSet> {
    if concept.n() != dist.n() {
        return Err(Error::invalid(format!(
            "concept width {} differs from distribution width {}",
            concept.n(),
            dist.n()
        )));
    }
    let mut rng = seed.rng();
    let xs: Vec<Input> = (0..size).map(|_| dist.sample(&mut rng)).collect();
    let labels = concept.eval_batch(&xs);
    let examples = xs
        .into_iter()
        .zip(labels)
        .map(|(x, y)| LabeledExample { x, y })
        .collect();
    Ok(TrainingSet {
        n: dist.n(),
        examples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{ConstantConcept, ParityConcept};
    use rand::RngCore;

    #[test]
    fn input_rejects_out_of_range_values() {
        assert!(Input::new(3, 7).is_ok());
        assert!(Input::new(3, 8).is_err());
        assert!(Input::new(0, 0).is_err());
    }

    #[test]
    fn coordinates_are_little_endian() {
        let x = Input::new(4, 0b1010).unwrap();
        assert!(!x.coordinate(1));
        assert!(x.coordinate(2));
        assert!(!x.coordinate(3));
        assert!(x.coordinate(4));
    }

    #[test]
    fn derive_appends_to_path() {
        let s = Seed::new(0).derive(0);
        assert_eq!(s.path(), &[0]);
        let s = Seed::with_path(0, vec![1]).derive(2);
        assert_eq!(s.path(), &[1, 2]);
    }

    #[test]
    fn derived_streams_differ() {
        let s = Seed::new(0);
        assert_ne!(s.derive(0).key(), s.derive(1).key());
        let a: Vec<u64> = {
            let mut r = s.derive(0).rng();
            (0..4).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = s.derive(1).rng();
            (0..4).map(|_| r.next_u64()).collect()
        };
        assert_ne!(a, b);
        // path [] vs [0] and [0,0] vs [0] must not collide either
        assert_ne!(s.key(), s.derive(0).key());
        assert_ne!(s.derive(0).derive(0).key(), s.derive(0).key());
    }

    #[test]
    fn sibling_streams_look_independent() {
        // Correlation of 10^4 paired fair bits; |r| stays well under 4/sqrt(N).
        let s = Seed::new(7);
        let mut a = s.derive(0).rng();
        let mut b = s.derive(1).rng();
        let n = 10_000;
        let mut agree = 0i64;
        for _ in 0..n {
            if (a.next_u32() & 1) == (b.next_u32() & 1) {
                agree += 1;
            }
        }
        let r = (2 * agree - n) as f64 / n as f64;
        assert!(r.abs() < 4.0 / (n as f64).sqrt(), "correlation {r}");
    }

    #[test]
    fn empty_training_set() {
        let c = ConstantConcept::new(3, true);
        let d = Distribution::uniform_hypercube(3).unwrap();
        let t = sample_training_set(&c, &d, 0, &Seed::new(1)).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.n(), 3);
    }

    #[test]
    fn constant_concept_forces_labels() {
        let c = ConstantConcept::new(3, true);
        let d = Distribution::uniform_hypercube(3).unwrap();
        let t = sample_training_set(&c, &d, 5, &Seed::new(11)).unwrap();
        assert_eq!(t.len(), 5);
        assert!(t.iter().all(|e| e.y));
    }

    #[test]
    fn parity_on_point_mass() {
        let c = ParityConcept::new(2);
        let d = Distribution::point_mass(2, 3).unwrap();
        let t = sample_training_set(&c, &d, 2, &Seed::new(5)).unwrap();
        let pairs: Vec<(u64, bool)> = t.iter().map(|e| (e.x.value(), e.y)).collect();
        assert_eq!(pairs, vec![(3, false), (3, false)]);
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let c = ParityConcept::new(2);
        let d = Distribution::uniform_hypercube(3).unwrap();
        assert!(matches!(
            sample_training_set(&c, &d, 1, &Seed::new(0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_consistent() {
        let c = ParityConcept::new(6);
        let d = Distribution::uniform_hypercube(6).unwrap();
        let s = Seed::new(42).derive(3);
        let a = sample_training_set(&c, &d, 200, &s).unwrap();
        let b = sample_training_set(&c, &d, 200, &s).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|e| e.y == c.eval(e.x)));
    }

    #[test]
    fn split_covers_everything_in_order() {
        let c = ParityConcept::new(4);
        let d = Distribution::uniform_hypercube(4).unwrap();
        let t = sample_training_set(&c, &d, 10, &Seed::new(3)).unwrap();
        let parts = t.split(3);
        assert_eq!(
            parts.iter().map(|p| p.len()).collect::<Vec<_>>(),
            vec![4, 3, 3]
        );
        let joined: Vec<_> = parts.iter().flat_map(|p| p.examples().to_vec()).collect();
        assert_eq!(joined, t.examples());
    }

    #[test]
    fn risk_complements_accuracy() {
        let e = RiskEstimate::from_successes(37, 100);
        assert_eq!(e.correct + (e.evaluations - e.correct), e.evaluations);
        assert!((e.accuracy + e.risk() - 1.0).abs() <= f64::EPSILON);
        let perfect = RiskEstimate::from_successes(100, 100);
        assert_eq!(perfect.half_width, 0.0);
    }

    #[test]
    fn trial_sums_match_bernoulli_formula_for_single_points() {
        let a = RiskEstimate::from_successes(731, 1000);
        let b = RiskEstimate::from_trial_sums(731, 731, 1000, 1);
        assert!((a.accuracy - b.accuracy).abs() < 1e-15);
        assert!((a.half_width - b.half_width).abs() < 1e-12);
    }
}
