//! Learners sharing the `(x, T, 1^m, seed) → bit` interface.
//!
//! No learner sees the test distribution; everything it knows about the
//! concept comes from the training set. Randomized learners draw all their
//! coins from the seed they are handed.

mod amplify;
mod bayes;
pub(crate) mod risk;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, RngCore};

pub use amplify::{majority_amplify, majority_success_probability, MajorityVote, VoteMode};
pub use bayes::{
    bayes_optimal_learner, bayes_posterior, exhaustive_accuracy, optimal_reconstruction,
    reconstruction_error, BayesOptimalLearner, ExactAccuracy, PosteriorSummary,
};
pub use risk::{estimate_class_risk, estimate_risk};

use crate::concepts::{ConceptRef, ModifiedClass};
use crate::distributions::advice_decode;
use crate::domain::{Input, Precision, Seed, TrainingSet};

pub trait Learner: Send + Sync {
    fn name(&self) -> String;

    /// Free-form note on the training distribution the learner expects.
    fn requirement(&self) -> &str {
        "any"
    }

    fn predict(&self, x: Input, train: &TrainingSet, m: Precision, seed: &Seed) -> bool;
}

pub type LearnerRef = Arc<dyn Learner>;

pub(crate) fn fair_coin(seed: &Seed) -> bool {
    seed.rng().next_u32() & 1 == 1
}

/// Majority label of `x` among its occurrences in `train`, if any.
pub fn lookup(x: Input, train: &TrainingSet) -> Option<bool> {
    let (mut ones, mut zeros) = (0u32, 0u32);
    for e in train.iter().filter(|e| e.x == x) {
        if e.y {
            ones += 1;
        } else {
            zeros += 1;
        }
    }
    match ones.cmp(&zeros) {
        std::cmp::Ordering::Greater => Some(true),
        std::cmp::Ordering::Less => Some(false),
        std::cmp::Ordering::Equal => None,
    }
}

/// Answers from the training set when `x` was seen, otherwise a fair coin.
#[derive(Clone, Copy, Debug, Default)]
pub struct LookupLearner;

pub fn lookup_learner() -> LookupLearner {
    LookupLearner
}

impl Learner for LookupLearner {
    fn name(&self) -> String {
        "lookup".into()
    }

    fn predict(&self, x: Input, train: &TrainingSet, _m: Precision, seed: &Seed) -> bool {
        lookup(x, train).unwrap_or_else(|| fair_coin(seed))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConstantLearner(pub bool);

impl Learner for ConstantLearner {
    fn name(&self) -> String {
        format!("constant{}", u8::from(self.0))
    }

    fn predict(&self, _x: Input, _train: &TrainingSet, _m: Precision, _seed: &Seed) -> bool {
        self.0
    }
}

/// Knows the target concept. Reference point for risk estimation.
#[derive(Clone)]
pub struct OracleLearner {
    concept: ConceptRef,
}

impl OracleLearner {
    pub fn new(concept: ConceptRef) -> Self {
        OracleLearner { concept }
    }
}

impl Learner for OracleLearner {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn predict(&self, x: Input, _train: &TrainingSet, _m: Precision, _seed: &Seed) -> bool {
        self.concept.eval(x)
    }
}

/// Knows the target concept but answers correctly only with probability
/// `success`.
#[derive(Clone)]
pub struct NoisyOracleLearner {
    concept: ConceptRef,
    success: f64,
}

impl NoisyOracleLearner {
    pub fn new(concept: ConceptRef, success: f64) -> Self {
        assert!((0.0..=1.0).contains(&success));
        NoisyOracleLearner { concept, success }
    }
}

impl Learner for NoisyOracleLearner {
    fn name(&self) -> String {
        format!("noisy_oracle({})", self.success)
    }

    fn predict(&self, x: Input, _train: &TrainingSet, _m: Precision, seed: &Seed) -> bool {
        let truth = self.concept.eval(x);
        if seed.rng().gen_bool(self.success) {
            truth
        } else {
            !truth
        }
    }
}

/// Rebuilds the index of a modified-class concept from the revealed inputs
/// `1..=n` and answers with that concept. Unobserved index bits default to 0.
#[derive(Clone)]
pub struct IndexRecoveryLearner {
    class: Arc<ModifiedClass>,
}

pub fn index_recovery_learner(class: Arc<ModifiedClass>) -> IndexRecoveryLearner {
    IndexRecoveryLearner { class }
}

impl IndexRecoveryLearner {
    /// Reconstructed index and the mask of index bits actually observed.
    pub fn recover_index(&self, train: &TrainingSet) -> (u64, u64) {
        let n = u64::from(crate::concepts::ConceptClass::n(self.class.as_ref()));
        let (mut index, mut seen) = (0u64, 0u64);
        for e in train.iter() {
            let v = e.x.value();
            if (1..=n).contains(&v) {
                let bit = 1u64 << (v - 1);
                seen |= bit;
                if e.y {
                    index |= bit;
                } else {
                    index &= !bit;
                }
            }
        }
        (index, seen)
    }
}

impl fmt::Debug for IndexRecoveryLearner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndexRecoveryLearner")
            .finish_non_exhaustive()
    }
}

impl Learner for IndexRecoveryLearner {
    fn name(&self) -> String {
        "index_recovery".into()
    }

    fn requirement(&self) -> &str {
        "training inputs must cover 1..=n (uniform over {1..n})"
    }

    fn predict(&self, x: Input, train: &TrainingSet, _m: Precision, _seed: &Seed) -> bool {
        let (index, _) = self.recover_index(train);
        crate::concepts::Concept::eval(&self.class.modified(index), x)
    }
}

pub type AdviceEvaluator = dyn Fn(&[bool], Input) -> bool + Send + Sync;

/// Decodes advice from the training inputs and answers with
/// `evaluator(advice, x)`. When decoding fails it behaves like
/// [`LookupLearner`] and records the failure.
pub struct AdviceLearner {
    payload_length: usize,
    evaluator: Arc<AdviceEvaluator>,
    decode_failures: AtomicU64,
}

pub fn advice_learner(payload_length: usize, evaluator: Arc<AdviceEvaluator>) -> AdviceLearner {
    AdviceLearner {
        payload_length,
        evaluator,
        decode_failures: AtomicU64::new(0),
    }
}

impl AdviceLearner {
    pub fn decode_failures(&self) -> u64 {
        self.decode_failures.load(Ordering::Relaxed)
    }
}

impl fmt::Debug for AdviceLearner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdviceLearner")
            .field("payload_length", &self.payload_length)
            .field("decode_failures", &self.decode_failures())
            .finish()
    }
}

impl Learner for AdviceLearner {
    fn name(&self) -> String {
        "advice".into()
    }

    fn requirement(&self) -> &str {
        "training inputs drawn from the advice-encoding distribution"
    }

    fn predict(&self, x: Input, train: &TrainingSet, m: Precision, seed: &Seed) -> bool {
        match advice_decode(&train.inputs(), self.payload_length) {
            Ok(advice) => (self.evaluator)(&advice, x),
            Err(_) => {
                self.decode_failures.fetch_add(1, Ordering::Relaxed);
                LookupLearner.predict(x, train, m, seed)
            }
        }
    }
}
