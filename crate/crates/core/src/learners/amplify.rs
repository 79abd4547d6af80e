use std::fmt;

use super::{Learner, LearnerRef};
use crate::domain::{Input, Precision, Seed, TrainingSet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VoteMode {
    /// Vote `i` sees only chunk `i` of the training set, split into `k`
    /// contiguous pieces. Given `k·S` i.i.d. examples this is `k` fresh
    /// training sets of size `S`.
    Resample,
    /// Every vote sees the whole training set; only the coins change.
    FixedSet,
}

/// Runs the base learner `k` times and returns the majority bit. Vote `i`
/// uses seed `seed.derive(i)`.
#[derive(Clone)]
pub struct MajorityVote {
    base: LearnerRef,
    k: usize,
    mode: VoteMode,
}

pub fn majority_amplify(base: LearnerRef, k: usize) -> Result<MajorityVote> {
    if k.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "the number of votes must be odd, got {k}"
        )));
    }
    Ok(MajorityVote {
        base,
        k,
        mode: VoteMode::Resample,
    })
}

impl MajorityVote {
    pub fn with_mode(mut self, mode: VoteMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> VoteMode {
        self.mode
    }
}

impl fmt::Debug for MajorityVote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MajorityVote")
            .field("base", &self.base.name())
            .field("k", &self.k)
            .field("mode", &self.mode)
            .finish()
    }
}

impl Learner for MajorityVote {
    fn name(&self) -> String {
        format!("majority{}({})", self.k, self.base.name())
    }

    fn requirement(&self) -> &str {
        self.base.requirement()
    }

    fn predict(&self, x: Input, train: &TrainingSet, m: Precision, seed: &Seed) -> bool {
        let ones = match self.mode {
            VoteMode::Resample => train
                .split(self.k)
                .iter()
                .enumerate()
                .filter(|(i, chunk)| self.base.predict(x, chunk, m, &seed.derive(*i as u64)))
                .count(),
            VoteMode::FixedSet => (0..self.k)
                .filter(|&i| self.base.predict(x, train, m, &seed.derive(i as u64)))
                .count(),
        };
        2 * ones > self.k
    }
}

/// Probability that the majority of `k` independent votes, each correct with
/// probability `p`, is correct (`k` odd).
pub fn majority_success_probability(p: f64, k: usize) -> f64 {
    assert!(k % 2 == 1);
    assert!((0.0..=1.0).contains(&p));
    if p == 0.0 || p == 1.0 {
        return p;
    }
    // binomial pmf in log space; k is at most a few thousand here
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_choose = 0.0f64; // ln C(k, i) built up incrementally
    let mut total = 0.0;
    for i in 0..=k {
        if i > 0 {
            log_choose += ((k - i + 1) as f64).ln() - (i as f64).ln();
        }
        if 2 * i > k {
            total += (log_choose + i as f64 * lp + (k - i) as f64 * lq).exp();
        }
    }
    total.min(1.0)
}
