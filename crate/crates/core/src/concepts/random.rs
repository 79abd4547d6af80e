//! Lazily materialized uniformly random Boolean functions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::RngCore;

use super::prg::splitmix64;
use super::{Concept, ConceptClass, ConceptRef, MAX_CLASS_WIDTH};
use crate::domain::{Input, Seed};
use crate::error::{Error, Result};

/// The class of all functions `{0,1}^n → {0,1}`, sampled rather than
/// enumerated. Concept ids are 64-bit names; the label of `x` under concept
/// `id` is a fair coin derived from `(seed, id, x)`.
#[derive(Clone, Debug)]
pub struct RandomFunctionClass {
    n: u32,
    key: u64,
}

pub fn random_function_class(n: u32, seed: &Seed) -> Result<RandomFunctionClass> {
    if n == 0 || n > MAX_CLASS_WIDTH {
        return Err(Error::invalid(format!(
            "class width must be in 1..={MAX_CLASS_WIDTH}, got {n}"
        )));
    }
    Ok(RandomFunctionClass {
        n,
        key: seed.rng().next_u64(),
    })
}

impl RandomFunctionClass {
    pub fn function(&self, id: u64) -> RandomFunction {
        RandomFunction {
            n: self.n,
            key: splitmix64(self.key ^ splitmix64(id)),
            memo: Mutex::new(HashMap::new()),
        }
    }
}

impl ConceptClass for RandomFunctionClass {
    fn n(&self) -> u32 {
        self.n
    }

    /// Ids are 64-bit names for sampled members, not an enumeration of the
    /// `2^(2^n)` functions.
    fn index_bits(&self) -> u32 {
        64
    }

    fn concept(&self, index: u64) -> ConceptRef {
        Arc::new(self.function(index))
    }

    fn name(&self) -> String {
        format!("random_function(n={})", self.n)
    }
}

/// One random function. Labels are computed on first query and memoized;
/// concurrent first queries of the same input agree because the label is a
/// pure function of `(key, x)`.
#[derive(Debug)]
pub struct RandomFunction {
    n: u32,
    key: u64,
    memo: Mutex<HashMap<u64, bool>>,
}

impl RandomFunction {
    fn coin(&self, x: u64) -> bool {
        splitmix64(self.key ^ splitmix64(x ^ 0xD1B5_4A32_D192_ED03)) >> 63 == 1
    }

    /// Number of distinct inputs queried so far.
    pub fn materialized(&self) -> usize {
        self.memo.lock().expect("memo lock").len()
    }
}

impl Concept for RandomFunction {
    fn n(&self) -> u32 {
        self.n
    }

    fn eval(&self, x: Input) -> bool {
        let v = x.value();
        *self
            .memo
            .lock()
            .expect("memo lock")
            .entry(v)
            .or_insert_with(|| self.coin(v))
    }

    fn eval_batch(&self, xs: &[Input]) -> Vec<bool> {
        let mut memo = self.memo.lock().expect("memo lock");
        xs.iter()
            .map(|x| {
                *memo
                    .entry(x.value())
                    .or_insert_with(|| self.coin(x.value()))
            })
            .collect()
    }
}
