//! GGM tree construction of a pseudorandom function family.

use std::sync::Arc;

use super::prg::PrgSpec;
use crate::domain::Input;
use crate::error::{Error, Result};

/// `f_key: {0,1}^n → {0,1}^n`. Starting from the key, level `u` expands the
/// current state and keeps half `x_u` (coordinate `u`, bit `u - 1` of the
/// input). The state after `n` levels is the output.
///
/// Keys, states and outputs are all `n` bits because the generator's seed
/// length equals `n`; there is nothing to truncate.
#[derive(Clone, Debug)]
pub struct GgmPrf {
    n: u32,
    key: u64,
    prg: Arc<PrgSpec>,
}

impl GgmPrf {
    /// `key_bits[i]` is bit `i` of the key.
    pub fn new(n: u32, key_bits: &[bool], prg: Arc<PrgSpec>) -> Result<Self> {
        if key_bits.len() != n as usize {
            return Err(Error::invalid(format!(
                "GGM key has {} bits, width is {n}",
                key_bits.len()
            )));
        }
        let key = key_bits
            .iter()
            .enumerate()
            .fold(0u64, |k, (i, &b)| k | (u64::from(b) << i));
        Self::from_key(n, key, prg)
    }

    pub fn from_key(n: u32, key: u64, prg: Arc<PrgSpec>) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::invalid(format!(
                "GGM width must be in 1..=63, got {n}"
            )));
        }
        if prg.seed_bits() != n {
            return Err(Error::invalid(format!(
                "PRG seed length {} must equal the width {n}",
                prg.seed_bits()
            )));
        }
        if key >> n != 0 {
            return Err(Error::invalid(format!(
                "key {key} does not fit in {n} bits"
            )));
        }
        Ok(GgmPrf { n, key, prg })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    fn step(&self, state: u64, bit: bool) -> u64 {
        let (g0, g1) = self.prg.expand(state);
        if bit {
            g1
        } else {
            g0
        }
    }

    pub fn eval(&self, x: Input) -> u64 {
        debug_assert_eq!(x.n(), self.n);
        let v = x.value();
        (0..self.n).fold(self.key, |state, u| self.step(state, (v >> u) & 1 == 1))
    }

    /// Tree states visited by `eval`: the key followed by one state per level.
    pub fn trace(&self, x: Input) -> Vec<u64> {
        let v = x.value();
        let mut states = Vec::with_capacity(self.n as usize + 1);
        states.push(self.key);
        for u in 0..self.n {
            let next = self.step(*states.last().unwrap(), (v >> u) & 1 == 1);
            states.push(next);
        }
        states
    }

    pub fn eval_batch(&self, xs: &[Input]) -> Vec<u64> {
        self.eval_batch_counted(xs).0
    }

    /// Evaluates many inputs, expanding every tree node at most once per
    /// batch. Inputs are visited in order of their coordinate string, so
    /// consecutive inputs reuse the states of their common prefix. Returns the
    /// outputs (in input order) and the number of generator calls made.
    pub fn eval_batch_counted(&self, xs: &[Input]) -> (Vec<u64>, usize) {
        let n = self.n as usize;
        if xs.len() <= 1 {
            return (xs.iter().map(|&x| self.eval(x)).collect(), xs.len() * n);
        }
        let path = |x: &Input| x.value().reverse_bits() >> (64 - self.n);
        let mut order: Vec<(u64, usize)> =
            xs.iter().enumerate().map(|(i, x)| (path(x), i)).collect();
        order.sort_unstable();

        let mut out = vec![0u64; xs.len()];
        let mut states = vec![0u64; n + 1];
        states[0] = self.key;
        let mut calls = 0;
        let mut prev: Option<u64> = None;
        for (p, i) in order {
            let shared = match prev {
                None => 0,
                Some(q) if q == p => n,
                Some(q) => ((q ^ p).leading_zeros() - (64 - self.n)) as usize,
            };
            let v = xs[i].value();
            for u in shared..n {
                states[u + 1] = self.step(states[u], (v >> u) & 1 == 1);
                calls += 1;
            }
            out[i] = states[n];
            prev = Some(p);
        }
        (out, calls)
    }
}
