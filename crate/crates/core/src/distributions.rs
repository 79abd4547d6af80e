//! Input distributions over `{0,1}^n`.
//!
//! Besides the usual uniform laws this module holds the advice codec: a bit
//! string is hidden in the outcome probabilities of a distribution (outcome
//! `i` has weight 1 if bit `i` is 0 and weight 2 if it is 1) and recovered
//! from samples by frequency thresholding.
//!
//! Exact work (probability tables, total variation) enumerates the support,
//! so it is limited to [`MAX_ENUMERATION_BITS`].

use num_rational::Ratio;
use rand::Rng;

use crate::concepts::Concept;
use crate::domain::Input;
use crate::error::{Error, Result};

/// Widest input space a samplable distribution may live on.
pub const MAX_WIDTH: u32 = 30;

/// Widest space that is ever enumerated point by point. One more than 20 so
/// the joint `(x, y)` law of a 20-bit concept still fits.
pub const MAX_ENUMERATION_BITS: u32 = 21;

/// Tolerance on `Σ pmf = 1` for floating-point tables.
pub const TABLE_SUM_TOLERANCE: f64 = 1.0 / (1u64 << 40) as f64;

/// Fixed prefix prepended to every advice payload. The decoder reads its two
/// probability levels off these outcomes.
pub const PILOT_BITS: [bool; 2] = [false, true];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistributionKind {
    UniformHypercube,
    UniformRange,
    Advice,
    PointMass,
    Table,
}

#[derive(Clone, Debug)]
enum Law {
    UniformHypercube,
    UniformRange,
    Advice(AdviceCode),
    PointMass(u64),
    Table(Table),
}

/// A law over `{0, …, 2^n - 1}`. Immutable once built.
#[derive(Clone, Debug)]
pub struct Distribution {
    n: u32,
    law: Law,
}

#[derive(Clone, Debug)]
struct Table {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

/// An advice payload with its pilot prefix and integer weights.
///
/// With `L` encoded bits of which `k` are ones, outcome `i` has probability
/// `w_i / (L + k)` where `w_i ∈ {1, 2}`, so `p0 = 1/(L + k)` and the weights
/// sum to one exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdviceCode {
    payload: Vec<bool>,
    encoded: Vec<bool>,
    cumulative: Vec<u64>,
    total: u64,
}

impl AdviceCode {
    pub fn new(payload: &[bool]) -> Result<Self> {
        if payload.is_empty() {
            return Err(Error::invalid("advice payload must be non-empty"));
        }
        let encoded: Vec<bool> = PILOT_BITS.iter().chain(payload).copied().collect();
        let mut cumulative = Vec::with_capacity(encoded.len());
        let mut total = 0u64;
        for &b in &encoded {
            total += if b { 2 } else { 1 };
            cumulative.push(total);
        }
        Ok(AdviceCode {
            payload: payload.to_vec(),
            encoded,
            cumulative,
            total,
        })
    }

    pub fn payload(&self) -> &[bool] {
        &self.payload
    }

    /// Pilots followed by the payload.
    pub fn encoded_bits(&self) -> &[bool] {
        &self.encoded
    }

    /// Number of encoded bits `L`.
    pub fn len(&self) -> usize {
        self.encoded.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of ones `k` among the encoded bits.
    pub fn ones(&self) -> usize {
        self.encoded.iter().filter(|&&b| b).count()
    }

    pub fn p0(&self) -> Ratio<u64> {
        Ratio::new(1, self.total)
    }

    /// Exact probability of outcome `i`.
    pub fn probability(&self, i: u64) -> Ratio<u64> {
        match self.encoded.get(i as usize) {
            Some(true) => Ratio::new(2, self.total),
            Some(false) => Ratio::new(1, self.total),
            None => Ratio::from_integer(0),
        }
    }

    fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let r = rng.gen_range(0..self.total);
        self.cumulative.partition_point(|&c| c <= r) as u64
    }
}

fn check_width(n: u32) -> Result<()> {
    if n == 0 || n > MAX_WIDTH {
        return Err(Error::invalid(format!(
            "distribution width must be in 1..={MAX_WIDTH}, got {n}"
        )));
    }
    Ok(())
}

impl Distribution {
    pub fn uniform_hypercube(n: u32) -> Result<Self> {
        check_width(n)?;
        Ok(Distribution {
            n,
            law: Law::UniformHypercube,
        })
    }

    /// Uniform over the integers `1..=n`, viewed as `n`-bit inputs.
    pub fn uniform_range(n: u32) -> Result<Self> {
        check_width(n)?;
        Ok(Distribution {
            n,
            law: Law::UniformRange,
        })
    }

    pub fn point_mass(n: u32, value: u64) -> Result<Self> {
        check_width(n)?;
        Input::new(n, value)?;
        Ok(Distribution {
            n,
            law: Law::PointMass(value),
        })
    }

    /// Encodes `payload` into the outcome probabilities of an `n`-bit law.
    /// The pilot prefix plus payload must fit in the `2^n` outcomes.
    pub fn advice(payload: &[bool], n: u32) -> Result<Self> {
        check_width(n)?;
        let code = AdviceCode::new(payload)?;
        if code.len() as u64 > 1u64 << n {
            return Err(Error::invalid(format!(
                "{} encoded advice bits do not fit in 2^{n} outcomes",
                code.len()
            )));
        }
        Ok(Distribution {
            n,
            law: Law::Advice(code),
        })
    }

    /// Explicit probability table indexed by input value. Entries must be
    /// finite and non-negative and sum to one within [`TABLE_SUM_TOLERANCE`].
    pub fn table(n: u32, probs: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_ENUMERATION_BITS {
            return Err(Error::invalid(format!(
                "table width must be in 1..={MAX_ENUMERATION_BITS}, got {n}"
            )));
        }
        if probs.len() != 1usize << n {
            return Err(Error::invalid(format!(
                "table of width {n} needs {} entries, got {}",
                1usize << n,
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::invalid(format!("invalid probability {p}")));
        }
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut acc = Neumaier::default();
        for &p in &probs {
            acc.add(p);
            cumulative.push(acc.value());
        }
        let total = acc.value();
        if (total - 1.0).abs() > TABLE_SUM_TOLERANCE {
            return Err(Error::invalid(format!(
                "table probabilities sum to {total}, not 1"
            )));
        }
        Ok(Distribution {
            n,
            law: Law::Table(Table { probs, cumulative }),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn kind(&self) -> DistributionKind {
        match self.law {
            Law::UniformHypercube => DistributionKind::UniformHypercube,
            Law::UniformRange => DistributionKind::UniformRange,
            Law::Advice(_) => DistributionKind::Advice,
            Law::PointMass(_) => DistributionKind::PointMass,
            Law::Table(_) => DistributionKind::Table,
        }
    }

    pub fn advice_code(&self) -> Option<&AdviceCode> {
        match &self.law {
            Law::Advice(code) => Some(code),
            _ => None,
        }
    }

    /// Exact rational probability; `None` for floating-point tables.
    pub fn exact_pmf(&self, value: u64) -> Option<Ratio<u64>> {
        if value >> self.n != 0 {
            return Some(Ratio::from_integer(0));
        }
        match &self.law {
            Law::UniformHypercube => Some(Ratio::new(1, 1u64 << self.n)),
            Law::UniformRange => Some(if (1..=u64::from(self.n)).contains(&value) {
                Ratio::new(1, u64::from(self.n))
            } else {
                Ratio::from_integer(0)
            }),
            Law::Advice(code) => Some(code.probability(value)),
            Law::PointMass(v) => Some(Ratio::from_integer(u64::from(*v == value))),
            Law::Table(_) => None,
        }
    }

    pub fn pmf(&self, value: u64) -> f64 {
        if value >> self.n != 0 {
            return 0.0;
        }
        match &self.law {
            Law::Table(t) => t.probs[value as usize],
            _ => {
                let r = self.exact_pmf(value).expect("exact law");
                *r.numer() as f64 / *r.denom() as f64
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Input {
        let value = match &self.law {
            Law::UniformHypercube => rng.gen_range(0..1u64 << self.n),
            Law::UniformRange => rng.gen_range(1..=u64::from(self.n)),
            Law::Advice(code) => code.sample_index(rng),
            Law::PointMass(v) => *v,
            Law::Table(t) => {
                let total = *t.cumulative.last().expect("non-empty table");
                let u = rng.gen::<f64>() * total;
                let i = t.cumulative.partition_point(|&c| c <= u);
                if i < t.probs.len() {
                    i as u64
                } else {
                    t.probs
                        .iter()
                        .rposition(|&p| p > 0.0)
                        .expect("positive mass") as u64
                }
            }
        };
        Input::new_unchecked(self.n, value)
    }

    /// Full probability vector indexed by value.
    pub fn pmf_vector(&self) -> Result<Vec<f64>> {
        if self.n > MAX_ENUMERATION_BITS {
            return Err(Error::Unsupported(format!(
                "exact enumeration is limited to {MAX_ENUMERATION_BITS} bits, got {}",
                self.n
            )));
        }
        if let Law::Table(t) = &self.law {
            return Ok(t.probs.clone());
        }
        Ok((0..1u64 << self.n).map(|v| self.pmf(v)).collect())
    }
}

/// Neumaier compensated summation.
#[derive(Default, Clone, Copy, Debug)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `(1/2) Σ_x |p1(x) − p2(x)|` by exact enumeration.
pub fn tv_distance(d1: &Distribution, d2: &Distribution) -> Result<f64> {
    if d1.n() != d2.n() {
        return Err(Error::invalid(format!(
            "widths differ: {} vs {}",
            d1.n(),
            d2.n()
        )));
    }
    let p = d1.pmf_vector()?;
    let q = d2.pmf_vector()?;
    let mut acc = Neumaier::default();
    for (a, b) in p.iter().zip(&q) {
        acc.add((a - b).abs());
    }
    Ok((0.5 * acc.value()).clamp(0.0, 1.0))
}

/// Samples needed to tell two laws apart with average error `eps` under a
/// uniform prior: `ceil((2 − 4·eps) / tv)`.
pub fn min_samples_to_distinguish(tv: f64, eps: f64) -> Result<u64> {
    if !(tv > 0.0 && tv <= 1.0) {
        return Err(Error::invalid(format!("tv must be in (0, 1], got {tv}")));
    }
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::invalid(format!(
            "eps must be in [0, 1/2), got {eps}"
        )));
    }
    let raw = (2.0 - 4.0 * eps) / tv;
    // quotients such as 1/0.1 land a few ulps off an integer
    let nearest = raw.round();
    let n = if (raw - nearest).abs() <= 1e-9 * raw {
        nearest
    } else {
        raw.ceil()
    };
    Ok((n as u64).max(1))
}

/// Joint law of `(X, concept(X))` for `X ~ dist`, as a table over `n + 1`
/// bits. The label occupies bit `n`: entry `x | (y << n)`.
pub fn induced_example_law(concept: &dyn Concept, dist: &Distribution) -> Result<Distribution> {
    let n = dist.n();
    if concept.n() != n {
        return Err(Error::invalid(format!(
            "concept width {} differs from distribution width {n}",
            concept.n()
        )));
    }
    if n + 1 > MAX_ENUMERATION_BITS {
        return Err(Error::Unsupported(format!(
            "induced laws are enumerated only up to {} input bits",
            MAX_ENUMERATION_BITS - 1
        )));
    }
    let xs: Vec<Input> = (0..1u64 << n).map(|v| Input::new_unchecked(n, v)).collect();
    let labels = concept.eval_batch(&xs);
    let mut probs = vec![0.0; 1usize << (n + 1)];
    for (x, y) in xs.iter().zip(labels) {
        let idx = x.value() | (u64::from(y) << n);
        probs[idx as usize] = dist.pmf(x.value());
    }
    Distribution::table(n + 1, probs)
}

/// Recovers a `payload_length`-bit payload from samples of an advice law.
///
/// Outcome frequencies are counted; the threshold is the midpoint of the two
/// pilot frequencies and payload bit `i` is one iff outcome `i + 2` is seen
/// more often than the threshold. Samples outside the encoded outcomes are
/// ignored.
pub fn advice_decode(samples: &[Input], payload_length: usize) -> Result<Vec<bool>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::invalid("cannot decode advice from an empty sample"))?;
    let n = first.n();
    if samples.iter().any(|x| x.n() != n) {
        return Err(Error::invalid("advice samples have mixed widths"));
    }
    if payload_length == 0 {
        return Err(Error::invalid("payload length must be positive"));
    }
    let outcomes = payload_length + PILOT_BITS.len();
    if n < 64 && outcomes as u64 > 1u64 << n {
        return Err(Error::invalid(format!(
            "{outcomes} encoded bits do not fit in 2^{n} outcomes"
        )));
    }
    let mut counts = vec![0u64; outcomes];
    for x in samples {
        if let Some(c) = counts.get_mut(x.value() as usize) {
            *c += 1;
        }
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::DecodeFailure(format!(
            "pilot outcomes unobserved (counts {} and {})",
            counts[0], counts[1]
        )));
    }
    // compare 2·count against the pilot sum to stay in integers
    let pilot_sum = counts[0] + counts[1];
    Ok(counts[2..].iter().map(|&c| 2 * c > pilot_sum).collect())
}

/// Relative deviation allowed per outcome count by [`advice_decode_budget`].
/// Any value below 1/7 keeps zero-bits under and one-bits over the threshold.
pub const DECODE_DEVIATION: f64 = 1.0 / 8.0;

/// Sample count after which every bit decodes correctly with probability at
/// least `1 − failure`.
///
/// Every outcome count stays within relative [`DECODE_DEVIATION`] of its
/// mean with that probability once
/// `N ≥ 3 (L + k) ln(2L / failure) / δ²` (two-sided multiplicative Chernoff
/// bound and a union over the `L` outcomes, each with mean at least
/// `N / (L + k)`). The bound is conservative; a 64-bit payload decodes
/// reliably well below it.
pub fn advice_decode_budget(code: &AdviceCode, failure: f64) -> u64 {
    assert!(failure > 0.0 && failure < 1.0);
    let l = code.len() as f64;
    let w = (code.len() + code.ones()) as f64;
    let d = DECODE_DEVIATION;
    (3.0 * w * (2.0 * l / failure).ln() / (d * d)).ceil() as u64
}

/// Parses `bits` payload bits from a hex string, most significant bit of each
/// digit first (`"a"` with 3 bits is `101`).
pub fn payload_from_hex(hex: &str, bits: usize) -> Result<Vec<bool>> {
    let hex = hex.trim().trim_start_matches("0x");
    if bits == 0 {
        return Err(Error::invalid("payload bit length must be positive"));
    }
    if hex.len() * 4 < bits {
        return Err(Error::invalid(format!(
            "hex string has {} bits, {bits} requested",
            hex.len() * 4
        )));
    }
    let mut out = Vec::with_capacity(bits);
    for ch in hex.chars() {
        let digit = ch
            .to_digit(16)
            .ok_or_else(|| Error::invalid(format!("invalid hex digit {ch:?}")))?;
        for shift in (0..4).rev() {
            if out.len() == bits {
                return Ok(out);
            }
            out.push((digit >> shift) & 1 == 1);
        }
    }
    Ok(out)
}

/// Inverse of [`payload_from_hex`], zero-padding the last digit.
pub fn payload_to_hex(bits: &[bool]) -> String {
    bits.chunks(4)
        .map(|chunk| {
            let mut d = 0u32;
            for (i, &b) in chunk.iter().enumerate() {
                d |= u32::from(b) << (3 - i);
            }
            char::from_digit(d, 16).expect("nibble")
        })
        .collect()
}
