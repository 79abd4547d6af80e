//! Boolean concepts and indexed concept classes.

mod ggm;
mod prg;
mod random;

use std::fmt;
use std::sync::Arc;

use rand::RngCore;

pub use ggm::GgmPrf;
pub use prg::{PrgKind, PrgSpec};
pub use random::{random_function_class, RandomFunction, RandomFunctionClass};

use crate::domain::Input;
use crate::error::{Error, Result};

/// Widest input space a concept class is built over.
pub const MAX_CLASS_WIDTH: u32 = 30;

/// Widest input space for [`exhaustive_class`]; the class has `2^(2^n)`
/// members.
pub const MAX_EXHAUSTIVE_WIDTH: u32 = 4;

/// A total, deterministic map from `n`-bit inputs to a bit.
pub trait Concept: Send + Sync {
    fn n(&self) -> u32;

    fn eval(&self, x: Input) -> bool;

    /// Labels a batch. Implementations may share work between inputs; the
    /// result always equals pointwise [`Concept::eval`].
    fn eval_batch(&self, xs: &[Input]) -> Vec<bool> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

pub type ConceptRef = Arc<dyn Concept>;

/// An indexed family `{c^(j)}` with `j ∈ {0,1}^index_bits`.
pub trait ConceptClass: Send + Sync {
    fn n(&self) -> u32;

    fn index_bits(&self) -> u32;

    fn concept(&self, index: u64) -> ConceptRef;

    fn name(&self) -> String;

    /// Uniform index.
    fn sample_index(&self, rng: &mut dyn RngCore) -> u64 {
        match self.index_bits() {
            0 => 0,
            b if b >= 64 => rng.next_u64(),
            b => rng.next_u64() >> (64 - b),
        }
    }
}

pub type ClassRef = Arc<dyn ConceptClass>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstantConcept {
    n: u32,
    value: bool,
}

impl ConstantConcept {
    pub fn new(n: u32, value: bool) -> Self {
        ConstantConcept { n, value }
    }
}

impl Concept for ConstantConcept {
    fn n(&self) -> u32 {
        self.n
    }

    fn eval(&self, _x: Input) -> bool {
        self.value
    }
}

/// XOR of all coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParityConcept {
    n: u32,
}

impl ParityConcept {
    pub fn new(n: u32) -> Self {
        ParityConcept { n }
    }
}

impl Concept for ParityConcept {
    fn n(&self) -> u32 {
        self.n
    }

    fn eval(&self, x: Input) -> bool {
        x.value().count_ones() % 2 == 1
    }
}

/// A concept given by its truth table: the label of `x` is bit `x` of
/// `table`. Limited to `n <= 6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruthTableConcept {
    n: u32,
    table: u64,
}

impl TruthTableConcept {
    pub fn new(n: u32, table: u64) -> Result<Self> {
        if n == 0 || n > 6 {
            return Err(Error::invalid(format!("truth tables hold n <= 6, got {n}")));
        }
        let table = if n == 6 {
            table
        } else {
            table & ((1u64 << (1 << n)) - 1)
        };
        Ok(TruthTableConcept { n, table })
    }

    pub fn table(&self) -> u64 {
        self.table
    }
}

impl Concept for TruthTableConcept {
    fn n(&self) -> u32 {
        self.n
    }

    fn eval(&self, x: Input) -> bool {
        (self.table >> x.value()) & 1 == 1
    }
}

/// Wraps a closure as a concept.
pub struct FnConcept<F> {
    n: u32,
    f: F,
}

impl<F: Fn(Input) -> bool + Send + Sync> FnConcept<F> {
    pub fn new(n: u32, f: F) -> Self {
        FnConcept { n, f }
    }
}

impl<F: Fn(Input) -> bool + Send + Sync> Concept for FnConcept<F> {
    fn n(&self) -> u32 {
        self.n
    }

    fn eval(&self, x: Input) -> bool {
        (self.f)(x)
    }
}

impl<F> fmt::Debug for FnConcept<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnConcept").field("n", &self.n).finish()
    }
}

/// All `2^(2^n)` Boolean functions on `n <= 4` bits; index `j` is the truth
/// table itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExhaustiveClass {
    n: u32,
}

pub fn exhaustive_class(n: u32) -> Result<ExhaustiveClass> {
    if n == 0 {
        return Err(Error::invalid("width must be positive"));
    }
    if n > MAX_EXHAUSTIVE_WIDTH {
        return Err(Error::Unsupported(format!(
            "the exhaustive class is enumerable only for n <= {MAX_EXHAUSTIVE_WIDTH}, got {n}"
        )));
    }
    Ok(ExhaustiveClass { n })
}

impl ExhaustiveClass {
    pub fn size(&self) -> u64 {
        1u64 << (1u64 << self.n)
    }

    pub fn truth_table(&self, index: u64) -> TruthTableConcept {
        TruthTableConcept::new(self.n, index).expect("n <= 4")
    }
}

impl ConceptClass for ExhaustiveClass {
    fn n(&self) -> u32 {
        self.n
    }

    fn index_bits(&self) -> u32 {
        1 << self.n
    }

    fn concept(&self, index: u64) -> ConceptRef {
        Arc::new(self.truth_table(index))
    }

    fn name(&self) -> String {
        format!("exhaustive(n={})", self.n)
    }
}

/// Concept `j` is the first output bit of the GGM function keyed by `j`.
/// The first output bit is coordinate 1, i.e. bit 0 of the output.
#[derive(Clone, Debug)]
pub struct FirstBitClass {
    n: u32,
    prg: Arc<PrgSpec>,
}

pub fn first_bit_class(n: u32, prg: PrgSpec) -> Result<FirstBitClass> {
    if n == 0 || n > MAX_CLASS_WIDTH {
        return Err(Error::invalid(format!(
            "class width must be in 1..={MAX_CLASS_WIDTH}, got {n}"
        )));
    }
    if prg.seed_bits() != n {
        return Err(Error::invalid(format!(
            "PRG seed length {} must equal the width {n}",
            prg.seed_bits()
        )));
    }
    Ok(FirstBitClass {
        n,
        prg: Arc::new(prg),
    })
}

impl FirstBitClass {
    pub fn prg(&self) -> &PrgSpec {
        &self.prg
    }

    pub fn prf(&self, index: u64) -> GgmPrf {
        GgmPrf::from_key(self.n, index, self.prg.clone()).expect("index fits the width")
    }
}

impl ConceptClass for FirstBitClass {
    fn n(&self) -> u32 {
        self.n
    }

    fn index_bits(&self) -> u32 {
        self.n
    }

    fn concept(&self, index: u64) -> ConceptRef {
        Arc::new(FirstBitConcept {
            prf: self.prf(index & ((1u64 << self.n) - 1)),
        })
    }

    fn name(&self) -> String {
        format!("first_bit(n={}, prg={})", self.n, self.prg.kind().label())
    }
}

#[derive(Clone, Debug)]
pub struct FirstBitConcept {
    prf: GgmPrf,
}

impl Concept for FirstBitConcept {
    fn n(&self) -> u32 {
        self.prf.n()
    }

    fn eval(&self, x: Input) -> bool {
        self.prf.eval(x) & 1 == 1
    }

    fn eval_batch(&self, xs: &[Input]) -> Vec<bool> {
        self.prf
            .eval_batch(xs)
            .into_iter()
            .map(|y| y & 1 == 1)
            .collect()
    }
}

/// The base class with concept `j` overwritten on the inputs `1..=n`: input
/// `u` is labeled with bit `u` of `j` (bit 1 the least significant).
#[derive(Clone)]
pub struct ModifiedClass {
    base: ClassRef,
}

pub fn modified_class(base: ClassRef) -> Result<ModifiedClass> {
    if base.index_bits() != base.n() {
        return Err(Error::invalid(format!(
            "index length {} must equal the width {} to be revealed on inputs 1..=n",
            base.index_bits(),
            base.n()
        )));
    }
    Ok(ModifiedClass { base })
}

impl ModifiedClass {
    pub fn base(&self) -> &ClassRef {
        &self.base
    }

    pub fn modified(&self, index: u64) -> ModifiedConcept {
        ModifiedConcept {
            n: self.base.n(),
            index,
            inner: self.base.concept(index),
        }
    }
}

impl fmt::Debug for ModifiedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModifiedClass")
            .field("base", &self.base.name())
            .finish()
    }
}

impl ConceptClass for ModifiedClass {
    fn n(&self) -> u32 {
        self.base.n()
    }

    fn index_bits(&self) -> u32 {
        self.base.index_bits()
    }

    fn concept(&self, index: u64) -> ConceptRef {
        Arc::new(self.modified(index))
    }

    fn name(&self) -> String {
        format!("modified({})", self.base.name())
    }
}

#[derive(Clone)]
pub struct ModifiedConcept {
    n: u32,
    index: u64,
    inner: ConceptRef,
}

impl ModifiedConcept {
    fn revealed(&self, x: Input) -> Option<bool> {
        let v = x.value();
        (1..=u64::from(self.n))
            .contains(&v)
            .then(|| (self.index >> (v - 1)) & 1 == 1)
    }
}

impl Concept for ModifiedConcept {
    fn n(&self) -> u32 {
        self.n
    }

    fn eval(&self, x: Input) -> bool {
        self.revealed(x).unwrap_or_else(|| self.inner.eval(x))
    }

    fn eval_batch(&self, xs: &[Input]) -> Vec<bool> {
        let rest: Vec<Input> = xs
            .iter()
            .filter(|x| self.revealed(**x).is_none())
            .copied()
            .collect();
        let mut inner = self.inner.eval_batch(&rest).into_iter();
        xs.iter()
            .map(|&x| {
                self.revealed(x)
                    .unwrap_or_else(|| inner.next().expect("one label per unrevealed input"))
            })
            .collect()
    }
}
