//! Simulation laboratory for learning Boolean concept classes when the
//! training distribution differs from the test distribution.
//!
//! The crate is organised bottom-up:
//!
//! * [`domain`]: inputs, labeled examples, training sets, seeds and risk
//!   estimates shared by everything else.
//! * [`distributions`]: samplable laws over `{0,1}^n`, the advice codec that
//!   hides a bit string in outcome probabilities, and exact total variation.
//! * [`concepts`]: Boolean concepts and concept classes, including the GGM
//!   pseudorandom family and the index-revealing modification.
//! * [`learners`]: learners sharing one `(x, T, 1^m, seed)` interface, the
//!   Bayes-optimal reference learner and majority-vote amplification.
//! * [`stats`]: analytic bounds, hitting times, distinct-count statistics and
//!   the distinguishing experiment.
//! * [`harness`]: experiment configuration, runners and report serialization.

pub mod concepts;
pub mod distributions;
pub mod domain;
pub mod error;
pub mod harness;
pub mod learners;
pub mod stats;

pub use concepts::{Concept, ConceptClass, ConceptRef, PrgKind, PrgSpec};
pub use distributions::Distribution;
pub use domain::{
    sample_training_set, Input, LabeledExample, MeanEstimate, Precision, RiskEstimate, Seed,
    TrainingSet,
};
pub use error::{Error, Result};
pub use learners::Learner;
