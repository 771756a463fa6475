//! Lévy triples, the flow `T_t`, and the objects derived from them.

pub mod evolved;
pub mod generator;
pub mod hypotheses;
pub mod measure;
pub mod psi;
pub mod rule;
pub mod semigroup;
pub mod triple;

pub use evolved::EvolvedTriple;
pub use generator::{apply_generator, Generator};
pub use hypotheses::{check_domination, check_hypotheses, domination_search, HypothesisReport};
pub use measure::{DensityFn, LevyMeasure, RadialFn, Ray, TailClass};
pub use psi::{ms_of, psi_inverse, psi_inverse_generalised, psi_of};
pub use rule::{MeasureRule, ProjectedRule, DEFAULT_DELTA};
pub use semigroup::{GrowthBound, SemigroupFamily};
pub use triple::{characteristic_exponent, LevyTriple};
