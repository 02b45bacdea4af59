//! Approximate actions of finite groups on finite sets.
//!
//! A map `f: Γ → Sym(n)` from a finite group into a symmetric group is
//! measured by how badly it fails to be a homomorphism (its local defect),
//! repaired into an exact homomorphism on a slightly larger point set, and
//! tested with sampling testers. The crate also builds the standard hard
//! instances: the drop-a-point deformation of a transitive action and the
//! pinched-grid maps on the free group of rank two.
//!
//! All distances and defects are exact rationals. Floating point appears
//! only in [`oracle::intertwiner_min_distance`] and in tester statistics.

pub mod correction;
pub mod counterexamples;
pub mod error;
pub mod gamma_graph;
pub mod group;
pub mod io;
pub mod map;
pub mod oracle;
pub mod perm;
pub mod testers;

mod dsu;

pub use correction::{
    correct, correct_symmetric, correct_via_quotient, CorrectionReport, CorrectionResult,
};
pub use error::{Error, Result};
pub use group::{CosetSpace, FiniteGroup, Subgroup};
pub use map::{DefectReport, Distance, GroupMap};
pub use perm::Permutation;

/// Exact rational used for every distance, defect and bound.
pub type Rational = num_rational::Ratio<i128>;

/// Shorthand for `Rational::new(numer, denom)`.
pub fn ratio(numer: i128, denom: i128) -> Rational {
    Rational::new(numer, denom)
}

pub(crate) fn int(value: usize) -> Rational {
    Rational::from_integer(value as i128)
}
