//! Exact computations with formal groups, noncommutative cobar algebras and
//! small A∞-structures.

pub mod ainfty;
pub mod error;
pub mod hochschild;
pub mod linalg;
pub mod moduli;
pub mod noncomm;
pub mod rings;
pub mod selftest;
pub mod series;

pub use ainfty::{AInfStructure, Cochain, GradedBasis, MultiComponent};
pub use error::{Error, Result};
pub use hochschild::{HHBruteForce, HHReport, Rank, Torsion};
pub use moduli::{CanonicalForm, FormKind, MooreAlgebra, OrbitInvariant};
pub use noncomm::{Derivation, GradingContext, NCEndo, NCSeries, Word};
pub use rings::{CoeffRing, Monomial, RingElem, RingKind, Scalar};
pub use series::PowerSeries;
