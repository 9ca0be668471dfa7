//! Computational checks behind the known counterexamples to co-fibered
//! products of curve covers.
//!
//! The crate certifies two families. The quaternionic family takes a
//! rational quaternion algebra split at 2 and at infinity, its norm-one
//! units, and a conjugator with a denominator at 2; it checks torsion
//! freeness, surjectivity onto `SL2(Z/2^k)`, intersection indices and
//! non-discreteness of the enlarged group. The dihedral family checks that
//! two involutions of the projective line share no invariant rational
//! function. Every result is emitted as a serializable [`certify::Certificate`].

pub mod certify;
pub mod commens;
pub mod error;
pub mod exact;
pub mod fuchsian;
pub mod matrix;
pub mod mobius;
pub mod modgroup;
pub mod quatalg;
pub mod units;

pub use error::{Error, Result};
