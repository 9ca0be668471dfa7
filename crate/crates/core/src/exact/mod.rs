//! Exact rationals, residues, p-adic approximations and real intervals.

mod interval;
mod padic;
mod rational;
mod residue;

pub use interval::{Dyadic, RealInterval};
pub use padic::{integer_representative, is_square_padic, sqrt_padic, PAdicApprox};
pub use rational::*;
pub use residue::ResidueElem;
