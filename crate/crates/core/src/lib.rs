//! Exact polyhedral normed spaces over the rationals.
//!
//! The crate works entirely in exact rational arithmetic. It provides unit
//! balls in vertex and facet form with conversions between them, the usual
//! constructions on polyhedral spaces (duals, subspaces, quotients, l1 and
//! l-infinity sums, isometry groups), and a decision procedure for whether a
//! partial linear isometry `f : A -> B` inside a space `C` extends to a
//! surjective linear isometry of some finite-dimensional superspace. Every
//! positive or negative verdict comes with a certificate that can be checked
//! again independently.

pub mod arith;
pub mod error;
pub mod extension;
pub mod io;
pub mod lp;
pub mod partiso;
pub mod polytope;
pub mod shiftspace;
pub mod space;

pub use arith::{QMat, QVec, Rat};
pub use error::{Error, Result};
