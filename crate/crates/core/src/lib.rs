//! Negative certificates for the question whether the intersection body of a
//! convex body of revolution in dimension 4 or 6 is a polar zonoid.
//!
//! A body is described by its radial profile `ρ(t)`, `t` being the cosine of
//! the angle to the axis of revolution. The crate computes the radial
//! function of the intersection body, the obstruction field
//! `□ R⁻¹(1/ρ_IK)` whose negativity rules out the polar zonoid property, and
//! closed-form sufficient conditions evaluated at the pole `t = 1`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod criteria;
pub mod error;
pub mod families;
pub mod jet;
pub mod oracle;
pub mod profile;
pub mod transform;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use jet::Jet;
pub use profile::{BodyOfRevolution, JetFunction, Piece, RadialProfile, Side, Variable};

/// Outcome of a one-sided test. `Inconclusive` never asserts that the
/// intersection body is a polar zonoid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    NotPolarZonoid,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::NotPolarZonoid => "NotPolarZonoid",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}
