//! Explicit lower bounds for linear forms `β_0 + β_1Θ_1 + … + β_mΘ_m` with
//! coefficients in an imaginary quadratic ring, from Padé-type envelope axioms.

pub mod bound;
pub mod cli;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod pade;
pub mod precision;
pub mod quadratic;
pub mod tuning;

pub use error::{Error, Result};
