//! Exact symbolic engine for the Intermediate Long Wave hierarchy and the
//! one-point linear Hodge integrals.
//!
//! Everything is computed over the rationals. Power series are truncated
//! per variable, differential polynomials live in a single dependent
//! variable `u`, and local functionals are kept in an integration-by-parts
//! normal form so that equality is decidable.

pub mod diffalg;
pub mod error;
pub mod exactnum;
pub mod hodge;
pub mod ilw;
pub mod linalg;
pub mod mpseries;
pub mod report;

pub use diffalg::{DiffMonomial, DiffPoly, LocalFunctional, UExponents};
pub use error::{Error, Result};
pub use exactnum::{bernoulli, c_g, dispersion_coeff, CgTable, Rational};
pub use hodge::BracketTable;
pub use ilw::Hamiltonian;
pub use mpseries::{MultiSeries, VarSpec};
pub use report::{Mismatch, Report, Status};
