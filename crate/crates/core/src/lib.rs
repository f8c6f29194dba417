pub mod basic;
pub mod complex;
pub mod error;
pub mod eval;
pub mod expansions;
pub mod identities;
pub mod precision;
pub mod sampling;
pub mod series;
pub mod suite;
pub mod terms;
pub mod theta;

pub use complex::Complex;
pub use error::{Error, Result};
pub use precision::PrecisionContext;
pub use theta::Nome;
