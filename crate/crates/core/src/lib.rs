//! Resource theories whose free sets are described by Choi matrices:
//! structural checks, free-set membership and conic-program quantifiers.

pub mod cdrt;
pub mod choi;
pub mod conic;
mod error;
pub mod linalg;
pub mod theories;

pub use error::{Error, Result};
