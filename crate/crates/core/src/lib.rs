pub mod cli;
pub mod edgeop;
pub mod error;
pub mod indices;
pub mod linalg;
pub mod propagate;
pub mod random;
pub mod symplectic;
pub mod tolerances;
pub mod tube;

pub use error::{Error, Result};
pub use tolerances::Tolerances;
