pub mod deformed;
pub mod checks;
pub mod entropy;
pub mod error;
pub mod frechet;
pub mod matrix;
pub mod sampling;
pub mod suite;
pub mod variational;

pub use error::{Error, Result};
