pub mod diophantine;
pub mod error;
pub mod limitlaw;
pub mod numeric;
pub mod periodic;
pub mod sequences;
pub mod stats;

pub use error::{Error, Result};
