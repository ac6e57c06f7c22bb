pub mod arith;
pub mod error;
pub mod family;
pub mod heredity;
pub mod periodic;
pub mod rational;
pub mod structure;
pub mod window;

pub use error::{Error, Result};
