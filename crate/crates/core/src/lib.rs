pub mod arith;
pub mod ball;
pub mod closed;
pub mod counter;
pub mod error;
pub mod hp;
pub mod kloosterman;
pub mod moments;
pub mod poincare;

pub use error::{Error, Result};
