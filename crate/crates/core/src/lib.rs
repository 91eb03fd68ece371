pub mod enclosure;
pub mod error;
pub mod lp;
pub mod model;
pub mod rational;
pub mod scheduling;
pub mod ski_lp;
pub mod ski_rental;
pub mod tradeoff_curves;

pub use error::{Error, Result};
pub use rational::Rational;
