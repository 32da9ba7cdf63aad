//! Monte Carlo estimation of Bell violations by randomly rotated mutually
//! unbiased bases.

pub mod correlation;
pub mod error;
pub mod estimator;
pub mod golden;
pub mod inequality;
pub mod mub;
pub mod polytope;
pub mod quantum;
pub mod stats;

pub use error::{Error, Result};
