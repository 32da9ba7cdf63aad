//! Output formats of the `mubell` command-line driver.

pub mod output;
