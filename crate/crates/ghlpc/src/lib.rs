//! Model language, built-in systems and command-line driver for generalized Hopf
//! coefficients, LPC predictors and their verification.

pub mod analysis;
pub mod builtin;
pub mod cli;
pub mod dsl;
pub mod report;
