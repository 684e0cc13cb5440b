//! Independent checks of the coefficients and predictors: integration with the
//! variational flow, Newton correction onto the LPC curve, residual orders and
//! least-squares convergence slopes.

mod amplitude;
mod flow;
mod lpc;
mod residual;
mod study;

pub use amplitude::amplitude_oracle;
pub use flow::{integrate, Flow, OdeRhs, Tolerances};
pub use lpc::{correct_lpc, CorrectedLPC, CorrectorOptions, LpcSeed};
pub use residual::{dde_residual, homological_residual};
pub use study::{dde_convergence_study, fit_slope, fit_window, ode_convergence_study, ConvergenceReport, SlopeFit};
