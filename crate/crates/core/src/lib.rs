#![no_std]
//! Generalized Hopf (Bautin) normal-form coefficients through seventh order for
//! ODEs and discrete DDEs, higher-order predictors for the fold-of-cycles curve,
//! and the numerical checks used to validate them.

extern crate alloc;

pub mod dde;
pub mod error;
pub mod field;
pub mod ghode;
pub mod ghode_params;
pub mod jets;
pub mod linalg;
pub mod linode;
pub mod model;
pub mod normal_form;
pub mod poly;
pub mod predictor;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use field::C64;
