//! Built-in example systems, available both as native closures and as `.ghm` sources.

use ghlpc_core::model::{BazykinKhibnik, FhnDde, Lorenz84, VectorField};
use ghlpc_core::scalar::Scalar;

use crate::dsl::ModelDef;

/// Starting point for locating a generalized Hopf point.
#[derive(Debug, Clone, PartialEq)]
pub struct GhGuess {
    pub x: Vec<f64>,
    pub alpha: [f64; 2],
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    BazykinKhibnik,
    Lorenz84,
    FhnDde,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::BazykinKhibnik, Builtin::Lorenz84, Builtin::FhnDde];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::BazykinKhibnik => "bazykin-khibnik",
            Builtin::Lorenz84 => "lorenz84",
            Builtin::FhnDde => "fhn-dde",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Builtin::ALL.into_iter().find(|b| b.name() == s)
    }

    pub fn source(self) -> &'static str {
        match self {
            Builtin::BazykinKhibnik => include_str!("../models/bazykin-khibnik.ghm"),
            Builtin::Lorenz84 => include_str!("../models/lorenz84.ghm"),
            Builtin::FhnDde => include_str!("../models/fhn-dde.ghm"),
        }
    }

    pub fn guess(self) -> GhGuess {
        match self {
            Builtin::BazykinKhibnik => GhGuess { x: vec![0.25, 0.5], alpha: [0.25, 0.125], omega: 0.35 },
            Builtin::Lorenz84 => GhGuess { x: vec![1.15, -0.03, 0.21, -0.51], alpha: [2.4, 0.05], omega: 0.69 },
            Builtin::FhnDde => GhGuess { x: vec![0.0, 0.0], alpha: [1.9, -1.0429], omega: 0.072 },
        }
    }

    pub fn native(self) -> Model {
        match self {
            Builtin::BazykinKhibnik => Model::BazykinKhibnik(BazykinKhibnik),
            Builtin::Lorenz84 => Model::Lorenz84(Lorenz84::default()),
            Builtin::FhnDde => Model::FhnDde(FhnDde::default()),
        }
    }
}

/// Any model the front end can run.
#[derive(Debug, Clone)]
pub enum Model {
    BazykinKhibnik(BazykinKhibnik),
    Lorenz84(Lorenz84),
    FhnDde(FhnDde),
    Dsl(ModelDef),
}

impl VectorField for Model {
    fn dim(&self) -> usize {
        match self {
            Model::BazykinKhibnik(m) => m.dim(),
            Model::Lorenz84(m) => m.dim(),
            Model::FhnDde(m) => m.dim(),
            Model::Dsl(m) => m.dim(),
        }
    }

    fn delays(&self) -> &[f64] {
        match self {
            Model::BazykinKhibnik(m) => m.delays(),
            Model::Lorenz84(m) => m.delays(),
            Model::FhnDde(m) => m.delays(),
            Model::Dsl(m) => m.delays(),
        }
    }

    fn eval<S: Scalar>(&self, states: &[&[S]], params: &[S]) -> ghlpc_core::Result<Vec<S>> {
        match self {
            Model::BazykinKhibnik(m) => m.eval(states, params),
            Model::Lorenz84(m) => m.eval(states, params),
            Model::FhnDde(m) => m.eval(states, params),
            Model::Dsl(m) => m.eval(states, params),
        }
    }
}
