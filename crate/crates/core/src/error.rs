use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Requested jet order or direction count exceeds what the jet core supports.
    Capability(String),
    /// Non-finite value or elementary-function domain violation during evaluation.
    Evaluation(String),
    /// A shift lies on (or too close to) the spectrum.
    Resonance { shift: (f64, f64), eigenvalue: (f64, f64) },
    /// Bordered matrix or critical eigenstructure is degenerate.
    Degenerate(String),
    /// No suitable eigenvalue near the guess, or several candidates.
    Eigen(String),
    /// Newton or integrator failure.
    Convergence(String),
    /// Transversality matrix singular or ill-conditioned.
    Transversality { cond: f64 },
    /// Input shape or argument problem.
    Invalid(String),
    /// Coefficient table lacks an entry needed by the consumer.
    Incomplete(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Capability(s) => write!(f, "capability error: {s}"),
            Error::Evaluation(s) => write!(f, "evaluation error: {s}"),
            Error::Resonance { shift, eigenvalue } => write!(
                f,
                "resonance: shift {}{:+}i is within tolerance of eigenvalue {}{:+}i",
                shift.0, shift.1, eigenvalue.0, eigenvalue.1
            ),
            Error::Degenerate(s) => write!(f, "degenerate eigenstructure: {s}"),
            Error::Eigen(s) => write!(f, "eigenvalue error: {s}"),
            Error::Convergence(s) => write!(f, "no convergence: {s}"),
            Error::Transversality { cond } => {
                write!(f, "transversality condition fails (cond(P) = {cond:.3e})")
            }
            Error::Invalid(s) => write!(f, "invalid input: {s}"),
            Error::Incomplete(s) => write!(f, "incomplete coefficient set: {s}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
