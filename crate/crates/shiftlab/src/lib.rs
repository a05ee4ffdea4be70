//! Simulation laboratory for hidden-shift quantum algorithms on finite abelian groups.
//!
//! Given oracle access to a shifted function `g(x) = f(x - s)` and to the Fourier
//! transform of `f`, the hidden-shift algorithms recover the shift `s`. For bent
//! functions the recovery is certain; for bounded ("bent-like") functions the
//! success probability has a closed form. This crate evaluates those closed forms
//! and independently executes the corresponding circuits by dense statevector
//! simulation, so the two routes can be checked against each other.
//!
//! Module map:
//!
//! - [`abelian`] — finite abelian groups, characters, Fourier transform.
//! - [`gfunc`] — vector-valued functions on a group: shifts, bentness, bound profiles.
//! - [`statevec`] — dense and lazy statevector simulation of the circuits.
//! - [`hiddenshift`] — the hidden-shift algorithms, formula and simulation paths.
//! - [`phasetuned`] — the one-register algorithm with tunable phase functions.
//! - [`bentlib`] — multidimensional bent constructions and Gram-matrix machinery.
//! - [`numchar`] — Dirichlet and finite-field character instances.
//! - [`analysis`] — forrelation and oracle quantization error.
//! - [`cli`] — instance/report file formats and the command-line entry points.

pub mod abelian;
pub mod analysis;
pub mod bentlib;
pub mod cli;
pub mod gfunc;
pub mod hiddenshift;
pub mod numchar;
pub mod phasetuned;
pub mod statevec;

use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Element/character coordinate length does not match the group.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// Two values belong to different groups (or group vs dual).
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    /// An oracle value is not a member of the register alphabet.
    #[error("value not in register alphabet: {0}")]
    Alphabet(String),
    /// A phase-oracle value is off the unit circle.
    #[error("domain error: {0}")]
    Domain(String),
    /// An amplitude encoding would require an imaginary square root.
    #[error("encoding error: {0}")]
    Encoding(String),
    /// Division by a vanishing Fourier coefficient or function value.
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    /// An algorithm precondition does not hold for the given instance.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A matrix fails the Gram-set membership invariants.
    #[error("membership error: {0}")]
    Membership(String),
    /// A recovered quantity is too far from any admissible value.
    #[error("ambiguous value: {0}")]
    Ambiguous(String),
    /// Malformed instance file or command-line input.
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
