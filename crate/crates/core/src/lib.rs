//! Desk-scale experiments with sums over the nontrivial zeros of the Riemann
//! zeta function.
//!
//! The crate computes zero ordinates, evaluates truncated explicit formulas
//! for the prime-counting error and the Mertens function against exact sieve
//! values, implements Fejér-kernel smoothing and the random model with
//! independent uniform phases, measures tail frequencies, evaluates the
//! constants attached to these problems, and searches for small integer
//! combinations of ordinates.
//!
//! Modules:
//! - [`zero_data`]: ordinates, `N(T)` checks and `|ζ'(ρ)|`
//! - [`sieve`]: `Λ(n)`, `ψ(x)`, `μ(n)`, `M(x)`
//! - [`zero_sums`]: weight sequences, `F(t, T)`, `Φ_X(x)`, growth diagnostics
//! - [`fejer`]: Fejér smoothing identity, pair sums, smoothed tails
//! - [`random_model`]: `I₀`, exact and empirical moment generating functions
//! - [`tail`]: tail frequencies, the predicted doubly exponential tail, `η`
//! - [`eli`]: minimal integer combinations of ordinates
//! - [`constants`]: `1/(2π)`, `ζ'(-1)`, Ng's `B`, combination counts

pub mod constants;
pub mod eli;
pub mod error;
pub mod fejer;
pub mod io;
pub mod numeric;
pub mod random_model;
pub mod sieve;
pub mod tail;
pub mod zero_data;
pub mod zero_sums;
pub mod zeta;

pub use error::{Error, Result};
pub use numeric::{GridSpec, Interval, QuadRule};
pub use zero_data::{compute_zeros, load_zero_table, ZeroTable};
pub use zero_sums::{make_weights, WeightKind, WeightSequence};
