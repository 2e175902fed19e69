//! Simulation of a single-shot multiplexed synthesizer for non-Gaussian
//! photonic states.
//!
//! Several "feeding" states are merged into one effective mode, interfered
//! with a seed on a beamsplitter, and one output port is heralded by a
//! finite-window homodyne measurement. Two exact engines are provided:
//!
//! * [`fock`]: truncated Fock-basis density operators, exact for
//!   photon-number-bounded inputs and used as the brute-force oracle;
//! * [`coherent`]: finite sums of coherent-state dyads, closed under
//!   beamsplitters and Gaussian-window conditioning, which scales to
//!   large cat amplitudes.
//!
//! Conventions shared by every module: `x = (a + a†)/√2`, vacuum quadrature
//! variance `1/2`, so the shot-noise standard deviation is
//! [`SIGMA0`]` = 1/√2`. A beamsplitter of transmittivity `τ` and
//! reflectivity `r = √(1 − τ²)` maps mode operators `a → τa + rb`,
//! `b → −ra + τb`, i.e. coherent amplitudes `(α, β) → (τα + rβ, −rα + τβ)`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherent;
pub mod error;
pub mod fock;
pub mod metrics;
pub mod optimize;
pub mod protocol;
pub mod special;
pub mod states;
pub mod window;

pub use error::{Result, SynthError};
pub use window::HomodyneWindow;

pub use num_complex::Complex64 as C64;

/// Vacuum quadrature standard deviation in natural units.
pub const SIGMA0: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Photon-number parity of a state's support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// `+1` for even, `-1` for odd.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn of(n: usize) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}
