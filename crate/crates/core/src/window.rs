use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::{Result, SynthError, SIGMA0};

/// Acceptance window of a homodyne herald.
///
/// The detector measures `x_θ = x cos θ + p sin θ`; a run is accepted when
/// the outcome lies in `[x0 − dx/2, x0 + dx/2]`, with `x0` and `dx` given in
/// units of the shot-noise standard deviation [`SIGMA0`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomodyneWindow {
    theta: f64,
    x0: f64,
    /// `None` is the infinite window (no conditioning).
    dx: Option<f64>,
}

impl HomodyneWindow {
    pub fn new(theta: f64, x0: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(SynthError::invalid(format!(
                "window width dx = {dx} must be finite and > 0 (use the infinite window instead)"
            )));
        }
        if !theta.is_finite() || !x0.is_finite() {
            return Err(SynthError::invalid("window angle and center must be finite"));
        }
        Ok(Self {
            theta: theta.rem_euclid(TAU),
            x0,
            dx: Some(dx),
        })
    }

    /// Window accepting every outcome.
    pub fn infinite(theta: f64) -> Self {
        Self {
            theta: theta.rem_euclid(TAU),
            x0: 0.0,
            dx: None,
        }
    }

    /// Window centered at zero along `x` (θ = 0).
    pub fn x_centered(dx: f64) -> Result<Self> {
        Self::new(0.0, 0.0, dx)
    }

    /// Window centered at zero along `p` (θ = π/2).
    pub fn p_centered(dx: f64) -> Result<Self> {
        Self::new(std::f64::consts::FRAC_PI_2, 0.0, dx)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Width in σ₀ units, `None` when infinite.
    pub fn dx(&self) -> Option<f64> {
        self.dx
    }

    pub fn is_infinite(&self) -> bool {
        self.dx.is_none()
    }

    /// Integration bounds in natural quadrature units.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.dx
            .map(|dx| ((self.x0 - 0.5 * dx) * SIGMA0, (self.x0 + 0.5 * dx) * SIGMA0))
    }

    pub fn with_dx(&self, dx: f64) -> Result<Self> {
        Self::new(self.theta, self.x0, dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_width() {
        assert!(HomodyneWindow::new(0.0, 0.0, 0.0).is_err());
        assert!(HomodyneWindow::new(0.0, 0.0, -1.0).is_err());
        assert!(HomodyneWindow::new(0.0, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn angle_is_reduced_into_one_period() {
        let w = HomodyneWindow::new(-std::f64::consts::FRAC_PI_2, 0.0, 1.0).unwrap();
        assert!((w.theta() - 1.5 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn bounds_are_in_natural_units() {
        let w = HomodyneWindow::new(0.0, 1.0, 2.0).unwrap();
        let (lo, hi) = w.bounds().unwrap();
        assert!((lo - 0.0).abs() < 1e-15);
        assert!((hi - 2.0 * SIGMA0).abs() < 1e-15);
        assert!(HomodyneWindow::infinite(0.0).bounds().is_none());
    }
}
