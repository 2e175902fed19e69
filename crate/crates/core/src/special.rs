//! Special functions and quadrature rules shared by both engines.

use errorfunctions::ComplexErrorFunctions;
use std::f64::consts::PI;

use crate::C64;

/// Faddeeva function `w(z) = e^{-z²} erfc(-iz)`.
pub fn faddeeva(z: C64) -> C64 {
    z.w()
}

/// `e^{κ} · erf(z)` without forming `erf(z)` when it is exponentially large.
///
/// For `Re z ≥ 0` this is `e^κ − e^{κ − z²} w(iz)`; the left half-plane
/// follows from oddness. `w` is only ever evaluated in the closed upper
/// half-plane where `|w| ≤ 1`.
pub fn scaled_erf(kappa: C64, z: C64) -> C64 {
    let i = C64::i();
    if z.re >= 0.0 {
        kappa.exp() - (kappa - z * z).exp() * faddeeva(i * z)
    } else {
        -kappa.exp() + (kappa - z * z).exp() * faddeeva(-i * z)
    }
}

/// `π^{-1/2} ∫_lo^hi exp(κ − (x − c)²) dx` for complex `κ`, `c`.
pub fn gaussian_window_mass(kappa: C64, c: C64, lo: f64, hi: f64) -> C64 {
    0.5 * (scaled_erf(kappa, C64::from(hi) - c) - scaled_erf(kappa, C64::from(lo) - c))
}

/// Real error function.
pub fn erf(x: f64) -> f64 {
    C64::from(x).erf().re
}

/// `ln n!` by direct summation; exact enough for the sizes used here.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of a composite Gauss–Legendre rule on `[lo, hi]`
/// with `panels` equal panels of `order` nodes each.
pub fn composite_gauss_legendre(lo: f64, hi: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre(order);
    let width = (hi - lo) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let a = lo + width * k as f64;
        let half = 0.5 * width;
        let mid = a + half;
        for (x, w) in nodes.iter().zip(&weights) {
            out.push((mid + half * x, half * w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        // degree 13 is the highest exactly integrated degree for 7 nodes
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((integral - 2.0 / 13.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn scaled_erf_matches_plain_erf_for_moderate_arguments() {
        for &(re, im) in &[(0.3, 0.1), (-1.2, 0.7), (2.5, -1.5), (0.0, 3.0)] {
            let z = C64::new(re, im);
            let kappa = C64::new(-0.4, 0.2);
            let plain = kappa.exp() * z.erf();
            assert!((scaled_erf(kappa, z) - plain).norm() < 1e-13 * plain.norm().max(1.0));
        }
    }

    #[test]
    fn gaussian_window_mass_real_case_is_erf_difference() {
        let m = gaussian_window_mass(C64::from(0.0), C64::from(0.0), -1.0, 1.0);
        assert!((m.re - erf(1.0)).abs() < 1e-15);
        assert!(m.im.abs() < 1e-16);
    }

    #[test]
    fn scaled_erf_survives_large_imaginary_shift() {
        // e^{-y²} erf(L + iy) stays bounded although erf itself overflows.
        let y = 30.0;
        let kappa = C64::from(-y * y);
        let v = gaussian_window_mass(kappa, C64::new(0.0, y), -0.05, 0.05);
        assert!(v.norm().is_finite());
        assert!(v.norm() < 1.0);
    }
}
