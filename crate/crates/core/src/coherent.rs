//! Exact engine over finite sums of coherent-state dyads.
//!
//! A state is `ρ = Σ_ij c_ij |α_i⟩⟨α_j|` with one shared ket list, so
//! Hermiticity of `ρ` is Hermiticity of `c`. Beamsplitters act on the
//! amplitudes only, and homodyne windows reduce to Gaussian integrals that
//! close over the complex error function.

use nalgebra::DMatrix;
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use crate::fock::{coherent_amplitudes, FockDensity, HERALD_FLOOR};
use crate::special::gaussian_window_mass;
use crate::{HomodyneWindow, Parity, Result, SynthError, C64};

/// Default merge/drop tolerance for [`CoherentRank::compress_terms`].
pub const COMPRESS_TOL: f64 = 1e-12;

/// `ln ⟨β|α⟩ = −|α|²/2 − |β|²/2 + β̄α`.
pub fn ln_coherent_overlap(alpha: C64, beta: C64) -> C64 {
    -0.5 * (alpha.norm_sqr() + beta.norm_sqr()) + beta.conj() * alpha
}

/// `⟨β|α⟩`.
pub fn coherent_overlap(alpha: C64, beta: C64) -> C64 {
    ln_coherent_overlap(alpha, beta).exp()
}

/// `∫_window ⟨x_θ|α⟩⟨β|x_θ⟩ dx = ⟨β|Π|α⟩`.
///
/// With `a = αe^{−iθ}`, `b = βe^{−iθ}` the integrand is
/// `π^{-1/2} exp(ln⟨β|α⟩ − (x − c)²)`, `c = (a + b̄)/√2`.
pub fn window_moment(alpha: C64, beta: C64, window: &HomodyneWindow) -> C64 {
    let Some((lo, hi)) = window.bounds() else {
        return coherent_overlap(alpha, beta);
    };
    let rot = C64::from_polar(1.0, -window.theta());
    let (a, b) = (alpha * rot, beta * rot);
    let c = (a + b.conj()) * FRAC_1_SQRT_2;
    gaussian_window_mass(ln_coherent_overlap(alpha, beta), c, lo, hi)
}

/// Finite coherent-dyad expansion over `M` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentRank<const M: usize> {
    kets: Vec<[C64; M]>,
    coeffs: DMatrix<C64>,
}

pub type SingleModeRank = CoherentRank<1>;
pub type TwoModeRank = CoherentRank<2>;

fn tuple_overlap<const M: usize>(ket: &[C64; M], bra: &[C64; M]) -> C64 {
    let ln: C64 = ket.iter().zip(bra).map(|(a, b)| ln_coherent_overlap(*a, *b)).sum();
    ln.exp()
}

fn tuple_distance<const M: usize>(a: &[C64; M], b: &[C64; M]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

impl<const M: usize> CoherentRank<M> {
    /// Builds a state from kets and a coefficient matrix; the coefficients
    /// are replaced by their Hermitian part.
    pub fn new(kets: Vec<[C64; M]>, coeffs: DMatrix<C64>) -> Result<Self> {
        let n = kets.len();
        if coeffs.nrows() != n || coeffs.ncols() != n {
            return Err(SynthError::invalid(format!(
                "coefficient matrix is {}x{} for {n} kets",
                coeffs.nrows(),
                coeffs.ncols()
            )));
        }
        let herm = (&coeffs + coeffs.adjoint()) * C64::from(0.5);
        Ok(Self { kets, coeffs: herm })
    }

    pub fn kets(&self) -> &[[C64; M]] {
        &self.kets
    }

    pub fn coeffs(&self) -> &DMatrix<C64> {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.kets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kets.is_empty()
    }

    /// `Σ_ij c_ij ⟨α_j|α_i⟩` (complex; the imaginary part is round-off).
    pub fn trace_complex(&self) -> C64 {
        let mut acc = C64::from(0.0);
        for i in 0..self.len() {
            for j in 0..self.len() {
                let c = self.coeffs[(i, j)];
                if c != C64::from(0.0) {
                    acc += c * tuple_overlap(&self.kets[i], &self.kets[j]);
                }
            }
        }
        acc
    }

    pub fn trace(&self) -> f64 {
        self.trace_complex().re
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > 0.0) {
            return Err(SynthError::invalid("cannot normalize a state with non-positive trace"));
        }
        Ok(Self {
            kets: self.kets.clone(),
            coeffs: &self.coeffs / C64::from(t),
        })
    }

    /// Largest `|c_ij − conj(c_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.len() {
            for j in 0..self.len() {
                worst = worst.max((self.coeffs[(i, j)] - self.coeffs[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Merges kets closer than `tol` (summing their rows and columns), zeroes
    /// coefficients with `|c_ij| < tol` and drops kets left without terms.
    /// Dyad matrix elements of any bounded operator are at most one in
    /// modulus, so `|c_ij|` is the relevant size bound.
    pub fn compress_terms(&self, tol: f64) -> Self {
        if tol <= 0.0 {
            return self.clone();
        }
        let mut reps: Vec<[C64; M]> = Vec::new();
        let mut map = Vec::with_capacity(self.len());
        for ket in &self.kets {
            match reps.iter().position(|r| tuple_distance(r, ket) <= tol) {
                Some(k) => map.push(k),
                None => {
                    map.push(reps.len());
                    reps.push(*ket);
                }
            }
        }
        let n = reps.len();
        let mut c = DMatrix::zeros(n, n);
        for i in 0..self.len() {
            for j in 0..self.len() {
                c[(map[i], map[j])] += self.coeffs[(i, j)];
            }
        }
        c.iter_mut().for_each(|z: &mut C64| {
            if z.norm() < tol {
                *z = C64::from(0.0);
            }
        });
        let keep: Vec<usize> = (0..n)
            .filter(|&i| (0..n).any(|j| c[(i, j)] != C64::from(0.0) || c[(j, i)] != C64::from(0.0)))
            .collect();
        let kets = keep.iter().map(|&i| reps[i]).collect();
        let coeffs = DMatrix::from_fn(keep.len(), keep.len(), |a, b| c[(keep[a], keep[b])]);
        Self { kets, coeffs }
    }
}

impl CoherentRank<1> {
    pub fn coherent(alpha: C64) -> Self {
        Self {
            kets: vec![[alpha]],
            coeffs: DMatrix::from_element(1, 1, C64::from(1.0)),
        }
    }

    pub fn vacuum() -> Self {
        Self::coherent(C64::from(0.0))
    }

    /// `(|α⟩ ± |−α⟩)/𝒩`; the even cat with `α = 0` is the vacuum.
    pub fn cat(alpha: f64, parity: Parity) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(SynthError::invalid(format!("cat amplitude {alpha} must be >= 0")));
        }
        match (parity, alpha == 0.0) {
            (Parity::Odd, true) => return Err(SynthError::NullCat),
            (Parity::Even, true) => return Ok(Self::vacuum()),
            _ => {}
        }
        let norm2 = 2.0 * (1.0 + parity.sign() * (-2.0 * alpha * alpha).exp());
        let s = parity.sign();
        let coeffs = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::from(1.0 / norm2),
                C64::from(s / norm2),
                C64::from(s / norm2),
                C64::from(1.0 / norm2),
            ],
        );
        Ok(Self {
            kets: vec![[C64::from(alpha)], [C64::from(-alpha)]],
            coeffs,
        })
    }

    /// Single-mode amplitudes.
    pub fn amplitudes(&self) -> impl Iterator<Item = C64> + '_ {
        self.kets.iter().map(|k| k[0])
    }

    /// `⟨ψ|ρ|ψ⟩` given `f(α) = ⟨ψ|α⟩`.
    pub fn pure_expectation(&self, f: impl Fn(C64) -> C64) -> f64 {
        let proj: Vec<C64> = self.amplitudes().map(f).collect();
        let mut acc = C64::from(0.0);
        for i in 0..self.len() {
            for j in 0..self.len() {
                acc += self.coeffs[(i, j)] * proj[i] * proj[j].conj();
            }
        }
        acc.re
    }

    pub fn mean_photon_number(&self) -> f64 {
        let mut acc = C64::from(0.0);
        for i in 0..self.len() {
            for j in 0..self.len() {
                let (a, b) = (self.kets[i][0], self.kets[j][0]);
                acc += self.coeffs[(i, j)] * b.conj() * a * coherent_overlap(a, b);
            }
        }
        acc.re
    }

    /// Largest coherent amplitude modulus present.
    pub fn max_amplitude(&self) -> f64 {
        self.amplitudes().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Wigner function, normalized so the vacuum gives `1/π` at the origin.
    ///
    /// The dyad `|α⟩⟨β|` contributes
    /// `(1/π) ⟨β|α⟩ exp(−2(ζ − α)(ζ̄ − β̄))`, `ζ = (x + ip)/√2`.
    pub fn wigner(&self, x: f64, p: f64) -> f64 {
        let zeta = C64::new(x, p) * FRAC_1_SQRT_2;
        let mut acc = C64::from(0.0);
        for i in 0..self.len() {
            let a = self.kets[i][0];
            for j in 0..self.len() {
                let c = self.coeffs[(i, j)];
                if c == C64::from(0.0) {
                    continue;
                }
                let b = self.kets[j][0];
                let expo = ln_coherent_overlap(a, b) - 2.0 * (zeta - a) * (zeta.conj() - b.conj());
                acc += c * expo.exp();
            }
        }
        acc.re / PI
    }

    /// Fock representation truncated at `dim` (not renormalized).
    pub fn to_fock(&self, dim: usize) -> Result<FockDensity> {
        let vecs: Vec<_> = self.amplitudes().map(|a| coherent_amplitudes(a, dim)).collect();
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..self.len() {
            for j in 0..self.len() {
                let c = self.coeffs[(i, j)];
                if c != C64::from(0.0) {
                    m += &vecs[i] * vecs[j].adjoint() * c;
                }
            }
        }
        FockDensity::from_matrix(1, dim, m)
    }

    /// `e^{−iφn̂} ρ e^{iφn̂}`: every amplitude picks up `e^{−iφ}`.
    pub fn rotated(&self, phi: f64) -> Self {
        let rot = C64::from_polar(1.0, -phi);
        Self {
            kets: self.kets.iter().map(|k| [k[0] * rot]).collect(),
            coeffs: self.coeffs.clone(),
        }
    }
}

/// `ρ_a ⊗ ρ_b`.
pub fn product(a: &SingleModeRank, b: &SingleModeRank) -> TwoModeRank {
    let mut kets = Vec::with_capacity(a.len() * b.len());
    for ka in &a.kets {
        for kb in &b.kets {
            kets.push([ka[0], kb[0]]);
        }
    }
    CoherentRank {
        kets,
        coeffs: a.coeffs.kronecker(&b.coeffs),
    }
}

fn transform_kets(state: &TwoModeRank, tau: f64, r: f64) -> TwoModeRank {
    let kets = state
        .kets
        .iter()
        .map(|&[a, b]| [a * tau + b * r, -a * r + b * tau])
        .collect();
    CoherentRank {
        kets,
        coeffs: state.coeffs.clone(),
    }
}

fn check_tau(tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(SynthError::invalid(format!("transmittivity {tau} must lie in [0, 1]")));
    }
    Ok((1.0 - tau * tau).max(0.0).sqrt())
}

/// `(α, β) → (τα + rβ, −rα + τβ)` on every ket.
pub fn beamsplitter_cr(state: &TwoModeRank, tau: f64) -> Result<TwoModeRank> {
    let r = check_tau(tau)?;
    Ok(transform_kets(state, tau, r))
}

/// Inverse of [`beamsplitter_cr`] with the same `τ`.
pub fn beamsplitter_cr_inverse(state: &TwoModeRank, tau: f64) -> Result<TwoModeRank> {
    let r = check_tau(tau)?;
    Ok(transform_kets(state, tau, -r))
}

/// Heralds `measured_mode` with the window and returns the normalized
/// state of the other mode with the herald probability.
pub fn condition_and_trace_cr(
    state: &TwoModeRank,
    window: &HomodyneWindow,
    measured_mode: usize,
) -> Result<(SingleModeRank, f64)> {
    if measured_mode > 1 {
        return Err(SynthError::invalid("measured_mode must be 0 or 1"));
    }
    let kept_mode = 1 - measured_mode;
    let n = state.len();
    let kets: Vec<[C64; 1]> = state.kets.iter().map(|k| [k[kept_mode]]).collect();
    let mut coeffs = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let c = state.coeffs[(i, j)];
            if c != C64::from(0.0) {
                let (a, b) = (state.kets[i][measured_mode], state.kets[j][measured_mode]);
                coeffs[(i, j)] = c * window_moment(a, b, window);
            }
        }
    }
    let kept = CoherentRank::new(kets, coeffs)?.compress_terms(COMPRESS_TOL);
    let t = kept.trace_complex();
    if !(t.re >= HERALD_FLOOR) {
        return Err(SynthError::HeraldUnderflow { p: t.re });
    }
    if t.im.abs() > 1e-9 * t.re + 1e-15 {
        return Err(SynthError::Consistency(format!(
            "herald probability has imaginary residue {:.3e} (p = {:.3e})",
            t.im, t.re
        )));
    }
    Ok((kept.normalized()?, t.re))
}

/// Reduced state of one mode.
pub fn partial_trace_cr(state: &TwoModeRank, keep: usize) -> Result<SingleModeRank> {
    if keep > 1 {
        return Err(SynthError::invalid("keep must be 0 or 1"));
    }
    condition_and_trace_cr(state, &HomodyneWindow::infinite(0.0), 1 - keep).map(|(s, _)| s)
}

/// `ρ_a ⊗ ρ_b → BS(τ) → herald one port → reduced state`.
pub fn mix_and_condition_cr(
    a: &SingleModeRank,
    b: &SingleModeRank,
    tau: f64,
    window: &HomodyneWindow,
    measured_mode: usize,
) -> Result<(SingleModeRank, f64)> {
    let joint = beamsplitter_cr(&product(a, b), tau)?;
    condition_and_trace_cr(&joint, window, measured_mode)
}

/// `√2 α`: the x-quadrature center of `|α⟩` for real `α`.
pub fn quadrature_center(alpha: f64) -> f64 {
    SQRT_2 * alpha
}
