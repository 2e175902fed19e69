//! Fidelity targets: ideal cats, x-squeezed cats and approximate GKP codewords.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::coherent::{coherent_overlap, SingleModeRank};
use crate::fock::{cat_normalization, coherent_amplitudes, quad_wavefunctions, FockVector, TRUNCATION_LIMIT};
use crate::{Parity, Result, SynthError, C64};

/// Teeth whose envelope weight falls below this are dropped.
const ENVELOPE_CUTOFF: f64 = 1e-12;
const MAX_TEETH: usize = 20_000;

/// Approximate GKP codeword parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GkpParams {
    /// Inverse envelope size.
    pub s1: f64,
    /// Standard deviation of each tooth.
    pub s2: f64,
    /// Tooth spacing along x.
    pub a: f64,
    /// Logical value, 0 or 1.
    pub mu: u8,
}

impl GkpParams {
    pub fn new(s1: f64, s2: f64, a: f64, mu: u8) -> Result<Self> {
        let p = Self { s1, s2, a, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s1 > 0.0 && self.s2 > 0.0 && self.a > 0.0) {
            return Err(SynthError::invalid(format!(
                "GKP parameters must be positive (s1 = {}, s2 = {}, a = {})",
                self.s1, self.s2, self.a
            )));
        }
        if self.mu > 1 {
            return Err(SynthError::invalid(format!(
                "GKP logical value {} not in {{0,1}}",
                self.mu
            )));
        }
        Ok(())
    }

    /// Tooth positions with their envelope weights, plus the normalization
    /// `𝒩₀` of `Σ_k w_k exp(−(x − x_k)²/(2 s₂²))`.
    fn teeth(&self) -> (Vec<(f64, f64)>, f64) {
        let shift = 0.5 * self.mu as f64;
        let weight = |k: i64| {
            let x = (k as f64 + shift) * self.a;
            (x, (-0.5 * self.s1 * self.s1 * x * x).exp())
        };
        let reach = (-2.0 * ENVELOPE_CUTOFF.ln()).sqrt() / self.s1;
        let kmax = ((reach / self.a).ceil() as i64).clamp(1, MAX_TEETH as i64 / 2);
        let mut teeth: Vec<(f64, f64)> = (-kmax - 1..=kmax)
            .map(weight)
            .filter(|&(_, w)| w >= ENVELOPE_CUTOFF)
            .collect();
        if teeth.is_empty() {
            // envelope narrower than the spacing: keep the innermost teeth
            teeth = match self.mu {
                0 => vec![weight(0)],
                _ => vec![weight(-1), weight(0)],
            };
        }
        let s2 = self.s2;
        let mut norm2 = 0.0;
        for &(xk, wk) in &teeth {
            for &(xl, wl) in &teeth {
                norm2 += wk * wl * s2 * PI.sqrt() * (-(xk - xl).powi(2) / (4.0 * s2 * s2)).exp();
            }
        }
        (teeth, norm2.sqrt())
    }
}

/// Evaluates the normalized codeword wavefunction `⟨x|μ̃⟩`.
pub fn gkp_wavefunction(params: &GkpParams, x: f64) -> f64 {
    let (teeth, norm) = params.teeth();
    gkp_eval(&teeth, norm, params.s2, x)
}

fn gkp_eval(teeth: &[(f64, f64)], norm: f64, s2: f64, x: f64) -> f64 {
    teeth
        .iter()
        .map(|&(xk, wk)| wk * (-(x - xk).powi(2) / (2.0 * s2 * s2)).exp())
        .sum::<f64>()
        / norm
}

/// Pure state against which fidelity is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetSpec {
    /// `(|γ⟩ ± |−γ⟩)/𝒩`.
    IdealCat {
        gamma: f64,
        parity: Parity,
    },
    /// Cat of amplitude `alpha` whose wavefunction is rescaled as
    /// `ψ(x/s)/√s`; `s < 1` compresses the x quadrature.
    SqueezedCat {
        alpha: f64,
        s: f64,
        parity: Parity,
    },
    Gkp(GkpParams),
}

impl TargetSpec {
    pub fn ideal_cat(gamma: f64, parity: Parity) -> Self {
        TargetSpec::IdealCat { gamma, parity }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TargetSpec::IdealCat { gamma: amp, parity } | TargetSpec::SqueezedCat { alpha: amp, parity, .. } => {
                if !(amp >= 0.0) || !amp.is_finite() {
                    return Err(SynthError::invalid(format!("cat amplitude {amp} must be >= 0")));
                }
                if parity == Parity::Odd && amp == 0.0 {
                    return Err(SynthError::NullCat);
                }
                if let TargetSpec::SqueezedCat { s, .. } = *self {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(SynthError::invalid(format!("squeezing factor {s} must be > 0")));
                    }
                }
                Ok(())
            }
            TargetSpec::Gkp(p) => p.validate(),
        }
    }

    /// Real position wavefunction of the target.
    pub fn wavefunction(&self) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        self.validate()?;
        Ok(match *self {
            TargetSpec::IdealCat { gamma, parity } => Box::new(move |x| cat_wavefunction(gamma, parity, x)),
            TargetSpec::SqueezedCat { alpha, s, parity } => {
                Box::new(move |x| cat_wavefunction(alpha, parity, x / s) / s.sqrt())
            }
            TargetSpec::Gkp(p) => {
                let (teeth, norm) = p.teeth();
                Box::new(move |x| gkp_eval(&teeth, norm, p.s2, x))
            }
        })
    }

    /// Closed-form `⟨ψ_t|α⟩` for every coherent amplitude.
    pub fn coherent_projector(&self) -> Result<Box<dyn Fn(C64) -> C64 + Send + Sync>> {
        self.validate()?;
        Ok(match *self {
            TargetSpec::IdealCat { gamma, parity } => {
                let norm = cat_normalization(gamma, parity);
                let g = C64::from(gamma);
                Box::new(move |a| (coherent_overlap(a, g) + parity.sign() * coherent_overlap(a, -g)) / norm)
            }
            TargetSpec::SqueezedCat { alpha, s, parity } => {
                let norm = cat_normalization(alpha, parity);
                Box::new(move |a| {
                    (squeezed_lobe_overlap(alpha, s, a) + parity.sign() * squeezed_lobe_overlap(-alpha, s, a)) / norm
                })
            }
            TargetSpec::Gkp(p) => {
                let (teeth, norm) = p.teeth();
                let s2 = p.s2;
                Box::new(move |a| teeth.iter().map(|&(xk, wk)| wk * tooth_overlap(xk, s2, a)).sum::<C64>() / norm)
            }
        })
    }
}

/// `π^{-1/4} exp(−x²/2 + √2γx − γ²)`: position wavefunction of `|γ⟩`, real γ.
fn coherent_wavefunction(gamma: f64, x: f64) -> f64 {
    PI.powf(-0.25) * (-0.5 * x * x + SQRT_2 * gamma * x - gamma * gamma).exp()
}

fn cat_wavefunction(gamma: f64, parity: Parity, x: f64) -> f64 {
    (coherent_wavefunction(gamma, x) + parity.sign() * coherent_wavefunction(-gamma, x))
        / cat_normalization(gamma, parity)
}

/// `√(π/A) exp(B²/(4A) + C)`.
fn gaussian_integral(a: f64, b: C64, c: C64) -> C64 {
    (PI / a).sqrt() * (b * b / (4.0 * a) + c).exp()
}

/// `∫ s^{-1/2} ψ_γ(x/s) ψ_α(x) dx` for real lobe amplitude `γ`.
fn squeezed_lobe_overlap(gamma: f64, s: f64, alpha: C64) -> C64 {
    let a = 0.5 * (1.0 / (s * s) + 1.0);
    let b = C64::from(SQRT_2 * gamma / s) + alpha * SQRT_2;
    let c = C64::from(-gamma * gamma) - 0.5 * alpha * alpha - 0.5 * alpha.norm_sqr();
    gaussian_integral(a, b, c) / (s.sqrt() * PI.sqrt())
}

/// `∫ exp(−(x − x_k)²/(2s₂²)) ψ_α(x) dx`.
fn tooth_overlap(xk: f64, s2: f64, alpha: C64) -> C64 {
    let a = 0.5 * (1.0 / (s2 * s2) + 1.0);
    let b = C64::from(xk / (s2 * s2)) + alpha * SQRT_2;
    let c = C64::from(-xk * xk / (2.0 * s2 * s2)) - 0.5 * alpha * alpha - 0.5 * alpha.norm_sqr();
    gaussian_integral(a, b, c) * PI.powf(-0.25)
}

/// `⟨n|ψ_t⟩` for `n < dim` of the exact (untruncated, normalized) target.
///
/// Cats use the closed form. Other targets are projected on the
/// Hermite functions with the trapezoidal rule on a symmetric grid, which
/// converges geometrically for these Gaussian-sum integrands.
pub fn target_amplitudes(spec: &TargetSpec, dim: usize) -> Result<DVector<C64>> {
    spec.validate()?;
    let closed_cat = match *spec {
        TargetSpec::IdealCat { gamma, parity } => Some((gamma, parity)),
        TargetSpec::SqueezedCat { alpha, s: 1.0, parity } => Some((alpha, parity)),
        _ => None,
    };
    if let Some((gamma, parity)) = closed_cat {
        let norm = cat_normalization(gamma, parity);
        let mut amps = coherent_amplitudes(C64::from(gamma), dim);
        for (n, a) in amps.iter_mut().enumerate() {
            *a = if Parity::of(n) == parity {
                *a * (2.0 / norm)
            } else {
                C64::from(0.0)
            };
        }
        return Ok(amps);
    }
    let width = match *spec {
        TargetSpec::SqueezedCat { s, .. } => s,
        TargetSpec::Gkp(p) => p.s2,
        TargetSpec::IdealCat { .. } => 1.0,
    };
    let turning = (2.0 * dim as f64 + 1.0).sqrt();
    let h = width.min(2.0 * PI / turning) / 24.0;
    let reach = turning + 10.0;
    let half = (reach / h).ceil() as i64;
    let psi = spec.wavefunction()?;
    let mut amps = vec![0.0; dim];
    for j in -half..=half {
        let x = j as f64 * h;
        let t = psi(x);
        if t == 0.0 {
            continue;
        }
        for (n, hn) in quad_wavefunctions(dim, x).into_iter().enumerate() {
            amps[n] += h * t * hn;
        }
    }
    Ok(DVector::from_iterator(dim, amps.into_iter().map(C64::from)))
}

/// Renormalized Fock truncation of the target.
pub fn target_fock(spec: &TargetSpec, dim: usize) -> Result<FockVector> {
    let amps = target_amplitudes(spec, dim)?;
    let lost = (1.0 - amps.norm_squared()).max(0.0);
    if lost > TRUNCATION_LIMIT {
        let probe = (2 * dim).max(dim + 200);
        let wide = target_amplitudes(spec, probe)?;
        let mut acc = 0.0;
        let mut required = probe + 1;
        for (n, a) in wide.iter().enumerate() {
            acc += a.norm_sqr();
            if 1.0 - acc <= TRUNCATION_LIMIT {
                required = n + 1;
                break;
            }
        }
        return Err(SynthError::Truncation {
            lost,
            limit: TRUNCATION_LIMIT,
            dim,
            required,
        });
    }
    FockVector::new(amps, lost)
}

/// Fidelity `⟨ψ_t|ρ|ψ_t⟩` of a coherent-rank state with a pure target.
pub fn target_overlap_cr(spec: &TargetSpec, state: &SingleModeRank) -> Result<f64> {
    let proj = spec.coherent_projector()?;
    Ok(state.pure_expectation(proj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{cat_fock, FockDensity};
    use nalgebra::DMatrix;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn trapezoid(f: impl Fn(f64) -> f64, reach: f64, h: f64) -> f64 {
        let n = (reach / h).ceil() as i64;
        (-n..=n).map(|j| f(j as f64 * h)).sum::<f64>() * h
    }

    #[test]
    fn gkp_zero_is_symmetric_and_normalized() {
        let p = GkpParams::new(0.3, 0.3, 2.0 * PI.sqrt(), 0).unwrap();
        for &x in &[0.1, 0.9, 2.4, 5.3] {
            assert!(close(gkp_wavefunction(&p, x), gkp_wavefunction(&p, -x), 1e-12));
        }
        let norm = trapezoid(|x| gkp_wavefunction(&p, x).powi(2), 40.0, 0.01);
        assert!(close(norm, 1.0, 1e-8));
    }

    #[test]
    fn gkp_one_peaks_at_half_spacing() {
        let a = 2.0 * PI.sqrt();
        let p = GkpParams::new(0.4, 0.25, a, 1).unwrap();
        let at_peak = gkp_wavefunction(&p, a / 2.0);
        assert!(at_peak > gkp_wavefunction(&p, a / 2.0 + 0.1));
        assert!(at_peak > gkp_wavefunction(&p, a / 2.0 - 0.1));
        assert!(gkp_wavefunction(&p, 0.0) < 1e-6 * at_peak);
        assert!(close(gkp_wavefunction(&p, -a / 2.0), at_peak, 1e-12));
    }

    #[test]
    fn gkp_single_tooth_limit_is_gaussian() {
        let s2 = 0.6;
        let p = GkpParams::new(50.0, s2, 3.0, 0).unwrap();
        let gauss = |x: f64| (-(x * x) / (2.0 * s2 * s2)).exp() / (s2 * PI.sqrt()).sqrt();
        for &x in &[0.0, 0.4, 1.1] {
            assert!(close(gkp_wavefunction(&p, x), gauss(x), 1e-12));
        }
    }

    #[test]
    fn gkp_codeword_overlap_follows_half_spacing_leakage() {
        // nearest teeth of the two codewords sit a/2 apart
        let a = 2.0 * PI.sqrt();
        for &s2 in &[0.3, 0.25, 0.2] {
            let zero = GkpParams::new(0.25, s2, a, 0).unwrap();
            let one = GkpParams { mu: 1, ..zero };
            let ov = trapezoid(|x| gkp_wavefunction(&zero, x) * gkp_wavefunction(&one, x), 40.0, 0.005);
            let leak = (-a * a / (16.0 * s2 * s2)).exp();
            assert!(
                ov > 0.0 && ov < 4.0 * leak && ov > 0.25 * leak,
                "s2 = {s2}: {ov} vs {leak}"
            );
        }
        let zero = GkpParams::new(0.25, 0.2, a, 0).unwrap();
        let one = GkpParams { mu: 1, ..zero };
        let ov = trapezoid(|x| gkp_wavefunction(&zero, x) * gkp_wavefunction(&one, x), 40.0, 0.005);
        assert!(ov < 1e-6);
    }

    #[test]
    fn unsqueezed_target_equals_cat() {
        let spec = TargetSpec::SqueezedCat {
            alpha: 1.4,
            s: 1.0,
            parity: Parity::Even,
        };
        let t = target_fock(&spec, 30).unwrap();
        let c = cat_fock(1.4, Parity::Even, 30).unwrap();
        assert_eq!(t.amps(), c.amps());
        let vac = target_fock(&TargetSpec::ideal_cat(0.0, Parity::Even), 5).unwrap();
        assert_eq!(vac.amps()[0], C64::from(1.0));
    }

    #[test]
    fn gkp_target_has_even_parity() {
        let spec = TargetSpec::Gkp(GkpParams::new(0.3, 0.3, 2.0 * PI.sqrt(), 0).unwrap());
        let amps = target_amplitudes(&spec, 80).unwrap();
        for n in (1..80).step_by(2) {
            assert!(amps[n].norm() < 1e-10);
        }
        assert!(amps.norm_squared() > 0.5);
    }

    #[test]
    fn projection_matches_closed_form_for_squeezed_coherent_lobe() {
        // numerical projection of an s≠1 cat vs the closed-form ket overlaps
        let spec = TargetSpec::SqueezedCat {
            alpha: 1.2,
            s: 0.7,
            parity: Parity::Odd,
        };
        let d = 40;
        let amps = target_amplitudes(&spec, d).unwrap();
        assert!(close(amps.norm_squared(), 1.0, 1e-9));
        let proj = spec.coherent_projector().unwrap();
        for beta in [C64::new(0.3, -0.2), C64::new(-1.1, 0.5)] {
            let via_fock: C64 = amps
                .iter()
                .zip(coherent_amplitudes(beta, d).iter())
                .map(|(t, b)| t.conj() * b)
                .sum();
            assert!((via_fock - proj(beta)).norm() < 1e-10);
        }
    }

    #[test]
    fn overlap_with_itself_and_vacuum() {
        let cat = SingleModeRank::cat(2.3, Parity::Even).unwrap();
        let f = target_overlap_cr(&TargetSpec::ideal_cat(2.3, Parity::Even), &cat).unwrap();
        assert!(close(f, 1.0, 1e-12));
        let vac = SingleModeRank::vacuum();
        let f = target_overlap_cr(&TargetSpec::ideal_cat(0.0, Parity::Even), &vac).unwrap();
        assert!(close(f, 1.0, 1e-15));
        // |⟨cat(3)|0⟩|² = 2e^{-9}/(1 + e^{-18})
        let f = target_overlap_cr(&TargetSpec::ideal_cat(3.0, Parity::Even), &vac).unwrap();
        assert!(close(f, 2.468_196_044_143_015e-4, 1e-16));
    }

    #[test]
    fn cr_overlap_matches_fock_for_random_dyads() {
        let kets = vec![
            [C64::new(0.4, 0.1)],
            [C64::new(-1.0, 0.3)],
            [C64::new(0.2, -0.9)],
            [C64::new(1.3, 0.0)],
        ];
        let raw = DMatrix::from_fn(4, 4, |i, j| {
            C64::new(0.1 * (i + j) as f64 + 0.2, 0.05 * (i as f64 - j as f64))
        });
        let psd = &raw * raw.adjoint();
        let state = crate::coherent::CoherentRank::new(kets, psd)
            .unwrap()
            .normalized()
            .unwrap();
        let fock = state.to_fock(60).unwrap();
        for spec in [
            TargetSpec::SqueezedCat {
                alpha: 1.1,
                s: 0.66,
                parity: Parity::Even,
            },
            TargetSpec::SqueezedCat {
                alpha: 0.8,
                s: 1.3,
                parity: Parity::Odd,
            },
            TargetSpec::ideal_cat(1.5, Parity::Odd),
            TargetSpec::Gkp(GkpParams::new(0.5, 0.6, 2.2, 1).unwrap()),
        ] {
            let fr = target_overlap_cr(&spec, &state).unwrap();
            let ff = fock.expectation_in(&target_amplitudes(&spec, 60).unwrap());
            assert!(close(fr, ff, 1e-7), "{spec:?}: {fr} vs {ff}");
            assert!((0.0..=1.0 + 1e-9).contains(&fr));
        }
        let _ = FockDensity::vacuum(2);
    }
}
