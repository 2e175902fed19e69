//! Fidelity searches, Wigner grids and the scan drivers built on them.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::coherent::SingleModeRank;
use crate::fock::{quad_wavefunctions, FockDensity};
use crate::optimize::{argmax, golden_max, grid, refine_around};
use crate::protocol::{iterative_oracle, synthesize, InputKind, ModeState, ScenarioConfig};
use crate::states::{GkpParams, TargetSpec};
use crate::{HomodyneWindow, Parity, Result, SynthError, C64};

/// Grid step of the cat-amplitude search.
pub const GAMMA_STEP: f64 = 0.05;
/// Golden-section tolerance of the cat-amplitude search.
pub const GAMMA_TOL: f64 = 1e-4;
/// Smallest amplitude probed for odd cats, whose `γ → 0` limit is `|1⟩`.
const ODD_GAMMA_MIN: f64 = 1e-3;
/// Refinement steps must beat the incumbent by more than rounding noise.
const REFINE_GAIN: f64 = 1e-14;

/// `⟨ψ_t|ρ|ψ_t⟩`.
pub fn fidelity(state: &ModeState, spec: &TargetSpec) -> Result<f64> {
    state.fidelity(spec)
}

/// Evaluates many target fidelities against one state. Fock states are
/// projected through a cached table of Hermite functions on a fixed grid.
struct Scorer<'a> {
    state: &'a ModeState,
    table: Option<ProjectionTable>,
}

struct ProjectionTable {
    xs: Vec<f64>,
    h: f64,
    hermite: DMatrix<f64>,
}

impl<'a> Scorer<'a> {
    /// `min_width` is the narrowest wavefunction feature to be resolved.
    fn new(state: &'a ModeState, min_width: f64) -> Self {
        let table = match state {
            ModeState::Fock(rho) => {
                let d = rho.dim();
                let turning = (2.0 * d as f64 + 1.0).sqrt();
                let h = min_width.min(2.0 * PI / turning) / 24.0;
                let half = ((turning + 10.0) / h).ceil() as i64;
                let xs: Vec<f64> = (-half..=half).map(|j| j as f64 * h).collect();
                let mut hermite = DMatrix::zeros(xs.len(), d);
                for (j, &x) in xs.iter().enumerate() {
                    for (n, v) in quad_wavefunctions(d, x).into_iter().enumerate() {
                        hermite[(j, n)] = v;
                    }
                }
                Some(ProjectionTable { xs, h, hermite })
            }
            ModeState::Coherent(_) => None,
        };
        Self { state, table }
    }

    fn score(&self, spec: &TargetSpec) -> f64 {
        let value = match (self.state, &self.table, spec) {
            (
                ModeState::Fock(rho),
                Some(t),
                TargetSpec::SqueezedCat { s, .. } | TargetSpec::Gkp(GkpParams { s2: s, .. }),
            ) if *s != 1.0 || matches!(spec, TargetSpec::Gkp(_)) => project(rho, t, spec),
            _ => self.state.fidelity(spec),
        };
        value.unwrap_or(f64::NAN)
    }
}

fn project(rho: &FockDensity, table: &ProjectionTable, spec: &TargetSpec) -> Result<f64> {
    let psi = spec.wavefunction()?;
    let values = DVector::from_iterator(table.xs.len(), table.xs.iter().map(|&x| psi(x) * table.h));
    let amps = table.hermite.tr_mul(&values).map(C64::from);
    Ok(rho.expectation_in(&amps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatFit {
    pub gamma: f64,
    pub parity: Parity,
    pub fidelity: f64,
}

fn gamma_ceiling(state: &ModeState) -> f64 {
    (state.mean_photon_number().max(0.0).sqrt() + 3.0).max(1.0)
}

/// Nearest cat of the given parity: grid over `γ` with step
/// [`GAMMA_STEP`], then golden refinement to [`GAMMA_TOL`].
pub fn nearest_cat_with_parity(state: &ModeState, parity: Parity) -> Result<CatFit> {
    let lo = match parity {
        Parity::Even => 0.0,
        Parity::Odd => ODD_GAMMA_MIN,
    };
    let hi = gamma_ceiling(state);
    let scorer = Scorer::new(state, 1.0);
    let f = |g: f64| scorer.score(&TargetSpec::ideal_cat(g.max(lo), parity));
    let xs = grid(lo, hi, GAMMA_STEP);
    let vals: Vec<f64> = xs.iter().map(|&g| f(g)).collect();
    if vals.iter().all(|v| v.is_nan()) {
        return Err(SynthError::Consistency(
            "cat fidelity undefined on the whole grid".into(),
        ));
    }
    let (gamma, fidelity) = refine_around(f, &xs, &vals, lo, hi, GAMMA_STEP, GAMMA_TOL);
    Ok(CatFit {
        gamma: gamma.max(lo),
        parity,
        fidelity,
    })
}

/// Nearest cat over both parities; ties go to even parity.
pub fn nearest_cat(state: &ModeState) -> Result<CatFit> {
    let even = nearest_cat_with_parity(state, Parity::Even)?;
    let odd = nearest_cat_with_parity(state, Parity::Odd)?;
    Ok(if odd.fidelity > even.fidelity { odd } else { even })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezedCatFit {
    pub alpha: f64,
    pub s: f64,
    pub parity: Parity,
    pub fidelity: f64,
}

const SQ_ALPHA: (f64, f64, f64) = (0.0, 4.0, 0.05);
const SQ_S: (f64, f64, f64) = (0.3, 1.5, 0.02);

/// Nearest x-squeezed cat: grid over `α ∈ [0, 4]` (step 0.05) and
/// `s ∈ [0.3, 1.5]` (step 0.02) for both parities, then alternating golden
/// refinement of `α` and `s`. Ties go to smaller `α`, then smaller `s`,
/// then even parity.
pub fn nearest_squeezed_cat(state: &ModeState) -> Result<SqueezedCatFit> {
    let scorer = Scorer::new(state, SQ_S.0);
    let alphas = grid(SQ_ALPHA.0, SQ_ALPHA.1, SQ_ALPHA.2);
    let ss = grid(SQ_S.0, SQ_S.1, SQ_S.2);
    let mut best: Option<SqueezedCatFit> = None;
    for parity in [Parity::Even, Parity::Odd] {
        let amin = if parity == Parity::Odd { ODD_GAMMA_MIN } else { 0.0 };
        let cells: Vec<(f64, f64)> = alphas
            .iter()
            .flat_map(|&a| ss.iter().map(move |&s| (a.max(amin), s)))
            .collect();
        let vals: Vec<f64> = cells
            .par_iter()
            .map(|&(alpha, s)| scorer.score(&TargetSpec::SqueezedCat { alpha, s, parity }))
            .collect();
        let Some(k) = argmax(&vals) else { continue };
        let (mut alpha, mut s) = cells[k];
        let mut f = vals[k];
        for _ in 0..4 {
            let (a2, fa) = golden_max(
                |a| scorer.score(&TargetSpec::SqueezedCat { alpha: a, s, parity }),
                (alpha - SQ_ALPHA.2).max(amin),
                alpha + SQ_ALPHA.2,
                1e-5,
            );
            if fa > f + REFINE_GAIN {
                alpha = a2;
                f = fa;
            }
            let (s2, fs) = golden_max(
                |t| scorer.score(&TargetSpec::SqueezedCat { alpha, s: t, parity }),
                (s - SQ_S.2).max(1e-3),
                s + SQ_S.2,
                1e-5,
            );
            if fs > f + REFINE_GAIN {
                s = s2;
                f = fs;
            }
        }
        let fit = SqueezedCatFit {
            alpha,
            s,
            parity,
            fidelity: f,
        };
        if best.is_none_or(|b| fit.fidelity > b.fidelity) {
            best = Some(fit);
        }
    }
    best.ok_or_else(|| SynthError::Consistency("squeezed-cat fidelity undefined on the whole grid".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GkpFit {
    pub params: GkpParams,
    pub fidelity: f64,
}

const GKP_S1: (f64, f64, f64) = (0.1, 1.2, 0.1);
const GKP_S2: (f64, f64, f64) = (0.1, 1.6, 0.1);
const GKP_A: (f64, f64, f64) = (1.0, 10.0, 0.25);

/// Nearest approximate GKP codeword over both logical values: coarse grid
/// over `(s1, s2, a)` augmented with the spacings in `a_seeds`, then
/// coordinate-wise golden refinement.
pub fn nearest_gkp(state: &ModeState, a_seeds: &[f64]) -> Result<GkpFit> {
    let scorer = Scorer::new(state, GKP_S2.0);
    let s1s = grid(GKP_S1.0, GKP_S1.1, GKP_S1.2);
    let s2s = grid(GKP_S2.0, GKP_S2.1, GKP_S2.2);
    let mut as_ = grid(GKP_A.0, GKP_A.1, GKP_A.2);
    as_.extend(a_seeds.iter().copied().filter(|a| *a > 0.0));
    let score = |s1: f64, s2: f64, a: f64, mu: u8| {
        if s1 <= 0.0 || s2 <= 0.0 || a <= 0.0 {
            return f64::NAN;
        }
        scorer.score(&TargetSpec::Gkp(GkpParams { s1, s2, a, mu }))
    };
    let mut cells = Vec::with_capacity(s1s.len() * s2s.len() * as_.len());
    for &s1 in &s1s {
        for &s2 in &s2s {
            cells.extend(as_.iter().map(|&a| (s1, s2, a)));
        }
    }
    let mut best: Option<GkpFit> = None;
    for mu in [0u8, 1] {
        let vals: Vec<f64> = cells.par_iter().map(|&(s1, s2, a)| score(s1, s2, a, mu)).collect();
        let Some(k) = argmax(&vals) else { continue };
        let (mut s1, mut s2, mut a) = cells[k];
        let mut f = vals[k];
        for _ in 0..4 {
            let (x, fx) = golden_max(|x| score(x, s2, a, mu), (s1 - GKP_S1.2).max(1e-3), s1 + GKP_S1.2, 1e-4);
            if fx > f + REFINE_GAIN {
                s1 = x;
                f = fx;
            }
            let (x, fx) = golden_max(|x| score(s1, x, a, mu), (s2 - GKP_S2.2).max(1e-3), s2 + GKP_S2.2, 1e-4);
            if fx > f + REFINE_GAIN {
                s2 = x;
                f = fx;
            }
            let (x, fx) = golden_max(|x| score(s1, s2, x, mu), (a - GKP_A.2).max(1e-2), a + GKP_A.2, 1e-4);
            if fx > f + REFINE_GAIN {
                a = x;
                f = fx;
            }
        }
        let fit = GkpFit {
            params: GkpParams { s1, s2, a, mu },
            fidelity: f,
        };
        if best.is_none_or(|b| fit.fidelity > b.fidelity) {
            best = Some(fit);
        }
    }
    best.ok_or_else(|| SynthError::Consistency("GKP fidelity undefined on the whole grid".into()))
}

/// Wigner function sampled on a rectangular grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid {
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    /// Row-major: `values[i * ps.len() + j] = W(xs[i], ps[j])`.
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ps.len() + j]
    }

    /// Trapezoidal `∫∫ W dx dp`.
    pub fn integral(&self) -> f64 {
        let wx = trapezoid_weights(&self.xs);
        let wp = trapezoid_weights(&self.ps);
        let mut acc = 0.0;
        for (i, a) in wx.iter().enumerate() {
            for (j, b) in wp.iter().enumerate() {
                acc += a * b * self.at(i, j);
            }
        }
        acc
    }

    /// Number of sign changes of `W(x_i, ·)` along `p`, ignoring values
    /// with modulus below `floor`.
    pub fn sign_changes_along_p(&self, i: usize, floor: f64) -> usize {
        let mut last = 0.0_f64;
        let mut changes = 0;
        for j in 0..self.ps.len() {
            let v = self.at(i, j);
            if v.abs() < floor {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                changes += 1;
            }
            last = v;
        }
        changes
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn trapezoid_weights(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|k| {
            let left = if k > 0 { xs[k] - xs[k - 1] } else { 0.0 };
            let right = if k + 1 < n { xs[k + 1] - xs[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

fn check_increasing(v: &[f64], name: &str) -> Result<()> {
    if v.is_empty() || v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(SynthError::invalid(format!(
            "{name} grid must be non-empty and strictly increasing"
        )));
    }
    Ok(())
}

/// Evaluates the Wigner function on `xs × ps`, rows in parallel.
pub fn wigner_grid(state: &ModeState, xs: &[f64], ps: &[f64]) -> Result<WignerGrid> {
    check_increasing(xs, "x")?;
    check_increasing(ps, "p")?;
    let values: Vec<f64> = xs
        .par_iter()
        .flat_map_iter(|&x| ps.iter().map(move |&p| state.wigner(x, p)))
        .collect();
    Ok(WignerGrid {
        xs: xs.to_vec(),
        ps: ps.to_vec(),
        values,
    })
}

/// Symmetric axis of `points` nodes covering `±(√2 γ + 4)`.
pub fn default_wigner_axis(gamma: f64, points: usize) -> Vec<f64> {
    let half = std::f64::consts::SQRT_2 * gamma.max(0.0) + 4.0;
    let n = points.max(2);
    (0..n).map(|k| -half + 2.0 * half * k as f64 / (n - 1) as f64).collect()
}

/// Fidelity surface over reflectivity and cat amplitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub r_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    /// `fidelity[i][j]` at `(r_grid[i], gamma_grid[j])`, best of both
    /// target parities.
    pub fidelity: Vec<Vec<f64>>,
    /// Target parity achieving each entry.
    pub parity: Vec<Vec<Parity>>,
    pub p_success: Vec<f64>,
    pub r_star: f64,
    pub gamma_star: f64,
    pub f_star: f64,
    pub parity_star: Parity,
    pub p_star: f64,
}

/// Fidelity with ideal cats over an `r × γ` grid; each `r` row runs in
/// parallel and the argmax is taken in index order (first wins).
///
/// For cat inputs the argmax only considers amplified cells (see
/// [`is_amplified`]); near `r → 0` and `r → 1` one input cat passes through
/// untouched and would otherwise win with `γ = α`. The full surface is
/// still reported.
pub fn scan_reflectivity(template: &ScenarioConfig, r_grid: &[f64], gamma_grid: &[f64]) -> Result<ScanResult> {
    check_increasing(r_grid, "r")?;
    check_increasing(gamma_grid, "gamma")?;
    type Row = (Vec<f64>, Vec<Parity>, f64);
    let rows: Vec<Result<Row>> = r_grid
        .par_iter()
        .map(|&r| {
            let (state, p) = synthesize(&template.clone().with_r(r))?;
            let scorer = Scorer::new(&state, 1.0);
            let mut f = Vec::with_capacity(gamma_grid.len());
            let mut par = Vec::with_capacity(gamma_grid.len());
            for &g in gamma_grid {
                let even = scorer.score(&TargetSpec::ideal_cat(g, Parity::Even));
                let odd = if g > 0.0 {
                    scorer.score(&TargetSpec::ideal_cat(g, Parity::Odd))
                } else {
                    f64::NAN
                };
                if odd > even {
                    f.push(odd);
                    par.push(Parity::Odd);
                } else {
                    f.push(even);
                    par.push(Parity::Even);
                }
            }
            Ok((f, par, p))
        })
        .collect();
    let mut fidelity = Vec::new();
    let mut parity = Vec::new();
    let mut p_success = Vec::new();
    for row in rows {
        let (f, par, p) = row?;
        fidelity.push(f);
        parity.push(par);
        p_success.push(p);
    }
    let cats = template.input != InputKind::SinglePhoton;
    let flat: Vec<f64> = fidelity
        .iter()
        .flat_map(|row| {
            row.iter().zip(gamma_grid).map(|(&f, &g)| {
                if cats && !is_amplified(g, template.n_total, template.alpha) {
                    f64::NAN
                } else {
                    f
                }
            })
        })
        .collect();
    let k = argmax(&flat).ok_or_else(|| SynthError::Consistency("empty fidelity scan".into()))?;
    let (i, j) = (k / gamma_grid.len(), k % gamma_grid.len());
    Ok(ScanResult {
        r_grid: r_grid.to_vec(),
        gamma_grid: gamma_grid.to_vec(),
        r_star: r_grid[i],
        gamma_star: gamma_grid[j],
        f_star: fidelity[i][j],
        parity_star: parity[i][j],
        p_star: p_success[i],
        fidelity,
        parity,
        p_success,
    })
}

/// Best reflectivity for a state-quality objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReflectivityOptimum {
    pub r: f64,
    pub objective: f64,
    pub p_success: f64,
}

/// Grid step of the reflectivity search before golden refinement.
pub const R_STEP: f64 = 0.05;
/// Golden tolerance of the reflectivity search.
pub const R_TOL: f64 = 1e-3;

/// Maximizes `objective(ρ_out)` over `r ∈ [r_lo, r_hi]`: grid with step
/// [`R_STEP`] in parallel, then golden refinement to [`R_TOL`]. Heralds
/// that underflow score `−∞`. Returns `None` when no grid point scores a
/// finite value.
pub fn optimize_reflectivity<F>(
    template: &ScenarioConfig,
    r_lo: f64,
    r_hi: f64,
    objective: F,
) -> Result<Option<ReflectivityOptimum>>
where
    F: Fn(&ModeState) -> Result<f64> + Sync,
{
    if !(0.0 < r_lo && r_lo <= r_hi && r_hi < 1.0) {
        return Err(SynthError::invalid(format!(
            "reflectivity range [{r_lo}, {r_hi}] not inside (0, 1)"
        )));
    }
    let eval = |r: f64| -> Result<(f64, f64)> {
        match synthesize(&template.clone().with_r(r)) {
            Ok((state, p)) => Ok((objective(&state)?, p)),
            Err(SynthError::HeraldUnderflow { .. }) => Ok((f64::NEG_INFINITY, 0.0)),
            Err(e) => Err(e),
        }
    };
    let mut rs = grid(r_lo, r_hi, R_STEP);
    if r_hi - rs[rs.len() - 1] > 1e-9 {
        rs.push(r_hi);
    }
    let vals: Vec<f64> = rs.par_iter().map(|&r| eval(r).map(|v| v.0)).collect::<Result<_>>()?;
    if !vals.iter().any(|v| v.is_finite()) {
        return Ok(None);
    }
    let (r, _) = refine_around(
        |r| eval(r).map_or(f64::NAN, |v| v.0),
        &rs,
        &vals,
        r_lo,
        r_hi,
        R_STEP,
        R_TOL,
    );
    let (objective, p_success) = eval(r)?;
    Ok(Some(ReflectivityOptimum {
        r,
        objective,
        p_success,
    }))
}

/// Whether a cat amplitude belongs to the amplified branch of an
/// `n_total`-input breeding run with input amplitude `alpha`: `γ²` must lie
/// at least halfway between a single input's `α²` and the full `Nα²`. The
/// other branch is the trivial pass-through of one input near `r → 0` or
/// `r → 1`.
pub fn is_amplified(gamma: f64, n_total: usize, alpha: f64) -> bool {
    gamma * gamma >= 0.5 * (n_total as f64 + 1.0) * alpha * alpha
}

/// Reflectivity search range for cat breeding.
pub const CAT_R_RANGE: (f64, f64) = (0.05, 0.95);
/// Lower end of the reflectivity search for single-photon feeds.
pub const PHOTON_R_MIN: f64 = 0.05;

/// Reflectivity search range for `n_total` single-photon inputs. The upper
/// end is the balanced point `1/√N`; above it the seed photon outweighs the
/// merged feeds and the output falls back towards a small odd cat.
pub fn photon_r_range(n_total: usize) -> (f64, f64) {
    (PHOTON_R_MIN, 1.0 / (n_total as f64).sqrt())
}

/// Highest nearest-cat fidelity over `r` on the amplified branch, with its
/// fit. `None` when no reflectivity amplifies.
pub fn best_cat_over_r(template: &ScenarioConfig) -> Result<Option<(ReflectivityOptimum, CatFit)>> {
    let (n, alpha) = (template.n_total, template.alpha);
    let objective = |s: &ModeState| {
        let fit = nearest_cat(s)?;
        Ok(if is_amplified(fit.gamma, n, alpha) {
            fit.fidelity
        } else {
            f64::NEG_INFINITY
        })
    };
    let Some(opt) = optimize_reflectivity(template, CAT_R_RANGE.0, CAT_R_RANGE.1, objective)? else {
        return Ok(None);
    };
    let (state, _) = synthesize(&template.clone().with_r(opt.r))?;
    Ok(Some((opt, nearest_cat(&state)?)))
}

/// Highest nearest-squeezed-cat fidelity over `r ∈` [`photon_r_range`].
pub fn best_squeezed_cat_over_r(template: &ScenarioConfig) -> Result<(ReflectivityOptimum, SqueezedCatFit)> {
    let (lo, hi) = photon_r_range(template.n_total);
    let opt = optimize_reflectivity(template, lo, hi, |s| nearest_squeezed_cat(s).map(|f| f.fidelity))?
        .ok_or(SynthError::HeraldUnderflow { p: 0.0 })?;
    let (state, _) = synthesize(&template.clone().with_r(opt.r))?;
    Ok((opt, nearest_squeezed_cat(&state)?))
}

/// Smallest input amplitude at which the amplified-branch fidelity of
/// [`best_cat_over_r`] reaches `target`: first grid point of `alphas`
/// reaching it, then bisection of the bracketing cell to `tol`.
pub fn threshold_alpha(template: &ScenarioConfig, alphas: &[f64], target: f64, tol: f64) -> Result<Option<f64>> {
    check_increasing(alphas, "alpha")?;
    let best = |alpha: f64| -> Result<f64> {
        let cfg = ScenarioConfig {
            alpha,
            ..template.clone()
        };
        Ok(best_cat_over_r(&cfg)?.map_or(f64::NEG_INFINITY, |(_, fit)| fit.fidelity))
    };
    let curve: Vec<f64> = alphas.par_iter().map(|&a| best(a)).collect::<Result<_>>()?;
    let Some(hit) = curve.iter().position(|&f| f >= target) else {
        return Ok(None);
    };
    if hit == 0 {
        return Ok(Some(alphas[0]));
    }
    let (mut lo, mut hi) = (alphas[hit - 1], alphas[hit]);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if best(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// One row of the success-probability comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessRow {
    /// Window width in σ₀ units, `None` for the infinite window.
    pub dx: Option<f64>,
    pub p_multiplexed: f64,
    pub p_iterative: f64,
}

/// Herald probability of the multiplexed protocol against the fully
/// heralded cascade with the same window at every step.
pub fn success_compare(template: &ScenarioConfig, dx_grid: &[Option<f64>]) -> Result<Vec<SuccessRow>> {
    dx_grid
        .par_iter()
        .map(|&dx| {
            let window = match dx {
                Some(dx) => template.window.with_dx(dx)?,
                None => HomodyneWindow::infinite(template.window.theta()),
            };
            let cfg = template.clone().with_window(window);
            let (_, p_multiplexed) = synthesize(&cfg)?;
            let windows = vec![window; cfg.n_total - 1];
            let (_, p_iterative) = iterative_oracle(&cfg, &windows)?;
            Ok(SuccessRow {
                dx,
                p_multiplexed,
                p_iterative,
            })
        })
        .collect()
}

/// Convenience for fitting coherent-rank states without a [`ModeState`].
pub fn nearest_cat_cr(state: &SingleModeRank) -> Result<CatFit> {
    nearest_cat(&ModeState::Coherent(state.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::CoherentRank;
    use crate::fock::{cat_fock, FockVector};
    use crate::states::target_amplitudes;

    fn cr(state: SingleModeRank) -> ModeState {
        ModeState::Coherent(state)
    }

    #[test]
    fn vacuum_against_large_cat() {
        let f = fidelity(&cr(CoherentRank::vacuum()), &TargetSpec::ideal_cat(3.0, Parity::Even)).unwrap();
        assert!((f - 2.468_196_044_143_015e-4).abs() < 1e-17);
        let d = 20;
        let vac = ModeState::Fock(FockDensity::vacuum(d).unwrap());
        let ff = fidelity(&vac, &TargetSpec::ideal_cat(3.0, Parity::Even)).unwrap();
        assert!((ff - f).abs() < 1e-15);
    }

    #[test]
    fn nearest_cat_recovers_pure_cat_and_vacuum() {
        let fit = nearest_cat(&cr(CoherentRank::cat(2.7, Parity::Even).unwrap())).unwrap();
        assert!((fit.gamma - 2.7).abs() < 1e-3 && fit.fidelity > 1.0 - 1e-8);
        assert_eq!(fit.parity, Parity::Even);
        let fit = nearest_cat(&cr(CoherentRank::vacuum())).unwrap();
        assert_eq!(fit.gamma, 0.0);
        assert!((fit.fidelity - 1.0).abs() < 1e-15);
        let odd = ModeState::Fock(FockDensity::from_pure(&cat_fock(1.3, Parity::Odd, 30).unwrap()));
        let fit = nearest_cat(&odd).unwrap();
        assert_eq!(fit.parity, Parity::Odd);
        assert!((fit.gamma - 1.3).abs() < 1e-3);
    }

    #[test]
    fn nearest_squeezed_cat_self_recovery() {
        let spec = TargetSpec::SqueezedCat {
            alpha: 1.63,
            s: 0.66,
            parity: Parity::Even,
        };
        let amps = target_amplitudes(&spec, 40).unwrap();
        let rho = ModeState::Fock(FockDensity::from_pure(&FockVector::new(amps, 0.0).unwrap()));
        let fit = nearest_squeezed_cat(&rho).unwrap();
        assert!(
            (fit.alpha - 1.63).abs() < 0.05 && (fit.s - 0.66).abs() < 0.02,
            "{fit:?}"
        );
        assert!(fit.fidelity > 1.0 - 1e-6);
        let fit = nearest_squeezed_cat(&cr(CoherentRank::vacuum())).unwrap();
        assert_eq!(fit.alpha, 0.0);
        assert!((fit.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wigner_grid_of_vacuum() {
        let axis = default_wigner_axis(0.0, 81);
        let g = wigner_grid(&cr(CoherentRank::vacuum()), &axis, &axis).unwrap();
        assert!((g.at(40, 40) - 1.0 / PI).abs() < 1e-15);
        assert!((g.max() - 1.0 / PI).abs() < 1e-15);
        assert!((g.integral() - 1.0).abs() < 1e-2);
        assert!(wigner_grid(&cr(CoherentRank::vacuum()), &[0.0, 0.0], &axis).is_err());
    }

    #[test]
    fn wigner_origin_sign_follows_cat_parity() {
        let even = cr(CoherentRank::cat(3.0, Parity::Even).unwrap());
        let odd = cr(CoherentRank::cat(3.0, Parity::Odd).unwrap());
        assert!(even.wigner(0.0, 0.0) > 0.0);
        assert!(odd.wigner(0.0, 0.0) < 0.0);
    }

    #[test]
    fn success_compare_limits() {
        let w = HomodyneWindow::x_centered(0.2).unwrap();
        let two = ScenarioConfig::new(InputKind::EvenCat, 1.5, 2, 0.6, w);
        let rows = success_compare(&two, &[None, Some(0.2)]).unwrap();
        assert!((rows[0].p_multiplexed - 1.0).abs() < 1e-12 && (rows[0].p_iterative - 1.0).abs() < 1e-12);
        assert_eq!(rows[1].p_multiplexed, rows[1].p_iterative);
    }
}
