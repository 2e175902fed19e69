//! Truncated Fock-basis engine.
//!
//! Two-mode operators are stored with mode 0 as the major index: the basis
//! vector `|i, j⟩` sits at position `i * dim + j`.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

use crate::special::{composite_gauss_legendre, ln_factorial};
use crate::{HomodyneWindow, Parity, Result, SynthError, C64};

/// Maximum probability mass a constructor may discard.
pub const TRUNCATION_LIMIT: f64 = 1e-6;
/// Maximum trace a unitary may push out of the truncated space.
pub const LEAKAGE_LIMIT: f64 = 1e-8;
/// Herald probabilities below this are rejected.
pub const HERALD_FLOOR: f64 = 1e-12;

const POVM_TOLERANCE: f64 = 1e-10;
const MAX_GL_ORDER: usize = 512;

/// Normalized pure state over one truncated mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amps: DVector<C64>,
    truncated_mass: f64,
}

impl FockVector {
    /// Renormalizes `amps`; `truncated_mass` records what the caller dropped.
    pub fn new(amps: DVector<C64>, truncated_mass: f64) -> Result<Self> {
        if amps.is_empty() {
            return Err(SynthError::invalid("Fock vector needs dim >= 1"));
        }
        let norm = amps.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(SynthError::invalid("Fock vector has zero or non-finite norm"));
        }
        Ok(Self {
            amps: amps / C64::from(norm),
            truncated_mass,
        })
    }

    /// Number state `|n⟩` in a space of dimension `dim`.
    pub fn number(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(SynthError::Truncation {
                lost: 1.0,
                limit: TRUNCATION_LIMIT,
                dim,
                required: n + 1,
            });
        }
        let mut amps = DVector::zeros(dim);
        amps[n] = C64::from(1.0);
        Self::new(amps, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    /// Probability mass lost to truncation before renormalization.
    pub fn truncated_mass(&self) -> f64 {
        self.truncated_mass
    }

    /// `⟨self|other⟩` over the common dimension.
    pub fn inner(&self, other: &FockVector) -> C64 {
        let d = self.dim().min(other.dim());
        (0..d).map(|n| self.amps[n].conj() * other.amps[n]).sum()
    }
}

/// `⟨n|α⟩` for `n < dim`, without renormalization.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> DVector<C64> {
    let mut amps = DVector::zeros(dim);
    let modulus = alpha.norm();
    if modulus == 0.0 {
        if dim > 0 {
            amps[0] = C64::from(1.0);
        }
        return amps;
    }
    let ln_mod = modulus.ln();
    let phase = alpha.arg();
    let mut ln_fact = 0.0;
    for n in 0..dim {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let ln_abs = -0.5 * modulus * modulus + n as f64 * ln_mod - 0.5 * ln_fact;
        amps[n] = C64::from_polar(ln_abs.exp(), n as f64 * phase);
    }
    amps
}

/// Smallest dimension whose retained mass `Σ_{n<dim} prob(n)` leaves at most
/// [`TRUNCATION_LIMIT`] behind, for a distribution summing to one.
fn required_dim(prob: impl Fn(usize) -> f64) -> usize {
    let mut acc = 0.0;
    for n in 0..1_000_000 {
        acc += prob(n);
        if 1.0 - acc <= TRUNCATION_LIMIT {
            return n + 1;
        }
    }
    1_000_000
}

/// Smallest `dim` with Poisson(`mean`) tail `P(n ≥ dim)` below `tail`.
pub fn poisson_cover(mean: f64, tail: f64) -> usize {
    let mut acc = 0.0;
    let mut n = 0;
    while 1.0 - acc > tail && n < 1_000_000 {
        acc += poisson_prob(mean, n);
        n += 1;
    }
    n.max(1)
}

fn poisson_prob(mean: f64, n: usize) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (-mean + n as f64 * mean.ln() - ln_factorial(n)).exp()
}

/// Renormalized truncation of the coherent state `|α⟩`.
pub fn coherent_fock(alpha: C64, dim: usize) -> Result<FockVector> {
    if dim == 0 {
        return Err(SynthError::invalid("Fock dimension must be >= 1"));
    }
    let amps = coherent_amplitudes(alpha, dim);
    let lost = (1.0 - amps.norm_squared()).max(0.0);
    if lost > TRUNCATION_LIMIT {
        let mean = alpha.norm_sqr();
        return Err(SynthError::Truncation {
            lost,
            limit: TRUNCATION_LIMIT,
            dim,
            required: required_dim(|n| poisson_prob(mean, n)),
        });
    }
    FockVector::new(amps, lost)
}

/// Normalization `𝒩 = √(2(1 ± e^{−2α²}))` of `|α⟩ ± |−α⟩`.
pub fn cat_normalization(alpha: f64, parity: Parity) -> f64 {
    (2.0 * (1.0 + parity.sign() * (-2.0 * alpha * alpha).exp())).sqrt()
}

/// Cat state `(|α⟩ ± |−α⟩)/𝒩`, `+` for even parity.
pub fn cat_fock(alpha: f64, parity: Parity, dim: usize) -> Result<FockVector> {
    if dim == 0 {
        return Err(SynthError::invalid("Fock dimension must be >= 1"));
    }
    if !(alpha >= 0.0) {
        return Err(SynthError::invalid(format!("cat amplitude {alpha} must be >= 0")));
    }
    if parity == Parity::Odd && alpha == 0.0 {
        return Err(SynthError::NullCat);
    }
    let norm = cat_normalization(alpha, parity);
    let cat_prob = |n: usize| {
        if Parity::of(n) != parity {
            return 0.0;
        }
        4.0 * poisson_prob(alpha * alpha, n) / (norm * norm)
    };
    let mut amps = coherent_amplitudes(C64::from(alpha), dim);
    for (n, a) in amps.iter_mut().enumerate() {
        *a = if Parity::of(n) == parity {
            *a * (2.0 / norm)
        } else {
            C64::from(0.0)
        };
    }
    let lost = (1.0 - amps.norm_squared()).max(0.0);
    if lost > TRUNCATION_LIMIT {
        return Err(SynthError::Truncation {
            lost,
            limit: TRUNCATION_LIMIT,
            dim,
            required: required_dim(cat_prob),
        });
    }
    FockVector::new(amps, lost)
}

/// Density operator over one or two truncated modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    modes: usize,
    dim: usize,
    matrix: DMatrix<C64>,
}

impl FockDensity {
    pub fn from_matrix(modes: usize, dim: usize, matrix: DMatrix<C64>) -> Result<Self> {
        if !(modes == 1 || modes == 2) || dim == 0 {
            return Err(SynthError::invalid("FockDensity supports 1 or 2 modes and dim >= 1"));
        }
        let side = dim.pow(modes as u32);
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(SynthError::invalid(format!(
                "matrix is {}x{}, expected {side}x{side}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { modes, dim, matrix })
    }

    pub fn from_pure(v: &FockVector) -> Self {
        let m = v.amps() * v.amps().adjoint();
        Self {
            modes: 1,
            dim: v.dim(),
            matrix: m,
        }
    }

    /// Two-mode pure state from its amplitude table `psi[(i, j)] = ⟨i, j|ψ⟩`.
    pub fn from_two_mode_amplitudes(psi: &DMatrix<C64>) -> Result<Self> {
        let dim = psi.nrows();
        if psi.ncols() != dim {
            return Err(SynthError::invalid("two-mode amplitude table must be square"));
        }
        let v = DVector::from_iterator(dim * dim, (0..dim * dim).map(|k| psi[(k / dim, k % dim)]));
        Self::from_matrix(2, dim, &v * v.adjoint())
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Ok(Self::from_pure(&FockVector::number(0, dim)?))
    }

    /// `ρ_a ⊗ ρ_b`, both single-mode with equal truncation.
    pub fn product(a: &FockDensity, b: &FockDensity) -> Result<Self> {
        if a.modes != 1 || b.modes != 1 || a.dim != b.dim {
            return Err(SynthError::invalid(
                "product expects two single-mode states of equal dimension",
            ));
        }
        Self::from_matrix(2, a.dim, a.matrix.kronecker(&b.matrix))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if !(t > 0.0) {
            return Err(SynthError::invalid("cannot normalize a state with non-positive trace"));
        }
        Ok(Self {
            modes: self.modes,
            dim: self.dim,
            matrix: &self.matrix / C64::from(t),
        })
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = hermitian_part(&self.matrix);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `Re ⟨v|ρ|v⟩` for a single-mode vector of any length; entries beyond
    /// the truncation are ignored (they meet zero rows of `ρ`).
    pub fn expectation_in(&self, v: &DVector<C64>) -> f64 {
        let d = self.dim.min(v.len());
        let mut acc = C64::from(0.0);
        for m in 0..d {
            let mut row = C64::from(0.0);
            for n in 0..d {
                row += self.matrix[(m, n)] * v[n];
            }
            acc += v[m].conj() * row;
        }
        acc.re
    }

    pub fn mean_photon_number(&self) -> f64 {
        match self.modes {
            1 => (0..self.dim).map(|n| n as f64 * self.matrix[(n, n)].re).sum(),
            _ => {
                let d = self.dim;
                (0..d * d)
                    .map(|k| ((k / d) + (k % d)) as f64 * self.matrix[(k, k)].re)
                    .sum()
            }
        }
    }

    /// Largest `|ρ_mn|` with `m + n` odd (single mode).
    pub fn parity_coherence(&self) -> f64 {
        let mut worst = 0.0_f64;
        for m in 0..self.dim {
            for n in 0..self.dim {
                if (m + n) % 2 == 1 {
                    worst = worst.max(self.matrix[(m, n)].norm());
                }
            }
        }
        worst
    }

    /// Copy into a larger (or equal) truncation, padding with zeros.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim {
            return Err(SynthError::invalid("embed cannot shrink the truncation"));
        }
        if dim == self.dim {
            return Ok(self.clone());
        }
        let side = dim.pow(self.modes as u32);
        let mut m = DMatrix::zeros(side, side);
        let old = self.dim;
        let map = |k: usize| match self.modes {
            1 => k,
            _ => (k / old) * dim + k % old,
        };
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                m[(map(i), map(j))] = self.matrix[(i, j)];
            }
        }
        Self::from_matrix(self.modes, dim, m)
    }

    /// `e^{−iφ n̂} ρ e^{iφ n̂}` applied to one mode.
    pub fn rotate_mode(&self, mode: usize, phi: f64) -> Result<Self> {
        if mode >= self.modes {
            return Err(SynthError::invalid(format!("mode {mode} out of range")));
        }
        let d = self.dim;
        let count = |k: usize| match (self.modes, mode) {
            (1, _) => k,
            (_, 0) => k / d,
            _ => k % d,
        };
        let mut m = self.matrix.clone();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let delta = count(i) as f64 - count(j) as f64;
                m[(i, j)] *= C64::from_polar(1.0, -phi * delta);
            }
        }
        Self::from_matrix(self.modes, self.dim, m)
    }

    /// Weighted pure components `ρ = Σ_k u_k u_k†` (single mode).
    fn pure_components(&self) -> Vec<DVector<C64>> {
        let h = hermitian_part(&self.matrix);
        let eig = h.symmetric_eigen();
        // components below this carry no resolvable weight
        let floor = 1e-15 * eig.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l));
        let mut out = Vec::new();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam > floor {
                out.push(eig.eigenvectors.column(k) * C64::from(lam.sqrt()));
            }
        }
        out
    }
}

/// Largest entry modulus of a complex matrix.
pub fn max_norm(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::from(0.5)
}

/// Number-conserving blocks of the beamsplitter unitary.
///
/// Block `N` maps input `|m, N−m⟩` (column `m`) to output `|p, N−p⟩`
/// (row `p`). Columns are generated by repeated application of the
/// transformed creation operators, which stays well conditioned for large
/// photon numbers where the binomial-sum closed form cancels badly.
#[derive(Debug, Clone)]
pub struct BeamsplitterBlocks {
    tau: f64,
    blocks: Vec<DMatrix<f64>>,
}

impl BeamsplitterBlocks {
    pub fn new(tau: f64, max_total: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(SynthError::invalid(format!("transmittivity {tau} must lie in [0, 1]")));
        }
        let r = (1.0 - tau * tau).max(0.0).sqrt();
        // a† → τa† − rb†, b† → ra† + τb†
        let raise = |v: &[f64], prev_total: usize, ca: f64, cb: f64, scale: f64| {
            let mut out = vec![0.0; prev_total + 2];
            for (p, &x) in v.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                out[p + 1] += ca * ((p + 1) as f64).sqrt() * x * scale;
                out[p] += cb * ((prev_total - p + 1) as f64).sqrt() * x * scale;
            }
            out
        };
        let mut blocks = vec![DMatrix::from_element(1, 1, 1.0)];
        for total in 1..=max_total {
            let prev = &blocks[total - 1];
            let mut block = DMatrix::zeros(total + 1, total + 1);
            for m in 0..=total {
                let (src_col, ca, cb, k) = if m == 0 {
                    (0, r, tau, total)
                } else {
                    (m - 1, tau, -r, m)
                };
                let src: Vec<f64> = prev.column(src_col).iter().copied().collect();
                let col = raise(&src, total - 1, ca, cb, 1.0 / (k as f64).sqrt());
                for (p, x) in col.into_iter().enumerate() {
                    block[(p, m)] = x;
                }
            }
            blocks.push(block);
        }
        Ok(Self { tau, blocks })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `⟨p, N−p| U |m, N−m⟩`.
    pub fn element(&self, total: usize, p: usize, m: usize) -> f64 {
        self.blocks[total][(p, m)]
    }

    /// Applies the unitary to a two-mode amplitude table. Returns the
    /// output table truncated to `dim_out` per mode and the squared norm
    /// that fell outside.
    pub fn apply(&self, psi: &DMatrix<C64>, dim_out: usize) -> (DMatrix<C64>, f64) {
        let dim_in = psi.nrows();
        let mut out = DMatrix::zeros(dim_out, dim_out);
        let mut leaked = 0.0;
        let max_total = 2 * (dim_in - 1);
        assert!(max_total < self.blocks.len(), "beamsplitter blocks too small");
        let mut v = Vec::with_capacity(dim_in);
        for total in 0..=max_total {
            let mlo = total.saturating_sub(dim_in - 1);
            let mhi = total.min(dim_in - 1);
            v.clear();
            v.extend((mlo..=mhi).map(|m| psi[(m, total - m)]));
            if v.iter().all(|x| *x == C64::from(0.0)) {
                continue;
            }
            let block = &self.blocks[total];
            for p in 0..=total {
                let mut acc = C64::from(0.0);
                for (k, x) in v.iter().enumerate() {
                    acc += *x * block[(p, mlo + k)];
                }
                let q = total - p;
                if p < dim_out && q < dim_out {
                    out[(p, q)] = acc;
                } else {
                    leaked += acc.norm_sqr();
                }
            }
        }
        (out, leaked)
    }
}

fn column_as_table(col: &[C64], dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| col[i * dim + j])
}

/// Beamsplitter of transmittivity `tau` acting on a two-mode density.
pub fn beamsplitter_fock(state: &FockDensity, tau: f64) -> Result<FockDensity> {
    if state.modes != 2 {
        return Err(SynthError::invalid("beamsplitter needs a two-mode state"));
    }
    let d = state.dim;
    let bs = BeamsplitterBlocks::new(tau, 2 * (d - 1))?;
    let side = d * d;
    let apply_cols = |m: &DMatrix<C64>| {
        let mut out = DMatrix::zeros(side, side);
        for c in 0..side {
            let col: Vec<C64> = m.column(c).iter().copied().collect();
            let (t, _) = bs.apply(&column_as_table(&col, d), d);
            for k in 0..side {
                out[(k, c)] = t[(k / d, k % d)];
            }
        }
        out
    };
    let half = apply_cols(&state.matrix);
    let full = apply_cols(&half.adjoint()).adjoint();
    let before = state.trace();
    let after = full.trace().re;
    if before - after > LEAKAGE_LIMIT {
        return Err(SynthError::Leakage {
            lost: before - after,
            dim: d,
        });
    }
    FockDensity::from_matrix(2, d, full)
}

/// Position wavefunctions `⟨x|n⟩` for all `n < dim`.
pub fn quad_wavefunctions(dim: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    if dim == 0 {
        return out;
    }
    out[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if dim > 1 {
        out[1] = std::f64::consts::SQRT_2 * x * out[0];
    }
    for n in 1..dim.saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
    out
}

/// `⟨x|n⟩ = π^{-1/4} (2ⁿ n!)^{-1/2} H_n(x) e^{-x²/2}` by the normalized recurrence.
pub fn quad_wavefunction(n: usize, x: f64) -> f64 {
    quad_wavefunctions(n + 1, x)[n]
}

fn povm_real_part(lo: f64, hi: f64, dim: usize, panels: usize, order: usize) -> DMatrix<f64> {
    let mut povm = DMatrix::zeros(dim, dim);
    for (x, w) in composite_gauss_legendre(lo, hi, panels, order) {
        let psi = quad_wavefunctions(dim, x);
        for m in 0..dim {
            let wm = w * psi[m];
            if wm == 0.0 {
                continue;
            }
            for n in 0..dim {
                povm[(m, n)] += wm * psi[n];
            }
        }
    }
    povm
}

/// `Π = ∫_window |x_θ⟩⟨x_θ| dx` with `|x_θ⟩ = e^{iθn̂}|x⟩`.
///
/// Gauss–Legendre panels of unit width; the node count doubles until the
/// operator moves by less than `1e−10` in max norm. The infinite window is
/// the identity exactly.
pub fn homodyne_window_povm(window: &HomodyneWindow, dim: usize) -> DMatrix<C64> {
    let Some((lo, hi)) = window.bounds() else {
        return DMatrix::identity(dim, dim);
    };
    // ⟨x|n⟩ is negligible past the outermost turning point plus a margin
    let reach = (2.0 * dim as f64 + 1.0).sqrt() + 12.0;
    let (lo, hi) = (lo.max(-reach), hi.min(reach));
    let mut povm = DMatrix::zeros(dim, dim);
    if lo < hi {
        let panels = ((hi - lo).ceil() as usize).max(1);
        let mut order = 8;
        let mut prev = povm_real_part(lo, hi, dim, panels, order);
        loop {
            order *= 2;
            let cur = povm_real_part(lo, hi, dim, panels, order);
            let delta = (&cur - &prev).amax();
            prev = cur;
            if delta < POVM_TOLERANCE || order >= MAX_GL_ORDER {
                break;
            }
        }
        povm = prev;
    }
    let theta = window.theta();
    DMatrix::from_fn(dim, dim, |m, n| {
        C64::from_polar(povm[(m, n)], theta * (m as f64 - n as f64))
    })
}

/// Reduced state of one mode of a two-mode density.
pub fn partial_trace(state: &FockDensity, keep: usize) -> Result<FockDensity> {
    if state.modes != 2 || keep > 1 {
        return Err(SynthError::invalid(
            "partial_trace expects a two-mode state and keep in {0,1}",
        ));
    }
    let d = state.dim;
    let m = &state.matrix;
    let out = DMatrix::from_fn(d, d, |i, k| {
        (0..d)
            .map(|j| match keep {
                0 => m[(i * d + j, k * d + j)],
                _ => m[(j * d + i, j * d + k)],
            })
            .sum()
    });
    FockDensity::from_matrix(1, d, out)
}

fn herald_probability(p: f64) -> Result<f64> {
    if !(p >= HERALD_FLOOR) {
        return Err(SynthError::HeraldUnderflow { p });
    }
    Ok(p)
}

/// Heralds on `measured_mode` with the window POVM and returns the
/// normalized state of the other mode together with the herald probability.
pub fn condition_and_trace(
    state: &FockDensity,
    window: &HomodyneWindow,
    measured_mode: usize,
) -> Result<(FockDensity, f64)> {
    if state.modes != 2 || measured_mode > 1 {
        return Err(SynthError::invalid(
            "condition_and_trace expects a two-mode state and measured_mode in {0,1}",
        ));
    }
    if window.is_infinite() {
        let kept = partial_trace(state, 1 - measured_mode)?;
        let p = herald_probability(kept.trace())?;
        return Ok((kept.normalized()?, p));
    }
    let d = state.dim;
    let povm = homodyne_window_povm(window, d);
    let m = &state.matrix;
    let out = DMatrix::from_fn(d, d, |a, b| {
        let mut acc = C64::from(0.0);
        for j in 0..d {
            for l in 0..d {
                let pi = povm[(l, j)];
                if pi == C64::from(0.0) {
                    continue;
                }
                acc += pi
                    * match measured_mode {
                        1 => m[(a * d + j, b * d + l)],
                        _ => m[(j * d + a, l * d + b)],
                    };
            }
        }
        acc
    });
    let kept = FockDensity::from_matrix(1, d, out)?;
    let p = herald_probability(kept.trace())?;
    Ok((kept.normalized()?, p))
}

/// What happens to the measured output port in [`mix_and_condition`].
#[derive(Debug, Clone, Copy)]
pub enum Herald<'a> {
    /// The port is discarded.
    Trace,
    /// The port is projected with this single-mode POVM element.
    Povm(&'a DMatrix<C64>),
}

/// Fused `ρ_a ⊗ ρ_b → BS(τ) → herald one port → reduced state`.
///
/// Equivalent to [`FockDensity::product`], [`beamsplitter_fock`] and
/// [`condition_and_trace`] in sequence but works on pure components, so
/// memory stays at `dim²` and cost scales with the ranks of the inputs.
/// Returns the normalized kept state and the herald probability.
pub fn mix_and_condition(
    a: &FockDensity,
    b: &FockDensity,
    tau: f64,
    herald: Herald<'_>,
    measured_mode: usize,
) -> Result<(FockDensity, f64)> {
    if a.modes != 1 || b.modes != 1 || a.dim != b.dim || measured_mode > 1 {
        return Err(SynthError::invalid(
            "mix_and_condition expects single-mode inputs of equal dimension",
        ));
    }
    let d = a.dim;
    let bs = BeamsplitterBlocks::new(tau, 2 * (d - 1))?;
    let ua = a.pure_components();
    let ub = b.pure_components();
    let povm_t = match herald {
        Herald::Povm(p) => Some(p.transpose()),
        Herald::Trace => None,
    };
    let mut kept = DMatrix::<C64>::zeros(d, d);
    let mut leaked = 0.0;
    for u in &ua {
        for v in &ub {
            let psi = u * v.transpose();
            let (out, lost) = bs.apply(&psi, d);
            leaked += lost;
            let contrib = match (measured_mode, &povm_t) {
                (1, None) => &out * out.adjoint(),
                (1, Some(pt)) => &out * pt * out.adjoint(),
                (_, None) => out.transpose() * out.map(|z| z.conj()),
                (_, Some(pt)) => out.transpose() * pt * out.map(|z| z.conj()),
            };
            kept += contrib;
        }
    }
    if leaked > LEAKAGE_LIMIT {
        return Err(SynthError::Leakage { lost: leaked, dim: d });
    }
    let kept = FockDensity::from_matrix(1, d, hermitian_part(&kept))?;
    let p = herald_probability(kept.trace())?;
    Ok((kept.normalized()?, p))
}

/// Wigner function `W(x, p) = (2/π) Tr[ρ D(ζ) Π̂ D†(ζ)]`, `ζ = (x + ip)/√2`.
///
/// The displaced-parity matrix elements are generated by the Laguerre
/// recurrence over `(m, n)`, so no displaced operator is ever truncated.
pub fn wigner_fock(state: &FockDensity, x: f64, p: f64) -> f64 {
    assert_eq!(state.modes, 1, "Wigner function is defined for a single mode");
    let d = state.dim;
    let rho = &state.matrix;
    let a = C64::new(x, p) * std::f64::consts::FRAC_1_SQRT_2;
    let mut wl = vec![C64::from(0.0); d];
    wl[0] = C64::from((-2.0 * a.norm_sqr()).exp() / PI);
    let mut w = (rho[(0, 0)] * wl[0]).re;
    for n in 1..d {
        wl[n] = wl[n - 1] * a * 2.0 / (n as f64).sqrt();
        w += 2.0 * (rho[(0, n)] * wl[n]).re;
    }
    for m in 1..d {
        let sm = (m as f64).sqrt();
        let mut temp = wl[m];
        wl[m] = (a.conj() * temp * 2.0 - wl[m - 1] * sm) / sm;
        w += (rho[(m, m)] * wl[m]).re;
        for n in m + 1..d {
            let next = (a * wl[n - 1] * 2.0 - temp * sm) / (n as f64).sqrt();
            temp = wl[n];
            wl[n] = next;
            w += 2.0 * (rho[(m, n)] * wl[n]).re;
        }
    }
    w
}
