//! The multiplexed synthesizer and the iterative cascade it replaces.
//!
//! `N − 1` feeds are merged into one effective mode by a beamsplitter
//! cascade whose departing ports are discarded. The merged mode enters
//! port `a` of the final beamsplitter, the seed enters port `b`; output
//! port `b` is heralded by the homodyne window and output port `a` is kept.

use serde::{Deserialize, Serialize};

use crate::coherent::{mix_and_condition_cr, SingleModeRank};
use crate::fock::{
    cat_fock, homodyne_window_povm, mix_and_condition, poisson_cover, wigner_fock, FockDensity, FockVector, Herald,
};
use crate::states::{target_amplitudes, target_overlap_cr, TargetSpec};
use crate::{HomodyneWindow, Parity, Result, SynthError};

/// Beamsplitter cascade merging `n_feeds` modes with equal weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergePlan {
    n_feeds: usize,
    taus: Vec<f64>,
}

/// Step `i` mixes the running merged mode (port `a`) with feed `i + 1`
/// (port `b`) at `τ_i = √((i+1)/(i+2))` and keeps output `a`.
pub fn build_merge_plan(n_feeds: usize) -> Result<MergePlan> {
    if n_feeds < 1 {
        return Err(SynthError::invalid("a merge plan needs at least one feed"));
    }
    let taus = (0..n_feeds - 1)
        .map(|i| ((i + 1) as f64 / (i + 2) as f64).sqrt())
        .collect();
    Ok(MergePlan { n_feeds, taus })
}

impl MergePlan {
    pub fn n_feeds(&self) -> usize {
        self.n_feeds
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// Amplitude with which each feed reaches the merged mode, obtained by
    /// pushing a unit amplitude through the cascade.
    pub fn weights(&self) -> Vec<f64> {
        (0..self.n_feeds)
            .map(|k| {
                let mut amp = 1.0;
                for (i, &tau) in self.taus.iter().enumerate() {
                    let r = (1.0 - tau * tau).sqrt();
                    if i + 1 == k {
                        amp *= r;
                    } else if i + 1 > k {
                        amp *= tau;
                    }
                }
                amp
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    EvenCat,
    OddCat,
    SinglePhoton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineChoice {
    Fock,
    CoherentRank,
    #[default]
    Auto,
}

/// Engine after resolving [`EngineChoice::Auto`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Fock,
    CoherentRank,
}

/// Alternative seed state, used instead of a copy of the feeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub input: InputKind,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub input: InputKind,
    /// Cat amplitude; ignored for single photons.
    pub alpha: f64,
    /// Total number of input states, feeds plus seed.
    pub n_total: usize,
    /// Reflectivity of the final beamsplitter.
    pub r: f64,
    pub window: HomodyneWindow,
    pub engine: EngineChoice,
    /// Fock truncation; chosen from the input energy when absent.
    pub fock_dim: Option<usize>,
    pub seed: Option<SeedSpec>,
}

impl ScenarioConfig {
    pub fn new(input: InputKind, alpha: f64, n_total: usize, r: f64, window: HomodyneWindow) -> Self {
        Self {
            input,
            alpha,
            n_total,
            r,
            window,
            engine: EngineChoice::Auto,
            fock_dim: None,
            seed: None,
        }
    }

    pub fn with_engine(mut self, engine: EngineChoice) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_fock_dim(mut self, dim: usize) -> Self {
        self.fock_dim = Some(dim);
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn with_window(mut self, window: HomodyneWindow) -> Self {
        self.window = window;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_total < 2 {
            return Err(SynthError::invalid(format!(
                "protocol requires N >= 2 (n_total = {})",
                self.n_total
            )));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(SynthError::invalid(format!(
                "reflectivity r = {} must lie in (0, 1)",
                self.r
            )));
        }
        check_amplitude(self.input, self.alpha)?;
        if let Some(seed) = self.seed {
            check_amplitude(seed.input, seed.alpha)?;
        }
        if self.fock_dim == Some(0) {
            return Err(SynthError::invalid("fock_dim must be >= 1"));
        }
        if let Some(dx) = self.window.dx() {
            if !(dx > 0.0) {
                return Err(SynthError::invalid(format!("window width dx = {dx} must be > 0")));
            }
        }
        Ok(())
    }

    /// Single photons always run on the Fock engine; cats default to the
    /// coherent-rank engine.
    pub fn resolved_engine(&self) -> Engine {
        let photons =
            self.input == InputKind::SinglePhoton || self.seed.is_some_and(|s| s.input == InputKind::SinglePhoton);
        match (photons, self.engine) {
            (true, _) | (false, EngineChoice::Fock) => Engine::Fock,
            _ => Engine::CoherentRank,
        }
    }

    /// Truncation used by the Fock engine.
    pub fn resolved_fock_dim(&self) -> usize {
        if let Some(d) = self.fock_dim {
            return d;
        }
        let n = self.n_total;
        let energy = |kind: InputKind, alpha: f64| match kind {
            InputKind::SinglePhoton => 1.0,
            _ => alpha * alpha,
        };
        let seed = self
            .seed
            .map_or(energy(self.input, self.alpha), |s| energy(s.input, s.alpha));
        let total = (n - 1) as f64 * energy(self.input, self.alpha) + seed;
        if self.input == InputKind::SinglePhoton && self.seed.is_none() {
            return n + 1;
        }
        // all of the input energy may end up in one output mode
        poisson_cover(total, 1e-12).max(n + 1) + 2
    }
}

fn check_amplitude(kind: InputKind, alpha: f64) -> Result<()> {
    if kind == InputKind::SinglePhoton {
        return Ok(());
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(SynthError::invalid(format!(
            "cat amplitude alpha = {alpha} must be >= 0"
        )));
    }
    if kind == InputKind::OddCat && alpha == 0.0 {
        return Err(SynthError::NullCat);
    }
    Ok(())
}

/// Single-mode state in either engine's representation.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeState {
    Fock(FockDensity),
    Coherent(SingleModeRank),
}

impl ModeState {
    pub fn engine(&self) -> Engine {
        match self {
            ModeState::Fock(_) => Engine::Fock,
            ModeState::Coherent(_) => Engine::CoherentRank,
        }
    }

    /// `⟨ψ_t|ρ|ψ_t⟩` against a pure target.
    pub fn fidelity(&self, spec: &TargetSpec) -> Result<f64> {
        match self {
            ModeState::Fock(rho) => Ok(rho.expectation_in(&target_amplitudes(spec, rho.dim())?)),
            ModeState::Coherent(rho) => target_overlap_cr(spec, rho),
        }
    }

    pub fn wigner(&self, x: f64, p: f64) -> f64 {
        match self {
            ModeState::Fock(rho) => wigner_fock(rho, x, p),
            ModeState::Coherent(rho) => rho.wigner(x, p),
        }
    }

    pub fn mean_photon_number(&self) -> f64 {
        match self {
            ModeState::Fock(rho) => rho.mean_photon_number(),
            ModeState::Coherent(rho) => rho.mean_photon_number(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            ModeState::Fock(rho) => rho.trace(),
            ModeState::Coherent(rho) => rho.trace(),
        }
    }

    /// Fock matrix of the state, renormalized after truncation for the
    /// coherent-rank engine.
    pub fn to_fock(&self, dim: usize) -> Result<FockDensity> {
        match self {
            ModeState::Fock(rho) if rho.dim() == dim => Ok(rho.clone()),
            ModeState::Fock(rho) => rho.embed(dim),
            ModeState::Coherent(rho) => rho.to_fock(dim)?.normalized(),
        }
    }
}

/// Constructs one input state in the requested representation.
pub fn input_state(kind: InputKind, alpha: f64, engine: Engine, dim: usize) -> Result<ModeState> {
    check_amplitude(kind, alpha)?;
    match (engine, kind) {
        (Engine::Fock, InputKind::SinglePhoton) => {
            Ok(ModeState::Fock(FockDensity::from_pure(&FockVector::number(1, dim)?)))
        }
        (Engine::Fock, InputKind::EvenCat | InputKind::OddCat) => {
            let parity = cat_parity(kind);
            Ok(ModeState::Fock(FockDensity::from_pure(&cat_fock(alpha, parity, dim)?)))
        }
        (Engine::CoherentRank, InputKind::SinglePhoton) => Err(SynthError::invalid(
            "single-photon inputs have no coherent-rank representation; use the fock engine",
        )),
        (Engine::CoherentRank, _) => Ok(ModeState::Coherent(SingleModeRank::cat(alpha, cat_parity(kind))?)),
    }
}

fn cat_parity(kind: InputKind) -> Parity {
    match kind {
        InputKind::OddCat => Parity::Odd,
        _ => Parity::Even,
    }
}

/// Mixes `a` (port a) with `b` (port b), heralds output `b` with the window
/// (infinite: discard it) and returns output `a` with the herald probability.
pub fn mix_step(a: &ModeState, b: &ModeState, tau: f64, window: &HomodyneWindow) -> Result<(ModeState, f64)> {
    match (a, b) {
        (ModeState::Fock(a), ModeState::Fock(b)) => {
            let povm;
            let herald = if window.is_infinite() {
                Herald::Trace
            } else {
                povm = homodyne_window_povm(window, a.dim());
                Herald::Povm(&povm)
            };
            let (kept, p) = mix_and_condition(a, b, tau, herald, 1)?;
            Ok((ModeState::Fock(kept), p))
        }
        (ModeState::Coherent(a), ModeState::Coherent(b)) => {
            let (kept, p) = mix_and_condition_cr(a, b, tau, window, 1)?;
            Ok((ModeState::Coherent(kept), p))
        }
        _ => Err(SynthError::invalid("cannot mix states from different engines")),
    }
}

/// Runs the cascade of `plan` over `feeds`, discarding each departing port.
pub fn merge_feeds(feeds: &[ModeState], plan: &MergePlan) -> Result<ModeState> {
    if feeds.len() != plan.n_feeds {
        return Err(SynthError::invalid(format!(
            "merge plan expects {} feeds, got {}",
            plan.n_feeds,
            feeds.len()
        )));
    }
    let mut merged = feeds[0].clone();
    for (feed, &tau) in feeds[1..].iter().zip(&plan.taus) {
        merged = mix_step(&merged, feed, tau, &HomodyneWindow::infinite(0.0))?.0;
    }
    Ok(merged)
}

struct Inputs {
    feeds: Vec<ModeState>,
    seed: ModeState,
    plan: MergePlan,
    final_tau: f64,
}

fn prepare(config: &ScenarioConfig) -> Result<Inputs> {
    config.validate()?;
    let engine = config.resolved_engine();
    let dim = config.resolved_fock_dim();
    let feed = input_state(config.input, config.alpha, engine, dim)?;
    let seed = match config.seed {
        Some(s) => input_state(s.input, s.alpha, engine, dim)?,
        None => feed.clone(),
    };
    let plan = build_merge_plan(config.n_total - 1)?;
    Ok(Inputs {
        feeds: vec![feed; config.n_total - 1],
        seed,
        plan,
        final_tau: (1.0 - config.r * config.r).sqrt(),
    })
}

/// Output state and herald probability of the multiplexed protocol.
pub fn synthesize(config: &ScenarioConfig) -> Result<(ModeState, f64)> {
    let inputs = prepare(config)?;
    let merged = merge_feeds(&inputs.feeds, &inputs.plan)?;
    mix_step(&merged, &inputs.seed, inputs.final_tau, &config.window)
}

/// The cascade with every step heralded: `windows[i]` conditions step `i`
/// of the merge cascade, the last window conditions the final beamsplitter.
/// The returned probability is the product of all stage probabilities.
pub fn iterative_oracle(config: &ScenarioConfig, windows: &[HomodyneWindow]) -> Result<(ModeState, f64)> {
    let inputs = prepare(config)?;
    if windows.len() != config.n_total - 1 {
        return Err(SynthError::invalid(format!(
            "iterative cascade with N = {} needs {} windows, got {}",
            config.n_total,
            config.n_total - 1,
            windows.len()
        )));
    }
    let stage = |stage: usize, r: Result<(ModeState, f64)>| {
        r.map_err(|e| match e {
            SynthError::HeraldUnderflow { p } => SynthError::StageUnderflow { stage, p },
            other => other,
        })
    };
    let mut merged = inputs.feeds[0].clone();
    let mut p_total = 1.0;
    for (i, (feed, &tau)) in inputs.feeds[1..].iter().zip(&inputs.plan.taus).enumerate() {
        let (next, p) = stage(i, mix_step(&merged, feed, tau, &windows[i]))?;
        merged = next;
        p_total *= p;
    }
    let last = windows.len() - 1;
    let (out, p) = stage(last, mix_step(&merged, &inputs.seed, inputs.final_tau, &windows[last]))?;
    Ok((out, p_total * p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::CoherentRank;
    use crate::fock::max_norm;
    use crate::C64;

    fn narrow(dx: f64) -> HomodyneWindow {
        HomodyneWindow::x_centered(dx).unwrap()
    }

    #[test]
    fn merge_plan_weights_are_equal() {
        assert!(build_merge_plan(0).is_err());
        assert!(build_merge_plan(1).unwrap().taus().is_empty());
        let two = build_merge_plan(2).unwrap();
        assert!((two.taus()[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        for n in 1..=9 {
            for w in build_merge_plan(n).unwrap().weights() {
                assert!((w - 1.0 / (n as f64).sqrt()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_photon_reaches_merged_mode_with_equal_weight() {
        let plan = build_merge_plan(7).unwrap();
        let d = 3;
        for k in 0..7 {
            let feeds: Vec<ModeState> = (0..7)
                .map(|j| {
                    let n = usize::from(j == k);
                    ModeState::Fock(FockDensity::from_pure(&FockVector::number(n, d).unwrap()))
                })
                .collect();
            let ModeState::Fock(m) = merge_feeds(&feeds, &plan).unwrap() else {
                unreachable!()
            };
            assert!((m.matrix()[(1, 1)].re - 1.0 / 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_feeds_merge_to_scaled_coherent_state() {
        let beta = C64::new(0.8, -0.3);
        let feed = ModeState::Coherent(CoherentRank::coherent(beta));
        let plan = build_merge_plan(2).unwrap();
        let ModeState::Coherent(m) = merge_feeds(&[feed.clone(), feed], &plan).unwrap() else {
            unreachable!()
        };
        assert_eq!(m.len(), 1);
        assert!((m.kets()[0][0] - beta * std::f64::consts::SQRT_2).norm() < 1e-14);
        assert!((m.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_vacuum_feeds_merge_to_vacuum() {
        let vac = ModeState::Coherent(CoherentRank::vacuum());
        let plan = build_merge_plan(2).unwrap();
        let ModeState::Coherent(m) = merge_feeds(&[vac.clone(), vac], &plan).unwrap() else {
            unreachable!()
        };
        assert!(m.kets().iter().all(|k| k[0].norm() == 0.0));
    }

    #[test]
    fn vacuum_in_vacuum_out() {
        let cfg = ScenarioConfig::new(InputKind::EvenCat, 0.0, 2, 0.3, narrow(0.1));
        let (out, _) = synthesize(&cfg).unwrap();
        assert!((out.fidelity(&TargetSpec::ideal_cat(0.0, Parity::Even)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let base = ScenarioConfig::new(InputKind::EvenCat, 1.0, 2, 0.5, narrow(0.1));
        assert!(ScenarioConfig {
            n_total: 1,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(base.clone().with_r(1.2).validate().is_err());
        assert!(base.clone().with_r(0.0).validate().is_err());
        let photons = ScenarioConfig {
            input: InputKind::SinglePhoton,
            ..base.clone()
        }
        .with_engine(EngineChoice::CoherentRank);
        assert_eq!(photons.resolved_engine(), Engine::Fock);
        assert_eq!(photons.resolved_fock_dim(), 3);
        assert_eq!(base.resolved_engine(), Engine::CoherentRank);
    }

    #[test]
    fn engines_agree_on_small_breeding() {
        let cfg = ScenarioConfig::new(InputKind::EvenCat, 1.2, 3, 0.6, narrow(0.3));
        let (cr, pc) = synthesize(&cfg).unwrap();
        let fcfg = cfg.clone().with_engine(EngineChoice::Fock);
        let (fo, pf) = synthesize(&fcfg).unwrap();
        let d = fcfg.resolved_fock_dim();
        assert!((pc - pf).abs() < 1e-8, "{pc} vs {pf}");
        let diff = max_norm(&(cr.to_fock(d).unwrap().matrix() - fo.to_fock(d).unwrap().matrix()));
        assert!(diff < 1e-7, "{diff}");
    }

    #[test]
    fn infinite_intermediate_windows_reproduce_multiplexed_output() {
        for engine in [EngineChoice::Fock, EngineChoice::CoherentRank] {
            let cfg = ScenarioConfig::new(InputKind::EvenCat, 1.0, 4, 0.55, narrow(0.2)).with_engine(engine);
            let (a, pa) = synthesize(&cfg).unwrap();
            let mut windows = vec![HomodyneWindow::infinite(0.0); 2];
            windows.push(cfg.window);
            let (b, pb) = iterative_oracle(&cfg, &windows).unwrap();
            assert!((pa - pb).abs() < 1e-10);
            let d = 30;
            assert!(max_norm(&(a.to_fock(d).unwrap().matrix() - b.to_fock(d).unwrap().matrix())) < 1e-9);
        }
    }

    #[test]
    fn multiplexed_heralds_more_often_than_iterative() {
        let cfg = ScenarioConfig::new(InputKind::EvenCat, 2.0, 4, 0.6, narrow(0.2));
        let (_, pm) = synthesize(&cfg).unwrap();
        let (_, pi) = iterative_oracle(&cfg, &[cfg.window; 3]).unwrap();
        assert!(pm > pi);
        let wide = cfg.clone().with_window(narrow(1.0));
        let (_, pw) = synthesize(&wide).unwrap();
        assert!(pw > pm);
    }

    #[test]
    fn stage_underflow_names_the_stage() {
        let cfg = ScenarioConfig::new(InputKind::EvenCat, 3.0, 3, 0.5, narrow(0.1));
        let far = HomodyneWindow::new(0.0, 40.0, 0.1).unwrap();
        let err = iterative_oracle(&cfg, &[far, cfg.window]).unwrap_err();
        assert!(matches!(err, SynthError::StageUnderflow { stage: 0, .. }), "{err:?}");
    }

    #[test]
    fn centered_window_keeps_parity_blocks() {
        let cfg = ScenarioConfig::new(InputKind::EvenCat, 1.5, 3, 0.5, narrow(0.2)).with_engine(EngineChoice::Fock);
        let (ModeState::Fock(rho), _) = synthesize(&cfg).unwrap() else {
            unreachable!()
        };
        assert!(rho.parity_coherence() < 1e-9);
    }
}
