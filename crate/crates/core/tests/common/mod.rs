//! Module invariants as reusable property checks.

#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestError, TestRng, TestRunner};
use std::f64::consts::PI;

use synth_core::coherent::window_moment;
use synth_core::fock::{homodyne_window_povm, max_norm};
use synth_core::metrics::{default_wigner_axis, wigner_grid};
use synth_core::protocol::{synthesize, EngineChoice, InputKind, ScenarioConfig};
use synth_core::{HomodyneWindow, C64};

pub const CASES: u32 = 256;

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    TestRunner::new_with_rng(config, rng)
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| match e {
        TestError::Fail(why, value) => format!("{why} for {value:?}"),
        TestError::Abort(why) => format!("aborted: {why}"),
    })
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn cat_kind() -> impl Strategy<Value = InputKind> {
    prop_oneof![Just(InputKind::EvenCat), Just(InputKind::OddCat)]
}

fn any_window() -> impl Strategy<Value = HomodyneWindow> {
    prop_oneof![
        4 => (0.0..PI, -0.5..0.5f64, 0.05..2.0f64)
            .prop_map(|(t, x0, dx)| HomodyneWindow::new(t, x0, dx).unwrap()),
        1 => (0.0..PI).prop_map(HomodyneWindow::infinite),
    ]
}

/// Small cat-breeding scenario with a random window.
fn small_cat_scenario() -> impl Strategy<Value = ScenarioConfig> {
    (cat_kind(), 0.3..2.0f64, 2usize..=3, 0.1..0.9f64, any_window())
        .prop_map(|(kind, alpha, n, r, w)| ScenarioConfig::new(kind, alpha, n, r, w))
}

/// Outputs of both engines have unit trace and the herald probability lies
/// in `(0, 1]`.
pub fn trace_is_unit(cases: u32) -> Result<(), String> {
    run(cases, small_cat_scenario(), |cfg| {
        for engine in [EngineChoice::Fock, EngineChoice::CoherentRank] {
            let (state, p) =
                synthesize(&cfg.clone().with_engine(engine)).map_err(|e| TestCaseError::fail(e.to_string()))?;
            check((state.trace() - 1.0).abs() < 1e-10, || {
                format!("{engine:?} trace {}", state.trace())
            })?;
            check(p > 0.0 && p <= 1.0 + 1e-10, || format!("{engine:?} p = {p}"))?;
        }
        Ok(())
    })
}

/// Output density matrices are Hermitian and positive semidefinite.
pub fn output_is_hermitian(cases: u32) -> Result<(), String> {
    run(cases, small_cat_scenario(), |cfg| {
        let dim = cfg.resolved_fock_dim();
        for engine in [EngineChoice::Fock, EngineChoice::CoherentRank] {
            let (state, _) =
                synthesize(&cfg.clone().with_engine(engine)).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let rho = state.to_fock(dim).map_err(|e| TestCaseError::fail(e.to_string()))?;
            check(rho.hermiticity_defect() < 1e-12, || {
                format!("{engine:?} defect {}", rho.hermiticity_defect())
            })?;
            check(rho.min_eigenvalue() > -1e-10, || {
                format!("{engine:?} min eigenvalue {}", rho.min_eigenvalue())
            })?;
        }
        Ok(())
    })
}

/// `0 ≤ Π ≤ 1` for every window POVM, and `0 ≤ ⟨α|Π|α⟩ ≤ 1`.
pub fn povm_is_bounded(cases: u32) -> Result<(), String> {
    let strategy = (
        0.0..PI,
        -3.0..3.0f64,
        0.01..5.0f64,
        2usize..30,
        -3.0..3.0f64,
        -3.0..3.0f64,
    );
    run(cases, strategy, |(theta, x0, dx, dim, re, im)| {
        let w = HomodyneWindow::new(theta, x0, dx).unwrap();
        let povm = homodyne_window_povm(&w, dim);
        let herm = max_norm(&(&povm - povm.adjoint()));
        check(herm < 1e-12, || format!("POVM not Hermitian: {herm}"))?;
        let eig = povm.symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        check(lo > -1e-9 && hi < 1.0 + 1e-9, || format!("POVM spectrum [{lo}, {hi}]"))?;
        let a = C64::new(re, im);
        let m = window_moment(a, a, &w);
        check(m.im.abs() < 1e-12 && m.re > -1e-14 && m.re < 1.0 + 1e-12, || {
            format!("coherent window mass {m}")
        })
    })
}

/// A window symmetric about the origin keeps definite-parity inputs free of
/// even-odd coherences, for any quadrature angle.
pub fn parity_is_selected(cases: u32) -> Result<(), String> {
    let kind = prop_oneof![
        Just(InputKind::EvenCat),
        Just(InputKind::OddCat),
        Just(InputKind::SinglePhoton)
    ];
    let strategy = (kind, 0.3..2.0f64, 2usize..=4, 0.1..0.9f64, 0.0..PI, 0.05..2.0f64);
    run(cases, strategy, |(kind, alpha, n, r, theta, dx)| {
        let n = if kind == InputKind::SinglePhoton { n } else { n.min(3) };
        let w = HomodyneWindow::new(theta, 0.0, dx).unwrap();
        let cfg = ScenarioConfig::new(kind, alpha, n, r, w).with_engine(EngineChoice::Fock);
        let (state, _) = synthesize(&cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let rho = state.to_fock(cfg.resolved_fock_dim()).unwrap();
        check(rho.parity_coherence() < 1e-10, || {
            format!("parity coherence {}", rho.parity_coherence())
        })
    })
}

/// The Wigner function integrates to one and is bounded by `1/π`.
pub fn wigner_is_normalized(cases: u32) -> Result<(), String> {
    let strategy = (cat_kind(), 0.3..1.5f64, 0.1..0.9f64, any_window());
    run(cases, strategy, |(kind, alpha, r, w)| {
        let cfg = ScenarioConfig::new(kind, alpha, 2, r, w).with_engine(EngineChoice::CoherentRank);
        let (state, _) = synthesize(&cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
        // margin past the default axis: heralded states can be stretched
        let half = default_wigner_axis(state.mean_photon_number().sqrt(), 2)[1] + 3.0;
        let axis: Vec<f64> = (0..=200).map(|k| -half + half * k as f64 / 100.0).collect();
        let grid = wigner_grid(&state, &axis, &axis).unwrap();
        let total = grid.integral();
        check((total - 1.0).abs() < 1e-6, || format!("integral {total}"))?;
        let bound = 1.0 / PI + 1e-12;
        check(grid.max() <= bound && grid.min() >= -bound, || {
            format!("range [{}, {}]", grid.min(), grid.max())
        })
    })
}

/// Splitting a window in two adjacent halves splits the POVM and every
/// coherent matrix element additively.
pub fn window_is_additive(cases: u32) -> Result<(), String> {
    let strategy = (
        0.0..PI,
        -2.0..2.0f64,
        0.02..4.0f64,
        0.0..1.0f64,
        2usize..20,
        -2.0..2.0f64,
        -2.0..2.0f64,
        -2.0..2.0f64,
        -2.0..2.0f64,
    );
    run(cases, strategy, |(theta, x0, dx, frac, dim, ar, ai, br, bi)| {
        let frac = frac.clamp(0.05, 0.95);
        let (lo, hi) = (x0 - dx / 2.0, x0 + dx / 2.0);
        let cut = lo + frac * dx;
        let whole = HomodyneWindow::new(theta, x0, dx).unwrap();
        let left = HomodyneWindow::new(theta, 0.5 * (lo + cut), cut - lo).unwrap();
        let right = HomodyneWindow::new(theta, 0.5 * (cut + hi), hi - cut).unwrap();
        let sum: DMatrix<C64> = homodyne_window_povm(&left, dim) + homodyne_window_povm(&right, dim);
        let gap = max_norm(&(sum - homodyne_window_povm(&whole, dim)));
        check(gap < 1e-9, || format!("POVM additivity gap {gap}"))?;
        let (a, b) = (C64::new(ar, ai), C64::new(br, bi));
        let split = window_moment(a, b, &left) + window_moment(a, b, &right);
        let gap = (split - window_moment(a, b, &whole)).norm();
        check(gap < 1e-12, || format!("moment additivity gap {gap}"))
    })
}

pub type Property = fn(u32) -> Result<(), String>;

/// Every invariant with its name, for suites that report them together.
pub fn all() -> Vec<(&'static str, Property)> {
    vec![
        ("trace", trace_is_unit),
        ("hermiticity", output_is_hermitian),
        ("povm-bounds", povm_is_bounded),
        ("parity-selection", parity_is_selected),
        ("wigner-normalization", wigner_is_normalized),
        ("window-additivity", window_is_additive),
    ]
}
