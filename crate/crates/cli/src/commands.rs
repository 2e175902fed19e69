use serde::Serialize;
use std::path::Path;

use synth_core::metrics::{
    best_squeezed_cat_over_r, default_wigner_axis, nearest_cat, nearest_gkp, nearest_squeezed_cat, scan_reflectivity,
    success_compare, wigner_grid, GkpFit, SqueezedCatFit, WignerGrid,
};
use synth_core::protocol::{synthesize, Engine, EngineChoice, InputKind, ModeState, ScenarioConfig};
use synth_core::states::GkpParams;
use synth_core::{HomodyneWindow, Parity};

use crate::config::{
    self, check_dx, check_n_total, check_r, BreedCatsConfig, CenterSection, FockFeedConfig, GkpConfig,
    SuccessCompareConfig, WignerConfig, WignerSection, R_PLACEHOLDER,
};
use crate::error::CliError;
use crate::output::{json_bytes, num, wigner_csv, Csv, Outputs};

/// Result of one command: files to write and the engine that ran.
pub struct Run {
    pub outputs: Outputs,
    pub engine: Engine,
}

pub fn engine_name(engine: Engine) -> &'static str {
    match engine {
        Engine::Fock => "fock",
        Engine::CoherentRank => "coherent-rank",
    }
}

fn wigner_of(state: &ModeState, section: &WignerSection, gamma_hint: f64) -> Result<WignerGrid, CliError> {
    let half = default_wigner_axis(gamma_hint, 2)[1];
    let axis = section.axis(half)?;
    wigner_grid(state, &axis, &axis).map_err(CliError::engine("wigner grid"))
}

fn synthesize_at(cfg: &ScenarioConfig) -> Result<(ModeState, f64), CliError> {
    synthesize(cfg).map_err(CliError::engine(format!(
        "scenario N = {}, alpha = {}, r = {}",
        cfg.n_total, cfg.alpha, cfg.r
    )))
}

#[derive(Serialize)]
struct BreedArgmax {
    r_star: f64,
    gamma_star: f64,
    parity_star: Parity,
    f_star: f64,
    p_success: f64,
    /// Refined nearest cat of the state at `r_star`.
    refined: synth_core::metrics::CatFit,
}

pub fn breed_cats(cfg: &BreedCatsConfig, engine: Option<EngineChoice>) -> Result<Run, CliError> {
    let window = cfg.window.build()?;
    let r0 = cfg.scenario.r.unwrap_or(R_PLACEHOLDER);
    let template = cfg.scenario.build(window, r0, engine)?;
    let r_grid = cfg.scan.r_grid()?;
    let gamma_grid = cfg.scan.gamma_grid(template.n_total, template.alpha)?;
    let scan = scan_reflectivity(&template, &r_grid, &gamma_grid).map_err(CliError::engine("reflectivity scan"))?;

    let mut csv = Csv::new(&["r", "gamma_natural", "fidelity", "parity", "p_success"]);
    for (i, &r) in scan.r_grid.iter().enumerate() {
        for (j, &g) in scan.gamma_grid.iter().enumerate() {
            let parity = match scan.parity[i][j] {
                Parity::Even => "even",
                Parity::Odd => "odd",
            };
            csv.row(&[
                num(r),
                num(g),
                num(scan.fidelity[i][j]),
                parity.into(),
                num(scan.p_success[i]),
            ]);
        }
    }

    let best_cfg = template.clone().with_r(scan.r_star);
    let (state, _) = synthesize_at(&best_cfg)?;
    let refined = nearest_cat(&state).map_err(CliError::engine("nearest cat"))?;
    let grid = wigner_of(&state, &cfg.wigner, scan.gamma_star)?;
    let argmax = BreedArgmax {
        r_star: scan.r_star,
        gamma_star: scan.gamma_star,
        parity_star: scan.parity_star,
        f_star: scan.f_star,
        p_success: scan.p_star,
        refined,
    };

    let mut outputs = Outputs::default();
    outputs.add("scan.csv", csv.into_bytes());
    outputs.add("argmax.json", json_bytes(&argmax));
    outputs.add("wigner.csv", wigner_csv(&grid));
    Ok(Run {
        outputs,
        engine: template.resolved_engine(),
    })
}

#[derive(Serialize)]
struct GkpReport {
    r: f64,
    p_success: f64,
    params: GkpParams,
    inverse_a: f64,
    fidelity: f64,
    a_seeds: Vec<f64>,
}

pub fn gkp(cfg: &GkpConfig, engine: Option<EngineChoice>) -> Result<Run, CliError> {
    if cfg.scenario.input == InputKind::SinglePhoton {
        return Err(CliError::Config(
            "scenario.input = single-photon is not a GKP breeding input".into(),
        ));
    }
    let window = cfg.window.build()?;
    let r = cfg.scenario.r_or_balanced()?;
    let scenario = cfg.scenario.build(window, r, engine)?;
    let seeds = match cfg.gkp.as_ref().and_then(|g| g.a_seeds.clone()) {
        Some(s) => {
            if let Some(bad) = s.iter().find(|a| a.is_nan() || **a <= 0.0) {
                return Err(CliError::Config(format!("gkp.a_seeds contains {bad}, violating a > 0")));
            }
            s
        }
        None => config::gkp_seeds(scenario.alpha),
    };
    let (state, p) = synthesize_at(&scenario)?;
    let fit: GkpFit = nearest_gkp(&state, &seeds).map_err(CliError::engine("nearest GKP"))?;
    let grid = wigner_of(&state, &cfg.wigner, (scenario.n_total as f64).sqrt() * scenario.alpha)?;
    let report = GkpReport {
        r,
        p_success: p,
        params: fit.params,
        inverse_a: 1.0 / fit.params.a,
        fidelity: fit.fidelity,
        a_seeds: seeds,
    };
    let mut outputs = Outputs::default();
    outputs.add("gkp_fit.json", json_bytes(&report));
    outputs.add("wigner.csv", wigner_csv(&grid));
    Ok(Run {
        outputs,
        engine: scenario.resolved_engine(),
    })
}

#[derive(Serialize)]
struct FeedRow {
    n_total: usize,
    dx: f64,
    r: f64,
    p_success: f64,
    fit: SqueezedCatFit,
}

pub fn fock_feed(cfg: &FockFeedConfig, engine: Option<EngineChoice>) -> Result<Run, CliError> {
    let sweep = &cfg.sweep;
    if sweep.n_values.is_empty() {
        return Err(CliError::Config("sweep.n_values must not be empty".into()));
    }
    if sweep.dx_values.is_empty() {
        return Err(CliError::Config("sweep.dx_values must not be empty".into()));
    }
    for &n in &sweep.n_values {
        check_n_total(n, "sweep.n_values")?;
    }
    for &dx in &sweep.dx_values {
        check_dx(dx, "sweep.dx_values")?;
    }
    if let Some(r) = sweep.r {
        check_r(r, "sweep.r")?;
    }
    let center = cfg.window.clone().unwrap_or(CenterSection { theta: 0.0, x0: 0.0 });

    let mut rows = Vec::new();
    let mut outputs = Outputs::default();
    for &n in &sweep.n_values {
        let mut best: Option<(FeedRow, ModeState)> = None;
        for &dx in &sweep.dx_values {
            let window = center.window(Some(dx))?;
            let mut template = ScenarioConfig::new(
                InputKind::SinglePhoton,
                0.0,
                n,
                sweep.r.unwrap_or(R_PLACEHOLDER),
                window,
            );
            if let Some(e) = engine {
                template = template.with_engine(e);
            }
            if let Some(d) = sweep.fock_dim {
                template = template.with_fock_dim(d);
            }
            template.validate()?;
            let context = format!("single-photon feed N = {n}, dx = {dx}");
            let (r, p, fit, state) = match sweep.r {
                Some(r) => {
                    let (state, p) = synthesize_at(&template)?;
                    let fit = nearest_squeezed_cat(&state).map_err(CliError::engine(context))?;
                    (r, p, fit, state)
                }
                None => {
                    let (opt, fit) = best_squeezed_cat_over_r(&template).map_err(CliError::engine(context))?;
                    let (state, _) = synthesize_at(&template.clone().with_r(opt.r))?;
                    (opt.r, opt.p_success, fit, state)
                }
            };
            let row = FeedRow {
                n_total: n,
                dx,
                r,
                p_success: p,
                fit,
            };
            if best.as_ref().is_none_or(|(b, _)| row.fit.fidelity > b.fit.fidelity) {
                best = Some((row, state));
            }
        }
        let (row, state) = best.expect("dx_values is non-empty");
        let grid = wigner_of(&state, &cfg.wigner, row.fit.alpha)?;
        outputs.add(format!("wigner_N{n}.csv"), wigner_csv(&grid));
        rows.push(row);
    }
    outputs.add("squeezed_fits.json", json_bytes(&rows));
    Ok(Run {
        outputs,
        engine: Engine::Fock,
    })
}

pub fn success_compare_cmd(cfg: &SuccessCompareConfig, engine: Option<EngineChoice>) -> Result<Run, CliError> {
    let center = cfg.window.clone().unwrap_or(CenterSection { theta: 0.0, x0: 0.0 });
    let mut dxs: Vec<Option<f64>> = Vec::new();
    for &dx in &cfg.compare.dx_values {
        check_dx(dx, "compare.dx_values")?;
        dxs.push(Some(dx));
    }
    if cfg.compare.include_infinite {
        dxs.push(None);
    }
    if dxs.is_empty() {
        return Err(CliError::Config(
            "compare.dx_values is empty and include_infinite is false".into(),
        ));
    }
    let r = cfg.scenario.required_r()?;
    let template = cfg.scenario.build(center.window(dxs[0])?, r, engine)?;
    let rows = success_compare(&template, &dxs).map_err(CliError::engine("success comparison"))?;
    let mut csv = Csv::new(&["dx_sigma0", "p_multiplexed", "p_iterative"]);
    for row in &rows {
        csv.row(&[
            row.dx.map_or("inf".into(), num),
            num(row.p_multiplexed),
            num(row.p_iterative),
        ]);
    }
    let mut outputs = Outputs::default();
    outputs.add("success.csv", csv.into_bytes());
    Ok(Run {
        outputs,
        engine: template.resolved_engine(),
    })
}

#[derive(Serialize)]
struct WignerSummary {
    p_success: f64,
    mean_photon_number: f64,
    integral: f64,
    min: f64,
    max: f64,
}

pub fn wigner_cmd(cfg: &WignerConfig, engine: Option<EngineChoice>) -> Result<Run, CliError> {
    let window: HomodyneWindow = cfg.window.build()?;
    let r = cfg.scenario.required_r()?;
    let scenario = cfg.scenario.build(window, r, engine)?;
    let (state, p) = synthesize_at(&scenario)?;
    let nbar = state.mean_photon_number();
    let grid = wigner_of(&state, &cfg.wigner, nbar.max(0.0).sqrt())?;
    let summary = WignerSummary {
        p_success: p,
        mean_photon_number: nbar,
        integral: grid.integral(),
        min: grid.min(),
        max: grid.max(),
    };
    let mut outputs = Outputs::default();
    outputs.add("wigner.csv", wigner_csv(&grid));
    outputs.add("summary.json", json_bytes(&summary));
    Ok(Run {
        outputs,
        engine: scenario.resolved_engine(),
    })
}

/// Parses the config at `path` for `command`, runs it and returns the
/// config echo alongside the run.
pub fn dispatch(
    command: &str,
    path: &Path,
    engine: Option<EngineChoice>,
) -> Result<(Run, serde_json::Value), CliError> {
    fn echo<T: Serialize>(c: &T) -> serde_json::Value {
        serde_json::to_value(c).expect("config is serializable")
    }
    match command {
        "breed-cats" => {
            let c: BreedCatsConfig = config::load(path)?;
            Ok((breed_cats(&c, engine)?, echo(&c)))
        }
        "gkp" => {
            let c: GkpConfig = config::load(path)?;
            Ok((gkp(&c, engine)?, echo(&c)))
        }
        "fock-feed" => {
            let c: FockFeedConfig = config::load(path)?;
            Ok((fock_feed(&c, engine)?, echo(&c)))
        }
        "success-compare" => {
            let c: SuccessCompareConfig = config::load(path)?;
            Ok((success_compare_cmd(&c, engine)?, echo(&c)))
        }
        "wigner" => {
            let c: WignerConfig = config::load(path)?;
            Ok((wigner_cmd(&c, engine)?, echo(&c)))
        }
        other => Err(CliError::Config(format!("unknown command {other}"))),
    }
}
