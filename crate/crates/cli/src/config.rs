//! TOML run configurations, one shape per subcommand.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::path::Path;

use synth_core::protocol::{EngineChoice, InputKind, ScenarioConfig, SeedSpec};
use synth_core::HomodyneWindow;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub input: InputKind,
    #[serde(default)]
    pub alpha: f64,
    pub n_total: usize,
    /// Final reflectivity; required by commands that do not search it.
    pub r: Option<f64>,
    #[serde(default)]
    pub engine: EngineChoice,
    pub fock_dim: Option<usize>,
    pub seed: Option<SeedSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    pub input: InputKind,
    #[serde(default)]
    pub alpha: f64,
}

/// Window in σ₀ units; `dx` absent means the infinite window.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub x0: f64,
    pub dx: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSection {
    #[serde(default = "default_points")]
    pub points: usize,
    /// Half-width of the square grid in natural units; derived from the
    /// state when absent.
    pub half_width: Option<f64>,
}

fn default_points() -> usize {
    201
}

impl Default for WignerSection {
    fn default() -> Self {
        Self {
            points: default_points(),
            half_width: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_step")]
    pub r_step: f64,
    #[serde(default)]
    pub gamma_min: f64,
    /// Defaults to `1.5 √N α + 1`.
    pub gamma_max: Option<f64>,
    #[serde(default = "default_step")]
    pub gamma_step: f64,
}

fn default_r_min() -> f64 {
    0.05
}
fn default_r_max() -> f64 {
    0.95
}
fn default_step() -> f64 {
    0.05
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            r_min: default_r_min(),
            r_max: default_r_max(),
            r_step: default_step(),
            gamma_min: 0.0,
            gamma_max: None,
            gamma_step: default_step(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreedCatsConfig {
    pub scenario: ScenarioSection,
    pub window: WindowSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub wigner: WignerSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkpSection {
    /// Extra tooth spacings seeding the fit; defaults to `2√π` and `2√2 α`.
    pub a_seeds: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkpConfig {
    pub scenario: ScenarioSection,
    #[serde(default = "p_window")]
    pub window: WindowSection,
    pub gkp: Option<GkpSection>,
    #[serde(default)]
    pub wigner: WignerSection,
}

fn p_window() -> WindowSection {
    WindowSection {
        theta: FRAC_PI_2,
        x0: 0.0,
        dx: Some(0.1),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n_values: Vec<usize>,
    /// Candidate window widths (σ₀); the best per `N` is reported.
    #[serde(default = "default_dx_values")]
    pub dx_values: Vec<f64>,
    /// Fixed reflectivity instead of searching it.
    pub r: Option<f64>,
    pub fock_dim: Option<usize>,
}

fn default_dx_values() -> Vec<f64> {
    vec![0.1]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterSection {
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub x0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockFeedConfig {
    pub sweep: SweepSection,
    pub window: Option<CenterSection>,
    #[serde(default)]
    pub wigner: WignerSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub dx_values: Vec<f64>,
    /// Adds the infinite-window row.
    #[serde(default)]
    pub include_infinite: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuccessCompareConfig {
    pub scenario: ScenarioSection,
    pub window: Option<CenterSection>,
    pub compare: CompareSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    pub scenario: ScenarioSection,
    pub window: WindowSection,
    #[serde(default)]
    pub wigner: WignerSection,
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn invariant(ok: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

pub fn check_n_total(n: usize, field: &str) -> Result<(), CliError> {
    invariant(n >= 2, || {
        format!("{field} = {n} violates N >= 2: the protocol requires at least one feed and a seed")
    })
}

pub fn check_r(r: f64, field: &str) -> Result<(), CliError> {
    invariant(r > 0.0 && r < 1.0, || format!("{field} = {r} violates 0 < r < 1"))
}

pub fn check_dx(dx: f64, field: &str) -> Result<(), CliError> {
    invariant(dx > 0.0 && dx.is_finite(), || {
        format!("{field} = {dx} violates dx > 0 (omit dx for the infinite window)")
    })
}

impl WindowSection {
    pub fn build(&self) -> Result<HomodyneWindow, CliError> {
        invariant(self.theta.is_finite() && self.x0.is_finite(), || {
            "window.theta and window.x0 must be finite".to_string()
        })?;
        match self.dx {
            Some(dx) => {
                check_dx(dx, "window.dx")?;
                Ok(HomodyneWindow::new(self.theta, self.x0, dx)?)
            }
            None => Ok(HomodyneWindow::infinite(self.theta)),
        }
    }
}

impl CenterSection {
    pub fn window(&self, dx: Option<f64>) -> Result<HomodyneWindow, CliError> {
        WindowSection {
            theta: self.theta,
            x0: self.x0,
            dx,
        }
        .build()
    }
}

impl WignerSection {
    pub fn axis(&self, default_half_width: f64) -> Result<Vec<f64>, CliError> {
        invariant(self.points >= 2, || {
            format!("wigner.points = {} violates points >= 2", self.points)
        })?;
        let half = self.half_width.unwrap_or(default_half_width);
        invariant(half > 0.0 && half.is_finite(), || {
            format!("wigner.half_width = {half} violates half_width > 0")
        })?;
        let n = self.points;
        Ok((0..n).map(|k| -half + 2.0 * half * k as f64 / (n - 1) as f64).collect())
    }
}

impl ScanSection {
    pub fn r_grid(&self) -> Result<Vec<f64>, CliError> {
        check_r(self.r_min, "scan.r_min")?;
        check_r(self.r_max, "scan.r_max")?;
        invariant(self.r_min <= self.r_max, || {
            "scan.r_min must not exceed scan.r_max".into()
        })?;
        invariant(self.r_step > 0.0, || {
            format!("scan.r_step = {} violates step > 0", self.r_step)
        })?;
        Ok(synth_core::optimize::grid(self.r_min, self.r_max, self.r_step))
    }

    pub fn gamma_grid(&self, n_total: usize, alpha: f64) -> Result<Vec<f64>, CliError> {
        let hi = self.gamma_max.unwrap_or(1.5 * (n_total as f64).sqrt() * alpha + 1.0);
        invariant(self.gamma_min >= 0.0 && hi > self.gamma_min, || {
            format!(
                "scan gamma range [{}, {hi}] violates 0 <= gamma_min < gamma_max",
                self.gamma_min
            )
        })?;
        invariant(self.gamma_step > 0.0, || {
            format!("scan.gamma_step = {} violates step > 0", self.gamma_step)
        })?;
        Ok(synth_core::optimize::grid(self.gamma_min, hi, self.gamma_step))
    }
}

impl ScenarioSection {
    /// Scenario with the reflectivity `r` (either the configured one or a
    /// search placeholder) and the engine override applied.
    pub fn build(
        &self,
        window: HomodyneWindow,
        r: f64,
        engine: Option<EngineChoice>,
    ) -> Result<ScenarioConfig, CliError> {
        check_n_total(self.n_total, "scenario.n_total")?;
        check_r(r, "scenario.r")?;
        invariant(self.alpha >= 0.0 && self.alpha.is_finite(), || {
            format!("scenario.alpha = {} violates alpha >= 0", self.alpha)
        })?;
        let mut cfg = ScenarioConfig::new(self.input, self.alpha, self.n_total, r, window)
            .with_engine(engine.unwrap_or(self.engine));
        cfg.fock_dim = self.fock_dim;
        cfg.seed = self.seed.as_ref().map(|s| SeedSpec {
            input: s.input,
            alpha: s.alpha,
        });
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn required_r(&self) -> Result<f64, CliError> {
        let r = self
            .r
            .ok_or_else(|| CliError::Config("scenario.r is required for this command".into()))?;
        check_r(r, "scenario.r")?;
        Ok(r)
    }

    /// Configured `r`, or the balanced breeding point `1/√N`.
    pub fn r_or_balanced(&self) -> Result<f64, CliError> {
        match self.r {
            Some(r) => {
                check_r(r, "scenario.r")?;
                Ok(r)
            }
            None => Ok(1.0 / (self.n_total.max(1) as f64).sqrt()),
        }
    }
}

/// Default GKP spacing seeds for cat inputs of amplitude `alpha`.
pub fn gkp_seeds(alpha: f64) -> Vec<f64> {
    let mut seeds = vec![2.0 * PI.sqrt()];
    if alpha > 0.0 {
        seeds.push(2.0 * std::f64::consts::SQRT_2 * alpha);
    }
    seeds
}

/// Unused-`r` placeholder for commands that search the reflectivity.
pub const R_PLACEHOLDER: f64 = FRAC_1_SQRT_2;
