//! Experiment configuration: one JSON document per run.
//!
//! ```json
//! { "kind": "mixing", "flow": { "p": 3, "q": 3, "m": 6 },
//!   "times": { "start": 5, "stop": 100, "n": 40, "inject_special": false } }
//! ```
//!
//! Every section other than `kind` and `flow` is optional; [`ExperimentConfig::resolve`]
//! fills in the defaults of the chosen kind and checks all cross-field
//! constraints before anything runs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowParams;
use crate::mixing::TimeGrid;
use crate::viscous::{Profile, DEFAULT_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Mixing,
    FastTimes,
    Sharpness,
    OscillatoryBound,
    Omega1,
    DissipationSweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mixing => "mixing",
            Self::FastTimes => "fast-times",
            Self::Sharpness => "sharpness",
            Self::OscillatoryBound => "oscillatory-bound",
            Self::Omega1 => "omega1",
            Self::DissipationSweep => "dissipation-sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub p: u32,
    pub q: u32,
    /// Level of the approximant; when absent the kind's rule picks it.
    #[serde(default)]
    pub m: Option<u32>,
    /// For `mixing`: pick the smallest level with `t |k| ‖u_m - u‖ <= phase_tol`
    /// and compare against the limit flow instead of `u_m` itself.
    #[serde(default)]
    pub phase_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaGrid {
    /// Smallest half-width; defaults to `4 ℓ_{m-1}`.
    #[serde(default)]
    pub lo: Option<f64>,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub nus: Vec<f64>,
    #[serde(default = "one")]
    pub k: i64,
    /// Extra `k` for the two-point `|k|` exponent check, run at `k_check_nu`.
    #[serde(default)]
    pub k_check: Option<i64>,
    #[serde(default)]
    pub k_check_nu: Option<f64>,
    #[serde(default = "fractal")]
    pub profile: Profile,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn one() -> i64 {
    1
}

fn fractal() -> Profile {
    Profile::Fractal
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

/// Acceptance windows for the asserted bounds. Absent entries take the
/// kind's default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed `|fitted - predicted|` of the main exponent.
    #[serde(default)]
    pub exponent: Option<f64>,
    /// Allowed ratio `max/min` of scaled values (sharpness, `|k|` check
    /// as `1 + tol`).
    #[serde(default)]
    pub factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub flow: FlowSpec,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; defaults to `results/<kind>`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub times: Option<TimeGrid>,
    /// Fit window on the abscissa; defaults drop the first decade for
    /// transient-prone kinds.
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
    /// Inclusive level range for fast-times, sharpness and oscillatory-bound.
    #[serde(default)]
    pub levels: Option<(u32, u32)>,
    /// Random amplitudes per level (oscillatory-bound).
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default)]
    pub deltas: Option<DeltaGrid>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A configuration with every default filled in and every constraint
/// checked.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub kind: ExperimentKind,
    pub params: FlowParams,
    pub m: Option<u32>,
    pub phase_tol: Option<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub times: Option<TimeGrid>,
    pub fit_window: Option<(f64, f64)>,
    pub levels: (u32, u32),
    pub trials: usize,
    pub n_max: usize,
    pub deltas: Option<(f64, f64, usize)>,
    pub sweep: Option<SweepSpec>,
    pub exponent_tol: f64,
    pub factor: f64,
}

fn at(path: &str, e: Error) -> Error {
    Error::Config {
        path: path.to_string(),
        source: Box::new(e),
    }
}

fn invalid(path: &str, msg: impl Into<String>) -> Error {
    at(path, Error::InvalidConfig(msg.into()))
}

/// Deepest level any kind will build by default.
pub const DEFAULT_LEVEL: u32 = 6;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Parses and resolves a config file; errors name the file and the
    /// offending field.
    pub fn load(path: &Path) -> Result<Resolved> {
        let wrap = |e: Error| at(&path.display().to_string(), e);
        let text = std::fs::read_to_string(path).map_err(|e| wrap(e.into()))?;
        Self::from_json(&text).and_then(|c| c.resolve()).map_err(wrap)
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let params = FlowParams::new(self.flow.p, self.flow.q).map_err(|e| {
            let field = if self.flow.p.is_multiple_of(2) || self.flow.p < 3 { "flow.p" } else { "flow.q" };
            at(field, e)
        })?;
        let kind = self.kind;
        if let Some(tol) = self.flow.phase_tol {
            if !(tol > 0.0) {
                return Err(invalid("flow.phase_tol", format!("{tol} must be positive")));
            }
            if kind != ExperimentKind::Mixing {
                return Err(invalid("flow.phase_tol", "only used by the mixing experiment"));
            }
            if self.flow.m.is_some() {
                return Err(invalid("flow.phase_tol", "give either m or phase_tol, not both"));
            }
        }
        let max_level = params.max_level(crate::flow::DEFAULT_MAX_NODES);
        if let Some(m) = self.flow.m {
            if m > max_level {
                return Err(invalid("flow.m", format!("level {m} exceeds the node budget (max {max_level})")));
            }
        }
        let default_m = || Some(self.flow.m.unwrap_or(DEFAULT_LEVEL.min(max_level)));
        let (levels_default, m) = match kind {
            ExperimentKind::Mixing => ((0, 0), if self.flow.phase_tol.is_some() { None } else { default_m() }),
            ExperimentKind::FastTimes => ((1, 3), default_m()),
            ExperimentKind::Sharpness => ((0, 4), default_m()),
            ExperimentKind::OscillatoryBound => ((0, DEFAULT_LEVEL.min(max_level)), None),
            ExperimentKind::Omega1 => ((0, 0), default_m()),
            ExperimentKind::DissipationSweep => {
                if self.flow.m.is_some() {
                    return Err(invalid("flow.m", "the dissipation sweep derives the level from ν"));
                }
                ((0, 0), None)
            }
        };
        let levels = self.levels.unwrap_or(levels_default);
        if levels.0 > levels.1 {
            return Err(invalid("levels", format!("empty range {levels:?}")));
        }
        if kind == ExperimentKind::OscillatoryBound && levels.1 > max_level {
            return Err(invalid("levels", format!("level {} exceeds the node budget", levels.1)));
        }
        if kind == ExperimentKind::FastTimes && levels.1 - levels.0 < 1 {
            return Err(invalid("levels", "a slope across levels needs at least two levels"));
        }

        let times = match (kind, &self.times) {
            (ExperimentKind::Mixing, None) => Some(TimeGrid {
                start: 5.0,
                stop: 100.0,
                n: 40,
                log: true,
                inject_special: false,
            }),
            (ExperimentKind::OscillatoryBound, None) => Some(TimeGrid {
                start: 1.0,
                stop: 1e4,
                n: 200,
                log: true,
                inject_special: false,
            }),
            (ExperimentKind::Mixing | ExperimentKind::OscillatoryBound, Some(t)) => Some(t.clone()),
            (_, Some(_)) => return Err(invalid("times", format!("not used by {}", kind.name()))),
            (_, None) => None,
        };
        if let Some(t) = &times {
            t.points(&params).map_err(|e| at("times", e))?;
        }
        if let Some((lo, hi)) = self.fit_window {
            if !(lo > 0.0 && hi > lo) {
                return Err(invalid("fit_window", format!("[{lo}, {hi}] must satisfy 0 < lo < hi")));
            }
        }

        let deltas = if kind == ExperimentKind::Omega1 {
            let m = m.expect("omega1 has a level");
            if m == 0 {
                return Err(invalid("flow.m", "ω₁ scans need m >= 1"));
            }
            let g = self.deltas.unwrap_or(DeltaGrid { lo: None, hi: 0.5, n: 12 });
            let lo = g.lo.unwrap_or(4.0 * params.ell(m - 1));
            if !(lo >= 2.0 * params.ell(m) && g.hi > lo && g.hi < 1.0 && g.n >= 4) {
                return Err(invalid(
                    "deltas",
                    format!(
                        "need 2ℓ_m = {:.3e} <= lo < hi < 1 and n >= 4, got lo = {lo:.3e}, hi = {}, n = {}",
                        2.0 * params.ell(m),
                        g.hi,
                        g.n
                    ),
                ));
            }
            Some((lo, g.hi, g.n))
        } else if self.deltas.is_some() {
            return Err(invalid("deltas", format!("not used by {}", kind.name())));
        } else {
            None
        };

        let sweep = if kind == ExperimentKind::DissipationSweep {
            let s = self.sweep.clone().unwrap_or(SweepSpec {
                nus: vec![1e-7, 1e-6, 1e-5, 1e-4, 1e-3],
                k: 1,
                k_check: Some(2),
                k_check_nu: Some(1e-5),
                profile: Profile::Fractal,
                threshold: DEFAULT_THRESHOLD,
            });
            if s.k == 0 || s.k_check == Some(0) {
                return Err(invalid("sweep.k", "k must be nonzero"));
            }
            if s.nus.len() < 4 || s.nus.iter().any(|&nu| !(nu > 0.0)) {
                return Err(invalid("sweep.nus", "need at least 4 positive values"));
            }
            let (lo, hi) = s.nus.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
            if hi / lo < 1e3 * (1.0 - 1e-12) {
                return Err(invalid("sweep.nus", "ν grid must span at least 3 decades"));
            }
            for (i, &nu) in s.nus.iter().enumerate() {
                for k in std::iter::once(s.k).chain(s.k_check) {
                    if nu / k.unsigned_abs() as f64 > 0.5 {
                        return Err(invalid(&format!("sweep.nus[{i}]"), format!("ν/|k| = {} exceeds 1/2", nu / k as f64)));
                    }
                }
            }
            if s.k_check.is_some() != s.k_check_nu.is_some() {
                return Err(invalid("sweep.k_check", "k_check and k_check_nu go together"));
            }
            if !(s.threshold > 0.0 && s.threshold < 1.0) {
                return Err(invalid("sweep.threshold", "must lie in (0, 1)"));
            }
            Some(s)
        } else if self.sweep.is_some() {
            return Err(invalid("sweep", format!("not used by {}", kind.name())));
        } else {
            None
        };

        let (tol_default, factor_default) = match kind {
            ExperimentKind::Mixing => (0.15, 2.0),
            ExperimentKind::FastTimes => (0.2, 2.0),
            ExperimentKind::Sharpness => (0.0, 2.0),
            ExperimentKind::OscillatoryBound => (0.0, 1.0),
            ExperimentKind::Omega1 => (0.25, 2.0),
            ExperimentKind::DissipationSweep => (0.08, 1.2),
        };
        let exponent_tol = self.tolerances.exponent.unwrap_or(tol_default);
        let factor = self.tolerances.factor.unwrap_or(factor_default);
        if !(exponent_tol >= 0.0 && factor >= 1.0) {
            return Err(invalid("tolerances", "exponent >= 0 and factor >= 1 required"));
        }
        let trials = self.trials.unwrap_or(10);
        let n_max = self.n_max.unwrap_or(8);
        if trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        Ok(Resolved {
            kind,
            params,
            m,
            phase_tol: self.flow.phase_tol,
            seed: self.seed,
            output_dir: self
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("results").join(kind.name())),
            times,
            fit_window: self.fit_window,
            levels,
            trials,
            n_max,
            deltas,
            sweep,
            exponent_tol,
            factor,
        })
    }
}
