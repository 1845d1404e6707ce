//! Runs a resolved experiment and writes its bundle: `series.csv`,
//! `summary.json` and `MANIFEST.json`.
//!
//! The CSV and summary depend only on the configuration (reductions are
//! ordered by chunk, not by thread), so reruns reproduce them byte for byte.
//! The manifest carries the wall time and therefore differs between runs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, ExperimentKind, Resolved};
use super::fit::{fit_power_law, log_log_slope};
use crate::error::{Error, Result};
use crate::flow::{build, stream};
use crate::mixing::{cos_x, decay_series, envelope_check, mixing_norm_exact, Target};
use crate::oscint::{operation_count, stationary_phase_constant, PhaseTable, TrigPolynomial, OPERATION_BUDGET};
use crate::par;
use crate::pseudospec::{c1, log_deltas, omega1_scaling};
use crate::viscous::{config_for_nu, nu_sweep, plane_wave, solve, Profile, ViscousRunConfig};

/// One asserted bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub kind: String,
    pub p: u32,
    pub q: u32,
    pub alpha: f64,
    pub m: Option<u32>,
    /// Kind-specific measurements and the predictions they are compared to.
    pub result: Value,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

/// Computed experiment before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub summary: Summary,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: Summary,
    pub files: Vec<PathBuf>,
    pub wall_time: f64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    kind: &'a str,
    config_sha256: String,
    version: &'static str,
    wall_time_s: f64,
    files: Vec<String>,
}

/// Runs the experiment and returns its summary and CSV without touching
/// the file system.
pub fn execute(r: &Resolved) -> Result<Report> {
    let mut ctx = Ctx {
        r,
        csv: String::new(),
        checks: Vec::new(),
        warnings: Vec::new(),
        m: r.m,
    };
    let result = match r.kind {
        ExperimentKind::Mixing => ctx.mixing(),
        ExperimentKind::FastTimes => ctx.fast_times(),
        ExperimentKind::Sharpness => ctx.sharpness(),
        ExperimentKind::OscillatoryBound => ctx.oscillatory_bound(),
        ExperimentKind::Omega1 => ctx.omega1(),
        ExperimentKind::DissipationSweep => ctx.dissipation_sweep(),
    }?;
    let pass = ctx.checks.iter().all(|c| c.pass);
    Ok(Report {
        summary: Summary {
            kind: r.kind.name().to_string(),
            p: r.params.p(),
            q: r.params.q(),
            alpha: r.params.alpha(),
            m: ctx.m,
            result,
            checks: ctx.checks,
            warnings: ctx.warnings,
            pass,
        },
        csv: ctx.csv,
    })
}

/// Resolves, executes and writes the bundle into the configured directory.
pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    let resolved = config.resolve()?;
    run_resolved(config, &resolved)
}

/// Loads a config file and runs it; every error names the file.
pub fn run_file(path: &Path) -> Result<Outcome> {
    let wrap = |e: Error| Error::Config {
        path: path.display().to_string(),
        source: Box::new(e),
    };
    let text = std::fs::read_to_string(path).map_err(|e| wrap(e.into()))?;
    let config = ExperimentConfig::from_json(&text).map_err(wrap)?;
    run(&config).map_err(wrap)
}

fn run_resolved(config: &ExperimentConfig, r: &Resolved) -> Result<Outcome> {
    let start = Instant::now();
    let report = execute(r).map_err(|e| Error::Config {
        path: format!("kind = {}", r.kind.name()),
        source: Box::new(e),
    })?;
    let wall_time = start.elapsed().as_secs_f64();
    let dir = &r.output_dir;
    std::fs::create_dir_all(dir)?;
    let series = dir.join("series.csv");
    let summary = dir.join("summary.json");
    let manifest = dir.join("MANIFEST.json");
    std::fs::write(&series, &report.csv)?;
    std::fs::write(&summary, serde_json::to_string_pretty(&report.summary)? + "\n")?;
    let hash = Sha256::digest(serde_json::to_vec(config)?);
    let m = Manifest {
        kind: r.kind.name(),
        config_sha256: hash.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        }),
        version: env!("CARGO_PKG_VERSION"),
        wall_time_s: wall_time,
        files: vec!["series.csv".into(), "summary.json".into()],
    };
    std::fs::write(&manifest, serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(Outcome {
        summary: report.summary,
        files: vec![series, summary, manifest],
        wall_time,
    })
}

struct Ctx<'a> {
    r: &'a Resolved,
    csv: String,
    checks: Vec<Check>,
    warnings: Vec<String>,
    m: Option<u32>,
}

fn within(value: f64, predicted: f64, tol: f64) -> bool {
    (value - predicted).abs() <= tol
}

impl Ctx<'_> {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check::new(name, pass, detail));
    }

    fn line(&mut self, args: std::fmt::Arguments) {
        self.csv.write_fmt(args).expect("writing to a String");
        self.csv.push('\n');
    }

    /// The configured window, or the whole range minus its first decade when
    /// the range spans more than two decades.
    fn window(&self, xs: &[f64]) -> Option<(f64, f64)> {
        self.r.fit_window.or_else(|| {
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(0.0, f64::max);
            (hi / lo > 100.0).then_some((10.0 * lo, hi))
        })
    }

    fn mixing(&mut self) -> Result<Value> {
        let r = self.r;
        let fp = r.params;
        let grid = r.times.as_ref().expect("resolved");
        let pts = grid.points(&fp)?;
        let t_max = pts.last().map(|p| p.0).unwrap_or(0.0);
        let (m, target) = match (r.m, r.phase_tol) {
            (Some(m), _) => (m, Target::Level),
            (None, Some(tol)) => (fp.min_level_for_phase(t_max, tol), Target::Limit { phase_tol: tol }),
            (None, None) => unreachable!("resolve fixes one of m and phase_tol"),
        };
        self.m = Some(m);
        let flow = build(fp, m)?;
        let series = decay_series(&flow, &cos_x(), &pts, target, "cos x")?;
        self.line(format_args!("t,norm,k,norm_k"));
        for (i, &t) in series.times.iter().enumerate() {
            for mode in &series.per_k {
                self.line(format_args!("{t},{},{},{}", series.values[i], mode.k, mode.values[i]));
            }
        }
        // special times carry their own exponents; the generic rate is fitted
        // on the remaining points
        let (xs, ys): (Vec<f64>, Vec<f64>) = series
            .times
            .iter()
            .zip(&series.values)
            .zip(&series.special)
            .filter(|(_, s)| s.is_none())
            .map(|((t, v), _)| (*t, *v))
            .unzip();
        let fit = fit_power_law(&xs, &ys, self.window(&xs))?;
        let predicted = -1.0;
        self.check(
            "generic-rate",
            within(fit.exponent, predicted, r.exponent_tol),
            format!("slope {:.4} vs {predicted} ± {}", fit.exponent, r.exponent_tol),
        );
        let alpha = fp.alpha();
        let env = envelope_check(&series, 0.9 * alpha, alpha)?;
        self.check(
            "envelope",
            env.constant > 0.0 && env.relative > 1e-6,
            format!("min norm·t^(1/α') = {:.4e} ({:.3e} of initial)", env.constant, env.relative),
        );
        Ok(json!({
            "slope": fit.exponent,
            "predicted": predicted,
            "fit": fit,
            "target": match target { Target::Level => "level".to_string(), Target::Limit { phase_tol } => format!("limit (phase_tol {phase_tol})") },
            "envelope": env,
        }))
    }

    fn special_norms(&mut self, fast: bool) -> Result<(Vec<f64>, Vec<f64>)> {
        let r = self.r;
        let fp = r.params;
        let m = r.m.expect("resolved");
        let flow = build(fp, m)?;
        let levels: Vec<u32> = (r.levels.0..=r.levels.1).collect();
        let times: Vec<f64> = levels
            .iter()
            .map(|&k| {
                let (tm, tpm) = fp.special_times(k);
                if fast {
                    tm
                } else {
                    tpm
                }
            })
            .collect();
        let norms = par::map_items(&times, |&t| mixing_norm_exact(&flow, &cos_x(), t))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        if levels.iter().any(|&k| k >= m) {
            self.warnings.push(format!(
                "special times of level >= m = {m} probe u_{m} beyond its own scale"
            ));
        }
        let e = if fast { 1.0 / fp.alpha() } else { 1.0 };
        self.line(format_args!("m,t,norm,scaled"));
        for ((k, t), v) in levels.iter().zip(&times).zip(&norms) {
            self.line(format_args!("{k},{t},{v},{}", v * t.powf(e)));
        }
        Ok((times, norms))
    }

    fn fast_times(&mut self) -> Result<Value> {
        let (times, norms) = self.special_norms(true)?;
        let slope = log_log_slope(&times, &norms)?;
        let predicted = -1.0 / self.r.params.alpha();
        let tol = self.r.exponent_tol;
        self.check(
            "fast-rate",
            within(slope, predicted, tol),
            format!("slope {slope:.4} vs {predicted:.4} ± {tol}"),
        );
        Ok(json!({ "slope": slope, "predicted": predicted, "times": times, "norms": norms }))
    }

    fn sharpness(&mut self) -> Result<Value> {
        let (times, norms) = self.special_norms(false)?;
        let scaled: Vec<f64> = times.iter().zip(&norms).map(|(t, v)| t * v).collect();
        let hi = scaled.iter().cloned().fold(0.0, f64::max);
        let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratio = hi / lo;
        let factor = self.r.factor;
        self.check(
            "sharp-rate",
            lo > 0.0 && ratio < factor,
            format!("max/min of norm·t' = {ratio:.4} (< {factor})"),
        );
        Ok(json!({ "ratio": ratio, "scaled": scaled, "predicted_exponent": -1.0, "times": times }))
    }

    fn oscillatory_bound(&mut self) -> Result<Value> {
        let r = self.r;
        let fp = r.params;
        let times: Vec<f64> = r.times.as_ref().expect("resolved").points(&fp)?.iter().map(|p| p.0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
        let polys: Vec<TrigPolynomial> = (0..r.trials)
            .map(|i| TrigPolynomial::random(&mut rng, r.n_max, i % 2 == 0))
            .collect();
        let w11: Vec<f64> = polys.iter().map(|p| p.w11_norm()).collect();
        let constant = stationary_phase_constant(&fp);
        self.line(format_args!("m,t,trial,value,bound"));
        let mut violations = 0usize;
        let mut worst: f64 = 0.0;
        for m in r.levels.0..=r.levels.1 {
            let flow = build(fp, m)?;
            let ops = operation_count(&flow, &polys[0]) * times.len() as u128;
            if ops > OPERATION_BUDGET {
                self.warnings.push(format!(
                    "level {m}: about {ops:.3e} segment evaluations, over the budget of {OPERATION_BUDGET:.1e}"
                ));
            }
            let rows = par::map_items(&times, |&t| {
                let table = PhaseTable::new(&flow, t, r.n_max);
                polys.iter().map(|phi| table.integrate(phi).norm() * t).collect::<Vec<f64>>()
            });
            for (t, vals) in times.iter().zip(rows) {
                for (i, v) in vals.into_iter().enumerate() {
                    let bound = constant * w11[i];
                    if v > bound {
                        violations += 1;
                    }
                    worst = worst.max(v / bound);
                    self.line(format_args!("{m},{t},{i},{v},{bound}"));
                }
            }
        }
        self.check(
            "uniform-bound",
            violations == 0,
            format!("{violations} violations; largest |∫|·t / bound = {worst:.4}"),
        );
        Ok(json!({ "constant": constant, "violations": violations, "max_ratio": worst }))
    }

    fn omega1(&mut self) -> Result<Value> {
        let r = self.r;
        let fp = r.params;
        let m = r.m.expect("resolved");
        let (lo, hi, n) = r.deltas.expect("resolved");
        let flow = build(fp, m)?;
        let psi = stream(&flow);
        let deltas = log_deltas(lo, hi, n);
        let (res, full_fit) = omega1_scaling(&psi, &deltas)?;
        self.line(format_args!("delta,omega1,lower_bound,center,c1,c2"));
        let mut below = 0;
        for o in &res {
            if o.value < o.lower_bound {
                below += 1;
            }
            self.line(format_args!("{},{},{},{},{},{}", o.delta, o.value, o.lower_bound, o.center, o.c1, o.c2));
        }
        let fit = match r.fit_window {
            Some(w) => fit_power_law(&deltas, &res.iter().map(|o| o.value).collect::<Vec<_>>(), Some(w))?,
            None => full_fit,
        };
        let predicted = 2.0 * fp.alpha() + 3.0;
        self.check(
            "lower-bound",
            below == 0,
            format!("{below} of {} half-widths below C1 δ^(2α+3), C1 = {:.4e}", res.len(), c1(&fp)),
        );
        self.check(
            "scaling",
            within(fit.exponent, predicted, r.exponent_tol),
            format!("slope {:.4} vs {predicted} ± {}", fit.exponent, r.exponent_tol),
        );
        Ok(json!({ "slope": fit.exponent, "predicted": predicted, "c1": c1(&fp), "fit": fit }))
    }

    fn dissipation_sweep(&mut self) -> Result<Value> {
        let r = self.r;
        let fp = r.params;
        let s = r.sweep.as_ref().expect("resolved");
        let mut template = ViscousRunConfig::new(fp, s.nus[0], s.k)?.with_profile(s.profile)?;
        template.threshold = s.threshold;
        let sweep = nu_sweep(&template, &s.nus)?;
        self.warnings.extend(sweep.warnings.iter().cloned());
        let alpha = template.profile_alpha();
        self.line(format_args!("nu,k,tau,steps,n_grid"));
        let tau_str = |t: Option<f64>| t.map(|v| v.to_string()).unwrap_or_default();
        for run in &sweep.runs {
            self.line(format_args!("{},{},{},{},{}", run.nu, run.k, tau_str(run.tau), run.steps, run.n_grid));
        }
        let mut result = json!({
            "beta": sweep.beta,
            "ci95": sweep.beta_ci95,
            "predicted": sweep.predicted,
            "profile": s.profile,
            "fit": sweep.fit,
        });
        let asserted = s.profile == Profile::Fractal;
        if asserted {
            self.check(
                "nu-exponent",
                within(sweep.beta, sweep.predicted, r.exponent_tol),
                format!("β = {:.4} vs {:.4} ± {}", sweep.beta, sweep.predicted, r.exponent_tol),
            );
        }
        if let (Some(k2), Some(nu)) = (s.k_check, s.k_check_nu) {
            let tau_at = |k: i64| -> Result<(Option<f64>, u64, usize)> {
                if let Some(run) = sweep.runs.iter().find(|x| x.k == k && x.nu == nu) {
                    return Ok((run.tau, run.steps, run.n_grid));
                }
                let mut t = template.clone();
                t.k = k;
                let c = config_for_nu(&t, nu)?;
                let rec = solve(&c, plane_wave)?;
                Ok((rec.tau, rec.steps, rec.n_grid))
            };
            let (t1, _, _) = tau_at(s.k)?;
            let (t2, steps, n_grid) = tau_at(k2)?;
            self.line(format_args!("{},{},{},{},{}", nu, k2, tau_str(t2), steps, n_grid));
            let predicted = (k2 as f64 / s.k as f64).abs().powf(-2.0 / (alpha + 2.0));
            match (t1, t2) {
                (Some(a), Some(b)) => {
                    let ratio = b / a;
                    result["k_ratio"] = json!(ratio);
                    result["k_ratio_predicted"] = json!(predicted);
                    if asserted {
                        self.check(
                            "k-exponent",
                            (ratio / predicted - 1.0).abs() <= r.factor - 1.0,
                            format!("τ(k={k2})/τ(k={}) = {ratio:.4} vs {predicted:.4} within {:.0}%", s.k, (r.factor - 1.0) * 100.0),
                        );
                    }
                }
                _ => {
                    self.warnings.push(format!("k check at ν = {nu}: a run did not cross the threshold"));
                    if asserted {
                        self.check("k-exponent", false, "no threshold crossing".into());
                    }
                }
            }
        }
        Ok(result)
    }
}
