//! Viscous transport of one `x`-mode, `∂_t f = -i k u(y) f + ν ∂_y^2 f`, on a
//! uniform `y`-grid with Strang splitting: exact half-step phase multiplier,
//! exact heat propagator in Fourier space, half-step multiplier again.
//!
//! The `-ν k^2` part of the Laplacian is left out by default (it only
//! multiplies every norm by `e^{-ν k^2 t}`); [`ViscousRunConfig::x_diffusion`]
//! puts it back into the recorded norms.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, FlowParams, PiecewiseLinearFlow};
use crate::par;
use crate::xlab::fit::{fit_power_law, RateFit};

/// Default dissipation threshold: the norm has dropped to `e^{-3}` of its
/// initial value.
pub const DEFAULT_THRESHOLD: f64 = 0.049_787_068_367_863_944;

/// CFL-like bound on `dt |k| ‖u‖_∞`.
pub const MAX_PHASE_STEP: f64 = 0.1;

/// Largest grid accepted without an explicit override.
pub const MAX_GRID: usize = 1 << 22;

/// Shear profile `u(y)` used for the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// The level-`m_res` piecewise linear flow `u_m`.
    Fractal,
    /// `u(y) = sin y`, a smooth control with nondegenerate critical points.
    Sine,
    /// `u ≡ 0`: pure diffusion.
    Zero,
}

/// Predicted decay rate `λ_{ν,k} = ν^{a/(a+2)} |k|^{2/(a+2)}` for a shear of
/// Hölder regularity `a`.
pub fn dissipation_rate(alpha: f64, nu: f64, k: i64) -> f64 {
    nu.powf(alpha / (alpha + 2.0)) * (k.unsigned_abs() as f64).powf(2.0 / (alpha + 2.0))
}

/// Smallest level whose segments resolve the dissipative length
/// `(ν / λ_{ν,k})^{1/2}` four times over.
pub fn min_level_for_nu(params: &FlowParams, nu: f64, k: i64) -> u32 {
    let target = dissipative_length(params.alpha(), nu, k) / 4.0;
    let mut m = 1;
    while params.ell(m) > target {
        m += 1;
    }
    m
}

fn dissipative_length(alpha: f64, nu: f64, k: i64) -> f64 {
    (nu / dissipation_rate(alpha, nu, k)).sqrt()
}

/// One viscous run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViscousRunConfig {
    pub params: FlowParams,
    pub m_res: u32,
    pub profile: Profile,
    pub nu: f64,
    pub k: i64,
    pub dt: f64,
    pub n_grid: usize,
    pub threshold: f64,
    pub t_max: f64,
    /// Multiply recorded norms by `e^{-ν k^2 t}`.
    pub x_diffusion: bool,
    /// Record the norm every this many steps.
    pub sample_every: usize,
}

impl ViscousRunConfig {
    /// Defaults for the fractal shear: smallest admissible level, grid of at
    /// least four points per segment, `dt |k| = 0.1`, horizon `60 / λ_{ν,k}`.
    pub fn new(params: FlowParams, nu: f64, k: i64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "ν = {nu} must be positive (use `inviscid` for ν = 0)"
            )));
        }
        if k == 0 {
            return Err(Error::ZeroMode);
        }
        let m_res = min_level_for_nu(&params, nu, k);
        let lambda = dissipation_rate(params.alpha(), nu, k);
        let cfg = Self {
            params,
            m_res,
            profile: Profile::Fractal,
            nu,
            k,
            dt: MAX_PHASE_STEP / k.unsigned_abs() as f64,
            n_grid: grid_for_level(&params, m_res),
            threshold: DEFAULT_THRESHOLD,
            t_max: 60.0 / lambda,
            x_diffusion: false,
            sample_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `ν = 0` run at a given level.
    pub fn inviscid(params: FlowParams, m_res: u32, k: i64, t_max: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroMode);
        }
        let cfg = Self {
            params,
            m_res,
            profile: Profile::Fractal,
            nu: 0.0,
            k,
            dt: MAX_PHASE_STEP / k.unsigned_abs() as f64,
            n_grid: grid_for_level(&params, m_res),
            threshold: DEFAULT_THRESHOLD,
            t_max,
            x_diffusion: false,
            sample_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same `ν`, `k` with a different shear profile. The grid is re-derived
    /// for the smooth profiles from their own dissipative length.
    pub fn with_profile(mut self, profile: Profile) -> Result<Self> {
        self.profile = profile;
        if profile != Profile::Fractal {
            self.n_grid = self.smooth_grid();
            self.t_max = 60.0 / self.lambda().max(self.nu.max(1e-300));
        }
        self.validate()?;
        Ok(self)
    }

    fn smooth_grid(&self) -> usize {
        let len = if self.nu > 0.0 && self.profile != Profile::Zero {
            dissipative_length(self.profile_alpha(), self.nu, self.k)
        } else {
            1.0
        };
        (((8.0 * PI / len).ceil() as usize).max(256)).next_power_of_two()
    }

    /// Regularity exponent of the profile for rate predictions.
    pub fn profile_alpha(&self) -> f64 {
        match self.profile {
            Profile::Fractal => self.params.alpha(),
            // with nondegenerate critical points the shear behaves like
            // exponent 2 in the rate formula: λ ~ ν^{1/2}
            Profile::Sine => 2.0,
            Profile::Zero => f64::INFINITY,
        }
    }

    /// Predicted `λ_{ν,k}` for this profile (`ν` for pure diffusion).
    pub fn lambda(&self) -> f64 {
        match self.profile {
            Profile::Zero => self.nu,
            _ => dissipation_rate(self.profile_alpha(), self.nu, self.k),
        }
    }

    fn u_max(&self) -> f64 {
        match self.profile {
            Profile::Zero => 0.0,
            _ => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k == 0 {
            return Err(Error::ZeroMode);
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return bad(format!("ν = {} must be finite and non-negative", self.nu));
        }
        let ka = self.k.unsigned_abs() as f64;
        if self.nu / ka > 0.5 {
            return bad(format!("ν/|k| = {} exceeds 1/2", self.nu / ka));
        }
        if !(self.dt > 0.0) || self.dt * ka * self.u_max() > MAX_PHASE_STEP * (1.0 + 1e-12) {
            return bad(format!(
                "dt = {} violates dt·|k|·‖u‖∞ <= {MAX_PHASE_STEP}",
                self.dt
            ));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold {} must lie in (0, 1)", self.threshold));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max = {} must be positive", self.t_max));
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        if !self.n_grid.is_power_of_two() || self.n_grid < 16 {
            return bad(format!("n_grid = {} must be a power of two >= 16", self.n_grid));
        }
        if self.n_grid > MAX_GRID {
            return bad(format!("n_grid = {} exceeds the limit {MAX_GRID}", self.n_grid));
        }
        if self.profile == Profile::Fractal {
            let n = self.params.n_nodes(self.m_res);
            if (self.n_grid as u128) < 4 * n {
                return bad(format!(
                    "n_grid = {} gives fewer than 4 points per segment at level {} ({} segments)",
                    self.n_grid, self.m_res, n
                ));
            }
            if self.nu > 0.0 {
                let len = dissipative_length(self.params.alpha(), self.nu, self.k);
                if self.params.ell(self.m_res) > len / 4.0 * (1.0 + 1e-12) {
                    return bad(format!(
                        "level {} does not resolve the dissipative length {len:.3e}; use m_res >= {}",
                        self.m_res,
                        min_level_for_nu(&self.params, self.nu, self.k)
                    ));
                }
            }
        }
        Ok(())
    }
}

fn grid_for_level(params: &FlowParams, m: u32) -> usize {
    let n = (4 * params.n_nodes(m)).min(1 << 62) as usize;
    n.next_power_of_two().max(16)
}

/// Collocation points `y_j = -π + 2π j / n`.
pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| -PI + 2.0 * PI * j as f64 / n as f64).collect()
}

fn profile_values(cfg: &ViscousRunConfig) -> Result<Vec<f64>> {
    let ys = grid(cfg.n_grid);
    Ok(match cfg.profile {
        Profile::Fractal => {
            let flow = flow::build(cfg.params, cfg.m_res)?;
            sample_flow(&flow, &ys)
        }
        Profile::Sine => ys.iter().map(|y| y.sin()).collect(),
        Profile::Zero => vec![0.0; ys.len()],
    })
}

fn sample_flow(flow: &PiecewiseLinearFlow, ys: &[f64]) -> Vec<f64> {
    ys.iter().map(|&y| flow.evaluate(y)).collect()
}

fn wavenumber(j: usize, n: usize) -> f64 {
    if j < n / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    }
}

/// Precomputed multipliers and FFT plans for a fixed `dt`.
pub struct Stepper {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    u: Vec<f64>,
    k: f64,
    nu: f64,
    dt: f64,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    heat: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl Stepper {
    pub fn new(cfg: &ViscousRunConfig) -> Result<Self> {
        cfg.validate()?;
        let u = profile_values(cfg)?;
        Ok(Self::from_profile(u, cfg.k as f64, cfg.nu, cfg.dt))
    }

    /// Stepper for explicit collocation values of the shear.
    pub fn from_profile(u: Vec<f64>, k: f64, nu: f64, dt: f64) -> Self {
        let n = u.len();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        let mut s = Self {
            fwd,
            inv,
            u,
            k,
            nu,
            dt,
            half: Vec::new(),
            full: Vec::new(),
            heat: Vec::new(),
            scratch,
        };
        s.set_dt(dt);
        s
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_grid(&self) -> usize {
        self.u.len()
    }

    fn set_dt(&mut self, dt: f64) {
        let n = self.u.len();
        self.dt = dt;
        self.half = self.u.iter().map(|&u| Complex64::cis(-self.k * u * dt / 2.0)).collect();
        self.full = self.u.iter().map(|&u| Complex64::cis(-self.k * u * dt)).collect();
        // the 1/n of the inverse transform is folded in here
        self.heat = (0..n)
            .map(|j| (-self.nu * wavenumber(j, n).powi(2) * dt).exp() / n as f64)
            .collect();
    }

    fn diffuse(&mut self, state: &mut [Complex64]) {
        self.fwd.process_with_scratch(state, &mut self.scratch);
        for (c, h) in state.iter_mut().zip(&self.heat) {
            *c *= h;
        }
        self.inv.process_with_scratch(state, &mut self.scratch);
    }

    /// One Strang step on collocation values.
    pub fn step(&mut self, state: &mut [Complex64]) {
        assert_eq!(state.len(), self.u.len(), "state length must equal n_grid");
        mul(state, &self.half);
        self.diffuse(state);
        mul(state, &self.half);
    }
}

fn mul(state: &mut [Complex64], by: &[Complex64]) {
    for (s, m) in state.iter_mut().zip(by) {
        *s *= m;
    }
}

/// One Strang step of size `cfg.dt` (builds the multipliers on every call;
/// use [`Stepper`] or [`Simulation`] for repeated steps).
pub fn step(state: &[Complex64], cfg: &ViscousRunConfig) -> Result<Vec<Complex64>> {
    if state.len() != cfg.n_grid {
        return Err(Error::InvalidInput(format!(
            "state has {} values, n_grid is {}",
            state.len(),
            cfg.n_grid
        )));
    }
    let mut st = Stepper::new(cfg)?;
    let mut out = state.to_vec();
    st.step(&mut out);
    Ok(out)
}

/// `(2π/n Σ |f_j|^2)^{1/2}`.
pub fn l2_norm(state: &[Complex64]) -> f64 {
    let s: f64 = state.iter().map(|c| c.norm_sqr()).sum();
    (s * 2.0 * PI / state.len() as f64).sqrt()
}

/// Unitary Fourier coefficients `c_n`, `n = -n/2 .. n/2 - 1`, of collocation
/// values.
pub fn fourier_coefficients(state: &[Complex64]) -> Vec<(i64, Complex64)> {
    let n = state.len();
    let mut buf = state.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // c_n = (2π)^{-1/2} (2π/n) Σ f_j e^{-i n y_j}, y_j = -π + 2πj/n
    let scale = (2.0 * PI).sqrt() / n as f64;
    let mut out: Vec<(i64, Complex64)> = buf
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let w = wavenumber(j, n);
            let shift = Complex64::cis(w * PI);
            (w as i64, c * shift * scale)
        })
        .collect();
    out.sort_by_key(|e| e.0);
    out
}

/// `(Σ (1 + n^2)^{-1} |c_n|^2)^{1/2}` of collocation values.
pub fn hminus1_norm(state: &[Complex64]) -> f64 {
    fourier_coefficients(state)
        .iter()
        .map(|(n, c)| c.norm_sqr() / (1.0 + (*n as f64).powi(2)))
        .sum::<f64>()
        .sqrt()
}

/// Time-stepping state. Consecutive half multipliers are fused, so between
/// calls the stored values may still owe the trailing half multiplier;
/// accessors apply it.
pub struct Simulation {
    stepper: Stepper,
    state: Vec<Complex64>,
    lagging: bool,
    t: f64,
    steps: u64,
}

impl Simulation {
    pub fn new<F: Fn(f64) -> Complex64>(cfg: &ViscousRunConfig, f_in: F) -> Result<Self> {
        let stepper = Stepper::new(cfg)?;
        let state = grid(cfg.n_grid).into_iter().map(f_in).collect();
        Ok(Self {
            stepper,
            state,
            lagging: false,
            t: 0.0,
            steps: 0,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// `L^2` norm of the current solution (the pending multiplier is
    /// unimodular).
    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.state)
    }

    /// Collocation values of the current solution.
    pub fn state(&self) -> Vec<Complex64> {
        let mut out = self.state.clone();
        if self.lagging {
            mul(&mut out, &self.stepper.half);
        }
        out
    }

    fn advance(&mut self) {
        if self.lagging {
            mul(&mut self.state, &self.stepper.full);
        } else {
            mul(&mut self.state, &self.stepper.half);
        }
        self.stepper.diffuse(&mut self.state);
        self.lagging = true;
        self.t += self.stepper.dt;
        self.steps += 1;
    }

    fn settle(&mut self) {
        if self.lagging {
            mul(&mut self.state, &self.stepper.half);
            self.lagging = false;
        }
    }

    /// One full step of the configured size.
    pub fn step(&mut self) {
        self.advance();
    }

    /// Steps to exactly `t` (the last step is shortened if needed).
    pub fn run_until(&mut self, t: f64) {
        let dt = self.stepper.dt;
        while self.t + dt <= t * (1.0 + 1e-14) {
            self.advance();
        }
        let rest = t - self.t;
        if rest > 1e-14 * t.abs().max(1.0) {
            self.settle();
            self.stepper.set_dt(rest);
            self.advance();
            self.settle();
            self.stepper.set_dt(dt);
            self.t = t;
        }
    }
}

/// Norm history of one run and the measured dissipation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// First time the norm reaches `threshold · initial` (log-linear
    /// interpolation between samples); `None` if the horizon came first.
    pub tau: Option<f64>,
    pub steps: u64,
    pub n_grid: usize,
    pub m_res: u32,
}

impl DecayRecord {
    pub fn crossed(&self) -> bool {
        self.tau.is_some()
    }
}

/// Integrates until the norm falls below `threshold` times its initial value
/// or `t_max` is reached.
pub fn solve<F: Fn(f64) -> Complex64>(cfg: &ViscousRunConfig, f_in: F) -> Result<DecayRecord> {
    let mut sim = Simulation::new(cfg, f_in)?;
    let x_factor = |t: f64| {
        if cfg.x_diffusion {
            (-cfg.nu * (cfg.k as f64).powi(2) * t).exp()
        } else {
            1.0
        }
    };
    let n0 = sim.l2_norm();
    if n0 == 0.0 {
        return Err(Error::InvalidInput("initial data is zero".into()));
    }
    let target = cfg.threshold * n0;
    let mut times = vec![0.0];
    let mut norms = vec![n0];
    let mut tau = None;
    let (mut t_prev, mut n_prev) = (0.0, n0);
    while sim.time() < cfg.t_max {
        sim.step();
        let t = sim.time();
        let n = sim.l2_norm() * x_factor(t);
        if n <= target {
            let w = (n_prev / target).ln() / (n_prev / n).ln();
            tau = Some(t_prev + w * (t - t_prev));
            times.push(t);
            norms.push(n);
            break;
        }
        if sim.steps() % cfg.sample_every as u64 == 0 {
            times.push(t);
            norms.push(n);
        }
        t_prev = t;
        n_prev = n;
    }
    Ok(DecayRecord {
        times,
        norms,
        tau,
        steps: sim.steps(),
        n_grid: cfg.n_grid,
        m_res: cfg.m_res,
    })
}

/// The initial datum `e^{iy}`.
pub fn plane_wave(y: f64) -> Complex64 {
    Complex64::cis(y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub nu: f64,
    pub k: i64,
    pub tau: Option<f64>,
    pub steps: u64,
    pub n_grid: usize,
    pub m_res: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub runs: Vec<SweepRun>,
    /// Fit of `τ ∝ ν^{-β}`; `beta = -exponent`.
    pub fit: RateFit,
    pub beta: f64,
    pub beta_ci95: (f64, f64),
    /// `α/(α+2)` of the profile.
    pub predicted: f64,
    pub warnings: Vec<String>,
}

/// Runs `template` at each `ν` (level, grid and horizon re-derived per `ν`
/// for the fractal profile) with initial data `e^{iy}`, then fits
/// `log τ = -β log ν + c`. Runs that never cross are left out of the fit
/// with a warning.
pub fn nu_sweep(template: &ViscousRunConfig, nus: &[f64]) -> Result<SweepResult> {
    if nus.len() < 4 {
        return Err(Error::TooFewPoints(nus.len()));
    }
    let lo = nus.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = nus.iter().cloned().fold(0.0, f64::max);
    if !(lo > 0.0) || hi / lo < 1e3 * (1.0 - 1e-12) {
        return Err(Error::InvalidConfig(format!(
            "ν grid [{lo:e}, {hi:e}] must be positive and span at least 3 decades"
        )));
    }
    let configs = nus
        .iter()
        .map(|&nu| config_for_nu(template, nu))
        .collect::<Result<Vec<_>>>()?;
    let records = par::map_items(&configs, |c| solve(c, plane_wave));
    let mut runs = Vec::new();
    let mut warnings = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (c, rec) in configs.iter().zip(records) {
        let rec = rec?;
        if let Some(tau) = rec.tau {
            xs.push(c.nu);
            ys.push(tau);
        } else {
            warnings.push(format!(
                "ν = {:e}: no threshold crossing by t = {:.4e}; excluded from the fit",
                c.nu, c.t_max
            ));
        }
        runs.push(SweepRun {
            nu: c.nu,
            k: c.k,
            tau: rec.tau,
            steps: rec.steps,
            n_grid: rec.n_grid,
            m_res: rec.m_res,
        });
    }
    let fit = fit_power_law(&xs, &ys, None)?;
    let a = template.profile_alpha();
    Ok(SweepResult {
        runs,
        beta: -fit.exponent,
        beta_ci95: (-fit.ci95.1, -fit.ci95.0),
        fit,
        predicted: if a.is_finite() { a / (a + 2.0) } else { 1.0 },
        warnings,
    })
}

/// The template with `ν` replaced and every derived field recomputed.
pub fn config_for_nu(template: &ViscousRunConfig, nu: f64) -> Result<ViscousRunConfig> {
    let mut c = ViscousRunConfig::new(template.params, nu, template.k)?;
    c.threshold = template.threshold;
    c.x_diffusion = template.x_diffusion;
    c.sample_every = template.sample_every;
    c.with_profile(template.profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> FlowParams {
        FlowParams::new(3, 3).unwrap()
    }

    #[test]
    fn defaults_satisfy_the_rules() {
        let c = ViscousRunConfig::new(params(), 1e-4, 1).unwrap();
        // (ν/λ)^{1/2} = ν^{0.4} = 0.0251, a quarter of it is 6.3e-3
        assert_eq!(c.m_res, 3);
        assert_eq!(c.n_grid, 8192);
        assert!((c.dt - 0.1).abs() < 1e-15);
        let mut bad = c.clone();
        bad.m_res = 2;
        bad.n_grid = 1024;
        assert!(bad.validate().unwrap_err().to_string().contains("dissipative"));
        assert!(ViscousRunConfig::new(params(), 0.6, 1).is_err());
        assert!(ViscousRunConfig::new(params(), 0.6, 2).is_ok());
        let mut fast = c.clone();
        fast.dt = 0.2;
        assert!(fast.validate().is_err());
    }

    #[test]
    fn inviscid_step_is_unitary() {
        let cfg = ViscousRunConfig::inviscid(params(), 2, 3, 1.0).unwrap();
        let mut sim = Simulation::new(&cfg, |y| Complex64::new(y.cos(), 0.3 * (2.0 * y).sin())).unwrap();
        let n0 = sim.l2_norm();
        for _ in 0..50 {
            sim.step();
        }
        assert!((sim.l2_norm() - n0).abs() <= 1e-12 * n0);
    }

    #[test]
    fn inviscid_state_is_the_phase_multiplier() {
        let cfg = ViscousRunConfig::inviscid(params(), 2, 2, 2.0).unwrap();
        let flow = flow::build(params(), 2).unwrap();
        let ys = grid(cfg.n_grid);
        let mut sim = Simulation::new(&cfg, plane_wave).unwrap();
        // 1.0 lands on the step grid, 1.37 needs a shortened final step
        for t in [1.0, 1.37, 2.0] {
            sim.run_until(t);
            let err = sim
                .state()
                .iter()
                .zip(&ys)
                .map(|(s, &y)| (s - Complex64::cis(y - 2.0 * t * flow.evaluate(y))).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-11, "t = {t}: {err}");
        }
    }

    #[test]
    fn pure_heat_decay() {
        let nu = 0.01;
        let cfg = ViscousRunConfig::new(params(), nu, 1)
            .unwrap()
            .with_profile(Profile::Zero)
            .unwrap();
        let mut sim = Simulation::new(&cfg, |y| Complex64::new((3.0 * y).cos() + 0.5 * y.sin(), 0.0)).unwrap();
        sim.run_until(7.0);
        let coeffs = fourier_coefficients(&sim.state());
        let c = |n: i64| coeffs.iter().find(|e| e.0 == n).unwrap().1;
        let s2pi = (2.0 * PI).sqrt();
        let e3 = 0.5 * s2pi * (-9.0 * nu * 7.0f64).exp();
        let e1 = 0.25 * s2pi * (-nu * 7.0f64).exp();
        assert!((c(3).re - e3).abs() < 1e-13 && (c(-3).re - e3).abs() < 1e-13);
        // sin y = (e^{iy} - e^{-iy}) / 2i
        assert!((c(1) - Complex64::new(0.0, -e1)).norm() < 1e-13);
        assert!((c(-1) - Complex64::new(0.0, e1)).norm() < 1e-13);
    }

    #[test]
    fn strang_is_second_order() {
        // error of one step of size h, measured against many tiny steps, scales like h^3
        let u = grid(256).iter().map(|y| 0.5 + 0.4 * y.sin() + 0.1 * (3.0 * y).cos()).collect::<Vec<_>>();
        let f0: Vec<Complex64> = grid(256).iter().map(|&y| Complex64::cis(y)).collect();
        let run = |dt: f64, steps: usize| {
            let mut st = Stepper::from_profile(u.clone(), 2.0, 0.05, dt);
            let mut f = f0.clone();
            for _ in 0..steps {
                st.step(&mut f);
            }
            f
        };
        let dist = |a: &[Complex64], b: &[Complex64]| l2_norm(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>());
        let h = 0.05;
        let reference = |h: f64| run(h / 64.0, 64);
        let e1 = dist(&run(h, 1), &reference(h));
        let e2 = dist(&run(h / 2.0, 1), &reference(h / 2.0));
        let ratio = e1 / e2;
        assert!(ratio > 7.0 && ratio < 9.0, "ratio {ratio}");
        // one step against two half steps
        let d1 = dist(&run(h, 1), &run(h / 2.0, 2));
        let d2 = dist(&run(h / 2.0, 1), &run(h / 4.0, 2));
        assert!((d1 / d2 - 8.0).abs() < 1.0, "{}", d1 / d2);
    }

    #[test]
    fn energy_law() {
        let n = 512;
        let ys = grid(n);
        let u: Vec<f64> = ys.iter().map(|y| y.sin()).collect();
        let nu = 1e-3;
        let mut errs = Vec::new();
        for dt in [0.02, 0.01] {
            let mut st = Stepper::from_profile(u.clone(), 3.0, nu, dt);
            let mut f: Vec<Complex64> = ys.iter().map(|&y| Complex64::cis(y) * (1.0 + 0.5 * (2.0 * y).cos())).collect();
            for _ in 0..20 {
                st.step(&mut f);
            }
            let before = l2_norm(&f).powi(2);
            // midpoint of the diffusion substep: after the first half multiplier
            let mut mid = f.clone();
            mul(&mut mid, &st.half);
            let grad2: f64 = fourier_coefficients(&mid).iter().map(|(k, c)| (*k as f64).powi(2) * c.norm_sqr()).sum();
            st.step(&mut f);
            let loss = before - l2_norm(&f).powi(2);
            let predicted = 2.0 * nu * dt * grad2;
            errs.push((loss - predicted).abs() / predicted);
        }
        // exact heat factor vs its linearization: relative gap O(ν dt n^2)
        assert!(errs[0] < 1e-3, "{errs:?}");
        assert!(errs[1] < errs[0] / 1.8, "{errs:?}");
    }

    #[test]
    fn decay_is_monotone_and_crosses() {
        let cfg = ViscousRunConfig::new(params(), 1e-3, 1).unwrap();
        let rec = solve(&cfg, plane_wave).unwrap();
        let tau = rec.tau.unwrap();
        assert!(tau * cfg.nu < 0.5, "τ = {tau}");
        for w in rec.norms.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let last = *rec.norms.last().unwrap();
        assert!(last <= cfg.threshold * rec.norms[0]);
    }

    #[test]
    fn horizon_without_crossing() {
        let mut cfg = ViscousRunConfig::new(params(), 1e-3, 1).unwrap();
        cfg.t_max = 1.0;
        let rec = solve(&cfg, plane_wave).unwrap();
        assert!(!rec.crossed());
        assert!(rec.times.last().unwrap() >= &1.0);
    }
}
