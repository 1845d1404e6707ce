//! Inviscid transport of single `x`-modes by the shear, `f_k(t, y) =
//! e^{-i t k u_m(y)} f_k^{in}(y)`, and the `L^2_x H^{-1}_y` mixing norm.
//!
//! Fourier coefficients are unitary, `c_n = (2π)^{-1/2} ∫ f e^{-i n y} dy`,
//! so `‖f‖_{L^2}^2 = Σ |c_n|^2` and `‖f‖_{H^s}^2 = Σ (1 + n^2)^s |c_n|^2`.
//!
//! Two routes to the `H^{-1}` norm are provided. [`evolve_inviscid`] computes
//! the coefficients up to a cutoff (and records the `L^2` mass beyond it);
//! [`hminus1_exact`] evaluates `∫∫ f(y) conj f(y') K(y - y')` with the
//! periodic Green kernel `K(z) = cosh(π - |z|) / (2 sinh π)` of `1 - ∂_y^2`,
//! which has no truncation at all.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowParams, PiecewiseLinearFlow};
use crate::numeric::{cis, exp_integral, NeumaierSum};
use crate::oscint::{fourier_table, TrigPolynomial};
use crate::par;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// One `x`-mode of a scalar: unitary `y`-Fourier coefficients for
/// `|n| <= n_cut` plus the `L^2` mass known to lie beyond the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    k: i64,
    coeffs: Vec<Complex64>,
    tail_l2: f64,
}

impl SpectralField {
    /// `coeffs[i]` is `c_{i - n_cut}`.
    pub fn new(k: i64, coeffs: Vec<Complex64>) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroMode);
        }
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidInput("coefficient vector must have odd length".into()));
        }
        Ok(Self {
            k,
            coeffs,
            tail_l2: 0.0,
        })
    }

    /// The mode `f_k(y) = φ(y)`.
    pub fn from_trig(k: i64, phi: &TrigPolynomial) -> Result<Self> {
        let coeffs = phi.modes().map(|(_, c)| c * SQRT_2PI).collect();
        Self::new(k, coeffs)
    }

    pub fn to_trig(&self) -> TrigPolynomial {
        TrigPolynomial::new(self.coeffs.iter().map(|c| c / SQRT_2PI).collect())
            .expect("odd length by construction")
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn n_cut(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        let n_cut = self.n_cut() as i64;
        if n.abs() > n_cut {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + n_cut) as usize]
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n_cut = self.n_cut() as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - n_cut, c))
    }

    /// `L^2` mass outside `|n| <= n_cut`.
    pub fn tail_l2(&self) -> f64 {
        self.tail_l2
    }

    fn weighted(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let mut s = NeumaierSum::new();
        for (n, c) in self.modes() {
            s.add(weight(n as f64) * c.norm_sqr());
        }
        s.value()
    }

    /// `(Σ_{|n|<=n_cut} |c_n|^2)^{1/2}`.
    pub fn resolved_l2(&self) -> f64 {
        self.weighted(|_| 1.0).sqrt()
    }

    /// Resolved mass plus tail.
    pub fn l2_norm(&self) -> f64 {
        (self.weighted(|_| 1.0) + self.tail_l2 * self.tail_l2).sqrt()
    }

    /// `(Σ ⟨n⟩^{2s} |c_n|^2)^{1/2}` over the resolved modes.
    pub fn hs_norm(&self, s: f64) -> f64 {
        self.weighted(|n| (1.0 + n * n).powf(s)).sqrt()
    }

    pub fn hminus1_norm(&self) -> f64 {
        self.weighted(|n| 1.0 / (1.0 + n * n)).sqrt()
    }

    /// Upper bound on the true `H^{-1}` norm: the tail has weight at most
    /// `1 / (1 + (n_cut+1)^2)`.
    pub fn hminus1_upper(&self) -> f64 {
        let nc = self.n_cut() as f64 + 1.0;
        (self.weighted(|n| 1.0 / (1.0 + n * n)) + self.tail_l2.powi(2) / (1.0 + nc * nc)).sqrt()
    }

    /// `L^2` mass on `|n| > 0.9 n_cut` plus the tail.
    pub fn edge_mass(&self) -> f64 {
        let edge = 0.9 * self.n_cut() as f64;
        (self.weighted(|n| if n.abs() > edge { 1.0 } else { 0.0 }) + self.tail_l2.powi(2)).sqrt()
    }

    /// Share of the resolved `H^{-1}` mass carried by `|n| > n0`.
    pub fn high_frequency_fraction(&self, n0: f64) -> f64 {
        let total = self.weighted(|n| 1.0 / (1.0 + n * n));
        let high = self.weighted(|n| if n.abs() > n0 { 1.0 / (1.0 + n * n) } else { 0.0 });
        if total > 0.0 {
            high / total
        } else {
            0.0
        }
    }
}

/// What an evolved field is meant to represent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// The evolution under `u_m` itself; no resolution requirement.
    Level,
    /// An approximation of the evolution under the limit flow `u`; requires
    /// `t |k| ‖u_m - u‖_∞ <= phase_tol`.
    Limit { phase_tol: f64 },
}

impl Default for Target {
    fn default() -> Self {
        Target::Limit { phase_tol: 1e-3 }
    }
}

/// Enforces the phase-error budget for [`Target::Limit`].
pub fn check_resolution(params: &FlowParams, m: u32, t: f64, k: i64, target: Target) -> Result<()> {
    if let Target::Limit { phase_tol } = target {
        let tk = t.abs() * k.unsigned_abs() as f64;
        let phase = tk * params.uniform_error_bound(m);
        if phase > phase_tol {
            return Err(Error::ResolutionGuard {
                phase,
                tol: phase_tol,
                min_level: params.min_level_for_phase(tk, phase_tol),
            });
        }
    }
    Ok(())
}

/// `8 ⌈t |k| / (2π)⌉ + 64`: the multiplier `e^{-itku}` moves mass up to
/// frequency about `t |k| ‖u'‖` only on average, so the cutoff grows with `tk`.
pub fn default_n_cut(t: f64, k: i64) -> usize {
    8 * (t.abs() * k.unsigned_abs() as f64 / (2.0 * PI)).ceil() as usize + 64
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InviscidOptions {
    pub n_cut: Option<usize>,
    pub target: Target,
}

/// Coefficients of `e^{-i t k u_m} f^{in}` for `|n| <= n_cut`, each an exact
/// sum of closed-form segment integrals.
pub fn evolve_inviscid(
    flow: &PiecewiseLinearFlow,
    f_in: &SpectralField,
    t: f64,
    opts: InviscidOptions,
) -> Result<SpectralField> {
    check_resolution(flow.params(), flow.level(), t, f_in.k, opts.target)?;
    if t == 0.0 {
        return Ok(f_in.clone());
    }
    let n_cut = opts.n_cut.unwrap_or_else(|| default_n_cut(t, f_in.k)) as i64;
    let n_in = f_in.n_cut() as i64;
    let big_t = t * f_in.k as f64;
    let reach = n_cut + n_in;
    // F(j) = ∫ e^{i T u} e^{i j y}; the evolved field needs conj F(n - n').
    let table = fourier_table(flow, big_t, -reach, reach);
    let f = |j: i64| table[(j + reach) as usize];
    let coeffs: Vec<Complex64> = (-n_cut..=n_cut)
        .map(|n| {
            let s: Complex64 = f_in.modes().map(|(np, d)| d * f(n - np).conj()).sum();
            s / (2.0 * PI)
        })
        .collect();
    let mut out = SpectralField::new(f_in.k, coeffs)?;
    let total = f_in.l2_norm().powi(2);
    let kept = out.weighted(|_| 1.0);
    out.tail_l2 = (total - kept).max(0.0).sqrt();
    Ok(out)
}

/// `(Σ_k ‖f_k‖_{H^{-1}}^2)^{1/2}` over resolved coefficients.
pub fn mixing_norm(fields: &[SpectralField]) -> Result<f64> {
    let mut s = NeumaierSum::new();
    for f in fields {
        if f.k == 0 {
            return Err(Error::ZeroMode);
        }
        s.add(f.hminus1_norm().powi(2));
    }
    Ok(s.value().sqrt())
}

/// Exact `‖e^{-i t k u_m} f^{in}‖_{H^{-1}}` (no frequency cutoff).
pub fn hminus1_exact(flow: &PiecewiseLinearFlow, f_in: &SpectralField, t: f64) -> Result<f64> {
    if f_in.k == 0 {
        return Err(Error::ZeroMode);
    }
    Ok(green_quadratic_form(flow, f_in, t * f_in.k as f64).max(0.0).sqrt())
}

/// Exact mixing norm of a multi-mode scalar at time `t`.
pub fn mixing_norm_exact(flow: &PiecewiseLinearFlow, f_in: &[SpectralField], t: f64) -> Result<f64> {
    let mut s = NeumaierSum::new();
    for f in f_in {
        s.add(hminus1_exact(flow, f, t)?.powi(2));
    }
    Ok(s.value().sqrt())
}

/// Segment-independent constants of the Green-kernel recursion for one
/// slope sign.
struct SlopeConsts {
    /// `E(1 + iμ_s, L)` and `E(-1 + iμ_s, L)`
    e_in_minus: Vec<Complex64>,
    e_in_plus: Vec<Complex64>,
    /// `E(-1 - iμ_r, L)` and `E(1 - iμ_r, L)`
    e_out_minus: Vec<Complex64>,
    e_out_plus: Vec<Complex64>,
    /// `[E(i(μ_s - μ_r), L) - E(-1 - iμ_r, L)] / (1 + iμ_s)` and the `+` analogue,
    /// row-major in `(r, s)`
    pair_minus: Vec<Complex64>,
    pair_plus: Vec<Complex64>,
}

impl SlopeConsts {
    fn new(ns: &[i64], big_t: f64, sigma_s: f64, len: f64) -> Self {
        let mu: Vec<f64> = ns.iter().map(|&n| n as f64 - big_t * sigma_s).collect();
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let e_in_minus = mu.iter().map(|&m| exp_integral(c(1.0, m), len)).collect();
        let e_in_plus = mu.iter().map(|&m| exp_integral(c(-1.0, m), len)).collect();
        let e_out_minus: Vec<Complex64> = mu.iter().map(|&m| exp_integral(c(-1.0, -m), len)).collect();
        let e_out_plus: Vec<Complex64> = mu.iter().map(|&m| exp_integral(c(1.0, -m), len)).collect();
        let r_len = mu.len();
        let mut pair_minus = Vec::with_capacity(r_len * r_len);
        let mut pair_plus = Vec::with_capacity(r_len * r_len);
        for r in 0..r_len {
            for s in 0..r_len {
                let cross = exp_integral(c(0.0, mu[s] - mu[r]), len);
                pair_minus.push((cross - e_out_minus[r]) / c(1.0, mu[s]));
                pair_plus.push((cross - e_out_plus[r]) / c(-1.0, mu[s]));
            }
        }
        Self {
            e_in_minus,
            e_in_plus,
            e_out_minus,
            e_out_plus,
            pair_minus,
            pair_plus,
        }
    }
}

/// Partial result of the sequential recursion over a block of segments,
/// linear in the incoming values of the running integrals.
struct Block {
    /// Contributions with zero incoming running integrals.
    local_minus: Complex64,
    local_plus: Complex64,
    /// Coefficients of the incoming running integrals.
    gain_minus: Complex64,
    gain_plus: Complex64,
    /// Outgoing running integrals (zero incoming).
    end_minus: Complex64,
    end_plus: Complex64,
    len: f64,
}

/// `∫∫ g(y) conj g(y') K(y - y') dy dy'` for `g = e^{-i T u_m} f^{in}`.
///
/// With `K = a e^{-|z|} + b e^{|z|}` the double integral equals `2 Re` of
/// `a ∫ conj g(y) J_-(y) + b ∫ conj g(y) J_+(y)`, where
/// `J_∓(y) = ∫_{-π}^{y} g(y') e^{∓(y - y')} dy'`. On a segment `g` is a sum of
/// exponentials `Σ_s A_s e^{i μ_s x}`, so both the running integrals and the
/// contributions are closed forms.
fn green_quadratic_form(flow: &PiecewiseLinearFlow, f_in: &SpectralField, big_t: f64) -> f64 {
    let modes: Vec<(i64, Complex64)> = f_in.modes().filter(|(_, c)| c.norm() != 0.0).collect();
    if modes.is_empty() {
        return 0.0;
    }
    let ns: Vec<i64> = modes.iter().map(|m| m.0).collect();
    let d: Vec<Complex64> = modes.iter().map(|m| m.1 / SQRT_2PI).collect();
    let len = flow.ell();
    let s = flow.slope_magnitude();
    let up = SlopeConsts::new(&ns, big_t, s, len);
    let down = SlopeConsts::new(&ns, big_t, -s, len);
    let decay = (-len).exp();
    let growth = len.exp();
    let denom = flow.denominator() as f64;
    let scaled = flow.scaled_values();
    let n = flow.n_nodes();
    let r_len = ns.len();

    let blocks = par::map_chunks(n, 4096, |range| {
        let mut blk = Block {
            local_minus: Complex64::new(0.0, 0.0),
            local_plus: Complex64::new(0.0, 0.0),
            gain_minus: Complex64::new(0.0, 0.0),
            gain_plus: Complex64::new(0.0, 0.0),
            end_minus: Complex64::new(0.0, 0.0),
            end_plus: Complex64::new(0.0, 0.0),
            len: 0.0,
        };
        // running factors e^{∓(a - block start)} applied to incoming integrals
        let mut fac_minus = 1.0;
        let mut fac_plus = 1.0;
        let mut amp = vec![Complex64::new(0.0, 0.0); r_len];
        for j in range {
            let a = -PI + j as f64 * len;
            let ua = scaled[j] as f64 / denom;
            let c = if scaled[(j + 1) % n] > scaled[j] { &up } else { &down };
            let phase = cis(-big_t * ua);
            for (i, (&nn, &dd)) in ns.iter().zip(&d).enumerate() {
                amp[i] = dd * phase * cis(nn as f64 * a);
            }
            let mut out_minus = Complex64::new(0.0, 0.0);
            let mut out_plus = Complex64::new(0.0, 0.0);
            let mut in_minus = Complex64::new(0.0, 0.0);
            let mut in_plus = Complex64::new(0.0, 0.0);
            for r in 0..r_len {
                let ar = amp[r].conj();
                out_minus += ar * c.e_out_minus[r];
                out_plus += ar * c.e_out_plus[r];
                in_minus += amp[r] * c.e_in_minus[r];
                in_plus += amp[r] * c.e_in_plus[r];
                for s_ in 0..r_len {
                    let w = ar * amp[s_];
                    blk.local_minus += w * c.pair_minus[r * r_len + s_];
                    blk.local_plus += w * c.pair_plus[r * r_len + s_];
                }
            }
            blk.local_minus += blk.end_minus * out_minus;
            blk.local_plus += blk.end_plus * out_plus;
            blk.gain_minus += out_minus * fac_minus;
            blk.gain_plus += out_plus * fac_plus;
            blk.end_minus = (blk.end_minus + in_minus) * decay;
            blk.end_plus = (blk.end_plus + in_plus) * growth;
            fac_minus *= decay;
            fac_plus *= growth;
            blk.len += len;
        }
        blk
    });

    let mut j_minus = Complex64::new(0.0, 0.0);
    let mut j_plus = Complex64::new(0.0, 0.0);
    let mut i_minus = Complex64::new(0.0, 0.0);
    let mut i_plus = Complex64::new(0.0, 0.0);
    for b in blocks {
        i_minus += b.local_minus + j_minus * b.gain_minus;
        i_plus += b.local_plus + j_plus * b.gain_plus;
        j_minus = j_minus * (-b.len).exp() + b.end_minus;
        j_plus = j_plus * b.len.exp() + b.end_plus;
    }
    let sh = PI.sinh();
    let ka = PI.exp() / (4.0 * sh);
    let kb = (-PI).exp() / (4.0 * sh);
    2.0 * (ka * i_minus.re + kb * i_plus.re)
}

/// Which special time a grid point is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "m", rename_all = "snake_case")]
pub enum SpecialTime {
    /// `t_m = 2π p^m`
    Fast(u32),
    /// `t'_m = π p^m`
    Sharp(u32),
}

/// Time grid, log- or linearly spaced, with the special times inside the
/// range injected exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
    #[serde(default = "default_true")]
    pub log: bool,
    #[serde(default = "default_true")]
    pub inject_special: bool,
}

fn default_true() -> bool {
    true
}

impl TimeGrid {
    pub fn log(start: f64, stop: f64, n: usize) -> Self {
        Self {
            start,
            stop,
            n,
            log: true,
            inject_special: true,
        }
    }

    pub fn points(&self, params: &FlowParams) -> Result<Vec<(f64, Option<SpecialTime>)>> {
        if !(self.start > 0.0 && self.stop > self.start && self.n >= 2) {
            return Err(Error::InvalidInput(format!(
                "time grid needs 0 < start < stop and n >= 2, got {self:?}"
            )));
        }
        let mut pts: Vec<(f64, Option<SpecialTime>)> = (0..self.n)
            .map(|i| {
                let f = i as f64 / (self.n - 1) as f64;
                let t = if i == 0 {
                    self.start
                } else if i == self.n - 1 {
                    self.stop
                } else if self.log {
                    (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + f * (self.stop - self.start)
                };
                (t, None)
            })
            .collect();
        if self.inject_special {
            let mut m = 0;
            loop {
                let (tm, tpm) = params.special_times(m);
                if tpm > self.stop {
                    break;
                }
                for (t, kind) in [(tm, SpecialTime::Fast(m)), (tpm, SpecialTime::Sharp(m))] {
                    if t >= self.start && t <= self.stop {
                        pts.retain(|(x, _)| (x - t).abs() > 1e-12 * t);
                        pts.push((t, Some(kind)));
                    }
                }
                m += 1;
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSeries {
    pub k: i64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub p: u32,
    pub q: u32,
    pub m: u32,
    pub ks: Vec<i64>,
    pub f_in: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub special: Vec<Option<SpecialTime>>,
    pub per_k: Vec<ModeSeries>,
    pub meta: SeriesMeta,
}

/// Exact mixing norms of `f^{in}` transported by `u_m` at each time.
pub fn decay_series(
    flow: &PiecewiseLinearFlow,
    f_in: &[SpectralField],
    times: &[(f64, Option<SpecialTime>)],
    target: Target,
    descriptor: &str,
) -> Result<DecaySeries> {
    if f_in.is_empty() {
        return Err(Error::InvalidInput("no modes in the initial scalar".into()));
    }
    if times.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidInput("times must be strictly increasing".into()));
    }
    for f in f_in {
        if f.k == 0 {
            return Err(Error::ZeroMode);
        }
        if let Some(&(t_max, _)) = times.last() {
            check_resolution(flow.params(), flow.level(), t_max, f.k, target)?;
        }
    }
    let tasks: Vec<(usize, usize)> = (0..times.len())
        .flat_map(|i| (0..f_in.len()).map(move |j| (i, j)))
        .collect();
    let norms = par::map_items(&tasks, |&(i, j)| hminus1_exact(flow, &f_in[j], times[i].0));
    let mut per_k: Vec<ModeSeries> = f_in
        .iter()
        .map(|f| ModeSeries {
            k: f.k,
            values: Vec::with_capacity(times.len()),
        })
        .collect();
    let mut values = Vec::with_capacity(times.len());
    for (i, _) in times.iter().enumerate() {
        let mut total = NeumaierSum::new();
        for j in 0..f_in.len() {
            let v = norms[i * f_in.len() + j].as_ref().map_err(|e| Error::InvalidInput(e.to_string()))?;
            per_k[j].values.push(*v);
            total.add(v * v);
        }
        values.push(total.value().sqrt());
    }
    let fp = flow.params();
    Ok(DecaySeries {
        times: times.iter().map(|t| t.0).collect(),
        values,
        special: times.iter().map(|t| t.1).collect(),
        per_k,
        meta: SeriesMeta {
            p: fp.p(),
            q: fp.q(),
            m: flow.level(),
            ks: f_in.iter().map(|f| f.k).collect(),
            f_in: descriptor.to_string(),
        },
    })
}

/// `f^{in}(x, y) = cos x`: modes `k = ±1`, each constant `1/2` in `y`.
pub fn cos_x() -> Vec<SpectralField> {
    let half = TrigPolynomial::constant(Complex64::new(0.5, 0.0));
    vec![
        SpectralField::from_trig(1, &half).expect("k != 0"),
        SpectralField::from_trig(-1, &half).expect("k != 0"),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub alpha_prime: f64,
    /// `min_t value(t) t^{1/α'}`
    pub constant: f64,
    pub argmin_t: f64,
    /// `value(t_0) t_0^{1/α'}` at the first sample
    pub initial: f64,
    pub relative: f64,
}

/// Lower envelope `min value · t^{1/α'}` over the series, for `α' < α`.
pub fn envelope_check(series: &DecaySeries, alpha_prime: f64, alpha: f64) -> Result<EnvelopeReport> {
    if !(alpha_prime > 0.0 && alpha_prime < alpha) {
        return Err(Error::InvalidInput(format!(
            "envelope exponent α' = {alpha_prime} must lie in (0, α = {alpha})"
        )));
    }
    if series.times.is_empty() {
        return Err(Error::InvalidInput("empty series".into()));
    }
    let e = 1.0 / alpha_prime;
    let (mut constant, mut argmin_t) = (f64::INFINITY, 0.0);
    for (&t, &v) in series.times.iter().zip(&series.values) {
        let c = v * t.powf(e);
        if c < constant {
            constant = c;
            argmin_t = t;
        }
    }
    let initial = series.values[0] * series.times[0].powf(e);
    Ok(EnvelopeReport {
        alpha_prime,
        constant,
        argmin_t,
        initial,
        relative: constant / initial,
    })
}
