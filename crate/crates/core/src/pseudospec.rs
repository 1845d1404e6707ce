//! The windowed affine deficit of the stream function,
//! `ω_1(δ) = inf_{ȳ, c_1, c_2} ∫_{ȳ-δ}^{ȳ+δ} |ψ(y) - c_1 - c_2 y|^2 dy`,
//! and its lower bound `C_1 δ^{2α+3}`.
//!
//! The outer infimum is a scan over centers spaced `ℓ_m / 2`. Each inner
//! problem is a 2x2 least-squares fit whose residual is
//! `∫ψ^2 - (∫ψ)^2 / (2δ) - (∫ψ (y-ȳ))^2 / (2δ^3/3)`. Those window moments
//! are assembled from exact integer prefix sums of the grid-unit
//! antiderivative `Φ` plus double-double partial-segment terms, so the heavy
//! cancellation in the residual costs nothing.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowParams, StreamFunction};
use crate::numeric::{DoubleDouble as Dd, NeumaierSum};
use crate::par;
use crate::xlab::fit::{fit_power_law, RateFit};

/// `C_{p,α} = 1 / (π^{2α} p^{2-2α})`, equal to `s_m^2 h_{m+1}^{2-2α}` for
/// every `m`.
pub fn c_p_alpha(params: &FlowParams) -> f64 {
    let a = params.alpha();
    1.0 / (PI.powf(2.0 * a) * (params.p() as f64).powf(2.0 - 2.0 * a))
}

/// `C_1 = C_{p,α} / (2 p^2 q)^{3+2α}`.
pub fn c1(params: &FlowParams) -> f64 {
    let a = params.alpha();
    let base = 2.0 * (params.p() as f64).powi(2) * params.q() as f64;
    c_p_alpha(params) / base.powf(3.0 + 2.0 * a)
}

/// `C_1 δ^{2α+3}`.
pub fn lower_bound(params: &FlowParams, delta: f64) -> f64 {
    c1(params) * delta.powf(2.0 * params.alpha() + 3.0)
}

/// `Δ_h^2 ψ(y) = ψ(y) - 2ψ(y+h) + ψ(y+2h)` from the piecewise-quadratic form.
pub fn delta2(psi: &StreamFunction, y: f64, h: f64) -> f64 {
    psi.delta2(y, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineFit {
    pub value: f64,
    pub c1: f64,
    pub c2: f64,
}

/// `min_{c_1, c_2} ∫_{ȳ-δ}^{ȳ+δ} |ψ - c_1 - c_2 y|^2`, integrating the squared
/// quadratic residual exactly on every piece of the window.
///
/// The tangent line at `ȳ` is removed first; the fit is invariant under
/// affine shifts and the subtraction keeps all moments small.
pub fn affine_residual(psi: &StreamFunction, center: f64, delta: f64) -> Result<AffineFit> {
    if !(delta > 0.0) || 2.0 * delta > 2.0 * PI {
        return Err(Error::InvalidInput(format!("window half-width {delta} must lie in (0, π]")));
    }
    let ell = psi.ell();
    let slope0 = psi.derivative(center);
    let lo = center - delta;
    let hi = center + delta;
    // break points at grid nodes
    let first = ((lo + PI) / ell).floor() as i64 + 1;
    let last = ((hi + PI) / ell).ceil() as i64 - 1;
    let mut cuts = vec![lo];
    for j in first..=last {
        let y = -PI + j as f64 * ell;
        if y > lo && y < hi {
            cuts.push(y);
        }
    }
    cuts.push(hi);
    let s = psi.params().slope(psi.level());
    let (mut m0, mut m1, mut m2) = (NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new());
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        let mid = 0.5 * (a + b);
        // residual g = ψ - ψ(ȳ) - slope0 (y - ȳ) on the piece, in w = y - a
        let za = a - center;
        let v0 = psi.increment(center, a) - slope0 * za;
        let cs = curvature_sign(psi, mid);
        let v1 = psi.derivative(mid) - s * cs * (mid - a) - slope0;
        let v2 = 0.5 * s * cs;
        // ∫ g, ∫ g w, ∫ g^2 over [0, len]
        let l2 = len * len;
        let l3 = l2 * len;
        let l4 = l3 * len;
        let l5 = l4 * len;
        let i0 = v0 * len + v1 * l2 / 2.0 + v2 * l3 / 3.0;
        let iw = v0 * l2 / 2.0 + v1 * l3 / 3.0 + v2 * l4 / 4.0;
        let i2 = v0 * v0 * len
            + v0 * v1 * l2
            + (v1 * v1 + 2.0 * v0 * v2) * l3 / 3.0
            + v1 * v2 * l4 / 2.0
            + v2 * v2 * l5 / 5.0;
        m0.add(i0);
        m1.add(za * i0 + iw);
        m2.add(i2);
    }
    let (m0, m1, m2) = (m0.value(), m1.value(), m2.value());
    let width = 2.0 * delta;
    let second = 2.0 * delta.powi(3) / 3.0;
    let a = m0 / width;
    let b = m1 / second;
    let value = (m2 - m0 * a - m1 * b).max(0.0);
    let c2 = slope0 + b;
    let c1 = psi.eval(center) + a - c2 * center;
    Ok(AffineFit { value, c1, c2 })
}

/// `-σ` where `σ = ±1` is the slope sign of `u_m` at `y`, i.e. the sign of
/// `ψ_m''`.
fn curvature_sign(psi: &StreamFunction, y: f64) -> f64 {
    let n = psi.n_segments() as i64;
    let j = ((y + PI) / psi.ell()).floor() as i64;
    -(psi.sigma(j.rem_euclid(n) as usize) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Omega1Result {
    pub delta: f64,
    pub value: f64,
    /// Scan center `ȳ` attaining the minimum.
    pub center: f64,
    pub c1: f64,
    pub c2: f64,
    pub level: u32,
    /// `C_1 δ^{2α+3}`.
    pub lower_bound: f64,
}

/// Smallest level with `2 ℓ_m <= δ`.
pub fn min_level_for_window(params: &FlowParams, delta: f64) -> u32 {
    let mut m = 0;
    while 2.0 * params.ell(m) > delta {
        m += 1;
    }
    m
}

/// Exact window moments of `Φ` over a grid range, scaled by `(12, 24, 60)`.
#[derive(Clone, Copy)]
struct Prefix {
    p0: i128,
    p1: i128,
    p2: i128,
}

/// Precomputed prefix sums for scanning windows up to a maximal half-width.
pub struct Omega1Scanner<'a> {
    psi: &'a StreamFunction,
    /// First extended segment index covered by `prefix`.
    base: i64,
    prefix: Vec<Prefix>,
    max_half: f64,
}

impl<'a> Omega1Scanner<'a> {
    /// Prepares scans with `δ <= delta_max`.
    pub fn new(psi: &'a StreamFunction, delta_max: f64) -> Result<Self> {
        if !(delta_max > 0.0 && delta_max < 1.0) {
            return Err(Error::InvalidInput(format!("δ = {delta_max} must lie in (0, 1)")));
        }
        let n = psi.n_segments() as i64;
        let max_half = delta_max / psi.ell();
        let pad = max_half.ceil() as i64 + 2;
        let base = -pad;
        let end = n + pad;
        let mut prefix = Vec::with_capacity((end - base + 1) as usize);
        let mut acc = Prefix { p0: 0, p1: 0, p2: 0 };
        prefix.push(acc);
        for i in base..end {
            let jb = i.rem_euclid(n) as usize;
            let p = psi.phi2_ext(i) as i128;
            let u = psi.scaled_u(jb) as i128;
            let s = psi.sigma(jb) as i128;
            let ii = i as i128;
            acc.p0 += 6 * p + 6 * u + 2 * s;
            acc.p1 += ii * (12 * p + 12 * u + 4 * s) + 6 * p + 8 * u + 3 * s;
            acc.p2 += 15 * p * p + 30 * p * u + 10 * s * p + 20 * u * u + 15 * s * u + 3;
            prefix.push(acc);
        }
        Ok(Self {
            psi,
            base,
            prefix,
            max_half,
        })
    }

    /// Whole-segment moments for extended segments `a..b` as double-doubles.
    fn whole(&self, a: i64, b: i64) -> [Dd; 3] {
        let pa = self.prefix[(a - self.base) as usize];
        let pb = self.prefix[(b - self.base) as usize];
        [
            Dd::from_i128(pb.p0 - pa.p0) / Dd::new(12.0),
            Dd::from_i128(pb.p1 - pa.p1) / Dd::new(24.0),
            Dd::from_i128(pb.p2 - pa.p2) / Dd::new(60.0),
        ]
    }

    /// Moments `∫Φ, ∫xΦ, ∫Φ^2` over `[i + ξa, i + ξb]` of one segment.
    fn partial(&self, i: i64, xa: f64, xb: f64) -> [Dd; 3] {
        let n = self.psi.n_segments() as i64;
        let jb = i.rem_euclid(n) as usize;
        let f = Dd::new(self.psi.phi2_ext(i) as f64) * Dd::new(0.5);
        let u = Dd::new(self.psi.scaled_u(jb) as f64);
        let s = Dd::new(self.psi.sigma(jb) as f64);
        let g = |xi: f64| -> [Dd; 3] {
            let x = Dd::new(xi);
            let x2 = x * x;
            let x3 = x2 * x;
            let x4 = x3 * x;
            let x5 = x4 * x;
            let g0 = f * x + u * x2 / Dd::new(2.0) + s * x3 / Dd::new(6.0);
            let g1 = f * x2 / Dd::new(2.0) + u * x3 / Dd::new(3.0) + s * x4 / Dd::new(8.0);
            let g2 = f * f * x
                + f * u * x2
                + (s * f + u * u) * x3 / Dd::new(3.0)
                + s * u * x4 / Dd::new(4.0)
                + x5 / Dd::new(20.0);
            [g0, g1, g2]
        };
        let [a0, a1, a2] = g(xa);
        let [b0, b1, b2] = g(xb);
        let m0 = b0 - a0;
        let m1 = Dd::new(i as f64) * m0 + (b1 - a1);
        [m0, m1, b2 - a2]
    }

    /// Least-squares residual (grid units) of `Φ` on `[xc - d, xc + d]`,
    /// with the fitted intercept and slope.
    fn residual(&self, xc: f64, d: f64) -> (Dd, Dd, Dd) {
        let xl = xc - d;
        let xr = xc + d;
        let jl = xl.floor() as i64;
        let jr = xr.floor() as i64;
        let mut m = [Dd::ZERO; 3];
        let mut add = |v: [Dd; 3]| {
            for k in 0..3 {
                m[k] = m[k] + v[k];
            }
        };
        if jl == jr {
            add(self.partial(jl, xl - jl as f64, xr - jl as f64));
        } else {
            add(self.partial(jl, xl - jl as f64, 1.0));
            if jr > jl + 1 {
                add(self.whole(jl + 1, jr));
            }
            let xi = xr - jr as f64;
            if xi > 0.0 {
                add(self.partial(jr, 0.0, xi));
            }
        }
        // the rounded endpoints define the window; 2d and xc are only close
        let width = Dd::new(xr) - Dd::new(xl);
        let mid = (Dd::new(xr) + Dd::new(xl)) * Dd::new(0.5);
        let second = width * width * width / Dd::new(12.0);
        let centered = m[1] - mid * m[0];
        let a = m[0] / width;
        let b = centered / second;
        let r = m[2] - m[0] * a - centered * b;
        (r, a, b)
    }

    /// `ω_1(δ)` by scanning all centers `ȳ = -π + i ℓ_m / 2`.
    pub fn scan(&self, delta: f64) -> Result<Omega1Result> {
        let fp = self.psi.params();
        let m = self.psi.level();
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidInput(format!("δ = {delta} must lie in (0, 1)")));
        }
        if 2.0 * fp.ell(m) > delta {
            return Err(Error::WindowUnderResolved {
                delta,
                level: m,
                min_level: min_level_for_window(fp, delta),
            });
        }
        let d = delta / self.psi.ell();
        if d > self.max_half {
            return Err(Error::InvalidInput(format!(
                "δ = {delta} exceeds the scanner's preparation for δ <= {}",
                self.max_half * self.psi.ell()
            )));
        }
        let n_centers = 2 * self.psi.n_segments();
        let best = par::map_chunks(n_centers, 8192, |range| {
            let mut best: Option<(f64, usize, Dd, Dd)> = None;
            for i in range {
                let xc = 0.5 * i as f64;
                let (r, a, b) = self.residual(xc, d);
                let rv = r.to_f64();
                if best.is_none_or(|bb| rv < bb.0) {
                    best = Some((rv, i, a, b));
                }
            }
            best
        });
        let (r, i, a, b) = best
            .into_iter()
            .flatten()
            .fold(None, |acc: Option<(f64, usize, Dd, Dd)>, c| match acc {
                Some(x) if x.0 <= c.0 => Some(x),
                _ => Some(c),
            })
            .expect("at least one center");
        let ell = self.psi.ell();
        let kappa = self.psi.kappa();
        let center = -PI + 0.5 * i as f64 * ell;
        // Φ ≈ a + b (x - xc)  =>  ψ ≈ C - κ a - (κ b / ℓ)(y - ȳ)
        let c2 = -kappa * b.to_f64() / ell;
        let c1 = self.psi.offset() - kappa * a.to_f64() - c2 * center;
        Ok(Omega1Result {
            delta,
            value: kappa * kappa * ell * r.max(0.0),
            center,
            c1,
            c2,
            level: m,
            lower_bound: lower_bound(fp, delta),
        })
    }
}

/// `ω_1(δ)` for the level-`m` stream function.
pub fn omega1(psi: &StreamFunction, delta: f64) -> Result<Omega1Result> {
    let fp = psi.params();
    if delta > 0.0 && delta < 1.0 && 2.0 * fp.ell(psi.level()) > delta {
        return Err(Error::WindowUnderResolved {
            delta,
            level: psi.level(),
            min_level: min_level_for_window(fp, delta),
        });
    }
    Omega1Scanner::new(psi, delta)?.scan(delta)
}

/// `ω_1` over a list of half-widths and the log–log fit of `ω_1` against `δ`.
pub fn omega1_scaling(psi: &StreamFunction, deltas: &[f64]) -> Result<(Vec<Omega1Result>, RateFit)> {
    let delta_max = deltas.iter().cloned().fold(0.0, f64::max);
    let scanner = Omega1Scanner::new(psi, delta_max)?;
    let results = deltas
        .iter()
        .map(|&d| scanner.scan(d))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = results.iter().map(|r| r.delta).collect();
    let ys: Vec<f64> = results.iter().map(|r| r.value).collect();
    let fit = fit_power_law(&xs, &ys, None)?;
    Ok((results, fit))
}

/// `n` log-spaced half-widths from `lo` to `hi`.
pub fn log_deltas(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}
