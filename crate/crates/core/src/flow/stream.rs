//! Stream function `ψ_m` with `ψ_m' = -u_m` and zero torus mean.
//!
//! In grid units `x = (y + π) / ℓ_m` the antiderivative of the scaled flow,
//! `Φ(x) = ∫_0^x p^m u_m`, has half-integer values at nodes, so it is kept
//! exactly as `2Φ_j` and `ψ_m(y) = C - κ Φ(x)` with `κ = ℓ_m / p^m`. Since
//! `u_m` has mean `1/2`, `ψ_m` is not periodic: it is extended to all of `R`
//! by `ψ(y + 2π) = ψ(y) - π`, which is the antiderivative of the periodic
//! flow.

use std::f64::consts::PI;

use super::{FlowParams, PiecewiseLinearFlow};
use crate::numeric::NeumaierSum;

#[derive(Debug, Clone)]
pub struct StreamFunction {
    params: FlowParams,
    level: u32,
    ell: f64,
    kappa: f64,
    /// `p^m u_m(y_j)`.
    u: Vec<u32>,
    /// `2 Φ_j` for `j = 0..=N`.
    phi2: Vec<i64>,
    offset: f64,
}

pub fn stream(flow: &PiecewiseLinearFlow) -> StreamFunction {
    let n = flow.n_nodes();
    let u = flow.scaled_values().to_vec();
    let mut phi2 = Vec::with_capacity(n + 1);
    let mut acc: i64 = 0;
    let mut six_sum: i128 = 0;
    phi2.push(0);
    for j in 0..n {
        let uj = u[j] as i64;
        let sigma = flow.slope_sign(j) as i64;
        six_sum += (3 * acc + 3 * uj + sigma) as i128;
        acc += 2 * uj + sigma;
        phi2.push(acc);
    }
    let ell = flow.ell();
    let kappa = ell / flow.denominator() as f64;
    let offset = kappa * six_sum as f64 / (6.0 * n as f64);
    StreamFunction {
        params: *flow.params(),
        level: flow.level(),
        ell,
        kappa,
        u,
        phi2,
        offset,
    }
}

impl StreamFunction {
    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn n_segments(&self) -> usize {
        self.u.len()
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// `ℓ_m / p^m`, the factor converting grid-unit `Φ` to `ψ`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// The additive constant `C` in `ψ = C - κ Φ`.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub(crate) fn scaled_u(&self, j: usize) -> i64 {
        self.u[j] as i64
    }

    pub(crate) fn sigma(&self, j: usize) -> i64 {
        let n = self.u.len();
        self.u[(j + 1) % n] as i64 - self.u[j] as i64
    }

    /// `2 Φ` at extended node `j` (any integer, period shift applied).
    pub(crate) fn phi2_ext(&self, j: i64) -> i64 {
        let n = self.u.len() as i64;
        let w = j.div_euclid(n);
        let jb = j.rem_euclid(n) as usize;
        self.phi2[jb] + w * self.phi2[n as usize]
    }

    /// `(j, ξ)` with `x = j + ξ`, `0 <= ξ < 1`.
    fn split(&self, y: f64) -> (i64, f64) {
        let x = (y + PI) / self.ell;
        let j = x.floor();
        (j as i64, x - j)
    }

    /// `Φ(j + ξ) - Φ_j`, the in-segment part of the antiderivative.
    fn partial(&self, j: i64, xi: f64) -> f64 {
        let jb = j.rem_euclid(self.u.len() as i64) as usize;
        let uj = self.u[jb] as f64;
        let sigma = self.sigma(jb) as f64;
        xi * (uj + 0.5 * sigma * xi)
    }

    /// `ψ_m(y)` for any real `y`.
    pub fn eval(&self, y: f64) -> f64 {
        let (j, xi) = self.split(y);
        let phi = 0.5 * self.phi2_ext(j) as f64 + self.partial(j, xi);
        self.offset - self.kappa * phi
    }

    /// `ψ_m'(y) = -u_m(y)`.
    pub fn derivative(&self, y: f64) -> f64 {
        let (j, xi) = self.split(y);
        let jb = j.rem_euclid(self.u.len() as i64) as usize;
        let value = self.u[jb] as f64 + xi * self.sigma(jb) as f64;
        -value / self.params.p_pow(self.level) as f64
    }

    /// `ψ(b) - ψ(a)` without forming the large node values of `Φ`.
    pub fn increment(&self, a: f64, b: f64) -> f64 {
        let (ja, xa) = self.split(a);
        let (jb, xb) = self.split(b);
        let whole = 0.5 * (self.phi2_ext(jb) - self.phi2_ext(ja)) as f64;
        -self.kappa * (whole + (self.partial(jb, xb) - self.partial(ja, xa)))
    }

    /// `Δ_h^2 ψ(y) = ψ(y) - 2ψ(y+h) + ψ(y+2h)`.
    pub fn delta2(&self, y: f64, h: f64) -> f64 {
        self.increment(y + h, y + 2.0 * h) - self.increment(y, y + h)
    }

    /// Coefficients `(a, b, c)` with `ψ_m(y) = a y^2 + b y + c` on segment `j`.
    pub fn coefficients(&self, j: usize) -> [f64; 3] {
        let s = self.params.slope(self.level);
        let denom = self.params.p_pow(self.level) as f64;
        let sigma = self.sigma(j) as f64;
        let uj = self.u[j] as f64 / denom;
        let yj = -PI + j as f64 * self.ell;
        let base = self.offset - self.kappa * 0.5 * self.phi2[j] as f64;
        [
            -0.5 * sigma * s,
            -uj + sigma * s * yj,
            base + uj * yj - 0.5 * sigma * s * yj * yj,
        ]
    }

    /// `∫_{-π}^{π} ψ_m`, summed segment by segment.
    pub fn torus_integral(&self) -> f64 {
        let mut sum = NeumaierSum::new();
        for j in 0..self.u.len() {
            let phi = 0.5 * self.phi2[j] as f64;
            let uj = self.u[j] as f64;
            let sigma = self.sigma(j) as f64;
            let seg = phi + uj / 2.0 + sigma / 6.0;
            sum.add((self.offset - self.kappa * seg) * self.ell);
        }
        sum.value()
    }
}

/// `f(y) - 2 f(y+h) + f(y+2h)` for an arbitrary function.
pub fn second_difference<F: Fn(f64) -> f64>(f: F, y: f64, h: f64) -> f64 {
    f(y) - 2.0 * f(y + h) + f(y + 2.0 * h)
}
