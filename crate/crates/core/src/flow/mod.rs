//! Fractal shear flows built as limits of piecewise-linear zig-zags.
//!
//! Level 0 is the periodic tent `u_0(y) = 1 - |y|/π` on `[-π, π)`. Level
//! `m + 1` splits every level-`m` segment into `p` pieces and replaces each
//! piece by a zig-zag that oscillates `q` times between the level-`m` values
//! at the ends of the piece. Node values of `u_m` are integer multiples of
//! `p^{-m}` and are stored as those integers.

mod classify;
pub mod io;
mod stream;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classify::{classify, GridClassification, NodeValues, PointClass, Refined, StructureReport};
pub use stream::{second_difference, stream, StreamFunction};

/// Largest node count `N_m` accepted by [`build`].
pub const DEFAULT_MAX_NODES: u64 = 100_000_000;

/// The odd pair `(p, q)` that fixes the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowParams {
    p: u32,
    q: u32,
}

impl FlowParams {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if v < 3 {
                return Err(Error::InvalidParams(format!("{name} = {v} must be at least 3")));
            }
            if v % 2 == 0 {
                return Err(Error::InvalidParams(format!("{name} = {v} must be odd")));
            }
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Hölder exponent `ln p / (ln p + ln q)`.
    pub fn alpha(&self) -> f64 {
        let lp = (self.p as f64).ln();
        let lq = (self.q as f64).ln();
        lp / (lp + lq)
    }

    /// `p^m`, the denominator of level-`m` node values.
    pub fn p_pow(&self, m: u32) -> u64 {
        (self.p as u64).pow(m)
    }

    pub fn pq_pow(&self, m: u32) -> u128 {
        (self.p as u128 * self.q as u128).pow(m)
    }

    /// Number of segments (and torus nodes) at level `m`, `2 (pq)^m`.
    pub fn n_nodes(&self, m: u32) -> u128 {
        2 * self.pq_pow(m)
    }

    /// Segment length `ℓ_m = π / (pq)^m`.
    pub fn ell(&self, m: u32) -> f64 {
        PI / (self.p as f64 * self.q as f64).powi(m as i32)
    }

    /// Slope magnitude `s_m = q^m / π`.
    pub fn slope(&self, m: u32) -> f64 {
        (self.q as f64).powi(m as i32) / PI
    }

    /// Sub-piece length `h_m = ℓ_{m-1} / p = q ℓ_m` (defined for `m >= 1`).
    pub fn h(&self, m: u32) -> f64 {
        assert!(m >= 1, "h_m is defined for m >= 1");
        self.ell(m - 1) / self.p as f64
    }

    /// `‖u_m - u‖_∞ <= 1 / ((p - 1) p^m)`.
    pub fn uniform_error_bound(&self, m: u32) -> f64 {
        1.0 / ((self.p as f64 - 1.0) * (self.p as f64).powi(m as i32))
    }

    /// `(t_m, t'_m) = (2π p^m, π p^m)`: the fast-decay and the sharpness times.
    pub fn special_times(&self, m: u32) -> (f64, f64) {
        let pm = (self.p as f64).powi(m as i32);
        (2.0 * PI * pm, PI * pm)
    }

    /// Deepest level whose node count stays within `max_nodes`.
    pub fn max_level(&self, max_nodes: u64) -> u32 {
        let mut m = 0;
        while self.n_nodes(m + 1) <= max_nodes as u128 {
            m += 1;
        }
        m
    }

    /// Smallest `m` with `t |k| / ((p-1) p^m) <= tol`.
    pub fn min_level_for_phase(&self, t_abs_k: f64, tol: f64) -> u32 {
        let mut m = 0;
        while t_abs_k * self.uniform_error_bound(m) > tol {
            m += 1;
        }
        m
    }
}

pub fn uniform_error_bound(params: &FlowParams, m: u32) -> f64 {
    params.uniform_error_bound(m)
}

pub fn special_times(params: &FlowParams, m: u32) -> (f64, f64) {
    params.special_times(m)
}

/// `u_m` on the uniform torus grid `y_j = -π + j ℓ_m`, `j = 0..N_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFlow {
    params: FlowParams,
    level: u32,
    /// `p^m u_m(y_j)`.
    scaled: Vec<u32>,
}

/// Builds `u_m` by `m` refinements of the tent, refusing levels whose node
/// count exceeds [`DEFAULT_MAX_NODES`].
pub fn build(params: FlowParams, m: u32) -> Result<PiecewiseLinearFlow> {
    build_with_budget(params, m, DEFAULT_MAX_NODES)
}

pub fn build_with_budget(params: FlowParams, m: u32, max_nodes: u64) -> Result<PiecewiseLinearFlow> {
    let nodes = params.n_nodes(m);
    if nodes > max_nodes as u128 {
        return Err(Error::LevelTooDeep {
            level: m,
            nodes,
            budget: max_nodes,
        });
    }
    let mut flow = PiecewiseLinearFlow {
        params,
        level: 0,
        scaled: vec![0, 1],
    };
    for _ in 0..m {
        flow = flow.refine();
    }
    Ok(flow)
}

impl PiecewiseLinearFlow {
    /// Rebuilds a flow from stored scaled node values, checking every
    /// structural invariant of the construction.
    pub fn from_scaled(params: FlowParams, level: u32, scaled: Vec<u32>) -> Result<Self> {
        let n = params.n_nodes(level);
        if scaled.len() as u128 != n {
            return Err(Error::InvalidInput(format!(
                "expected {n} nodes at level {level}, got {}",
                scaled.len()
            )));
        }
        let flow = Self {
            params,
            level,
            scaled,
        };
        let reference = build(params, level)?;
        if reference.scaled != flow.scaled {
            return Err(Error::InvalidInput(
                "node values do not match the construction".into(),
            ));
        }
        Ok(flow)
    }

    fn refine(&self) -> Self {
        let p = self.params.p as i64;
        let q = self.params.q as usize;
        let n = self.scaled.len();
        let mut next = Vec::with_capacity(n * p as usize * q);
        for j in 0..n {
            let a = self.scaled[j] as i64;
            let b = self.scaled[(j + 1) % n] as i64;
            let step = b - a;
            for k in 0..p {
                let lo = (a * p + k * step) as u32;
                let hi = (a * p + (k + 1) * step) as u32;
                for r in 0..q {
                    next.push(if r % 2 == 0 { lo } else { hi });
                }
            }
        }
        Self {
            params: self.params,
            level: self.level + 1,
            scaled: next,
        }
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn n_nodes(&self) -> usize {
        self.scaled.len()
    }

    pub fn ell(&self) -> f64 {
        self.params.ell(self.level)
    }

    pub fn slope_magnitude(&self) -> f64 {
        self.params.slope(self.level)
    }

    /// `p^m`.
    pub fn denominator(&self) -> u64 {
        self.params.p_pow(self.level)
    }

    /// Scaled node values `p^m u_m(y_j)`, exact.
    pub fn scaled_values(&self) -> &[u32] {
        &self.scaled
    }

    /// Scaled value at node `j`, wrapping around the torus.
    #[inline]
    pub fn scaled_at(&self, j: usize) -> u32 {
        self.scaled[j % self.scaled.len()]
    }

    #[inline]
    pub fn node_value(&self, j: usize) -> f64 {
        self.scaled_at(j) as f64 / self.denominator() as f64
    }

    #[inline]
    pub fn node_y(&self, j: usize) -> f64 {
        -PI + j as f64 * self.ell()
    }

    /// `+1` if `u_m` increases on segment `j`, `-1` otherwise.
    #[inline]
    pub fn slope_sign(&self, j: usize) -> i32 {
        let n = self.scaled.len();
        let a = self.scaled[j % n] as i64;
        let b = self.scaled[(j + 1) % n] as i64;
        (b - a) as i32
    }

    /// Signed slope `u_m'` on segment `j`.
    #[inline]
    pub fn slope(&self, j: usize) -> f64 {
        self.slope_sign(j) as f64 * self.slope_magnitude()
    }

    /// Grid coordinate `(y + π) / ℓ_m` of `y` wrapped to `[0, N_m)`.
    fn grid_coordinate(&self, y: f64) -> (usize, f64) {
        let n = self.scaled.len();
        let yw = (y + PI).rem_euclid(2.0 * PI);
        let x = yw / self.ell();
        let mut j = x.floor() as usize;
        let mut frac = x - j as f64;
        if j >= n {
            j = n - 1;
            frac = 1.0;
        }
        (j, frac)
    }

    /// `u_m(y)` by linear interpolation; `y` is taken modulo `2π`.
    pub fn evaluate(&self, y: f64) -> f64 {
        let (j, frac) = self.grid_coordinate(y);
        let a = self.scaled_at(j) as f64;
        let b = self.scaled_at(j + 1) as f64;
        (a + frac * (b - a)) / self.denominator() as f64
    }

    /// `sup_I u_m - inf_I u_m` on `I = [a, b]`.
    ///
    /// Intervals shorter than `2 ℓ_m` are still measured but flagged as
    /// under-resolved: the level-`m` oscillation need not reflect the limit
    /// flow there.
    pub fn oscillation(&self, a: f64, b: f64) -> Result<Oscillation> {
        let len = b - a;
        if !(len > 0.0) || len > 2.0 * PI {
            return Err(Error::InvalidInput(format!(
                "interval length {len} must lie in (0, 2π]"
            )));
        }
        let ell = self.ell();
        let n = self.scaled.len() as i64;
        let xa = (a + PI) / ell;
        let xb = (b + PI) / ell;
        let mut lo = self.evaluate(a).min(self.evaluate(b));
        let mut hi = self.evaluate(a).max(self.evaluate(b));
        let first = xa.floor() as i64 + 1;
        let last = xb.ceil() as i64 - 1;
        let denom = self.denominator() as f64;
        // Once a full period is covered every node has been seen.
        let last = last.min(first + n - 1);
        for j in first..=last {
            let v = self.scaled[j.rem_euclid(n) as usize] as f64 / denom;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok(Oscillation {
            value: hi - lo,
            under_resolved: len < 2.0 * ell,
        })
    }

    /// `|I|^α / (π^α p^2)`, the lower Hölder bound satisfied by the limit flow
    /// on intervals of length at most 1.
    pub fn lower_holder_bound(&self, len: f64) -> f64 {
        let alpha = self.params.alpha();
        len.powf(alpha) / (PI.powf(alpha) * (self.params.p as f64).powi(2))
    }
}

/// Result of [`PiecewiseLinearFlow::oscillation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    pub value: f64,
    pub under_resolved: bool,
}
