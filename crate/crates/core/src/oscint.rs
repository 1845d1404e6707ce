//! Oscillatory integrals `∫_T e^{i t u_m(y)} φ(y) dy` with the piecewise-linear
//! phase `u_m` and a trigonometric-polynomial amplitude `φ`.
//!
//! On one segment both the phase and `n y` are linear, so every integral is
//! a closed form `L e^{i θ_mid} sinc(ω L / 2)`. The torus sums use
//! compensated accumulation over fixed-size chunks, so the result does not
//! depend on the number of threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{build, FlowParams, GridClassification, PiecewiseLinearFlow, PointClass};
use crate::numeric::{cis, sinc, ComplexSum};
use crate::par;

/// Above this many segment–frequency evaluations a caller should expect long
/// runtimes; see [`operation_count`].
pub const OPERATION_BUDGET: u128 = 20_000_000_000;

/// Number of closed-form segment evaluations behind [`integral_pl`].
pub fn operation_count(flow: &PiecewiseLinearFlow, phi: &TrigPolynomial) -> u128 {
    flow.n_nodes() as u128 * (2 * phi.n_max() as u128 + 1)
}

/// `φ(y) = Σ_{|n| <= n_max} c_n e^{i n y}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    n_max: usize,
    coeffs: Vec<Complex64>,
}

/// One Fourier mode as stored in JSON coefficient files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub n: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl TrigPolynomial {
    /// `coeffs[i]` is `c_{i - n_max}`; the length must be odd.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "coefficient vector must have odd length, got {}",
                coeffs.len()
            )));
        }
        Ok(Self {
            n_max: coeffs.len() / 2,
            coeffs,
        })
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            n_max: 0,
            coeffs: vec![c],
        }
    }

    pub fn from_modes(modes: &[(i64, Complex64)]) -> Self {
        let n_max = modes.iter().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
        for &(n, c) in modes {
            coeffs[(n + n_max as i64) as usize] += c;
        }
        Self { n_max, coeffs }
    }

    pub fn from_mode_list(modes: &[Mode]) -> Self {
        let pairs: Vec<(i64, Complex64)> = modes.iter().map(|m| (m.n, Complex64::new(m.re, m.im))).collect();
        Self::from_modes(&pairs)
    }

    pub fn to_mode_list(&self) -> Vec<Mode> {
        self.modes()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(n, c)| Mode { n, re: c.re, im: c.im })
            .collect()
    }

    /// Random coefficients with `|c_n| <~ 1/(1+|n|)`; `real` enforces
    /// `c_{-n} = conj(c_n)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_max: usize, real: bool) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n_max + 1];
        for n in -(n_max as i64)..=(n_max as i64) {
            let scale = 1.0 / (1.0 + n.abs() as f64);
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
            coeffs[(n + n_max as i64) as usize] = c;
        }
        if real {
            for n in 0..=n_max {
                let c = coeffs[n_max + n];
                coeffs[n_max - n] = c.conj();
            }
            coeffs[n_max].im = 0.0;
        }
        Self { n_max, coeffs }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_max {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + self.n_max as i64) as usize]
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n_max = self.n_max as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - n_max, c))
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        let z = cis(y);
        let zinv = z.conj();
        let mut acc = self.coeff(0);
        let (mut zp, mut zm) = (z, zinv);
        for n in 1..=self.n_max as i64 {
            acc += self.coeff(n) * zp + self.coeff(-n) * zm;
            zp *= z;
            zm *= zinv;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .modes()
            .map(|(n, c)| c * Complex64::new(0.0, n as f64))
            .collect();
        Self {
            n_max: self.n_max,
            coeffs,
        }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        (0..=self.n_max as i64).all(|n| (self.coeff(-n) - self.coeff(n).conj()).norm() <= tol)
    }

    /// `∫_T φ = 2π c_0`.
    pub fn integral(&self) -> Complex64 {
        self.coeff(0) * (2.0 * PI)
    }

    /// `‖φ‖_{L^1}` by the midpoint rule on a grid fine enough that the
    /// relative error is below about `1e-8` (|φ| has kinks at zeros of real φ).
    pub fn l1_norm(&self) -> f64 {
        let m = 8192.max(512 * (self.n_max + 1));
        let h = 2.0 * PI / m as f64;
        let mut s = crate::numeric::NeumaierSum::new();
        for i in 0..m {
            s.add(self.eval(-PI + (i as f64 + 0.5) * h).norm());
        }
        s.value() * h
    }

    pub fn derivative_l1(&self) -> f64 {
        self.derivative().l1_norm()
    }

    /// `‖φ‖_{W^{1,1}} = ‖φ‖_{L^1} + ‖φ'‖_{L^1}`.
    pub fn w11_norm(&self) -> f64 {
        self.l1_norm() + self.derivative_l1()
    }
}

/// `∫_a^b e^{i t (u_a + slope (y - a))} e^{i n y} dy`.
pub fn segment_integral(a: f64, b: f64, u_a: f64, slope: f64, t: f64, n: i64) -> Complex64 {
    let len = b - a;
    let n = n as f64;
    let omega = t * slope + n;
    if omega.abs() < 1e-12 * ((t * slope).abs() + n.abs() + 1.0) {
        let base = cis(t * u_a + n * a) * len;
        return base * Complex64::new(1.0, 0.5 * omega * len);
    }
    let mid = 0.5 * (a + b);
    let u_mid = u_a + slope * 0.5 * len;
    cis(t * u_mid + n * mid) * (len * sinc(0.5 * omega * len))
}

/// Per-frequency sums over all segments of the level-`m` grid:
/// `plain[n] = ∫_T e^{i t u_m} e^{i n y}` and
/// `signed[n] = Σ_j sgn(u_m' on j) ∫_j e^{i t u_m} e^{i n y}`.
struct SegmentSums {
    plain: Vec<Complex64>,
    signed: Option<Vec<Complex64>>,
}

fn segment_sums(flow: &PiecewiseLinearFlow, t: f64, n_lo: i64, n_hi: i64, signed: bool) -> SegmentSums {
    assert!(n_hi >= n_lo);
    let count = (n_hi - n_lo + 1) as usize;
    let n = flow.n_nodes();
    let ell = flow.ell();
    let denom = flow.denominator() as f64;
    let half_step = t / (2.0 * denom);
    // e^{i k ℓ/2}, shared by every segment
    let w: Vec<Complex64> = (0..count).map(|k| cis(k as f64 * 0.5 * ell)).collect();
    let scaled = flow.scaled_values();

    let chunks = par::map_chunks(n, 4096, |range| {
        let mut plain = vec![ComplexSum::new(); count];
        let mut sgn = if signed { vec![ComplexSum::new(); count] } else { Vec::new() };
        for j in range {
            let a = scaled[j] as f64;
            let b = scaled[(j + 1) % n] as f64;
            let sigma = b - a;
            let mid = -PI + (j as f64 + 0.5) * ell;
            let u_mid = 0.5 * (a + b) / denom;
            let x0 = sigma * half_step + n_lo as f64 * 0.5 * ell;
            let e0 = cis(x0);
            let step = cis(mid);
            let mut cur = Complex64::new(0.0, 0.0);
            for k in 0..count {
                if k % 64 == 0 {
                    cur = cis(t * u_mid + (n_lo + k as i64) as f64 * mid);
                }
                let x = x0 + k as f64 * 0.5 * ell;
                let s = if x.abs() < 1e-2 {
                    sinc(x)
                } else {
                    (e0.re * w[k].im + e0.im * w[k].re) / x
                };
                let term = cur * (ell * s);
                plain[k].add(term);
                if signed {
                    sgn[k].add(term * sigma);
                }
                cur *= step;
            }
        }
        (plain, sgn)
    });

    let mut plain = vec![ComplexSum::new(); count];
    let mut sgn = vec![ComplexSum::new(); if signed { count } else { 0 }];
    for (p, s) in chunks {
        for k in 0..count {
            plain[k].merge(&p[k]);
        }
        for k in 0..s.len() {
            sgn[k].merge(&s[k]);
        }
    }
    SegmentSums {
        plain: plain.iter().map(|c| c.value()).collect(),
        signed: signed.then(|| sgn.iter().map(|c| c.value()).collect()),
    }
}

/// `F(n) = ∫_T e^{i t u_m(y)} e^{i n y} dy` for `n = n_lo..=n_hi`.
pub fn fourier_table(flow: &PiecewiseLinearFlow, t: f64, n_lo: i64, n_hi: i64) -> Vec<Complex64> {
    segment_sums(flow, t, n_lo, n_hi, false).plain
}

/// Frequency table of a flow at one time, reusable across amplitudes.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    pub t: f64,
    pub n_max: usize,
    values: Vec<Complex64>,
}

impl PhaseTable {
    pub fn new(flow: &PiecewiseLinearFlow, t: f64, n_max: usize) -> Self {
        let values = fourier_table(flow, t, -(n_max as i64), n_max as i64);
        Self { t, n_max, values }
    }

    pub fn get(&self, n: i64) -> Complex64 {
        self.values[(n + self.n_max as i64) as usize]
    }

    /// `∫ e^{i t u_m} φ`, requires `φ.n_max() <= n_max`.
    pub fn integrate(&self, phi: &TrigPolynomial) -> Complex64 {
        assert!(phi.n_max() <= self.n_max);
        phi.modes().map(|(n, c)| c * self.get(n)).sum()
    }
}

/// `∫_T e^{i t u_m(y)} φ(y) dy`, exact up to rounding.
pub fn integral_pl(flow: &PiecewiseLinearFlow, t: f64, phi: &TrigPolynomial) -> Complex64 {
    PhaseTable::new(flow, t, phi.n_max()).integrate(phi)
}

/// Each single-segment integral `∫_j e^{i t u_m}` (no amplitude).
pub fn per_segment_integrals(flow: &PiecewiseLinearFlow, t: f64) -> Vec<Complex64> {
    let ell = flow.ell();
    let s = flow.slope_magnitude();
    (0..flow.n_nodes())
        .map(|j| {
            let a = flow.node_y(j);
            segment_integral(a, a + ell, flow.node_value(j), flow.slope_sign(j) as f64 * s, t, 0)
        })
        .collect()
}

/// The stationary-phase constant `4π + q/(q-1) + π`.
pub fn stationary_phase_constant(params: &FlowParams) -> f64 {
    let q = params.q() as f64;
    4.0 * PI + q / (q - 1.0) + PI
}

/// Boundary terms of the integration by parts on each segment,
/// `T_m = Σ_j [F(y_j^-) - F(y_j^+)]` with `F = e^{i t u_m} φ / (t u_m')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySum {
    pub level: u32,
    pub t: f64,
    pub total: Complex64,
    /// Contribution of the `S1` points (both one-sided terms).
    pub t1: Complex64,
    /// `-Σ_{S2} F(y^+)`.
    pub t2_plus: Complex64,
    /// `Σ_{S2} F(y^-)`.
    pub t2_minus: Complex64,
    /// Contribution of the `S0` points; vanishes because `u_m'` is
    /// continuous there.
    pub t0: Complex64,
}

pub fn boundary_sum(
    flow: &PiecewiseLinearFlow,
    classification: &GridClassification,
    t: f64,
    phi: &TrigPolynomial,
) -> Result<BoundarySum> {
    if classification.level() != flow.level() || classification.n_points() != flow.n_nodes() {
        return Err(Error::LevelMismatch(format!(
            "classification of level {} used with a level-{} flow",
            classification.level(),
            flow.level()
        )));
    }
    if t == 0.0 {
        return Err(Error::InvalidInput("boundary sum needs t != 0".into()));
    }
    let n = flow.n_nodes();
    let s = flow.slope_magnitude();
    let chunks = par::map_chunks(n, 4096, |range| {
        let mut acc = [ComplexSum::new(); 4];
        for j in range {
            let value = cis(t * flow.node_value(j)) * phi.eval(flow.node_y(j));
            let plus = value / (t * s * flow.slope_sign(j) as f64);
            let minus = value / (t * s * flow.slope_sign(j + n - 1) as f64);
            match classification.class_of(j) {
                PointClass::S0 => acc[0].add(minus - plus),
                PointClass::S1 => acc[1].add(minus - plus),
                PointClass::S2 => {
                    acc[2].add(-plus);
                    acc[3].add(minus);
                }
            }
        }
        acc
    });
    let mut acc = [ComplexSum::new(); 4];
    for c in chunks {
        for i in 0..4 {
            acc[i].merge(&c[i]);
        }
    }
    let [t0, t1, t2_plus, t2_minus] = acc.map(|a| a.value());
    Ok(BoundarySum {
        level: flow.level(),
        t,
        total: t0 + t1 + t2_plus + t2_minus,
        t1,
        t2_plus,
        t2_minus,
        t0,
    })
}

/// `∫_T e^{i t u_m} φ' / (t u_m')`, the remainder of the integration by parts:
/// `∫ e^{i t u_m} φ = -i (T_m - interior)`.
pub fn interior_term(flow: &PiecewiseLinearFlow, t: f64, phi: &TrigPolynomial) -> Complex64 {
    let n_max = phi.n_max() as i64;
    let sums = segment_sums(flow, t, -n_max, n_max, true);
    let signed = sums.signed.expect("signed sums requested");
    let dphi = phi.derivative();
    let total: Complex64 = dphi
        .modes()
        .map(|(n, c)| c * signed[(n + n_max) as usize])
        .sum();
    total / (t * flow.slope_magnitude())
}

/// `(4π/t) ‖φ‖_{W^{1,1}} + Σ_{k=1}^m q/(t q^k) ‖φ'‖_{L^1}`.
pub fn boundary_bound(params: &FlowParams, m: u32, t: f64, phi: &TrigPolynomial) -> f64 {
    let q = params.q() as f64;
    let tail: f64 = (1..=m).map(|k| q / q.powi(k as i32)).sum();
    (4.0 * PI * phi.w11_norm() + tail * phi.derivative_l1()) / t
}

/// Bound on each of `T2±` at level `m`: the pairs of an `A_k` family differ
/// by `|φ(y) - φ(y')| <= ∫ |φ'|` over disjoint intervals, and `|u_m'| = s_m`,
/// giving `(q-1) π / (t q^m) ‖φ'‖_{L^1} <= π q / (t q^m) ‖φ'‖_{L^1}`.
pub fn t2_bound(params: &FlowParams, m: u32, t: f64, phi: &TrigPolynomial) -> f64 {
    let q = params.q() as f64;
    PI * q / (t * q.powi(m as i32)) * phi.derivative_l1()
}

/// Signed count of `(+,-)` minus `(-,+)` slope patterns on the segment
/// pairs `(2i, 2i+1)`.
pub fn count_mm(flow: &PiecewiseLinearFlow) -> i64 {
    (0..flow.n_nodes() / 2)
        .map(|i| match (flow.slope_sign(2 * i), flow.slope_sign(2 * i + 1)) {
            (1, -1) => 1,
            (-1, 1) => -1,
            _ => 0,
        })
        .sum()
}

/// The constant `C` in `M_m = C q^m`, read off the tent: the closed form
/// `∫_T e^{iπ u_0} = 4i C` is compared with the direct integral. Fails if the
/// two disagree or if the pattern count of `u_0` is not `C`.
pub fn calibrate_mm(params: &FlowParams) -> Result<i64> {
    let u0 = build(*params, 0)?;
    let value = integral_pl(&u0, PI, &TrigPolynomial::constant(Complex64::new(1.0, 0.0)));
    let c = value / Complex64::new(0.0, 4.0);
    let rounded = c.re.round();
    if (c - Complex64::new(rounded, 0.0)).norm() > 1e-12 || rounded as i64 != count_mm(&u0) {
        return Err(Error::InvalidInput(format!(
            "tent calibration failed: integral/4i = {c}, pattern count {}",
            count_mm(&u0)
        )));
    }
    Ok(rounded as i64)
}

/// `4i M_m / (pq)^m`, the exact value of `∫_T e^{i t'_m u}`, with `M_m`
/// counted on the level-`m` flow.
pub fn special_integral_exact(params: &FlowParams, m: u32) -> Result<Complex64> {
    let flow = build(*params, m)?;
    let mm = count_mm(&flow) as f64;
    Ok(Complex64::new(0.0, 4.0 * mm / params.pq_pow(m) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::classify;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one() -> TrigPolynomial {
        TrigPolynomial::constant(Complex64::new(1.0, 0.0))
    }

    /// Composite Gauss–Legendre (5 nodes) on each segment.
    fn quadrature(flow: &PiecewiseLinearFlow, t: f64, phi: &TrigPolynomial, sub: usize) -> Complex64 {
        const X: [f64; 5] = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        let ell = flow.ell() / sub as f64;
        let mut acc = ComplexSum::new();
        for j in 0..flow.n_nodes() * sub {
            let a = -PI + j as f64 * ell;
            for (x, w) in X.iter().zip(W) {
                let y = a + 0.5 * ell * (1.0 + x);
                acc.add(cis(t * flow.evaluate(y)) * phi.eval(y) * (0.5 * ell * w));
            }
        }
        acc.value()
    }

    #[test]
    fn tent_oracle() {
        let u0 = build(FlowParams::new(3, 3).unwrap(), 0).unwrap();
        let v = integral_pl(&u0, PI, &one());
        assert!((v - Complex64::new(0.0, 4.0)).norm() < 1e-14, "{v}");
        // the two tent segments separately
        let left = segment_integral(-PI, 0.0, 0.0, 1.0 / PI, PI, 0);
        let right = segment_integral(0.0, PI, 1.0, -1.0 / PI, PI, 0);
        assert!((left - Complex64::new(0.0, 2.0)).norm() < 1e-14);
        assert!((right - Complex64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn degenerate_frequency_and_conjugation() {
        let v = segment_integral(0.2, 0.7, 0.3, 2.0, 1.5, -3);
        let base = cis(1.5 * 0.3 - 3.0 * 0.2) * 0.5;
        assert!((v - base).norm() < 1e-15);
        let a = segment_integral(0.1, 0.4, 0.2, 0.7, 3.0, 2);
        let b = segment_integral(0.1, 0.4, 0.2, 0.7, -3.0, -2);
        assert!((a.conj() - b).norm() < 1e-15);
    }

    #[test]
    fn zero_time_gives_mean() {
        let flow = build(FlowParams::new(3, 3).unwrap(), 2).unwrap();
        let phi = TrigPolynomial::from_modes(&[(0, Complex64::new(0.7, -0.2)), (3, Complex64::new(1.0, 0.0))]);
        let v = integral_pl(&flow, 0.0, &phi);
        assert!((v - phi.integral()).norm() < 1e-13);
    }

    #[test]
    fn matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fp = FlowParams::new(3, 3).unwrap();
        for (m, t) in [(0, 3.7), (1, 12.0), (2, 40.5), (3, 91.0)] {
            let flow = build(fp, m).unwrap();
            let phi = TrigPolynomial::random(&mut rng, 5, false);
            let exact = integral_pl(&flow, t, &phi);
            let quad = quadrature(&flow, t, &phi, 8);
            assert!((exact - quad).norm() <= 1e-10 * quad.norm().max(1e-3), "m={m}: {exact} vs {quad}");
        }
    }

    #[test]
    fn per_segment_cancellation_at_fast_times() {
        let fp = FlowParams::new(3, 3).unwrap();
        for m in 1..=3 {
            let flow = build(fp, m).unwrap();
            let (tm, _) = fp.special_times(m);
            let worst = per_segment_integrals(&flow, tm).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(worst < 1e-12, "m={m}: {worst}");
        }
    }

    #[test]
    fn mm_counts_by_hand() {
        let fp = FlowParams::new(3, 3).unwrap();
        assert_eq!(count_mm(&build(fp, 0).unwrap()), 1);
        assert_eq!(count_mm(&build(fp, 1).unwrap()), 3);
        assert_eq!(calibrate_mm(&fp).unwrap(), 1);
        let v = special_integral_exact(&fp, 1).unwrap();
        assert!((v - Complex64::new(0.0, 12.0 / 9.0)).norm() < 1e-15);
    }

    #[test]
    fn integration_by_parts_identity() {
        let fp = FlowParams::new(3, 3).unwrap();
        let u1 = build(fp, 1).unwrap();
        let u2 = build(fp, 2).unwrap();
        let c = classify(&u2, &u1).unwrap();
        let phi = TrigPolynomial::from_modes(&[(1, Complex64::new(1.0, 0.3)), (-2, Complex64::new(0.2, 0.0))]);
        for t in [1.0, 7.3, 55.0] {
            let b = boundary_sum(&u2, &c, t, &phi).unwrap();
            assert!(b.t0.norm() < 1e-13);
            let parts = b.t1 + b.t2_plus + b.t2_minus + b.t0;
            assert!((parts - b.total).norm() <= 1e-12 * b.total.norm().max(1e-300));
            let lhs = integral_pl(&u2, t, &phi);
            let rhs = Complex64::new(0.0, -1.0) * (b.total - interior_term(&u2, t, &phi));
            assert!((lhs - rhs).norm() < 1e-12, "t={t}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn boundary_sum_rejects_mismatch() {
        let fp = FlowParams::new(3, 3).unwrap();
        let u2 = build(fp, 2).unwrap();
        let c = GridClassification::for_level(fp, 1);
        assert!(boundary_sum(&u2, &c, 1.0, &one()).is_err());
    }

    #[test]
    fn trig_polynomial_norms() {
        let phi = TrigPolynomial::from_modes(&[(1, Complex64::new(0.5, 0.0)), (-1, Complex64::new(0.5, 0.0))]);
        assert!(phi.is_real(0.0));
        // ‖cos‖_1 = 4, ‖sin‖_1 = 4
        assert!((phi.l1_norm() - 4.0).abs() < 1e-6);
        assert!((phi.w11_norm() - 8.0).abs() < 1e-6);
        let e = TrigPolynomial::from_modes(&[(3, Complex64::new(1.0, 0.0))]);
        assert!((e.l1_norm() - 2.0 * PI).abs() < 1e-12);
        assert!(!e.is_real(1e-12));
        let modes = e.to_mode_list();
        assert_eq!(TrigPolynomial::from_mode_list(&modes), e);
    }
}
