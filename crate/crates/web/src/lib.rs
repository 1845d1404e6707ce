//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a flat `Float64Array`; the page reshapes it.

use num_complex::Complex64;
use wasm_bindgen::prelude::*;

use roughmix::mixing::{cos_x, mixing_norm_exact};
use roughmix::oscint::{integral_pl, stationary_phase_constant, TrigPolynomial};
use roughmix::{build, FlowParams};

/// Levels above this get slow in a browser tab.
const MAX_LEVEL: u32 = 7;

fn params(p: u32, q: u32) -> Result<FlowParams, JsError> {
    FlowParams::new(p, q).map_err(|e| JsError::new(&e.to_string()))
}

fn flow(p: u32, q: u32, m: u32) -> Result<roughmix::PiecewiseLinearFlow, JsError> {
    if m > MAX_LEVEL {
        return Err(JsError::new(&format!("level {m} is too fine for the demo (max {MAX_LEVEL})")));
    }
    build(params(p, q)?, m).map_err(|e| JsError::new(&e.to_string()))
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, JsError> {
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(JsError::new("need 0 < t_min < t_max and at least 2 points"));
    }
    let r = (hi / lo).ln();
    Ok((0..count).map(|i| lo * (r * i as f64 / (count - 1) as f64).exp()).collect())
}

/// Hölder exponent `ln p / (ln p + ln q)`.
#[wasm_bindgen]
pub fn alpha(p: u32, q: u32) -> Result<f64, JsError> {
    Ok(params(p, q)?.alpha())
}

/// `u_m` on the node grid as interleaved `[y0, u0, y1, u1, ...]`, thinned to
/// at most `max_points` nodes (every node is kept when that fits).
#[wasm_bindgen]
pub fn flow_profile(p: u32, q: u32, m: u32, max_points: usize) -> Result<Vec<f64>, JsError> {
    let f = flow(p, q, m)?;
    let n = f.n_nodes();
    let stride = n.div_ceil(max_points.max(2));
    let mut out = Vec::with_capacity(2 * (n / stride + 2));
    for j in (0..n).step_by(stride) {
        out.push(f.node_y(j));
        out.push(f.node_value(j));
    }
    // close the period
    out.push(std::f64::consts::PI);
    out.push(f.node_value(0));
    Ok(out)
}

/// `t·|∫ e^{i t u_m(y)} e^{i n y} dy|` on a log grid, as `[t, value, ...]`,
/// followed by the uniform bound as the last element.
#[wasm_bindgen]
pub fn oscillatory_curve(p: u32, q: u32, m: u32, n: i32, t_min: f64, t_max: f64, count: usize) -> Result<Vec<f64>, JsError> {
    let f = flow(p, q, m)?;
    let phi = TrigPolynomial::from_modes(&[(n as i64, Complex64::new(1.0, 0.0))]);
    let mut out = Vec::with_capacity(2 * count + 1);
    for t in log_grid(t_min, t_max, count)? {
        out.push(t);
        out.push(t * integral_pl(&f, t, &phi).norm());
    }
    out.push(stationary_phase_constant(f.params()) * phi.w11_norm());
    Ok(out)
}

/// Mixing norm of `cos x` transported by `u_m`, as `[t, norm, ...]`.
#[wasm_bindgen]
pub fn mixing_decay(p: u32, q: u32, m: u32, t_min: f64, t_max: f64, count: usize) -> Result<Vec<f64>, JsError> {
    let f = flow(p, q, m)?;
    let f_in = cos_x();
    let mut out = Vec::with_capacity(2 * count);
    for t in log_grid(t_min, t_max, count)? {
        let v = mixing_norm_exact(&f, &f_in, t).map_err(|e| JsError::new(&e.to_string()))?;
        out.push(t);
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_closes_the_period() {
        let v = flow_profile(3, 3, 2, 1000).unwrap();
        assert_eq!(v.len(), 2 * 162 + 2);
        assert_eq!(v[0], -std::f64::consts::PI);
        assert_eq!(v[v.len() - 1], v[1]);
    }

    #[test]
    fn profile_is_thinned() {
        let v = flow_profile(3, 3, 5, 500).unwrap();
        assert!(v.len() / 2 <= 501);
    }

    #[test]
    fn curves_have_the_requested_length() {
        let c = oscillatory_curve(3, 3, 3, 0, 1.0, 100.0, 20).unwrap();
        assert_eq!(c.len(), 41);
        assert!(c.chunks(2).take(20).all(|w| w[1] <= c[40]));
        let d = mixing_decay(3, 3, 3, 1.0, 50.0, 10).unwrap();
        assert_eq!(d.len(), 20);
        assert!(d[19] < d[1]);
    }
}
