//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! `cargo test --test acceptance` runs everything; pass criterion numbers
//! after `--` to run a subset. Criterion 8 is the slow one (a few minutes on
//! one core); set `ROUGHMIX_SKIP_SLOW=1` to skip it.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roughmix::flow::{self, stream, GridClassification, Refined};
use roughmix::mixing::{
    cos_x, decay_series, envelope_check, evolve_inviscid, hminus1_exact, mixing_norm_exact, InviscidOptions,
    SpectralField, Target, TimeGrid,
};
use roughmix::oscint::{calibrate_mm, count_mm, integral_pl, per_segment_integrals, PhaseTable, TrigPolynomial};
use roughmix::pseudospec::{log_deltas, omega1_scaling};
use roughmix::viscous::{self, config_for_nu, nu_sweep, plane_wave, solve, Simulation, ViscousRunConfig};
use roughmix::xlab::fit::{fit_power_law, log_log_slope};
use roughmix::FlowParams;

type Outcome = Result<String, String>;

fn p33() -> FlowParams {
    FlowParams::new(3, 3).unwrap()
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn c1_special_identity() -> Outcome {
    let fp = p33();
    let one = TrigPolynomial::constant(Complex64::new(1.0, 0.0));
    // M_0 from the tent: ∫ e^{iπ u_0} computed directly must be 4i·M_0
    let m0 = calibrate_mm(&fp).map_err(e)?;
    let mut worst: f64 = 0.0;
    for m in 0..=4u32 {
        let um = flow::build(fp, m).map_err(e)?;
        let mm = count_mm(&um);
        if m == 0 && mm != m0 {
            return Err(format!("pattern count of u_0 = {mm}, calibration gives {m0}"));
        }
        let expected = Complex64::new(0.0, 4.0 * mm as f64 / (9f64).powi(m as i32));
        let t = PI * 3f64.powi(m as i32);
        for mp in m..=m + 2 {
            let f = flow::build(fp, mp).map_err(e)?;
            let v = integral_pl(&f, t, &one);
            worst = worst.max((v - expected).norm());
        }
    }
    verdict(worst < 1e-11, format!("max |∫ - 4i M_m/(pq)^m| = {worst:.2e} (< 1e-11), M_0 = {m0}"))
}

fn c2_mean_zero_fast_times() -> Outcome {
    let fp = p33();
    let one = TrigPolynomial::constant(Complex64::new(1.0, 0.0));
    let (mut seg, mut tor): (f64, f64) = (0.0, 0.0);
    for m in 1..=5u32 {
        let f = flow::build(fp, m).map_err(e)?;
        let t = 2.0 * PI * 3f64.powi(m as i32);
        seg = per_segment_integrals(&f, t).iter().map(|z| z.norm()).fold(seg, f64::max);
        tor = tor.max(integral_pl(&f, t, &one).norm());
    }
    verdict(
        seg < 1e-12 && tor < 1e-11,
        format!("max segment integral {seg:.2e} (< 1e-12), max torus integral {tor:.2e} (< 1e-11)"),
    )
}

fn c3_uniform_stationary_phase() -> Outcome {
    let fp = p33();
    let constant = 4.0 * PI + 3.0 / 2.0 + PI;
    let mut rng = ChaCha8Rng::seed_from_u64(20240617);
    let polys: Vec<TrigPolynomial> = (0..10)
        .map(|i| {
            let n_max = rng.random_range(0..=8usize);
            TrigPolynomial::random(&mut rng, n_max, i % 2 == 0)
        })
        .collect();
    let w11: Vec<f64> = polys.iter().map(|p| p.w11_norm()).collect();
    let times: Vec<f64> = (0..200).map(|i| 10f64.powf(4.0 * i as f64 / 199.0)).collect();
    let (mut violations, mut worst) = (0usize, 0.0f64);
    for m in 0..=6u32 {
        let f = flow::build(fp, m).map_err(e)?;
        for &t in &times {
            let table = PhaseTable::new(&f, t, 8);
            for (phi, w) in polys.iter().zip(&w11) {
                let ratio = table.integrate(phi).norm() * t / (constant * w);
                worst = worst.max(ratio);
                if ratio > 1.0 {
                    violations += 1;
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!("{violations} violations in 14000 checks; largest |∫|·t / (C‖φ‖_W11) = {worst:.3}"),
    )
}

/// `cos x` transported by `u_6` on `[5, 100]`, special times included.
fn mixing_run() -> Result<roughmix::mixing::DecaySeries, String> {
    let fp = p33();
    let f = flow::build(fp, 6).map_err(e)?;
    let pts = TimeGrid::log(5.0, 100.0, 40).points(&fp).map_err(e)?;
    decay_series(&f, &cos_x(), &pts, Target::Level, "cos x").map_err(e)
}

fn c4_generic_rate() -> Outcome {
    let s = mixing_run()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = s
        .times
        .iter()
        .zip(&s.values)
        .zip(&s.special)
        .filter(|(_, sp)| sp.is_none())
        .map(|((t, v), _)| (*t, *v))
        .unzip();
    let fit = fit_power_law(&xs, &ys, None).map_err(e)?;
    let all = fit_power_law(&s.times, &s.values, None).map_err(e)?;
    verdict(
        (-1.15..=-0.85).contains(&fit.exponent),
        format!(
            "slope {:.4} on {} generic times (window [-1.15, -0.85]); with special times {:.4}",
            fit.exponent, fit.n_points, all.exponent
        ),
    )
}

fn c5_special_times() -> Outcome {
    let fp = p33();
    let f = flow::build(fp, 6).map_err(e)?;
    let norm = |t: f64| mixing_norm_exact(&f, &cos_x(), t);
    let fast_t: Vec<f64> = (1..=3).map(|m| 2.0 * PI * 3f64.powi(m)).collect();
    let fast: Vec<f64> = fast_t.iter().map(|&t| norm(t)).collect::<Result<_, _>>().map_err(e)?;
    let slope = log_log_slope(&fast_t, &fast).map_err(e)?;
    let sharp: Vec<f64> = (0..=4)
        .map(|m| {
            let t = PI * 3f64.powi(m);
            norm(t).map(|v| v * t)
        })
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let ratio = sharp.iter().cloned().fold(0.0, f64::max) / sharp.iter().cloned().fold(f64::INFINITY, f64::min);
    verdict(
        (slope + 2.0).abs() <= 0.2 && ratio < 2.0,
        format!("fast-time slope {slope:.4} (-2 ± 0.2); sharp-time max/min of norm·t' = {ratio:.4} (< 2)"),
    )
}

fn c6_envelope() -> Outcome {
    let s = mixing_run()?;
    let env = envelope_check(&s, 0.45, 0.5).map_err(e)?;
    verdict(
        env.constant > 0.0 && env.relative > 1e-6,
        format!(
            "min norm·t^(1/0.45) = {:.4e} at t = {:.2}, {:.3e} of its initial value",
            env.constant, env.argmin_t, env.relative
        ),
    )
}

fn c7_omega1() -> Outcome {
    let fp = p33();
    let (p, alpha) = (3.0f64, 0.5f64);
    let c_pa = 1.0 / (PI.powf(2.0 * alpha) * p.powf(2.0 - 2.0 * alpha));
    let c1 = c_pa / (2.0 * p * p * 3.0).powf(3.0 + 2.0 * alpha);
    let f = flow::build(fp, 6).map_err(e)?;
    let psi = stream(&f);
    let deltas = log_deltas(4.0 * fp.ell(5), 0.5, 12);
    let (res, fit) = omega1_scaling(&psi, &deltas).map_err(e)?;
    let min_ratio = res
        .iter()
        .map(|r| r.value / (c1 * r.delta.powi(4)))
        .fold(f64::INFINITY, f64::min);
    verdict(
        min_ratio >= 1.0 && (3.75..=4.25).contains(&fit.exponent),
        format!(
            "slope {:.4} (window [3.75, 4.25]); min ω₁/(C₁δ⁴) = {min_ratio:.3e} over {} half-widths",
            fit.exponent,
            res.len()
        ),
    )
}

fn c8_enhanced_dissipation() -> Outcome {
    let fp = p33();
    let template = ViscousRunConfig::new(fp, 1e-3, 1).map_err(e)?;
    let nus = [1e-7, 1e-6, 1e-5, 1e-4, 1e-3];
    let sweep = nu_sweep(&template, &nus).map_err(e)?;
    if !sweep.warnings.is_empty() {
        return Err(sweep.warnings.join("; "));
    }
    let tau1 = sweep.runs.iter().find(|r| r.nu == 1e-5).and_then(|r| r.tau).ok_or("no τ at ν = 1e-5")?;
    let mut t2 = template.clone();
    t2.k = 2;
    let tau2 = solve(&config_for_nu(&t2, 1e-5).map_err(e)?, plane_wave)
        .map_err(e)?
        .tau
        .ok_or("no τ for k = 2")?;
    let ratio = tau2 / tau1;
    let predicted = 2f64.powf(-0.8);
    verdict(
        (0.12..=0.28).contains(&sweep.beta) && (ratio / predicted - 1.0).abs() <= 0.2,
        format!(
            "β = {:.4} (window [0.12, 0.28], predicted {:.2}); τ(k=2)/τ(k=1) = {ratio:.4} vs 2^(-0.8) = {predicted:.4}",
            sweep.beta, sweep.predicted
        ),
    )
}

fn c9_structure() -> Outcome {
    let mut checked = 0;
    for (p, q) in [(3, 3), (3, 5), (5, 3), (5, 5)] {
        let fp = FlowParams::new(p, q).unwrap();
        for m in 1..=6u32 {
            let coarse = flow::build(fp, m - 1).map_err(e)?;
            let cls = GridClassification::for_level(fp, m);
            let report = cls.verify(&Refined::new(&coarse)).map_err(e)?;
            if !report.all_pass() {
                return Err(format!("(p, q) = ({p}, {q}), m = {m}: {report:?}"));
            }
            checked += report.n_points;
        }
    }
    verdict(true, format!("all invariants exact on 24 grids ({checked} points)"))
}

fn c10_cross_module() -> Outcome {
    let fp = p33();
    // ν = 0 viscous solve against the closed-form inviscid route
    let m = 2;
    let f = flow::build(fp, m).map_err(e)?;
    let f_in = SpectralField::new(1, vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new((2.0 * PI).sqrt(), 0.0)])
        .map_err(e)?;
    let mut cfg = ViscousRunConfig::inviscid(fp, m, 1, 5.0).map_err(e)?;
    cfg.n_grid = 1 << 19;
    let mut sim = Simulation::new(&cfg, plane_wave).map_err(e)?;
    let mut worst: f64 = 0.0;
    for t in [0.5, 1.0, 2.0, 3.5, 5.0] {
        sim.run_until(t);
        let state = sim.state();
        let exact = hminus1_exact(&f, &f_in, t).map_err(e)?;
        worst = worst.max((viscous::hminus1_norm(&state) - exact).abs() / exact);
        let ev = evolve_inviscid(&f, &f_in, t, InviscidOptions { n_cut: Some(16), target: Target::Level }).map_err(e)?;
        let coeffs = viscous::fourier_coefficients(&state);
        let scale = ev.modes().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        for (n, c) in ev.modes() {
            let d = coeffs.iter().find(|x| x.0 == n).map(|x| x.1).unwrap_or_default();
            worst = worst.max((c - d).norm() / scale);
        }
    }
    // lower Hölder bound: node values of u_7 are exact values of the limit
    // flow, so their spread inside I bounds osc_I u from below
    let u7 = flow::build(fp, 7).map_err(e)?;
    let ell = u7.ell();
    let n = u7.n_nodes() as i64;
    let alpha = fp.alpha();
    let c = 1.0 / (PI.powf(alpha) * 9.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..1000 {
        let len = 10f64.powf(rng.random_range(-5.0..0.0));
        let a = rng.random_range(-PI..PI);
        let (j0, j1) = (((a + PI) / ell).ceil() as i64, ((a + len + PI) / ell).floor() as i64);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in j0..=j1 {
            let v = u7.node_value(j.rem_euclid(n) as usize);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        min_ratio = min_ratio.min((hi - lo) / (c * len.powf(alpha)));
    }
    verdict(
        worst <= 1e-8 && min_ratio >= 1.0,
        format!("ν = 0 vs inviscid: max relative gap {worst:.2e} (<= 1e-8); Hölder: min osc/(C|I|^α) = {min_ratio:.3} on 1000 intervals"),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let all: [Criterion; 10] = [
        (1, "exact special-time identity", c1_special_identity),
        (2, "mean zero at fast times", c2_mean_zero_fast_times),
        (3, "uniform stationary-phase bound", c3_uniform_stationary_phase),
        (4, "generic mixing rate", c4_generic_rate),
        (5, "fast and sharp special times", c5_special_times),
        (6, "optimality envelope", c6_envelope),
        (7, "omega_1 scaling", c7_omega1),
        (8, "enhanced dissipation exponent (slow)", c8_enhanced_dissipation),
        (9, "structural exactness", c9_structure),
        (10, "cross-module consistency", c10_cross_module),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let skip_slow = std::env::var("ROUGHMIX_SKIP_SLOW").is_ok_and(|v| v != "0");
    let mut failed = Vec::new();
    for (id, name, run) in all {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        if id == 8 && skip_slow && !selected.contains(&id) {
            println!("criterion {id:>2} SKIP  {name}: ROUGHMIX_SKIP_SLOW is set");
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {id:>2} PASS  {name}: {d} [{secs:.1} s]"),
            Err(d) => {
                println!("criterion {id:>2} FAIL  {name}: {d} [{secs:.1} s]");
                failed.push(id);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
