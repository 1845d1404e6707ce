use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use roughmix::flow::{self, io as flow_io, GridClassification, Refined};
use roughmix::mixing::TimeGrid;
use roughmix::oscint::{operation_count, PhaseTable, TrigPolynomial, OPERATION_BUDGET};
use roughmix::viscous::Profile;
use roughmix::xlab::config::{DeltaGrid, FlowSpec, SweepSpec, Tolerances};
use roughmix::xlab::{fit_power_law, run, run_file, ExperimentConfig, ExperimentKind, Outcome};
use roughmix::{FlowParams, Result};

/// Fractal shear flows: construction, oscillatory integrals, mixing and
/// enhanced dissipation.
///
/// The number of worker threads is read from ROUGHMIX_WORKERS (default: all
/// cores). Exit status is 0 when every asserted bound passes, 1 when a check
/// fails and 2 on errors.
#[derive(Parser)]
#[command(name = "roughmix", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct FlowArgs {
    #[arg(long, default_value_t = 3)]
    p: u32,
    #[arg(long, default_value_t = 3)]
    q: u32,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build u_m and write its nodes as CSV (stdout unless --out).
    BuildFlow {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the level-m grid and verify the structural identities.
    Classify {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        m: u32,
    },
    /// ∫ e^{i t u_m(y)} e^{i n y} dy and the uniform bound C·‖φ‖/t.
    Oscint {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        n: i64,
    },
    /// Mixing-norm decay of cos x.
    Mix {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, default_value_t = 5.0)]
        t_start: f64,
        #[arg(long, default_value_t = 100.0)]
        t_stop: f64,
        #[arg(long, default_value_t = 40)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enhanced-dissipation sweep over ν.
    Diffuse {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, value_delimiter = ',', default_value = "1e-7,1e-6,1e-5,1e-4,1e-3")]
        nu_grid: Vec<f64>,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        k: i64,
        #[arg(long)]
        threshold: Option<f64>,
        /// Shear profile: fractal, sine or zero.
        #[arg(long, default_value = "fractal")]
        profile: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ω₁(δ) scan of the stream function.
    Omega1 {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, default_value_t = 6)]
        m: u32,
        #[arg(long)]
        delta_lo: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        delta_hi: f64,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power-law fit of two CSV columns.
    Fit {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Fit window "lo,hi" on the x column.
        #[arg(long, value_delimiter = ',')]
        window: Option<Vec<f64>>,
    },
    /// Run an experiment described by a JSON config.
    Run { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = set_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn set_workers() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("ROUGHMIX_WORKERS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("ROUGHMIX_WORKERS = {v:?} is not a positive integer"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn experiment(kind: ExperimentKind, flow: FlowArgs, m: Option<u32>, out: Option<PathBuf>) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        flow: FlowSpec {
            p: flow.p,
            q: flow.q,
            m,
            phase_tol: None,
        },
        seed: 0,
        output_dir: out,
        times: None,
        fit_window: None,
        levels: None,
        trials: None,
        n_max: None,
        deltas: None,
        sweep: None,
        tolerances: Tolerances::default(),
    }
}

fn report(o: &Outcome) -> bool {
    let s = &o.summary;
    println!("{} (p = {}, q = {}, α = {:.6}{})", s.kind, s.p, s.q, s.alpha, s.m.map(|m| format!(", m = {m}")).unwrap_or_default());
    for c in &s.checks {
        println!("  [{}] {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    for w in &s.warnings {
        eprintln!("  warning: {w}");
    }
    println!("  wrote {} ({:.2} s)", o.files[0].parent().map(|d| d.display().to_string()).unwrap_or_default(), o.wall_time);
    s.pass
}

fn dispatch(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::BuildFlow { flow, m, out } => {
            let f = flow::build(FlowParams::new(flow.p, flow.q)?, m)?;
            match out {
                Some(path) => {
                    flow_io::write_csv(&f, BufWriter::new(File::create(&path)?))?;
                    eprintln!("u_{m}: {} nodes -> {}", f.n_nodes(), path.display());
                }
                None => flow_io::write_csv(&f, BufWriter::new(io::stdout().lock()))?,
            }
            Ok(true)
        }
        Cmd::Classify { flow, m } => {
            if m == 0 {
                return Err(roughmix::Error::InvalidInput("classification needs m >= 1".into()));
            }
            let fp = FlowParams::new(flow.p, flow.q)?;
            // level m is read through the refinement of level m - 1, so only the
            // coarse grid is stored
            let coarse = flow::build(fp, m - 1)?;
            let report = GridClassification::for_level(fp, m).verify(&Refined::new(&coarse))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.all_pass())
        }
        Cmd::Oscint { flow, m, t, n } => {
            let fp = FlowParams::new(flow.p, flow.q)?;
            let f = flow::build(fp, m)?;
            let phi = TrigPolynomial::from_modes(&[(n, Complex64::new(1.0, 0.0))]);
            if operation_count(&f, &phi) > OPERATION_BUDGET {
                eprintln!("warning: {} segment evaluations exceed the budget of {OPERATION_BUDGET}", operation_count(&f, &phi));
            }
            let value = PhaseTable::new(&f, t, n.unsigned_abs() as usize).integrate(&phi);
            let bound = roughmix::oscint::stationary_phase_constant(&fp) * phi.w11_norm();
            println!("integral = {:.15e} {:+.15e}i", value.re, value.im);
            println!("|integral|·t = {:.6e}  (bound {:.6e})", value.norm() * t, bound);
            Ok(value.norm() * t <= bound)
        }
        Cmd::Mix { flow, m, t_start, t_stop, n, out } => {
            let mut c = experiment(ExperimentKind::Mixing, flow, m, out);
            c.times = Some(TimeGrid {
                start: t_start,
                stop: t_stop,
                n,
                log: true,
                inject_special: false,
            });
            Ok(report(&run(&c)?))
        }
        Cmd::Diffuse { flow, nu_grid, k, threshold, profile, out } => {
            let profile: Profile = serde_json::from_value(serde_json::Value::String(profile.clone()))
                .map_err(|_| roughmix::Error::InvalidInput(format!("unknown profile {profile:?} (fractal, sine, zero)")))?;
            let mut c = experiment(ExperimentKind::DissipationSweep, flow, None, out);
            let check_nu = nu_grid.iter().cloned().find(|&x| (x - 1e-5).abs() < 1e-18);
            c.sweep = Some(SweepSpec {
                nus: nu_grid,
                k,
                k_check: check_nu.map(|_| 2 * k),
                k_check_nu: check_nu,
                profile,
                threshold: threshold.unwrap_or(roughmix::viscous::DEFAULT_THRESHOLD),
            });
            Ok(report(&run(&c)?))
        }
        Cmd::Omega1 { flow, m, delta_lo, delta_hi, n, out } => {
            let mut c = experiment(ExperimentKind::Omega1, flow, Some(m), out);
            c.deltas = Some(DeltaGrid {
                lo: delta_lo,
                hi: delta_hi,
                n,
            });
            Ok(report(&run(&c)?))
        }
        Cmd::Fit { csv, x, y, window } => {
            let (xs, ys) = read_columns(&csv, &x, &y)?;
            let w = match window.as_deref() {
                None => None,
                Some(&[lo, hi]) => Some((lo, hi)),
                Some(v) => return Err(roughmix::Error::InvalidInput(format!("--window needs two values, got {}", v.len()))),
            };
            let fit = fit_power_law(&xs, &ys, w)?;
            println!("{}", serde_json::to_string_pretty(&fit)?);
            Ok(true)
        }
        Cmd::Run { config } => Ok(report(&run_file(&config)?)),
    }
}

fn read_columns(path: &PathBuf, x: &str, y: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let parse_err = |msg: String| roughmix::Error::Parse(format!("{}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| parse_err(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(format!("no column {name:?} (have {:?})", headers.iter().collect::<Vec<_>>())))
    };
    let (ix, iy) = (col(x)?, col(y)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        let get = |i: usize| -> Result<Option<f64>> {
            let s = rec.get(i).unwrap_or("").trim();
            if s.is_empty() {
                return Ok(None);
            }
            s.parse()
                .map(Some)
                .map_err(|_| parse_err(format!("row {}: {s:?} is not a number", line + 2)))
        };
        // rows with an empty cell (e.g. a run without threshold crossing) are skipped
        if let (Some(a), Some(b)) = (get(ix)?, get(iy)?) {
            xs.push(a);
            ys.push(b);
        }
    }
    Ok((xs, ys))
}
