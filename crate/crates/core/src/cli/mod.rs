//! Run configuration, orchestration of the subcommands and artifact output.

mod config;
mod output;

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

pub use config::{
    parse_config, ConfigErrors, GBlock, GridBlock, InitialBlock, KernelBlock, RunConfig,
    Subcommand, TimeBlock, Tolerances,
};
pub use output::{num, opt, Artifacts};

use crate::bounds::{
    estimate_constants, gronwall_closed_form, interp_inequality_check, random_band_limited_field,
    small_sequence_bound, GronwallValue, InterpMode,
};
use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, gradient, laplacian, lp_norm, Boundary, Grid, ScalarField};
use crate::kernel::{alpha_normalization, build_kernel_table, kernel_mass, QuadratureSpec};
use crate::mild::{
    decay_exponent_fit, picard_solve, sample_kernel, truncation_consistency, young_check,
    PicardConfig, PicardRun,
};
use crate::nonlinearity::{truncate_to_h, NonlinearitySpec, ThetaCutoff};
use crate::rothe::{estimate_report, run_ibvp, run_ibvp_partial, HorizonOptions, RotheConfig};

/// Process exit status for an error: 2 configuration, 3 non-convergence,
/// 4 blow-up, 1 anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::InnerNonConvergence { .. }
        | Error::ContractionFailed { .. }
        | Error::Quadrature { .. } => 3,
        Error::BlowUpHorizon { .. } | Error::NonFinite { .. } => 4,
        _ => 1,
    }
}

pub fn build_grid(block: &GridBlock) -> Result<Grid> {
    Grid::new(&block.extents, &block.points, block.boundary)
}

pub fn build_initial(grid: &Grid, block: &InitialBlock, seed: u64) -> ScalarField {
    let ext = grid.extents().to_vec();
    // Cosine modes are cos(mπx/L) on Neumann boxes and cos(2mπx/L) on periodic ones.
    let wave = match grid.boundary() {
        Boundary::NeumannBox => PI,
        Boundary::Periodic => 2.0 * PI,
    };
    match block {
        InitialBlock::Gaussian {
            mean,
            amplitude,
            width,
        } => grid.sample(|x| {
            let r2: f64 = x
                .iter()
                .zip(&ext)
                .map(|(xi, l)| (xi - 0.5 * l).powi(2))
                .sum();
            mean + amplitude * (-r2 / (width * width)).exp()
        }),
        InitialBlock::Cosine {
            mean,
            amplitude,
            modes,
        } => grid.sample(|x| {
            mean + amplitude
                * x.iter()
                    .zip(&ext)
                    .zip(modes)
                    .map(|((xi, l), &m)| (wave * m as f64 * xi / l).cos())
                    .product::<f64>()
        }),
        InitialBlock::Random {
            mean,
            amplitude,
            band,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dims = grid.dims();
            let mut terms = Vec::new();
            let count = (band + 1).pow(dims as u32);
            for flat in 1..count {
                let mut rest = flat;
                let modes: Vec<f64> = (0..dims)
                    .map(|_| {
                        let m = rest % (band + 1);
                        rest /= band + 1;
                        m as f64
                    })
                    .collect();
                let k2: f64 = modes.iter().map(|m| m * m).sum();
                let phase = if grid.boundary() == Boundary::Periodic {
                    rng.gen_range(0.0..2.0 * PI)
                } else {
                    0.0
                };
                terms.push((modes, rng.gen_range(-1.0..1.0) / (1.0 + k2), phase));
            }
            let periodic = grid.boundary() == Boundary::Periodic;
            let u = grid.sample(|x| {
                terms
                    .iter()
                    .map(|(m, a, ph)| {
                        let angles = x
                            .iter()
                            .zip(&ext)
                            .zip(m)
                            .map(|((xi, l), mi)| wave * mi * xi / l);
                        if periodic {
                            a * (angles.sum::<f64>() + ph).cos()
                        } else {
                            a * angles.map(f64::cos).product::<f64>()
                        }
                    })
                    .sum()
            });
            let norm = lp_norm(&u, 2.0);
            let scale = if norm > 0.0 { amplitude / norm } else { 0.0 };
            u.map(|v| mean + scale * v)
        }
    }
}

pub fn build_spec(block: &GBlock, u0: &ScalarField) -> Result<NonlinearitySpec> {
    match block {
        GBlock::Zero => Ok(NonlinearitySpec::zero()),
        GBlock::Cubic { c } => NonlinearitySpec::cubic(*c),
        GBlock::Power { alpha } => NonlinearitySpec::power(*alpha),
        GBlock::Truncated { base, theta_outer } => {
            let base = build_spec(base, u0)?;
            Ok(truncate_to_h(
                &base,
                &gradient(u0),
                ThetaCutoff::new(*theta_outer)?,
            ))
        }
    }
}

fn field_inputs(cfg: &RunConfig) -> Result<(ScalarField, NonlinearitySpec, &TimeBlock)> {
    let missing = |what: &str| {
        Error::invalid(format!(
            "the {} subcommand needs a {what} block",
            cfg.subcommand.name()
        ))
    };
    let grid = build_grid(cfg.grid.as_ref().ok_or_else(|| missing("grid"))?)?;
    let u0 = build_initial(
        &grid,
        cfg.initial.as_ref().ok_or_else(|| missing("initial"))?,
        cfg.seed,
    );
    let spec = build_spec(cfg.g.as_ref().ok_or_else(|| missing("g"))?, &u0)?;
    Ok((u0, spec, cfg.time.as_ref().ok_or_else(|| missing("time"))?))
}

fn rothe_config(cfg: &RunConfig, horizon: f64, steps: usize) -> Result<RotheConfig> {
    let mut rc = RotheConfig::new(horizon, steps)?;
    rc.inner_tol = cfg.tolerances.inner;
    rc.inner_max_iter = cfg.tolerances.inner_max_iter;
    rc.damping = cfg.tolerances.damping;
    rc.allow_unsupported = cfg.allow_unsupported;
    rc.gronwall = cfg.gronwall;
    rc.horizon_options = HorizonOptions {
        k: cfg.horizon_k,
        planar_s: cfg.planar_s,
    };
    rc.validate()?;
    Ok(rc)
}

/// Runs one configured subcommand, writing its artifacts and `manifest.json`
/// into `out`. Artifacts written before a solver failure are kept.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<()> {
    let mut art = Artifacts::new(out)?;
    let mut notes = Map::new();
    let result = match cfg.subcommand {
        Subcommand::Kernel => run_kernel(cfg, &mut art, &mut notes),
        Subcommand::Ibvp => run_ibvp_cmd(cfg, &mut art, &mut notes),
        Subcommand::Cauchy => run_cauchy(cfg, &mut art, &mut notes),
        Subcommand::Verify => run_verify(cfg, &mut art, &mut notes),
        Subcommand::Convergence => run_convergence(cfg, &mut art, &mut notes),
    };
    let body = json!({
        "subcommand": cfg.subcommand.name(),
        "seed": cfg.seed,
        "status": if result.is_ok() { "ok" } else { "failed" },
        "exit_code": result.as_ref().err().map_or(0, exit_code),
        "error": result.as_ref().err().map(|e| e.to_string()),
        "notes": Value::Object(notes),
        "config": cfg,
    });
    art.manifest(body)?;
    result
}

fn run_kernel(cfg: &RunConfig, art: &mut Artifacts, notes: &mut Map<String, Value>) -> Result<()> {
    let k = cfg
        .kernel
        .as_ref()
        .ok_or_else(|| Error::invalid("the kernel subcommand needs a kernel block"))?;
    let quad = QuadratureSpec {
        abs_tol: cfg.tolerances.quadrature,
        ..QuadratureSpec::default()
    };
    let table = build_kernel_table(k.dimension, k.eta_max, k.resolution, &quad)?;
    table.write(
        &art.path("kernel_table.csv"),
        &art.path("kernel_table.json"),
    )?;
    art.adopt("kernel_table.csv");
    art.adopt("kernel_table.json");
    notes.insert(
        "alpha_n".into(),
        json!(num(alpha_normalization(k.dimension, &quad)?)),
    );
    notes.insert("sign_changes".into(), json!(table.sign_changes(k.eta_max)));
    notes.insert("midpoint_error".into(), json!(num(table.midpoint_error()?)));
    Ok(())
}

fn run_ibvp_cmd(
    cfg: &RunConfig,
    art: &mut Artifacts,
    notes: &mut Map<String, Value>,
) -> Result<()> {
    let (u0, spec, time) = field_inputs(cfg)?;
    let steps = time
        .steps
        .ok_or_else(|| Error::invalid("ibvp needs time.steps"))?;
    let rc = rothe_config(cfg, time.horizon, steps)?;
    let (traj, failure) = run_ibvp_partial(&u0, &spec, &rc)?;
    notes.insert("label".into(), json!(traj.label()));
    notes.insert("exploratory".into(), json!(traj.is_exploratory()));
    notes.insert("alpha".into(), json!(num(traj.alpha())));
    notes.insert("tau".into(), json!(num(traj.tau())));
    notes.insert("steps_completed".into(), json!(traj.len() - 1));

    let energies = traj.energies(&spec);
    let rows: Vec<Vec<String>> = traj
        .steps()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            vec![
                num(traj.time(k)),
                num(lp_norm(&s.u, 2.0)),
                num(lp_norm(&gradient(&s.u), 2.0)),
                num(lp_norm(&laplacian(&s.u), 2.0)),
                num(s.u.integral()),
                opt(energies.as_ref().map(|e| e[k])),
            ]
        })
        .collect();
    art.csv(
        "trajectory.csv",
        &["t", "l2", "grad_l2", "lap_l2", "mass", "energy"],
        &rows,
    )?;

    let report = estimate_report(&traj, &spec);
    let rows: Vec<Vec<String>> = report
        .entries()
        .iter()
        .map(|(n, v)| vec![n.to_string(), num(*v)])
        .collect();
    art.csv("estimate_report.csv", &["entry", "value"], &rows)?;

    let mut written = Vec::new();
    for (i, &t) in time.snapshots.iter().enumerate() {
        if t <= traj.end_time() {
            art.field(&format!("snapshot_{i}"), &traj.piecewise_linear(t)?)?;
            written.push(num(t));
        }
    }
    notes.insert("snapshot_times".into(), json!(written));
    failure.map_or(Ok(()), Err)
}

fn run_cauchy(cfg: &RunConfig, art: &mut Artifacts, notes: &mut Map<String, Value>) -> Result<()> {
    let (u0, spec, time) = field_inputs(cfg)?;
    let window = time.window.unwrap_or(time.horizon).min(time.horizon);
    let mut pc = PicardConfig::new(window)?;
    pc.sample_times = cfg.tolerances.picard_samples;
    pc.tol = cfg.tolerances.picard;
    pc.max_iter = cfg.tolerances.picard_max_iter;
    pc.validate()?;

    if let Some(p) = cfg.decay_p {
        let times = if cfg.decay_times.is_empty() {
            (0..8)
                .map(|i| time.horizon * 10f64.powf(-2.0 + 2.0 * i as f64 / 7.0))
                .collect()
        } else {
            cfg.decay_times.clone()
        };
        let fit = decay_exponent_fit(&u0, p, &times)?;
        let rows: Vec<Vec<String>> = fit
            .times
            .iter()
            .zip(&fit.norms)
            .map(|(t, n)| vec![num(*t), num(*n), num(fit.slope), num(fit.predicted)])
            .collect();
        art.csv("decay_fit.csv", &["t", "norm", "slope", "predicted"], &rows)?;
    }

    let windows = (time.horizon / window - 1e-9).ceil().max(1.0) as usize;
    let mut runs: Vec<PicardRun> = Vec::new();
    let mut start = u0.clone();
    let mut failure = None;
    for w in 0..windows {
        let mut c = pc.clone();
        c.horizon = (time.horizon - w as f64 * window).min(window);
        match picard_solve(&start, &spec, &c) {
            Ok(run) => {
                start = run.endpoint().clone();
                runs.push(run);
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    let mut rows = Vec::new();
    for (w, run) in runs.iter().enumerate() {
        let mut prev: Option<f64> = None;
        for s in &run.states {
            let ratio = match (prev, s.d) {
                (Some(p), Some(d)) if p > 0.0 => Some(d / p),
                _ => None,
            };
            rows.push(vec![
                w.to_string(),
                s.k.to_string(),
                num(s.a.last().copied().unwrap_or(0.0)),
                opt(s.b),
                opt(s.d),
                opt(ratio),
            ]);
            prev = s.d;
        }
    }
    art.csv(
        "picard_monitors.csv",
        &["window", "k", "a_k", "b_k", "d_k", "ratio"],
        &rows,
    )?;

    let mut offset = 0.0;
    let mut written = Vec::new();
    for (w, run) in runs.iter().enumerate() {
        art.field(&format!("endpoint_w{w}"), run.endpoint())?;
        for (i, &t) in time.snapshots.iter().enumerate() {
            let local = t - offset;
            let last = *run.times.last().expect("nonempty");
            if local < 0.0 || local > last + 1e-12 || (w > 0 && local == 0.0) {
                continue;
            }
            let j = run
                .times
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - local).abs().total_cmp(&(b.1 - local).abs()))
                .map(|(j, _)| j)
                .expect("nonempty");
            art.field(&format!("snapshot_{i}"), &run.iterate[j])?;
            written.push(num(offset + run.times[j]));
        }
        offset += *run.times.last().expect("nonempty");
    }
    notes.insert("windows_completed".into(), json!(runs.len()));
    notes.insert("converged".into(), json!(runs.iter().all(|r| r.converged)));
    notes.insert("snapshot_times".into(), json!(written));
    if let (Some(GBlock::Truncated { .. }), Some(first)) = (&cfg.g, runs.first()) {
        let exit = truncation_consistency(first, &spec, &u0)?;
        notes.insert("truncation_exit_time".into(), json!(exit.map(num)));
    }
    if let Some(e) = failure {
        return Err(e);
    }
    if runs.iter().any(|r| !r.converged) {
        return Err(Error::ContractionFailed {
            iterate: pc.max_iter,
            window: pc.stall_window,
        });
    }
    Ok(())
}

fn run_convergence(
    cfg: &RunConfig,
    art: &mut Artifacts,
    notes: &mut Map<String, Value>,
) -> Result<()> {
    let (u0, spec, time) = field_inputs(cfg)?;
    let levels = &cfg.convergence_levels;
    let reference = if spec.is_zero() {
        notes.insert("reference".into(), json!("exact semigroup"));
        if u0.grid().boundary() == Boundary::Periodic {
            return Err(Error::invalid("the Rothe scheme runs on Neumann boxes"));
        }
        apply_multiplier(&u0, |l| (-l * l * time.horizon).exp())
    } else {
        let j = 2 * levels.last().expect("levels are nonempty");
        notes.insert("reference".into(), json!(format!("rothe with {j} steps")));
        run_ibvp(&u0, &spec, &rothe_config(cfg, time.horizon, j)?)?
            .endpoint()
            .clone()
    };
    let ref_norm = lp_norm(&reference, 2.0).max(f64::MIN_POSITIVE);
    let mut rows = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &j in levels {
        let traj = run_ibvp(&u0, &spec, &rothe_config(cfg, time.horizon, j)?)?;
        let err = lp_norm(&traj.endpoint().zip_with(&reference, |a, b| a - b), 2.0) / ref_norm;
        let tau = traj.tau();
        let order = prev.map(|(pt, pe)| (pe / err).ln() / (pt / tau).ln());
        rows.push(vec![j.to_string(), num(tau), num(err), opt(order)]);
        prev = Some((tau, err));
    }
    art.csv(
        "convergence.csv",
        &["steps", "tau", "error", "order"],
        &rows,
    )
}

/// RK4 solution of y′ = c₁y^{1+σ} + c₂ at `t`, with `n` steps.
fn rk4_gronwall(y0: f64, sigma: f64, c1: f64, c2: f64, t: f64, n: usize) -> f64 {
    let f = |y: f64| c1 * y.max(0.0).powf(1.0 + sigma) + c2;
    let h = t / n as f64;
    let mut y = y0;
    for _ in 0..n {
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}

fn run_verify(cfg: &RunConfig, art: &mut Artifacts, notes: &mut Map<String, Value>) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push = |name: String, lhs: f64, rhs: f64, pass: bool| {
        let ratio = if rhs != 0.0 { lhs / rhs } else { 0.0 };
        rows.push(vec![name, num(lhs), num(rhs), num(ratio), pass.to_string()]);
    };

    for i in 0..cfg.verify_draws {
        let y0 = rng.gen_range(0.0..2.0);
        let sigma = rng.gen_range(0.2..3.0);
        let c1 = rng.gen_range(0.2..2.0);
        let c2 = rng.gen_range(0.2..2.0);
        let t_star = crate::bounds::blow_up_time(y0 + 1.0, sigma, c1, c2)?;
        let t = 0.5 * t_star;
        let y = rk4_gronwall(y0, sigma, c1, c2, t, 20_000);
        let bound = match gronwall_closed_form(y0, sigma, c1, c2, t)? {
            GronwallValue::Finite(v) => v,
            GronwallValue::BlowUp => f64::INFINITY,
        };
        push(
            format!("gronwall_{i}"),
            y,
            bound,
            y <= bound * (1.0 + 1e-8) + 1e-12,
        );
    }

    let mut accepted = 0;
    while accepted < cfg.verify_draws {
        let b0 = rng.gen_range(0.0..0.5);
        let lambda = rng.gen_range(0.1..3.0);
        let alpha = rng.gen_range(0.5..3.0);
        let s = small_sequence_bound(b0, lambda, alpha, 100)?;
        if let Some(bound) = s.bound {
            let top = s.trace.iter().cloned().fold(0.0, f64::max);
            push(
                format!("small_sequence_{accepted}"),
                top,
                bound,
                top <= bound * (1.0 + 1e-12),
            );
            accepted += 1;
        }
    }

    let quad = QuadratureSpec {
        abs_tol: cfg.tolerances.quadrature,
        ..QuadratureSpec::default()
    };
    for n in 1..=2 {
        let alpha = alpha_normalization(n, &quad)?;
        for t in [0.25, 1.0, 4.0] {
            let defect = (kernel_mass(n, t, alpha, &quad)? - 1.0).abs();
            push(
                format!("kernel_mass_N{n}_t{t}"),
                defect,
                1e-6,
                defect < 1e-6,
            );
        }
    }

    let box3 = Grid::neumann(&[1.0, 1.0, 1.0], &[12, 12, 12])?;
    let mode = InterpMode::HighDim { dimension: 3 };
    let consts = estimate_constants(&box3, mode, 40, cfg.seed)?;
    let alpha = 19.0 / 9.0;
    for i in 0..cfg.verify_draws {
        let u = random_band_limited_field(&box3, 4, &mut rng);
        let c = interp_inequality_check(&u, alpha, 2, &consts)?;
        push(format!("interpolation_{i}"), c.lhs, c.rhs, c.ratio <= 1.0);
    }

    let plane = Grid::periodic(&[32.0, 32.0], &[64, 64])?;
    let kernel = sample_kernel(&plane, 0.5)?;
    for (i, q) in [1.0, 2.0, 4.0].into_iter().enumerate() {
        let phases: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let f = plane.sample(|x| {
            (2.0 * PI * x[0] / 32.0 + phases[0]).cos()
                + 0.5 * (6.0 * PI * x[1] / 32.0 + phases[1]).sin()
                + (-(x[0] - 16.0).powi(2) / 4.0 + phases[2]).exp()
        });
        let y = young_check(&f, &kernel, q)?;
        push(format!("young_q{i}"), y.lhs, y.rhs, y.ratio <= 1.0 + 1e-12);
    }

    let failed = rows.iter().filter(|r| r[4] == "false").count();
    notes.insert("checks".into(), json!(rows.len()));
    notes.insert("failed".into(), json!(failed));
    art.csv(
        "bounds_report.csv",
        &["name", "lhs", "rhs", "ratio", "pass"],
        &rows,
    )?;
    if failed > 0 {
        return Err(Error::invalid(format!(
            "{failed} of {} bound checks failed",
            rows.len()
        )));
    }
    Ok(())
}
