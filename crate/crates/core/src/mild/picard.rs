use std::f64::consts::PI;

use serde::Serialize;

use super::duhamel::{duhamel_knots, HHistory};
use super::{heat_propagate_periodic, require_periodic, wrap_check};
use crate::error::{Error, Result};
use crate::grid::{gradient, ScalarField, VectorField};
use crate::nonlinearity::NonlinearitySpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardConfig {
    /// Window length T.
    pub horizon: f64,
    /// Number of Chebyshev–Lobatto sample times on [0, T], endpoints included.
    pub sample_times: usize,
    /// Iteration stops once d_k falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Consecutive non-decreasing d_k tolerated before giving up.
    pub stall_window: usize,
    /// Double the sample density until sup_t t^{1/(2(α−1))}‖∇w‖_∞ is stable to 1%.
    pub refine_sup: bool,
    /// Skip the wrap-around check for data that is periodic in its own right.
    pub periodic_data: bool,
}

impl PicardConfig {
    pub fn new(horizon: f64) -> Result<Self> {
        let cfg = PicardConfig {
            horizon,
            sample_times: 33,
            tol: 1e-10,
            max_iter: 60,
            stall_window: 5,
            refine_sup: true,
            periodic_data: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.sample_times < 3 {
            return Err(Error::invalid("need at least 3 sample times"));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 || self.stall_window == 0 {
            return Err(Error::invalid(
                "tolerance, iteration cap and stall window must be positive",
            ));
        }
        Ok(())
    }
}

/// t_i = T(1 − cos(iπ/(M−1)))/2, i = 0..M−1.
pub fn chebyshev_times(horizon: f64, count: usize) -> Vec<f64> {
    let m = (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i == 0 {
                0.0
            } else if i == count - 1 {
                horizon
            } else {
                0.5 * horizon * (1.0 - (i as f64 * PI / m).cos())
            }
        })
        .collect()
}

/// Monitors of one iterate w_k.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardState {
    pub k: usize,
    /// ‖∇w_k(·, t_i)‖_∞ per sample time.
    pub grad_sup: Vec<f64>,
    /// a_k(t_i) = max over t ≤ t_i of ‖∇w_k‖_∞.
    pub a: Vec<f64>,
    /// max over t of t^{1/(2(α−1))}‖∇w_k‖_∞; only for α > 1.
    pub b: Option<f64>,
    /// max over t of ‖∇w_k − ∇w_{k−1}‖_∞; absent for k = 0.
    pub d: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PicardRun {
    pub times: Vec<f64>,
    pub states: Vec<PicardState>,
    /// Last iterate at every sample time.
    pub iterate: Vec<ScalarField>,
    pub converged: bool,
}

impl PicardRun {
    pub fn endpoint(&self) -> &ScalarField {
        self.iterate.last().expect("sample times are nonempty")
    }

    /// d_k/d_{k−1} for k ≥ 2 while d_{k−1} is above the round-off floor.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        let scale = self
            .states
            .iter()
            .flat_map(|s| s.grad_sup.iter())
            .cloned()
            .fold(0.0, f64::max);
        let floor = 1e-11 * scale.max(f64::MIN_POSITIVE);
        self.states
            .windows(2)
            .filter_map(|w| match (w[0].d, w[1].d) {
                (Some(p), Some(c)) if p > floor => Some(c / p),
                _ => None,
            })
            .collect()
    }

    /// sup_k d_k/d_{k−1}.
    pub fn contraction_ratio(&self) -> Option<f64> {
        self.contraction_ratios().into_iter().reduce(f64::max)
    }
}

fn monitors(
    k: usize,
    times: &[f64],
    grads: &[VectorField],
    prev: Option<&[VectorField]>,
    alpha: f64,
) -> PicardState {
    let grad_sup: Vec<f64> = grads.iter().map(|g| g.max_magnitude()).collect();
    let a = grad_sup
        .iter()
        .scan(0.0f64, |m, &v| {
            *m = m.max(v);
            Some(*m)
        })
        .collect();
    let b = (alpha > 1.0).then(|| {
        let e = 1.0 / (2.0 * (alpha - 1.0));
        times
            .iter()
            .zip(&grad_sup)
            .map(|(t, g)| t.powf(e) * g)
            .fold(0.0, f64::max)
    });
    let d = prev.map(|p| {
        p.iter()
            .zip(grads)
            .map(|(a, b)| b.zip_with(a, |x, y| x - y).max_magnitude())
            .fold(0.0, f64::max)
    });
    PicardState {
        k,
        grad_sup,
        a,
        b,
        d,
    }
}

fn solve_once(
    u0: &ScalarField,
    spec: &NonlinearitySpec,
    cfg: &PicardConfig,
    count: usize,
) -> Result<PicardRun> {
    let times = chebyshev_times(cfg.horizon, count);
    let alpha = spec.growth_exponent();
    let v0: Vec<ScalarField> = times
        .iter()
        .map(|&t| heat_propagate_periodic(u0, t))
        .collect();
    let mut grads: Vec<VectorField> = v0.iter().map(gradient).collect();
    let mut iterate = v0.clone();
    let mut states = vec![monitors(0, &times, &grads, None, alpha)];
    let mut stalled = 0;
    for k in 1..=cfg.max_iter {
        let fluxes: Vec<VectorField> = grads.iter().map(|g| spec.apply(g)).collect();
        let history = HHistory::new(times.clone(), &fluxes)?;
        let v1 = duhamel_knots(&history);
        let next: Vec<ScalarField> = v0
            .iter()
            .zip(&v1)
            .enumerate()
            .map(|(i, (a, b))| if i == 0 { u0.clone() } else { a + b })
            .collect();
        if next.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite { step: k });
        }
        let next_grads: Vec<VectorField> = next.iter().map(gradient).collect();
        let state = monitors(k, &times, &next_grads, Some(&grads), alpha);
        let d = state.d.expect("set for k >= 1");
        let prev_d = states.last().and_then(|s| s.d);
        states.push(state);
        iterate = next;
        grads = next_grads;
        if d < cfg.tol {
            return Ok(PicardRun {
                times,
                states,
                iterate,
                converged: true,
            });
        }
        match prev_d {
            Some(p) if d >= p => stalled += 1,
            _ => stalled = 0,
        }
        if stalled >= cfg.stall_window {
            return Err(Error::ContractionFailed {
                iterate: k,
                window: cfg.stall_window,
            });
        }
    }
    Ok(PicardRun {
        times,
        states,
        iterate,
        converged: false,
    })
}

/// w₀ = v₀ and w_k = v₀ + ∫₀ᵗ ∇b_N(t − s) * g(∇w_{k−1}(s)) ds on [0, T].
pub fn picard_solve(
    u0: &ScalarField,
    spec: &NonlinearitySpec,
    cfg: &PicardConfig,
) -> Result<PicardRun> {
    cfg.validate()?;
    require_periodic(u0.grid())?;
    if !u0.is_finite() {
        return Err(Error::invalid("initial data has non-finite values"));
    }
    if !cfg.periodic_data {
        wrap_check(u0.grid(), cfg.horizon)?;
    }
    let mut count = cfg.sample_times;
    let mut run = solve_once(u0, spec, cfg, count)?;
    if !cfg.refine_sup {
        return Ok(run);
    }
    for _ in 0..4 {
        let Some(b) = run.states.last().and_then(|s| s.b) else {
            break;
        };
        count = 2 * count - 1;
        let finer = solve_once(u0, spec, cfg, count)?;
        let b2 = finer.states.last().and_then(|s| s.b).unwrap_or(b);
        run = finer;
        if (b2 - b).abs() <= 0.01 * b2.abs() {
            break;
        }
    }
    Ok(run)
}

/// Consecutive windows of length `cfg.horizon` covering [0, total], each
/// restarted from the previous endpoint.
pub fn picard_windows(
    u0: &ScalarField,
    spec: &NonlinearitySpec,
    cfg: &PicardConfig,
    total: f64,
) -> Result<Vec<PicardRun>> {
    if !(total > 0.0) {
        return Err(Error::invalid(format!(
            "total time must be positive, got {total}"
        )));
    }
    let windows = (total / cfg.horizon - 1e-9).ceil().max(1.0) as usize;
    let mut runs: Vec<PicardRun> = Vec::with_capacity(windows);
    let mut start = u0.clone();
    for w in 0..windows {
        let mut c = cfg.clone();
        c.horizon = (total - w as f64 * cfg.horizon).min(cfg.horizon);
        let run = picard_solve(&start, spec, &c)?;
        start = run.endpoint().clone();
        runs.push(run);
    }
    Ok(runs)
}
