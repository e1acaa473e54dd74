use rustfft::num_complex::Complex64;
use serde::Serialize;

use super::duhamel::{duhamel_increment, DuhamelRule, HHistory};
use super::picard::PicardRun;
use super::{heat_propagate, kernel_table, require_periodic};
use crate::bounds::small_sequence_bound;
use crate::error::{Error, Result};
use crate::grid::{gradient, lp_norm, Grid, ScalarField, Spectrum, VectorField};
use crate::nonlinearity::{GForm, NonlinearitySpec};

/// b_N(x, t) on the grid, with x the minimum-image offset from the origin.
pub fn sample_kernel(grid: &Grid, t: f64) -> Result<ScalarField> {
    require_periodic(grid)?;
    let data = kernel_table(grid.dims())?;
    let ext = grid.extents().to_vec();
    Ok(grid.sample(|x| {
        let r2: f64 = x
            .iter()
            .zip(&ext)
            .map(|(&xi, &l)| {
                let d = if xi > 0.5 * l { xi - l } else { xi };
                d * d
            })
            .sum();
        data.table.kernel_value(data.alpha, r2.sqrt(), t)
    }))
}

fn periodic_convolution(f: &ScalarField, g: &ScalarField) -> ScalarField {
    let a = Spectrum::forward(f);
    let b = Spectrum::forward(g);
    let vol = f.grid().volume();
    let coeffs: Vec<Complex64> = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| x * y * vol)
        .collect();
    Spectrum::from_coeffs(f.grid(), 0, coeffs).inverse()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YoungCheck {
    /// ‖f * k‖_q
    pub lhs: f64,
    /// ‖f‖_q ‖k‖₁
    pub rhs: f64,
    pub ratio: f64,
}

/// Young's inequality ‖f * k‖_q ≤ ‖f‖_q ‖k‖₁ for the periodic convolution.
pub fn young_check(f: &ScalarField, kernel: &ScalarField, q: f64) -> Result<YoungCheck> {
    require_periodic(f.grid())?;
    if f.grid() != kernel.grid() {
        return Err(Error::invalid("field and kernel live on different grids"));
    }
    if !(q >= 1.0) {
        return Err(Error::invalid(format!("need q >= 1, got {q}")));
    }
    let lhs = lp_norm(&periodic_convolution(f, kernel), q);
    let rhs = lp_norm(f, q) * lp_norm(kernel, 1.0);
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(YoungCheck { lhs, rhs, ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallnessReport {
    pub holds: bool,
    /// max over sampled t ∈ (0, T] of t^{1/(2(α−1))}‖∇v₀(·, t)‖_∞.
    pub b0: f64,
    /// b0/(1 − λ̂(2b0)^{α−1}); infinite when the condition fails.
    pub bound: f64,
    /// The Lebesgue exponent (α − 1)N/(3 − α) that controls b0.
    pub p: f64,
    pub samples: usize,
}

/// Smallness test for the Picard sequence. Its monitor obeys
/// b_k ≤ b0 + λ̂ b_{k−1}^α, which is the small-data recursion with exponent
/// α − 1 in place of α.
pub fn smallness_check(
    u0: &ScalarField,
    alpha: f64,
    lambda_hat: f64,
    horizon: f64,
) -> Result<SmallnessReport> {
    if !(alpha > 2.0 && alpha < 3.0) {
        return Err(Error::invalid(format!(
            "smallness is checked for 2 < alpha < 3, got {alpha}"
        )));
    }
    if !(horizon > 0.0) || !(lambda_hat >= 0.0) {
        return Err(Error::invalid(
            "need a positive horizon and nonnegative lambda",
        ));
    }
    let e = 1.0 / (2.0 * (alpha - 1.0));
    let sup_over = |count: usize| -> Result<f64> {
        // Geometric sampling over six decades below T.
        let mut best = 0.0f64;
        for i in 0..count {
            let t = horizon * 10f64.powf(-6.0 * (1.0 - i as f64 / (count - 1) as f64));
            let g = gradient(&heat_propagate(u0, t)?).max_magnitude();
            best = best.max(t.powf(e) * g);
        }
        Ok(best)
    };
    let mut count = 13;
    let mut b0 = sup_over(count)?;
    for _ in 0..5 {
        let finer = sup_over(2 * count - 1)?;
        count = 2 * count - 1;
        let stable = (finer - b0).abs() <= 0.01 * finer;
        b0 = finer;
        if stable {
            break;
        }
    }
    let seq = small_sequence_bound(b0, lambda_hat, alpha - 1.0, 0)?;
    Ok(SmallnessReport {
        holds: !seq.condition_violated,
        b0,
        bound: seq.bound.unwrap_or(f64::INFINITY),
        p: (alpha - 1.0) * u0.grid().dims() as f64 / (3.0 - alpha),
        samples: count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub times: Vec<f64>,
    /// ‖∇v₀(·, t)‖_∞ per time.
    pub norms: Vec<f64>,
    pub slope: f64,
    /// −(N + p)/(4p), −1/4 for p = ∞.
    pub predicted: f64,
}

/// Least-squares slope of log‖∇v₀(·, t)‖_∞ against log t.
pub fn decay_exponent_fit(u0: &ScalarField, p: f64, times: &[f64]) -> Result<DecayFit> {
    if times.len() < 4 {
        return Err(Error::invalid(format!(
            "need at least 4 sample times, got {}",
            times.len()
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("need p >= 1, got {p}")));
    }
    let norms = times
        .iter()
        .map(|&t| Ok(gradient(&heat_propagate(u0, t)?).max_magnitude()))
        .collect::<Result<Vec<f64>>>()?;
    if norms.iter().any(|&n| !(n > 0.0)) {
        return Err(Error::invalid(
            "gradient vanishes; the decay exponent is undefined",
        ));
    }
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let dims = u0.grid().dims() as f64;
    let predicted = if p.is_infinite() {
        -0.25
    } else {
        -(dims + p) / (4.0 * p)
    };
    Ok(DecayFit {
        times: times.to_vec(),
        norms,
        slope: sxy / sxx,
        predicted,
    })
}

/// Earliest sample time at which some component of g(∇w) leaves the band
/// |g(∇w) − g(∇u₀)| ≤ 1 where the truncated and original nonlinearities agree.
pub fn truncation_consistency(
    run: &PicardRun,
    base: &NonlinearitySpec,
    u0: &ScalarField,
) -> Result<Option<f64>> {
    let base = match base.form() {
        GForm::Truncated(t) => t.base().clone(),
        _ => base.clone(),
    };
    if base.is_zero() {
        return Ok(None);
    }
    let reference = base.apply(&gradient(u0));
    for (t, w) in run.times.iter().zip(&run.iterate) {
        let now = base.apply(&gradient(w));
        let exceeded = now
            .components()
            .iter()
            .zip(reference.components())
            .any(|(a, b)| {
                a.values()
                    .iter()
                    .zip(b.values())
                    .any(|(x, y)| (x - y).abs() > 1.0)
            });
        if exceeded {
            return Ok(Some(*t));
        }
    }
    Ok(None)
}

/// max over `times` of sup|∇v₁(t)| / (t^{1/2} sup|h|) for h constant in time.
pub fn duhamel_gradient_constant(h: &VectorField, times: &[f64]) -> Result<f64> {
    let sup_h = h.max_magnitude();
    if !(sup_h > 0.0) {
        return Err(Error::invalid("flux must be nonzero"));
    }
    let t_end = times.iter().cloned().fold(0.0, f64::max);
    let history = HHistory::constant(h, t_end)?;
    let mut c = 0.0f64;
    for &t in times {
        if !(t > 0.0) {
            return Err(Error::invalid(format!(
                "sample times must be positive, got {t}"
            )));
        }
        let v1 = duhamel_increment(&history, t, DuhamelRule::ExponentialLinear)?;
        c = c.max(gradient(&v1).max_magnitude() / (t.sqrt() * sup_h));
    }
    Ok(c)
}
