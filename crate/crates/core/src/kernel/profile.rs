//! Pointwise evaluation of the radial profile f_N of the biharmonic heat
//! kernel, its derivatives, and the radial integrals built from it.
//!
//! f_N(η) = η^{1−N} ∫₀^∞ e^{−s⁴} (ηs)^{N/2} J_{(N−2)/2}(ηs) ds
//!        = Σ_m (−1)^m 2^{1−N/2−2m} Γ((2m+N)/4) / (4 m! Γ(m+N/2)) η^{2m}.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::bessel::scaled_bessel;
use super::quad::{breakpoints, integrate};
use crate::error::{Error, Result};

/// Beyond this s the weight e^{−s⁴} is below 1e-20.
const S_TAIL: f64 = 2.605;
/// Default switch from the power series to quadrature.
const SERIES_SWITCH: f64 = 4.0;
/// Largest η for which the power series alone is accurate to ~1e-13.
const SERIES_ONLY_MAX: f64 = 6.0;
/// Radial integrals stop here; |f_N| < 1e-12 beyond it for N ≤ 4.
pub const RADIAL_CUTOFF: f64 = 40.0;

/// How `eval_f` computes the oscillatory profile integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMethod {
    /// Power series only; rejected for η > 6 where cancellation sets in.
    SeriesOnly,
    /// Adaptive Gauss–Kronrod panels for every η > 0.
    AdaptivePanel,
    /// Series for η ≤ 4, panels split at s* = max(1, 20/η) beyond.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub abs_tol: f64,
    pub panel_budget: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            method: QuadratureMethod::Split,
            abs_tol: 1e-12,
            panel_budget: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(method: QuadratureMethod, abs_tol: f64, panel_budget: usize) -> Result<Self> {
        let spec = QuadratureSpec {
            method,
            abs_tol,
            panel_budget,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid(format!(
                "quadrature tolerance must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.panel_budget == 0 {
            return Err(Error::invalid("panel budget must be at least 1"));
        }
        Ok(())
    }

    fn with_tol(&self, abs_tol: f64) -> Self {
        QuadratureSpec { abs_tol, ..*self }
    }
}

/// Surface area of the unit sphere in ℝ^N, 2π^{N/2}/Γ(N/2).
pub fn unit_sphere_area(dimension: usize) -> f64 {
    let h = dimension as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Taylor coefficients c_m of f_N(η) = Σ c_m η^{2m}, until they drop below
/// `floor` relative to the largest `|c_m| scale^{2m}`.
fn series_coefficients(dimension: usize, scale: f64) -> Vec<f64> {
    let n = dimension as f64;
    let c0 = 2f64.powf(1.0 - n / 2.0) * gamma(n / 4.0) / (4.0 * gamma(n / 2.0));
    let c1 = -2f64.powf(-1.0 - n / 2.0) * gamma((2.0 + n) / 4.0) / (4.0 * gamma(1.0 + n / 2.0));
    let mut c = vec![c0, c1];
    let s2 = scale * scale;
    let mut peak = c0.abs().max(c1.abs() * s2);
    let mut m = 2;
    loop {
        let mf = m as f64;
        let ratio = ((2.0 * mf + n - 4.0) / 4.0)
            / (16.0 * mf * (mf - 1.0) * (mf - 1.0 + n / 2.0) * (mf - 2.0 + n / 2.0));
        let next = c[m - 2] * ratio;
        let mag = next.abs() * s2.powi(m as i32);
        peak = peak.max(mag);
        c.push(next);
        if (mag < 1e-19 * peak && m > 4) || m > 400 {
            break;
        }
        m += 1;
    }
    c
}

fn series_value(dimension: usize, eta: f64) -> f64 {
    let c = series_coefficients(dimension, eta.max(1.0));
    let x = eta * eta;
    c.iter().rev().fold(0.0, |acc, &cm| acc * x + cm)
}

/// The s-integral, with `tol` an absolute tolerance on f_N itself.
fn quadrature_value(dimension: usize, eta: f64, tol: f64, budget: usize) -> Result<f64> {
    let s_split = (20.0 / eta).clamp(1.0, S_TAIL);
    // Start with panels about half an oscillation of J wide.
    let step = (PI / eta).max(0.05);
    let mut pts = breakpoints(0.0, s_split, step);
    if s_split < S_TAIL {
        pts.extend(breakpoints(s_split, S_TAIL, step).into_iter().skip(1));
    }
    let prefactor = eta.powi(1 - dimension as i32);
    let integrand = |s: f64| (-(s * s) * (s * s)).exp() * scaled_bessel(dimension, eta * s);
    let inner_tol = tol / prefactor;
    let budget = budget.max(pts.len() + 1);
    Ok(prefactor * integrate(integrand, &pts, inner_tol, budget)?)
}

fn eval_f_tol(dimension: usize, eta: f64, tol: f64, quad: &QuadratureSpec) -> Result<f64> {
    if eta == 0.0 {
        return Ok(series_coefficients(dimension, 1.0)[0]);
    }
    match quad.method {
        QuadratureMethod::SeriesOnly => {
            if eta > SERIES_ONLY_MAX {
                return Err(Error::invalid(format!(
                    "series-only evaluation is limited to eta <= {SERIES_ONLY_MAX}, got {eta}"
                )));
            }
            Ok(series_value(dimension, eta))
        }
        QuadratureMethod::AdaptivePanel => quadrature_value(dimension, eta, tol, quad.panel_budget),
        QuadratureMethod::Split if eta <= SERIES_SWITCH => Ok(series_value(dimension, eta)),
        QuadratureMethod::Split => quadrature_value(dimension, eta, tol, quad.panel_budget),
    }
}

fn check_args(dimension: usize, eta: f64) -> Result<()> {
    if dimension == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!(
            "eta must be finite and nonnegative, got {eta}"
        )));
    }
    Ok(())
}

/// f_N(η).
pub fn eval_f(dimension: usize, eta: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_args(dimension, eta)?;
    quad.validate()?;
    eval_f_tol(dimension, eta, quad.abs_tol, quad)
}

/// The `order`-th derivative of f_N (order 0 returns f_N), from
/// f_N′ = −η f_{N+2}.
pub fn eval_f_deriv(
    dimension: usize,
    eta: f64,
    order: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_args(dimension, eta)?;
    quad.validate()?;
    let tol = quad.abs_tol;
    let f = |shift: usize, scale: f64| {
        let t = if scale > 1.0 { tol / scale } else { tol };
        eval_f_tol(dimension + shift, eta, t, quad)
    };
    match order {
        0 => f(0, 1.0),
        1 => Ok(-eta * f(2, eta)?),
        2 => Ok(-f(2, 1.0)? + eta * eta * f(4, eta * eta)?),
        3 => {
            let e3 = eta * eta * eta;
            Ok(3.0 * eta * f(4, 3.0 * eta)? - e3 * f(6, e3)?)
        }
        _ => Err(Error::invalid(format!(
            "derivative order must be 0..=3, got {order}"
        ))),
    }
}

/// All four of f, f′, f″, f‴ at once, sharing the shifted-profile evaluations.
pub fn eval_f_jet(dimension: usize, eta: f64, quad: &QuadratureSpec) -> Result<[f64; 4]> {
    check_args(dimension, eta)?;
    quad.validate()?;
    let tol = quad.abs_tol;
    let scale = eta.max(1.0).powi(3) * 3.0;
    let f0 = eval_f_tol(dimension, eta, tol, quad)?;
    let f2 = eval_f_tol(dimension + 2, eta, tol / scale, quad)?;
    let f4 = eval_f_tol(dimension + 4, eta, tol / scale, quad)?;
    let f6 = eval_f_tol(dimension + 6, eta, tol / scale, quad)?;
    let e2 = eta * eta;
    Ok([f0, -eta * f2, -f2 + e2 * f4, 3.0 * eta * f4 - e2 * eta * f6])
}

/// The profile ODE f‴ + ((N−1)/η) f″ − ((N−1)/η²) f′ − (η/4) f applied to
/// arbitrary values of the jet.
pub fn ode_operator(dimension: usize, eta: f64, jet: [f64; 4]) -> f64 {
    let n1 = dimension as f64 - 1.0;
    jet[3] + n1 / eta * jet[2] - n1 / (eta * eta) * jet[1] - eta / 4.0 * jet[0]
}

/// Residual of the profile ODE at η > 0.
pub fn ode_residual(dimension: usize, eta: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::invalid(format!(
            "the profile ODE is singular at eta = {eta}"
        )));
    }
    Ok(ode_operator(
        dimension,
        eta,
        eval_f_jet(dimension, eta, quad)?,
    ))
}

/// ∫₀^{cutoff} η^{p} f_N(η) dη with p > −1: exact termwise series on
/// [0, 4], adaptive quadrature beyond.
fn profile_power_integral(dimension: usize, p: f64, quad: &QuadratureSpec) -> Result<f64> {
    let a = SERIES_SWITCH;
    let c = series_coefficients(dimension, a);
    let head: f64 = c
        .iter()
        .enumerate()
        .map(|(m, cm)| {
            let e = 2.0 * m as f64 + p + 1.0;
            cm * a.powf(e) / e
        })
        .sum();
    let pts = breakpoints(a, RADIAL_CUTOFF, 1.0);
    let panels = (pts.len() - 1) as f64;
    let inner_tol = quad.abs_tol / (panels * RADIAL_CUTOFF.powf(p.max(0.0)));
    let inner = quad.with_tol(inner_tol);
    let mut failure = None;
    let tail = integrate(
        |eta| match eval_f_tol(dimension, eta, inner_tol, &inner) {
            Ok(v) => eta.powf(p) * v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &pts,
        quad.abs_tol,
        quad.panel_budget,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(head + tail)
}

/// ∫₀^∞ η^{N−1−β} f_N(η) dη for 0 ≤ β < N.
pub fn radial_moment(dimension: usize, beta: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_args(dimension, 0.0)?;
    quad.validate()?;
    if !(beta >= 0.0 && beta < dimension as f64) {
        return Err(Error::invalid(format!(
            "moment order beta must lie in [0, {dimension}), got {beta}"
        )));
    }
    profile_power_integral(dimension, dimension as f64 - 1.0 - beta, quad)
}

/// α_N such that α_N t^{−N/4} f_N(|x|/t^{1/4}) has unit mass.
pub fn alpha_normalization(dimension: usize, quad: &QuadratureSpec) -> Result<f64> {
    let m = radial_moment(dimension, 0.0, quad)?;
    let denom = unit_sphere_area(dimension) * m;
    if !(denom.abs() > 1e-8) {
        return Err(Error::DegenerateNormalization { value: denom });
    }
    Ok(1.0 / denom)
}

/// Radial integral in r of `profile(r / t^{1/4}) r^{N−1}` over the sphere
/// surface, truncated at RADIAL_CUTOFF·t^{1/4}.
fn radial_mass<F: FnMut(f64) -> Result<f64>>(
    dimension: usize,
    t: f64,
    tol: f64,
    budget: usize,
    mut profile: F,
) -> Result<f64> {
    let scale = t.powf(0.25);
    let pts = breakpoints(0.0, RADIAL_CUTOFF * scale, 0.5 * scale);
    let mut failure = None;
    let value = integrate(
        |r| match profile(r / scale) {
            Ok(v) => v * r.powi(dimension as i32 - 1),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &pts,
        tol,
        budget.max(4 * pts.len()),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(unit_sphere_area(dimension) * value)
}

/// ∫_{ℝ^N} |f_N^{(n)}(|y|/t^{1/4})|^q dy, integrated radially in |y|.
pub fn lq_scaling_mass(
    dimension: usize,
    order: usize,
    q: f64,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_args(dimension, 0.0)?;
    quad.validate()?;
    if order > 3 {
        return Err(Error::invalid(format!(
            "derivative order must be 0..=3, got {order}"
        )));
    }
    if !(q > 1.0) || !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!(
            "need q > 1 and t > 0, got q = {q}, t = {t}"
        )));
    }
    let tol = 10.0 * quad.abs_tol * t.powf(dimension as f64 / 4.0);
    radial_mass(dimension, t, tol, 50 * quad.panel_budget, |eta| {
        Ok(eval_f_deriv(dimension, eta, order, quad)?.abs().powf(q))
    })
}

/// ∫_{ℝ^N} b_N(x, t) dx with b_N(x, t) = α_N t^{−N/4} f_N(|x|/t^{1/4}),
/// integrated radially in |x| at the given time.
pub fn kernel_mass(dimension: usize, t: f64, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_args(dimension, 0.0)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    let pref = alpha * t.powf(-(dimension as f64) / 4.0);
    radial_mass(
        dimension,
        t,
        quad.abs_tol * t.powf(dimension as f64 / 4.0),
        50 * quad.panel_budget,
        |eta| Ok(pref * eval_f(dimension, eta, quad)?),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn origin_values_match_closed_form() {
        let sqrt_pi = PI.sqrt();
        assert!((eval_f(2, 0.0, &q()).unwrap() - sqrt_pi / 4.0).abs() < 1e-15);
        assert!((eval_f(1, 0.0, &q()).unwrap() - 0.723_204_542_316_039).abs() < 1e-14);
        assert!((eval_f(3, 0.0, &q()).unwrap() - 0.244_435_266_861_731).abs() < 1e-14);
    }

    #[test]
    fn series_and_quadrature_agree_on_overlap() {
        let panel = QuadratureSpec {
            method: QuadratureMethod::AdaptivePanel,
            ..q()
        };
        let series = QuadratureSpec {
            method: QuadratureMethod::SeriesOnly,
            ..q()
        };
        for n in 1..=4 {
            for &eta in &[1e-6, 0.5, 2.0, 3.9, 5.5] {
                let a = eval_f(n, eta, &panel).unwrap();
                let b = eval_f(n, eta, &series).unwrap();
                assert!((a - b).abs() < 1e-11, "N={n} eta={eta}: {a} vs {b}");
            }
        }
        assert!(eval_f(2, 7.0, &series).is_err());
    }

    #[test]
    fn reference_values_at_large_eta() {
        // Independent high-precision quadrature of the defining integral.
        let cases = [
            (2, 10.0, 8.922_563_015_572_275e-5),
            (3, 12.0, -7.104_583_810_816_349e-5),
            (1, 20.0, -8.644_485_667_541_985e-7),
            (2, 30.0, 1.689_411_324_039_608_3e-11),
        ];
        for (n, eta, want) in cases {
            let got = eval_f(n, eta, &q()).unwrap();
            assert!((got - want).abs() < 1e-12, "N={n} eta={eta}: {got}");
        }
    }

    #[test]
    fn derivative_at_origin_vanishes() {
        for n in 1..=4 {
            assert_eq!(eval_f_deriv(n, 0.0, 1, &q()).unwrap(), 0.0);
        }
        assert!(eval_f_deriv(1, 1.0, 4, &q()).is_err());
    }

    #[test]
    fn constant_shift_residual_is_linear() {
        let jet = eval_f_jet(2, 1.5, &q()).unwrap();
        let base = ode_operator(2, 1.5, jet);
        let eps = 1e-3;
        let shifted = ode_operator(2, 1.5, [jet[0] + eps, jet[1], jet[2], jet[3]]);
        assert!((shifted - base + eps * 1.5 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_area_low_dimensions() {
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((unit_sphere_area(2) / (2.0 * PI) - 1.0).abs() < 1e-14);
        assert!((unit_sphere_area(3) / (4.0 * PI) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normalization_is_the_fourier_inversion_constant() {
        // b_N(·, 1) is the inverse transform of e^{−|k|⁴}, so α_N = (2π)^{−N/2}.
        for n in 1..=3 {
            let a = alpha_normalization(n, &q()).unwrap();
            let want = (2.0 * PI).powf(-(n as f64) / 2.0);
            assert!((a / want - 1.0).abs() < 1e-9, "N={n}: {a} vs {want}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(eval_f(0, 1.0, &q()).is_err());
        assert!(eval_f(2, -1.0, &q()).is_err());
        assert!(QuadratureSpec::new(QuadratureMethod::Split, 0.0, 10).is_err());
        assert!(QuadratureSpec::new(QuadratureMethod::Split, 1e-10, 0).is_err());
        assert!(radial_moment(2, 2.0, &q()).is_err());
        assert!(ode_residual(2, 0.0, &q()).is_err());
    }
}
