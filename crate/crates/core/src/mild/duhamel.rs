use rustfft::num_complex::Complex64;

use super::require_periodic;
use crate::error::{Error, Result};
use crate::grid::{divergence_spectrum, Grid, ScalarField, Spectrum, VectorField};
use crate::kernel::gauss_legendre;

/// A flux h sampled at increasing times starting at 0; values between
/// samples interpolate linearly in t. Only div h enters the increment, so the
/// divergence spectra are kept.
#[derive(Debug, Clone)]
pub struct HHistory {
    grid: Grid,
    times: Vec<f64>,
    div: Vec<Vec<Complex64>>,
}

impl HHistory {
    pub fn new(times: Vec<f64>, fields: &[VectorField]) -> Result<Self> {
        if times.len() != fields.len() || times.len() < 2 {
            return Err(Error::invalid(
                "history needs at least two samples and one field per time",
            ));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "history times must start at 0 and increase strictly",
            ));
        }
        let grid = fields[0].grid().clone();
        require_periodic(&grid)?;
        if fields.iter().any(|f| f.grid() != &grid) {
            return Err(Error::invalid("history fields live on different grids"));
        }
        let div = fields
            .iter()
            .map(|f| divergence_spectrum(f).coeffs().to_vec())
            .collect();
        Ok(HHistory { grid, times, div })
    }

    /// h constant in time on [0, t_end].
    pub fn constant(field: &VectorField, t_end: f64) -> Result<Self> {
        Self::new(vec![0.0, t_end], &[field.clone(), field.clone()])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn end(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    /// Interpolated div h coefficient at time s.
    fn div_at(&self, s: f64, out: &mut [Complex64]) {
        let i = match self.times.partition_point(|&t| t <= s) {
            0 => 0,
            p => (p - 1).min(self.times.len() - 2),
        };
        let (a, b) = (self.times[i], self.times[i + 1]);
        let w = ((s - a) / (b - a)).clamp(0.0, 1.0);
        for ((o, x), y) in out.iter_mut().zip(&self.div[i]).zip(&self.div[i + 1]) {
            *o = x * (1.0 - w) + y * w;
        }
    }
}

/// How ∫₀ᵗ e^{−|k|⁴(t−s)} (div h)^(k, s) ds is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DuhamelRule {
    /// Exact integration of the exponential against the piecewise-linear history.
    ExponentialLinear,
    /// Gauss–Legendre in r with s = t − r²; the residual compares `points`
    /// against 2·`points` nodes, relative to the result.
    Gauss { points: usize, tol: f64 },
}

/// (1 − e^{−x})/x and (1 − e^{−x}(1 + x))/x², with series for small x.
fn phi12(x: f64) -> (f64, f64) {
    if x < 1e-2 {
        let mut p1 = 0.0;
        let mut p2 = 0.0;
        let mut term = 1.0;
        for n in 0..8 {
            p1 += term / (n + 1) as f64;
            p2 += term / (n + 2) as f64;
            term *= -x / (n + 1) as f64;
        }
        (p1, p2)
    } else {
        let e = (-x).exp();
        (-(-x).exp_m1() / x, (1.0 - e * (1.0 + x)) / (x * x))
    }
}

/// Adds ∫_a^b e^{−μ(b−s)} [linear from da to db] ds to `acc` after
/// propagating `acc` from a to b.
fn advance(acc: &mut [Complex64], mu: &[f64], da: &[Complex64], db: &[Complex64], dt: f64) {
    for (((v, &m), &x), &y) in acc.iter_mut().zip(mu).zip(da).zip(db) {
        let z = m * dt;
        let (p1, p2) = phi12(z);
        // σ = b − s: weight of da is σ/Δ, of db is 1 − σ/Δ.
        let i0 = dt * p1;
        let i1 = dt * p2;
        *v = *v * (-z).exp() + y * (i0 - i1) + x * i1;
    }
}

fn biharmonic_rates(grid: &Grid) -> Vec<f64> {
    grid.laplacian_eigenvalues(0)
        .iter()
        .map(|l| l * l)
        .collect()
}

/// v₁ at every history time, by exact exponential integration on each
/// interval; entry 0 is zero.
pub fn duhamel_knots(history: &HHistory) -> Vec<ScalarField> {
    let grid = &history.grid;
    let mu = biharmonic_rates(grid);
    let mut acc = vec![Complex64::default(); grid.len()];
    let mut out = vec![grid.zeros()];
    for i in 1..history.times.len() {
        let dt = history.times[i] - history.times[i - 1];
        advance(&mut acc, &mu, &history.div[i - 1], &history.div[i], dt);
        out.push(Spectrum::from_coeffs(grid, 0, acc.clone()).inverse());
    }
    out
}

fn exponential_linear(history: &HHistory, t: f64, mu: &[f64]) -> Vec<Complex64> {
    let n = history.grid.len();
    let mut acc = vec![Complex64::default(); n];
    let mut end = vec![Complex64::default(); n];
    for i in 1..history.times.len() {
        let a = history.times[i - 1];
        if a >= t {
            break;
        }
        let b = history.times[i].min(t);
        let db: &[Complex64] = if b == history.times[i] {
            &history.div[i]
        } else {
            history.div_at(b, &mut end);
            &end
        };
        advance(&mut acc, mu, &history.div[i - 1], db, b - a);
    }
    acc
}

fn gauss(history: &HHistory, t: f64, mu: &[f64], points: usize) -> Vec<Complex64> {
    let n = history.grid.len();
    let (nodes, weights) = gauss_legendre(points);
    let root = t.sqrt();
    let mut acc = vec![Complex64::default(); n];
    let mut d = vec![Complex64::default(); n];
    for (x, w) in nodes.iter().zip(&weights) {
        let r = 0.5 * root * (x + 1.0);
        let jac = 0.5 * root * w * 2.0 * r;
        history.div_at(t - r * r, &mut d);
        for ((a, &m), &c) in acc.iter_mut().zip(mu).zip(&d) {
            *a += c * (jac * (-m * r * r).exp());
        }
    }
    acc
}

/// v₁(·, t) = ∫₀ᵗ ∇b_N(·, t − s) * h(·, s) ds, evaluated mode by mode as
/// ∫₀ᵗ e^{−|k|⁴(t−s)} ik·ĥ(k, s) ds.
pub fn duhamel_increment(history: &HHistory, t: f64, rule: DuhamelRule) -> Result<ScalarField> {
    if !(t >= 0.0 && t <= history.end() * (1.0 + 1e-12)) {
        return Err(Error::invalid(format!(
            "t = {t} is outside the history [0, {}]",
            history.end()
        )));
    }
    let t = t.min(history.end());
    let grid = &history.grid;
    if t == 0.0 {
        return Ok(grid.zeros());
    }
    let mu = biharmonic_rates(grid);
    let coeffs = match rule {
        DuhamelRule::ExponentialLinear => exponential_linear(history, t, &mu),
        DuhamelRule::Gauss { points, tol } => {
            if points < 4 {
                return Err(Error::invalid(format!(
                    "need at least 4 quadrature points, got {points}"
                )));
            }
            let coarse = gauss(history, t, &mu, points);
            let fine = gauss(history, t, &mu, 2 * points);
            let num: f64 = coarse
                .iter()
                .zip(&fine)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            let den: f64 = fine.iter().map(|b| b.norm_sqr()).sum();
            let residual = if den > 0.0 {
                (num / den).sqrt()
            } else {
                num.sqrt()
            };
            if residual > tol {
                return Err(Error::Quadrature {
                    residual,
                    panels: points,
                });
            }
            fine
        }
    };
    Ok(Spectrum::from_coeffs(grid, 0, coeffs).inverse())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn phi_series_matches_closed_form_at_the_switch() {
        let x: f64 = 1e-2;
        let e = (-x).exp();
        let (p1, p2) = phi12(x * (1.0 - 1e-12));
        assert!((p1 - (1.0 - e) / x).abs() < 1e-12);
        assert!((p2 - (1.0 - e * (1.0 + x)) / (x * x)).abs() < 1e-9);
    }

    #[test]
    fn constant_mode_flux_has_closed_form() {
        let l = 2.0 * PI;
        let g = Grid::periodic(&[l], &[32]).unwrap();
        let k = 2.0;
        // div h = −k sin(kx)·k … with h = cos(kx): div h = −k sin(kx)
        let h = VectorField::new(vec![g.sample(|x| (k * x[0]).cos())]).unwrap();
        let t = 0.05;
        let hist = HHistory::constant(&h, t).unwrap();
        let mu = k.powi(4);
        let want = g.sample(|x| -k * (k * x[0]).sin() * (1.0 - (-mu * t).exp()) / mu);
        for rule in [
            DuhamelRule::ExponentialLinear,
            DuhamelRule::Gauss {
                points: 16,
                tol: 1e-8,
            },
        ] {
            let v = duhamel_increment(&hist, t, rule).unwrap();
            assert!((&v - &want).max_abs() < 1e-12, "{rule:?}");
        }
        let knots = duhamel_knots(&hist);
        assert!((&knots[1] - &want).max_abs() < 1e-12);
    }
}
