//! The Cauchy problem on ℝ^N, truncated to a periodic box: biharmonic
//! semigroup propagation, the Duhamel increment, the Picard sequence and its
//! monitors.

mod diagnostics;
mod duhamel;
mod picard;

use std::sync::OnceLock;

use statrs::function::gamma::{gamma, gamma_ur};

pub use diagnostics::{
    decay_exponent_fit, duhamel_gradient_constant, sample_kernel, smallness_check,
    truncation_consistency, young_check, DecayFit, SmallnessReport, YoungCheck,
};
pub use duhamel::{duhamel_increment, duhamel_knots, DuhamelRule, HHistory};
pub use picard::{
    chebyshev_times, picard_solve, picard_windows, PicardConfig, PicardRun, PicardState,
};

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid, ScalarField, Spectrum};
use crate::kernel::{
    alpha_normalization, build_kernel_table, unit_sphere_area, Envelope, KernelTable,
    QuadratureSpec,
};

/// Kernel mass allowed outside half the box.
pub const WRAP_TOLERANCE: f64 = 1e-10;

const TABLE_ETA_MAX: f64 = 30.0;
const TABLE_RESOLUTION: usize = 300;

/// Exact exponential rate of |f_N(η)| as η → ∞: (3/8)·2^{−2/3}.
pub const ASYMPTOTIC_DECAY_RATE: f64 = 0.375 * 0.629_960_524_947_436_6;

/// Normalization, tabulated profile and a tail envelope K exp(−μη^{4/3})
/// with μ the asymptotic rate and K the largest tabulated ratio.
#[derive(Debug)]
pub struct KernelData {
    pub alpha: f64,
    pub table: KernelTable,
    pub tail: Envelope,
}

/// Kernel data for dimensions 1 to 3, built on first use.
pub fn kernel_table(dimension: usize) -> Result<&'static KernelData> {
    static TABLES: [OnceLock<KernelData>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    if !(1..=3).contains(&dimension) {
        return Err(Error::invalid(format!(
            "kernel tables cover N = 1..3, got {dimension}"
        )));
    }
    let cell = &TABLES[dimension - 1];
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let quad = QuadratureSpec::default();
    let alpha = alpha_normalization(dimension, &quad)?;
    let table = build_kernel_table(dimension, TABLE_ETA_MAX, TABLE_RESOLUTION, &quad)?;
    let floor = 100.0 * quad.abs_tol;
    let k = table
        .samples()
        .iter()
        .filter(|r| r[1].abs() > floor)
        .map(|r| r[1].abs() * (ASYMPTOTIC_DECAY_RATE * r[0].powf(4.0 / 3.0)).exp())
        .fold(0.0, f64::max);
    let tail = Envelope {
        k,
        mu: ASYMPTOTIC_DECAY_RATE,
    };
    Ok(cell.get_or_init(|| KernelData { alpha, table, tail }))
}

/// Upper bound on ∫_{|x| > R} |b_N(x, t)| dx from the decay envelope
/// K exp(−μη^{4/3}), in closed form through the upper incomplete gamma function.
pub fn tail_mass(dimension: usize, envelope: Envelope, alpha: f64, radius: f64, t: f64) -> f64 {
    let n = dimension as f64;
    let eta0 = radius / t.powf(0.25);
    let a = 0.75 * n;
    let x = envelope.mu * eta0.powf(4.0 / 3.0);
    let q = if x > 0.0 { gamma_ur(a, x) } else { 1.0 };
    alpha * unit_sphere_area(dimension) * envelope.k * 0.75 * envelope.mu.powf(-a) * gamma(a) * q
}

fn require_periodic(grid: &Grid) -> Result<()> {
    if grid.boundary() != Boundary::Periodic {
        return Err(Error::invalid(
            "the Cauchy problem is solved on a periodic box",
        ));
    }
    Ok(())
}

/// Fails when the kernel at time `t` puts more than [`WRAP_TOLERANCE`] of its
/// absolute mass outside half the shortest box side.
pub fn wrap_check(grid: &Grid, t: f64) -> Result<f64> {
    require_periodic(grid)?;
    let data = kernel_table(grid.dims())?;
    let half = grid.extents().iter().cloned().fold(f64::INFINITY, f64::min) / 2.0;
    let mass = tail_mass(grid.dims(), data.tail, data.alpha, half, t);
    if !(mass <= WRAP_TOLERANCE) {
        return Err(Error::WrapAround {
            mass,
            tolerance: WRAP_TOLERANCE,
        });
    }
    Ok(mass)
}

/// v₀(·, t) = b_N(·, t) * u₀ through the multiplier exp(−|k|⁴t); the box is
/// checked for wrap-around first.
pub fn heat_propagate(u0: &ScalarField, t: f64) -> Result<ScalarField> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!(
            "propagation time must be positive, got {t}"
        )));
    }
    wrap_check(u0.grid(), t)?;
    Ok(heat_propagate_periodic(u0, t))
}

/// The periodic biharmonic semigroup, for data that is genuinely periodic;
/// no wrap-around check. t = 0 returns u₀ unchanged.
pub fn heat_propagate_periodic(u0: &ScalarField, t: f64) -> ScalarField {
    assert!(t >= 0.0, "propagation time must be nonnegative, got {t}");
    if t == 0.0 {
        return u0.clone();
    }
    let mut s = Spectrum::forward(u0);
    s.map_eigen(|l| (-l * l * t).exp());
    s.inverse()
}

/// v₀ by direct summation against the tabulated kernel, using minimum-image
/// distances on the periodic box. O(n²); meant as a cross-check.
pub fn heat_propagate_direct(u0: &ScalarField, t: f64) -> Result<ScalarField> {
    let grid = u0.grid();
    require_periodic(grid)?;
    if !(t > 0.0) {
        return Err(Error::invalid(format!(
            "propagation time must be positive, got {t}"
        )));
    }
    let kernel = sample_kernel(grid, t)?;
    let dv = grid.cell_volume();
    let n = grid.len();
    let dims = grid.dims();
    let pts = grid.points();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let xi = grid.multi_index(i);
        let mut acc = 0.0;
        for (j, &uj) in u0.values().iter().enumerate() {
            let yj = grid.multi_index(j);
            let mut flat = 0;
            for a in 0..dims {
                flat = flat * pts[a] + (xi[a] + pts[a] - yj[a]) % pts[a];
            }
            acc += kernel.values()[flat] * uj;
        }
        *o = acc * dv;
    }
    ScalarField::new(grid, out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn single_mode_decays_exactly() {
        let l = 2.0 * PI;
        let g = Grid::periodic(&[l, l], &[16, 16]).unwrap();
        let u0 = g.sample(|x| (2.0 * x[0] + x[1]).cos());
        let t = 0.3;
        let v = heat_propagate_periodic(&u0, t);
        let f = (-25.0f64 * t).exp();
        for (a, b) in v.values().iter().zip(u0.values()) {
            assert!((a - f * b).abs() <= 1e-12 * f);
        }
        assert_eq!(heat_propagate_periodic(&u0, 0.0), u0);
    }

    #[test]
    fn wrap_check_rejects_small_boxes() {
        let small = Grid::periodic(&[4.0], &[32]).unwrap();
        assert!(matches!(
            heat_propagate(&small.constant(1.0), 1.0),
            Err(Error::WrapAround { .. })
        ));
        let big = Grid::periodic(&[70.0], &[128]).unwrap();
        let u0 = big.sample(|x| (-(x[0] - 35.0).powi(2)).exp());
        let v = heat_propagate(&u0, 1.0).unwrap();
        assert!((v.integral() - u0.integral()).abs() < 1e-12 * u0.integral());
    }

    #[test]
    fn tail_mass_decreases_with_radius() {
        let d = kernel_table(2).unwrap();
        let a = tail_mass(2, d.tail, d.alpha, 5.0, 1.0);
        let b = tail_mass(2, d.tail, d.alpha, 10.0, 1.0);
        assert!(a > b && b > 0.0);
        // The whole-space bound dominates the true L¹ norm, which exceeds 1.
        assert!(tail_mass(2, d.tail, d.alpha, 0.0, 1.0) > 1.0);
        for r in d.table.samples() {
            assert!(r[1].abs() <= d.tail.bound(r[0]) * (1.0 + 1e-12));
        }
    }
}
