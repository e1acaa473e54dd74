//! The interpolation inequality on Neumann boxes and the domain constants
//! (Sobolev–Poincaré and Calderón–Zygmund) it is stated with.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use super::sequences::{interp_sequences, InterpMode};
use crate::error::{Error, Result};
use crate::grid::{
    gradient, laplacian, lp_norm, mean_value, Boundary, Grid, ScalarField, Spectrum,
};

/// Lebesgue exponent used for ‖Δu‖ and ‖∇²u‖ in planar checks.
pub const PLANAR_CRITICAL_EXPONENT: f64 = 6.0;

/// Exponents of the inequality chain for a mode: (P, q) where ‖Δu‖_P and
/// ‖∇²u‖_P enter through Hölder and ‖u − u_Ω‖_q ≤ c_Ω ‖∇u‖₂.
pub fn chain_exponents(mode: InterpMode) -> Result<(f64, f64)> {
    let (p, growth) = match mode {
        InterpMode::HighDim { dimension } if dimension > 2 => {
            let n = dimension as f64;
            (2.0 * n / (n - 2.0), n / 2.0)
        }
        InterpMode::HighDim { dimension } => {
            return Err(Error::invalid(format!(
                "high-dimensional mode needs N > 2, got {dimension}"
            )))
        }
        InterpMode::Planar { s } => (PLANAR_CRITICAL_EXPONENT, s * s),
    };
    let p_conj = p / (p - 1.0);
    let r = growth / p_conj;
    if !(r > 1.0) {
        return Err(Error::invalid(format!(
            "the Hölder split needs s^2 > {p_conj} for 2* = {PLANAR_CRITICAL_EXPONENT}"
        )));
    }
    Ok((p, p_conj * r / (r - 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainConstants {
    pub mode: InterpMode,
    /// max ‖u − u_Ω‖_q / ‖∇u‖₂, inflated by 1.1.
    pub c_omega: f64,
    /// max ‖u‖_{W^{2,P}} / ‖Δu‖_P, inflated by 1.1; the W^{2,P} norm sums the
    /// Lᵖ norms of all partial derivatives up to order two.
    pub c_cz: f64,
    pub p: f64,
    pub q: f64,
    pub samples: usize,
    pub seed: u64,
}

pub const SAFETY_FACTOR: f64 = 1.1;

/// Random cosine field on a Neumann box: modes up to `band` per axis with
/// amplitudes (1 + |k|²)^{−β/2}·U(−1, 1), β drawn from [1, 3], zero mean,
/// scaled to ‖u‖₂² + ‖∇u‖₂² = 1.
pub fn random_band_limited_field(grid: &Grid, band: usize, rng: &mut impl Rng) -> ScalarField {
    let beta = rng.gen_range(1.0..=3.0);
    let mut coeffs = vec![Complex64::default(); grid.len()];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let idx = grid.multi_index(i);
        let k = &idx[..grid.dims()];
        if k.iter().all(|&v| v == 0) || k.iter().any(|&v| v > band) {
            continue;
        }
        let k2: f64 = k.iter().map(|&v| (v * v) as f64).sum();
        *c = Complex64::new(rng.gen_range(-1.0..1.0) * (1.0 + k2).powf(-beta / 2.0), 0.0);
    }
    let u = Spectrum::from_coeffs(grid, 0, coeffs).inverse();
    let h1 = (lp_norm(&u, 2.0).powi(2) + lp_norm(&gradient(&u), 2.0).powi(2)).sqrt();
    if h1 > 0.0 {
        u.scaled(1.0 / h1)
    } else {
        u
    }
}

/// ‖u‖_{W^{2,p}} as the sum of the Lᵖ norms of u and all its first and
/// second partial derivatives.
fn w2p_norm(u: &ScalarField, p: f64) -> f64 {
    let s = Spectrum::forward(u);
    let n = u.grid().dims();
    let mut total = lp_norm(u, p);
    for a in 0..n {
        let da = s.derivative(a);
        total += lp_norm(&da.inverse(), p);
        for b in 0..n {
            total += lp_norm(&da.derivative(b).inverse(), p);
        }
    }
    total
}

/// The two sampled ratios for one field.
fn constant_ratios(u: &ScalarField, p: f64, q: f64) -> (f64, f64) {
    let grad = gradient(u);
    let centred = u.map(|v| v - mean_value(u));
    let sobolev = lp_norm(&centred, q) / lp_norm(&grad, 2.0);
    (sobolev, w2p_norm(u, p) / lp_norm(&laplacian(u), p))
}

fn default_band(grid: &Grid) -> usize {
    let min_n = *grid.points().iter().min().expect("nonempty");
    (min_n / 3).max(2)
}

/// In-sample maxima of the Sobolev–Poincaré and Calderón–Zygmund ratios
/// over seeded random fields, each inflated by [`SAFETY_FACTOR`].
pub fn estimate_constants(
    grid: &Grid,
    mode: InterpMode,
    sample_count: usize,
    seed: u64,
) -> Result<DomainConstants> {
    if grid.boundary() != Boundary::NeumannBox {
        return Err(Error::invalid(
            "domain constants are estimated on Neumann boxes",
        ));
    }
    if grid.dims() != mode.dimension() {
        return Err(Error::invalid(format!(
            "grid is {}-d, mode expects {}-d",
            grid.dims(),
            mode.dimension()
        )));
    }
    if sample_count == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let (p, q) = chain_exponents(mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = default_band(grid);
    let (mut c_omega, mut c_cz) = (0.0f64, 0.0f64);
    for _ in 0..sample_count {
        let u = random_band_limited_field(grid, band, &mut rng);
        if u.max_abs() == 0.0 {
            return Err(Error::invalid(
                "random sample degenerated to a constant field",
            ));
        }
        let (a, b) = constant_ratios(&u, p, q);
        c_omega = c_omega.max(a);
        c_cz = c_cz.max(b);
    }
    Ok(DomainConstants {
        mode,
        c_omega: SAFETY_FACTOR * c_omega,
        c_cz: SAFETY_FACTOR * c_cz,
        p,
        q,
        samples: sample_count,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// lhs = ∫|∇u|^{2α}; rhs = (((2α−2)c_cz + 1)c_Ω)^{b_k} ‖Δu‖_P^{b_k} ‖∇u‖₂^{b_k} (∫|∇u|^{a_k})^{θ_k}.
pub fn interp_inequality_check(
    u: &ScalarField,
    alpha: f64,
    k: usize,
    constants: &DomainConstants,
) -> Result<InequalityCheck> {
    if u.grid().boundary() != Boundary::NeumannBox {
        return Err(Error::invalid("the inequality is checked on Neumann boxes"));
    }
    if !(constants.c_omega > 0.0 && constants.c_cz > 0.0) {
        return Err(Error::invalid(
            "domain constants must be estimated before checking the inequality",
        ));
    }
    let seq = interp_sequences(constants.mode, alpha, k.max(2))?;
    let (a_k, b_k) = (seq.a[k], seq.b[k]);
    if a_k < 0.0 {
        return Err(Error::invalid(format!(
            "a_{k} = {a_k} is negative; the inequality needs a_k >= 0"
        )));
    }
    let grad_mag = gradient(u).magnitude();
    let dv = u.grid().cell_volume();
    let power_integral = |e: f64| grad_mag.values().iter().map(|g| g.powf(e)).sum::<f64>() * dv;
    let lhs = power_integral(2.0 * alpha);
    let c = ((2.0 * alpha - 2.0) * constants.c_cz + 1.0) * constants.c_omega;
    let lower = if a_k == 0.0 {
        u.grid().volume()
    } else {
        power_integral(a_k)
    };
    let rhs = (c * lp_norm(&laplacian(u), constants.p) * lp_norm(&grad_mag, 2.0)).powf(b_k)
        * lower.powf(seq.lower_order_exponent(k));
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(InequalityCheck { lhs, rhs, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_match_the_high_dimensional_chain() {
        let (p, q) = chain_exponents(InterpMode::HighDim { dimension: 3 }).unwrap();
        assert!((p - 6.0).abs() < 1e-15 && (q - 6.0).abs() < 1e-12);
        let (p, q) = chain_exponents(InterpMode::Planar { s: 1.2 }).unwrap();
        assert_eq!(p, 6.0);
        assert!((q - 7.2).abs() < 1e-12);
        assert!(chain_exponents(InterpMode::Planar { s: 1.05 }).is_err());
    }

    #[test]
    fn identity_case_and_constant_field() {
        let g = Grid::neumann(&[1.0, 1.0, 1.0], &[12, 12, 12]).unwrap();
        let mode = InterpMode::HighDim { dimension: 3 };
        let consts = estimate_constants(&g, mode, 4, 1).unwrap();
        assert!(consts.c_cz >= 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_band_limited_field(&g, 4, &mut rng);
        let r = interp_inequality_check(&u, 19.0 / 9.0, 0, &consts).unwrap();
        assert!((r.lhs - r.rhs).abs() <= 1e-12 * r.lhs);
        let z = interp_inequality_check(&g.constant(2.0), 19.0 / 9.0, 2, &consts).unwrap();
        // Spectral derivatives of a constant are round-off sized, not exactly zero.
        assert!(z.lhs < 1e-40 && z.rhs < 1e-40);
    }
}
