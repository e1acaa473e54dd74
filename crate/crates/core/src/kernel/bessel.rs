//! Bessel functions of the first kind for the orders the radial profile needs:
//! ν = (N − 2)/2 for integer N ≥ 1, i.e. ν ∈ {−1/2, 0, 1/2, 1, …}.
//!
//! Orders are passed doubled (`nu2 = 2ν = N − 2`) so half-integers stay exact.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

/// Arguments up to this bound use the power series directly.
const SERIES_LIMIT: f64 = 8.0;
/// Integer-order seeds switch from the trapezoidal Bessel integral to the
/// Hankel expansion above this bound.
const HANKEL_LIMIT: f64 = 25.0;

/// `z^{N/2} J_{(N−2)/2}(z)` for `z ≥ 0`; finite at `z = 0` for every `N ≥ 1`.
pub(crate) fn scaled_bessel(dimension: usize, z: f64) -> f64 {
    debug_assert!(dimension >= 1 && z >= 0.0);
    let half_n = dimension as f64 / 2.0;
    if z <= SERIES_LIMIT {
        // Σ (−1)^m z^{2m+N−1} / (2^{2m+N/2−1} m! Γ(m+N/2))
        let mut term = z.powi(dimension as i32 - 1) / (2f64.powf(half_n - 1.0) * gamma(half_n));
        let mut sum = term;
        let q = -z * z / 4.0;
        for m in 1..200 {
            let mf = m as f64;
            term *= q / (mf * (mf - 1.0 + half_n));
            sum += term;
            if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    } else {
        z.powf(half_n) * bessel_j(dimension as i32 - 2, z)
    }
}

/// `J_{nu2/2}(z)` for `nu2 ≥ −1` and `z > 0`.
pub(crate) fn bessel_j(nu2: i32, z: f64) -> f64 {
    assert!(nu2 >= -1, "order below -1/2 is not supported");
    if z <= SERIES_LIMIT {
        return series(nu2, z);
    }
    // Upward recurrence J_{ν+1} = (2ν/z) J_ν − J_{ν−1} is stable for z > ν.
    let (mut nu2_lo, mut lo, mut hi) = if nu2 % 2 == 0 {
        let (j0, j1) = integer_seeds(z);
        (0, j0, j1)
    } else {
        let amp = (2.0 / (PI * z)).sqrt();
        (-1, amp * z.cos(), amp * z.sin())
    };
    if nu2 == nu2_lo {
        return lo;
    }
    while nu2_lo + 2 < nu2 {
        let nu = (nu2_lo + 2) as f64 / 2.0;
        let next = 2.0 * nu / z * hi - lo;
        lo = hi;
        hi = next;
        nu2_lo += 2;
    }
    hi
}

fn series(nu2: i32, z: f64) -> f64 {
    let nu = nu2 as f64 / 2.0;
    if z == 0.0 {
        return match nu2 {
            0 => 1.0,
            -1 => f64::INFINITY,
            _ => 0.0,
        };
    }
    let mut term = (z / 2.0).powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    let q = -z * z / 4.0;
    for m in 1..200 {
        let mf = m as f64;
        term *= q / (mf * (mf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn integer_seeds(z: f64) -> (f64, f64) {
    if z < HANKEL_LIMIT {
        trapezoid_seeds(z)
    } else {
        (hankel(0.0, z), hankel(1.0, z))
    }
}

/// J_n(z) = (1/π) ∫₀^π cos(nθ − z sin θ) dθ; the integrand is smooth and
/// periodic, so the trapezoidal rule converges geometrically once the node
/// count exceeds roughly z/2.
fn trapezoid_seeds(z: f64) -> (f64, f64) {
    let m = (0.6 * z).ceil() as usize + 24;
    let h = PI / m as f64;
    let (mut s0, mut s1) = (0.0, 0.0);
    for j in 0..=m {
        let theta = j as f64 * h;
        let w = if j == 0 || j == m { 0.5 } else { 1.0 };
        let zs = z * theta.sin();
        s0 += w * zs.cos();
        s1 += w * (theta - zs).cos();
    }
    (s0 * h / PI, s1 * h / PI)
}

/// Hankel asymptotic expansion, truncated at the smallest term.
fn hankel(nu: f64, z: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (8.0 * kf * z);
        if term.abs() > prev || term.abs() < 1e-18 {
            break;
        }
        prev = term.abs();
        // P collects even k with alternating sign, Q odd k.
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
    }
    let chi = z - (nu / 2.0 + 0.25) * PI;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}
