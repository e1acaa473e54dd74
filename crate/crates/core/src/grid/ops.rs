use std::borrow::Cow;

use super::{ScalarField, Spectrum, VectorField};

/// ∂f/∂x_axis.
pub fn partial_derivative(f: &ScalarField, axis: usize) -> ScalarField {
    Spectrum::forward(f).derivative(axis).inverse()
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let s = Spectrum::forward(f);
    gradient_of_spectrum(&s)
}

pub(crate) fn gradient_of_spectrum(s: &Spectrum) -> VectorField {
    VectorField::from_components(
        (0..s.grid().dims())
            .map(|a| s.derivative(a).inverse())
            .collect(),
    )
}

/// Spectrum of div v. Components whose parities disagree are combined
/// through physical space.
pub(crate) fn divergence_spectrum(v: &VectorField) -> Spectrum {
    let parts: Vec<Spectrum> = v
        .components()
        .iter()
        .enumerate()
        .map(|(a, c)| Spectrum::forward(c).derivative(a))
        .collect();
    if parts.iter().all(|p| p.parity() == parts[0].parity()) {
        let mut acc = parts[0].clone();
        for p in &parts[1..] {
            acc.add_assign(p);
        }
        acc
    } else {
        let mut sum = parts[0].inverse();
        for p in &parts[1..] {
            sum = &sum + &p.inverse();
        }
        Spectrum::forward(&sum)
    }
}

pub fn divergence(v: &VectorField) -> ScalarField {
    divergence_spectrum(v).inverse()
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    apply_multiplier(f, |lambda| -lambda)
}

/// Multiplies every mode of `f` by `m(λ)`, λ ≥ 0 the −Δ eigenvalue of the mode.
pub fn apply_multiplier(f: &ScalarField, m: impl Fn(f64) -> f64) -> ScalarField {
    let mut s = Spectrum::forward(f);
    s.map_eigen(m);
    s.inverse()
}

/// Solves (−Δ + τ) w = rhs; every mode is divided by λ + τ.
pub fn helmholtz_solve(rhs: &ScalarField, tau: f64) -> ScalarField {
    assert!(tau > 0.0, "helmholtz_solve needs tau > 0, got {tau}");
    apply_multiplier(rhs, |lambda| 1.0 / (lambda + tau))
}

/// ∫ f dx / |Ω|.
pub fn mean_value(f: &ScalarField) -> f64 {
    f.integral() / f.grid().volume()
}

/// Coefficient-space ‖f‖₂².
pub fn spectral_l2_squared(f: &ScalarField) -> f64 {
    Spectrum::forward(f).l2_squared()
}

/// Pointwise magnitudes for norm evaluation: |f| for scalars, Euclidean
/// length for vectors.
pub trait Magnitude {
    fn magnitudes(&self) -> Cow<'_, [f64]>;
    fn cell_volume(&self) -> f64;
}

impl Magnitude for ScalarField {
    fn magnitudes(&self) -> Cow<'_, [f64]> {
        Cow::Borrowed(self.values())
    }
    fn cell_volume(&self) -> f64 {
        self.grid().cell_volume()
    }
}

impl Magnitude for VectorField {
    fn magnitudes(&self) -> Cow<'_, [f64]> {
        Cow::Owned(self.magnitude().into_values())
    }
    fn cell_volume(&self) -> f64 {
        self.grid().cell_volume()
    }
}

/// Riemann-sum Lᵖ norm; `p = f64::INFINITY` gives the grid maximum.
///
/// # Panics
/// If `p < 1`.
pub fn lp_norm<F: Magnitude + ?Sized>(f: &F, p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm needs p >= 1, got {p}");
    let m = f.magnitudes();
    if p.is_infinite() {
        return m.iter().fold(0.0, |a, v| a.max(v.abs()));
    }
    let dv = f.cell_volume();
    if p == 2.0 {
        return (m.iter().map(|v| v * v).sum::<f64>() * dv).sqrt();
    }
    (m.iter().map(|v| v.abs().powf(p)).sum::<f64>() * dv).powf(1.0 / p)
}
