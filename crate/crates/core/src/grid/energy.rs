use super::{gradient, laplacian, ScalarField};
use crate::error::Result;
use crate::nonlinearity::NonlinearitySpec;

fn potential_integral(u: &ScalarField, spec: &NonlinearitySpec) -> Result<f64> {
    let grad = gradient(u);
    let mut xi = vec![0.0; u.grid().dims()];
    let mut sum = 0.0;
    for i in 0..u.grid().len() {
        grad.at(i, &mut xi);
        sum += spec.eval_potential(&xi)?;
    }
    Ok(sum * u.grid().cell_volume())
}

fn bending(u: &ScalarField) -> f64 {
    0.5 * laplacian(u).values().iter().map(|v| v * v).sum::<f64>() * u.grid().cell_volume()
}

/// E(u) = ∫ ½(Δu)² − φ(∇u) dx.
pub fn energy(u: &ScalarField, spec: &NonlinearitySpec) -> Result<f64> {
    let phi = potential_integral(u, spec)?;
    Ok(bending(u) - phi)
}

/// ∫ ½(Δu)² + φ(∇u) dx, the functional whose time derivative along the
/// flow is −‖∂ₜu‖₂² when g = ∇φ.
pub fn dissipated_energy(u: &ScalarField, spec: &NonlinearitySpec) -> Result<f64> {
    let phi = potential_integral(u, spec)?;
    Ok(bending(u) + phi)
}
