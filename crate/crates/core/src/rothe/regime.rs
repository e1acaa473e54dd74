use serde::Serialize;

use crate::bounds::{blow_up_time, interp_sequences, InterpMode};
use crate::error::{Error, Result};
use crate::grid::{gradient, lp_norm, ScalarField};

/// Existence regime of the growth exponent α in dimension N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// α ≤ 1: solutions exist on every time interval.
    Global,
    /// 1 < α ≤ (N² + 2N + 4)/N² for N > 2, or 1 < α < 3 for N = 2:
    /// solutions exist up to the Gronwall horizon.
    Local,
    Unsupported,
}

pub fn alpha_classify(dimension: usize, alpha: f64) -> Regime {
    let n = dimension as f64;
    if alpha <= 1.0 {
        Regime::Global
    } else if (dimension > 2 && alpha <= (n * n + 2.0 * n + 4.0) / (n * n))
        || (dimension == 2 && alpha < 3.0)
    {
        Regime::Local
    } else {
        Regime::Unsupported
    }
}

/// How σ is derived from the interpolation sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorizonOptions {
    /// Sequence index used (b_k < 2 required).
    pub k: usize,
    /// Planar parameter s for N = 2; `None` picks the s with a₂ = 2.
    pub planar_s: Option<f64>,
}

impl Default for HorizonOptions {
    fn default() -> Self {
        HorizonOptions {
            k: 2,
            planar_s: None,
        }
    }
}

/// σ in y′ ≤ c₁y^{1+σ} + c₂ from 1 + σ = b_k/(2 − b_k) + θ_k a_k/(2 − b_k).
pub fn gronwall_sigma(dimension: usize, alpha: f64, opts: &HorizonOptions) -> Result<f64> {
    let mode = match dimension {
        0 | 1 => {
            return Err(Error::invalid(format!(
                "no interpolation sequence is defined for N = {dimension}"
            )))
        }
        2 => match opts.planar_s {
            Some(s) => InterpMode::Planar { s },
            None => InterpMode::planar_for_alpha(alpha)?,
        },
        n => InterpMode::HighDim { dimension: n },
    };
    interp_sequences(mode, alpha, opts.k.max(2))?.sigma(opts.k)
}

/// v₀ = ∫(u₀² + |∇u₀|²) dx + 1.
pub fn initial_size(u0: &ScalarField) -> f64 {
    lp_norm(u0, 2.0).powi(2) + lp_norm(&gradient(u0), 2.0).powi(2) + 1.0
}

/// The time at which the a priori bound on ∫(u² + |∇u|²) can blow up:
/// ln(1 + c₂ v₀^{−σ}/c₁)/(σ c₂), which is ln(v₀^{−σ} + 1)/(σ c) when c₁ = c₂ = c.
pub fn gronwall_horizon(
    u0: &ScalarField,
    alpha: f64,
    c1: f64,
    c2: f64,
    opts: &HorizonOptions,
) -> Result<f64> {
    let sigma = gronwall_sigma(u0.grid().dims(), alpha, opts)?;
    blow_up_time(initial_size(u0), sigma, c1, c2)
}
