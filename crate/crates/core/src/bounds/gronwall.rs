//! Closed-form bound for y′ ≤ c₁ y^{1+σ} + c₂-type differential inequalities,
//! written for v = y + 1: v′ ≤ c₁ v^{1+σ} + c₂ v.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GronwallValue {
    Finite(f64),
    /// The bound is infinite: t is at or past the blow-up time.
    BlowUp,
}

impl GronwallValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            GronwallValue::Finite(v) => Some(v),
            GronwallValue::BlowUp => None,
        }
    }
}

fn check(sigma: f64, c1: f64, c2: f64) -> Result<()> {
    if !(sigma > 0.0 && c1 > 0.0 && c2 > 0.0) {
        return Err(Error::invalid(format!(
            "sigma, c1, c2 must be positive (got {sigma}, {c1}, {c2})"
        )));
    }
    Ok(())
}

/// 1 / [((v₀^{−σ} + c₁/c₂) e^{−σc₂t} − c₁/c₂)⁺]^{1/σ} − 1 with v₀ = y₀ + 1.
pub fn gronwall_closed_form(
    y0: f64,
    sigma: f64,
    c1: f64,
    c2: f64,
    t: f64,
) -> Result<GronwallValue> {
    check(sigma, c1, c2)?;
    if !(y0 >= 0.0 && t >= 0.0) {
        return Err(Error::invalid(format!(
            "need y0 >= 0 and t >= 0, got {y0}, {t}"
        )));
    }
    let v0 = y0 + 1.0;
    let r = c1 / c2;
    let bracket = (v0.powf(-sigma) + r) * (-sigma * c2 * t).exp() - r;
    if bracket <= 0.0 {
        return Ok(GronwallValue::BlowUp);
    }
    Ok(GronwallValue::Finite(bracket.powf(-1.0 / sigma) - 1.0))
}

/// Time at which the closed-form bound's bracket vanishes:
/// ln(1 + c₂ v₀^{−σ}/c₁) / (σ c₂).
pub fn blow_up_time(v0: f64, sigma: f64, c1: f64, c2: f64) -> Result<f64> {
    check(sigma, c1, c2)?;
    if !(v0 >= 1.0) {
        return Err(Error::invalid(format!("v0 must be at least 1, got {v0}")));
    }
    Ok((c2 / c1 * v0.powf(-sigma)).ln_1p() / (sigma * c2))
}
