//! The small-data recursion and the exponent sequences of the interpolation
//! inequality ∫|∇u|^{2α} ≤ C^{b_k} ‖Δu‖^{b_k} ‖∇u‖₂^{b_k} (∫|∇u|^{a_k})^{θ_k}.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallSequence {
    /// b0/(1 − λ(2b0)^α) when 2λ(2b0)^α < 1.
    pub bound: Option<f64>,
    /// b_k = b0 + λ b_{k−1}^{1+α}, starting from b_0 = b0.
    pub trace: Vec<f64>,
    /// Set when the smallness condition fails.
    pub condition_violated: bool,
}

/// Iterates the recursion and, under 2λ(2b0)^α < 1, returns its a priori bound.
pub fn small_sequence_bound(b0: f64, lambda: f64, alpha: f64, k: usize) -> Result<SmallSequence> {
    if !(b0 >= 0.0 && lambda >= 0.0 && alpha > 0.0) {
        return Err(Error::invalid(format!(
            "need b0 >= 0, lambda >= 0, alpha > 0 (got {b0}, {lambda}, {alpha})"
        )));
    }
    let q = lambda * (2.0 * b0).powf(alpha);
    let condition_violated = !(2.0 * q < 1.0);
    let bound = (!condition_violated).then(|| b0 / (1.0 - q));
    let mut trace = Vec::with_capacity(k + 1);
    trace.push(b0);
    for _ in 0..k {
        let prev = *trace.last().expect("nonempty");
        trace.push(b0 + lambda * prev.powf(1.0 + alpha));
    }
    Ok(SmallSequence {
        bound,
        trace,
        condition_violated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InterpMode {
    /// N > 2, with 2* = 2N/(N − 2).
    HighDim { dimension: usize },
    /// N = 2 with the free parameter s > 1.
    Planar { s: f64 },
}

impl InterpMode {
    /// Growth factor of the a-recursion a_k = (a_{k−1} − 2) q.
    fn q(&self) -> f64 {
        match *self {
            InterpMode::HighDim { dimension } => dimension as f64 / 2.0,
            InterpMode::Planar { s } => s * s,
        }
    }

    pub fn dimension(&self) -> usize {
        match *self {
            InterpMode::HighDim { dimension } => dimension,
            InterpMode::Planar { .. } => 2,
        }
    }

    /// Largest α with a₂ ≤ 2: (N² + 2N + 4)/N² or (s⁴ + s² + 1)/s⁴.
    pub fn admissible_alpha(&self) -> f64 {
        let q = self.q();
        (q * q + q + 1.0) / (q * q)
    }

    /// The planar s for which a₂ = 2 exactly at the given α > 1.
    pub fn planar_for_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) {
            return Err(Error::invalid(format!(
                "planar mode needs alpha > 1, got {alpha}"
            )));
        }
        let a = alpha - 1.0;
        let s2 = (1.0 + (1.0 + 4.0 * a).sqrt()) / (2.0 * a);
        Ok(InterpMode::Planar { s: s2.sqrt() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpSequences {
    pub mode: InterpMode,
    pub alpha: f64,
    /// Closed-form a_k, k = 0..=K.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// a_k from the recursion, for cross-checking.
    pub a_recursive: Vec<f64>,
    /// Largest k with a_k ≥ 0.
    pub k_star: Option<usize>,
    /// a₂ ≤ 2 and b₂ < 2.
    pub second_step_admissible: bool,
}

pub fn interp_sequences(mode: InterpMode, alpha: f64, k_max: usize) -> Result<InterpSequences> {
    let q = match mode {
        InterpMode::HighDim { dimension } => {
            if dimension <= 2 {
                return Err(Error::invalid(format!(
                    "high-dimensional sequences need N > 2, got {dimension}"
                )));
            }
            let n = dimension as f64;
            if !(alpha > 1.0 && alpha < n / (n - 2.0)) {
                return Err(Error::invalid(format!(
                    "alpha must lie in (1, N/(N-2)) = (1, {}), got {alpha}",
                    n / (n - 2.0)
                )));
            }
            mode.q()
        }
        InterpMode::Planar { s } => {
            if !(s > 1.0 && s.is_finite()) {
                return Err(Error::invalid(format!(
                    "planar parameter s must exceed 1, got {s}"
                )));
            }
            if !(alpha > 0.0) {
                return Err(Error::invalid(format!(
                    "alpha must be positive, got {alpha}"
                )));
            }
            mode.q()
        }
    };
    let fixed = q / (q - 1.0);
    let a: Vec<f64> = (0..=k_max)
        .map(|k| 2.0 * fixed - 2.0 * (fixed - alpha) * q.powi(k as i32))
        .collect();
    let b: Vec<f64> = (0..=k_max)
        .map(|k| (1.0 - q.powi(-(k as i32))) / (1.0 - 1.0 / q))
        .collect();
    let mut a_recursive = vec![2.0 * alpha];
    for k in 1..=k_max {
        a_recursive.push((a_recursive[k - 1] - 2.0) * q);
    }
    let k_star = a.iter().rposition(|&v| v >= 0.0);
    let second_step_admissible = k_max >= 2 && a[2] <= 2.0 + 1e-12 && b[2] < 2.0;
    Ok(InterpSequences {
        mode,
        alpha,
        a,
        b,
        a_recursive,
        k_star,
        second_step_admissible,
    })
}

impl InterpSequences {
    /// Exponent (2/N)^k (or s^{−2k}) on the lower-order integral.
    pub fn lower_order_exponent(&self, k: usize) -> f64 {
        self.mode.q().powi(-(k as i32))
    }

    /// σ with 1 + σ = b_k/(2 − b_k) + θ_k a_k/(2 − b_k).
    pub fn sigma(&self, k: usize) -> Result<f64> {
        let (a, b) = match (self.a.get(k), self.b.get(k)) {
            (Some(a), Some(b)) => (*a, *b),
            _ => {
                return Err(Error::invalid(format!(
                    "sequence index {k} was not computed"
                )))
            }
        };
        if !(b < 2.0) {
            return Err(Error::invalid(format!("b_{k} = {b} is not below 2")));
        }
        let sigma = b / (2.0 - b) + self.lower_order_exponent(k) * a / (2.0 - b) - 1.0;
        if !(sigma > 0.0) {
            return Err(Error::invalid(format!(
                "sigma = {sigma} is not positive for alpha = {}",
                self.alpha
            )));
        }
        Ok(sigma)
    }
}
