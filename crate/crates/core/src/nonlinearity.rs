//! The flux nonlinearity g(ξ) of ∂ₜu + div(∇Δu − g(∇u)) = 0, its growth
//! envelope |g(ξ)| ≤ c_g|ξ|^{α_g} + c_g, its potential, and the bounded
//! truncation h built around a reference gradient field.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};

/// Smooth cutoff θ(s) = s on [−1, 1], θ(s) = 0 for |s| ≥ R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaCutoff {
    outer: f64,
    sup: f64,
}

impl Default for ThetaCutoff {
    fn default() -> Self {
        ThetaCutoff::new(2.0).expect("R = 2 is valid")
    }
}

fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

impl ThetaCutoff {
    pub fn new(outer: f64) -> Result<Self> {
        if !(outer > 1.0 && outer.is_finite()) {
            return Err(Error::invalid(format!(
                "theta outer radius must exceed 1, got {outer}"
            )));
        }
        let mut theta = ThetaCutoff { outer, sup: 0.0 };
        let n = 20_000;
        theta.sup = (0..=n)
            .map(|i| theta.eval(1.0 + (outer - 1.0) * i as f64 / n as f64).abs())
            .fold(1.0, f64::max);
        Ok(theta)
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    /// The transition factor: 1 on [0, 1], 0 beyond R, C^∞ in between.
    fn chi(&self, r: f64) -> f64 {
        if r <= 1.0 {
            return 1.0;
        }
        if r >= self.outer {
            return 0.0;
        }
        let a = bump(self.outer - r);
        a / (a + bump(r - 1.0))
    }

    pub fn eval(&self, s: f64) -> f64 {
        s * self.chi(s.abs())
    }

    /// max |θ|, attained on 1 ≤ |s| ≤ R.
    pub fn sup_abs(&self) -> f64 {
        self.sup
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    base: NonlinearitySpec,
    /// g(∇u₀) sampled on the grid, one vector per point.
    reference: VectorField,
    theta: ThetaCutoff,
    bound: f64,
}

impl Truncation {
    pub fn base(&self) -> &NonlinearitySpec {
        &self.base
    }

    pub fn reference(&self) -> &VectorField {
        &self.reference
    }

    pub fn theta(&self) -> &ThetaCutoff {
        &self.theta
    }

    /// M = sup|g(∇u₀)| + sup|θ|·√N, a bound on |h| everywhere.
    pub fn bound(&self) -> f64 {
        self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GForm {
    Zero,
    /// (c|ξ|² + 1) ξ
    Cubic {
        c: f64,
    },
    /// |ξ|^{α−1} ξ
    Power {
        alpha: f64,
    },
    /// h(ξ)_i = g_i(∇u₀) + θ(g_i(ξ) − g_i(∇u₀)), pointwise.
    Truncated(Arc<Truncation>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    form: GForm,
    growth: (f64, f64),
}

/// Largest sampled ratio |g(ξ)| / (c_g|ξ|^{α_g} + c_g).
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub max_ratio: f64,
    pub worst_xi: Vec<f64>,
    pub samples: usize,
}

impl GrowthReport {
    pub fn holds(&self) -> bool {
        self.max_ratio <= 1.0
    }
}

impl NonlinearitySpec {
    pub fn zero() -> Self {
        NonlinearitySpec {
            form: GForm::Zero,
            growth: (1.0, 1.0),
        }
    }

    pub fn cubic(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!(
                "cubic coefficient c must be positive, got {c}"
            )));
        }
        Ok(NonlinearitySpec {
            form: GForm::Cubic { c },
            growth: (c + 1.0, 3.0),
        })
    }

    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!(
                "power exponent alpha must be positive, got {alpha}"
            )));
        }
        Ok(NonlinearitySpec {
            form: GForm::Power { alpha },
            growth: (1.0, alpha),
        })
    }

    pub fn form(&self) -> &GForm {
        &self.form
    }

    /// Declared (c_g, α_g).
    pub fn growth(&self) -> (f64, f64) {
        self.growth
    }

    pub fn growth_exponent(&self) -> f64 {
        self.growth.1
    }

    pub fn is_conservative(&self) -> bool {
        !matches!(self.form, GForm::Truncated(_))
    }

    pub fn is_zero(&self) -> bool {
        match &self.form {
            GForm::Zero => true,
            GForm::Truncated(t) => t.base.is_zero(),
            _ => false,
        }
    }

    /// g(ξ) written into `out`; for the truncated form the reference is
    /// taken at grid point 0.
    pub fn eval_g(&self, xi: &[f64], out: &mut [f64]) {
        self.eval_g_at(0, xi, out)
    }

    /// g(ξ) at flat grid index `point` (only the truncated form depends on it).
    pub fn eval_g_at(&self, point: usize, xi: &[f64], out: &mut [f64]) {
        match &self.form {
            GForm::Zero => out.iter_mut().for_each(|o| *o = 0.0),
            GForm::Cubic { c } => {
                let f = c * norm_sq(xi) + 1.0;
                out.iter_mut().zip(xi).for_each(|(o, x)| *o = f * x);
            }
            GForm::Power { alpha } => {
                let r = norm_sq(xi).sqrt();
                let f = if r > 0.0 { r.powf(alpha - 1.0) } else { 0.0 };
                out.iter_mut().zip(xi).for_each(|(o, x)| *o = f * x);
            }
            GForm::Truncated(t) => {
                t.base.eval_g_at(point, xi, out);
                for (i, o) in out.iter_mut().enumerate() {
                    let r = t.reference.component(i).values()[point];
                    // θ is the identity on [−1, 1]; keep g bit-exact there.
                    if (*o - r).abs() > 1.0 {
                        *o = r + t.theta.eval(*o - r);
                    }
                }
            }
        }
    }

    /// φ with ∇φ = g and φ(0) = 0.
    pub fn eval_potential(&self, xi: &[f64]) -> Result<f64> {
        let r2 = norm_sq(xi);
        match &self.form {
            GForm::Zero => Ok(0.0),
            GForm::Cubic { c } => Ok(c * r2 * r2 / 4.0 + r2 / 2.0),
            GForm::Power { alpha } => Ok(r2.sqrt().powf(alpha + 1.0) / (alpha + 1.0)),
            GForm::Truncated(_) => Err(Error::NotConservative),
        }
    }

    /// The field g(∇u) for a gradient field; component parities are kept.
    pub fn apply(&self, grad: &VectorField) -> VectorField {
        if let GForm::Truncated(t) = &self.form {
            assert_eq!(
                grad.grid(),
                t.reference.grid(),
                "truncated nonlinearity applied on a foreign grid"
            );
        }
        let grid = grad.grid();
        let n = grid.dims();
        let mut comps = vec![vec![0.0; grid.len()]; n];
        let mut xi = vec![0.0; n];
        let mut g = vec![0.0; n];
        for i in 0..grid.len() {
            grad.at(i, &mut xi);
            self.eval_g_at(i, &xi, &mut g);
            for (c, v) in comps.iter_mut().zip(&g) {
                c[i] = *v;
            }
        }
        let components = comps
            .into_iter()
            .zip(grad.components())
            .map(|(v, c)| ScalarField::from_parts(grid.clone(), v, c.parity()))
            .collect();
        VectorField::from_components(components)
    }
}

fn norm_sq(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum()
}

/// The bounded surrogate h of `base` around the reference gradient ∇u₀.
pub fn truncate_to_h(
    base: &NonlinearitySpec,
    ref_grad: &VectorField,
    theta: ThetaCutoff,
) -> NonlinearitySpec {
    let reference = base.apply(ref_grad);
    let n = ref_grad.grid().dims() as f64;
    let bound = reference.max_magnitude() + theta.sup_abs() * n.sqrt();
    let growth = (bound.max(f64::MIN_POSITIVE), base.growth.1);
    NonlinearitySpec {
        form: GForm::Truncated(Arc::new(Truncation {
            base: base.clone(),
            reference,
            theta,
            bound,
        })),
        growth,
    }
}

/// Probes |g(ξ)| against the declared envelope at `sample_count` random ξ
/// with |ξ| log-uniform in [1e-3, 1e3] (and random grid points for the
/// truncated form).
pub fn growth_check(
    spec: &NonlinearitySpec,
    dims: usize,
    sample_count: usize,
    seed: u64,
) -> GrowthReport {
    assert!(sample_count >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cg, ag) = spec.growth;
    let points = match &spec.form {
        GForm::Truncated(t) => t.reference.grid().len(),
        _ => 1,
    };
    let mut report = GrowthReport {
        max_ratio: 0.0,
        worst_xi: vec![0.0; dims],
        samples: sample_count,
    };
    let mut xi = vec![0.0; dims];
    let mut g = vec![0.0; dims];
    for _ in 0..sample_count {
        let r = 10f64.powf(rng.gen_range(-3.0..3.0));
        xi.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        let len = norm_sq(&xi).sqrt().max(1e-300);
        xi.iter_mut().for_each(|x| *x *= r / len);
        let point = rng.gen_range(0..points);
        spec.eval_g_at(point, &xi, &mut g);
        let ratio = norm_sq(&g).sqrt() / (cg * r.powf(ag) + cg);
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.worst_xi.copy_from_slice(&xi);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gradient, Grid};

    #[test]
    fn catalog_values() {
        let mut out = [0.0; 2];
        NonlinearitySpec::zero().eval_g(&[3.0, 1.0], &mut out);
        assert_eq!(out, [0.0, 0.0]);
        NonlinearitySpec::power(3.0)
            .unwrap()
            .eval_g(&[1.0, 0.0], &mut out);
        assert_eq!(out, [1.0, 0.0]);
        NonlinearitySpec::cubic(1.0)
            .unwrap()
            .eval_g(&[2.0, 0.0], &mut out);
        assert_eq!(out, [10.0, 0.0]);
        NonlinearitySpec::power(0.5)
            .unwrap()
            .eval_g(&[0.0, 0.0], &mut out);
        assert_eq!(out, [0.0, 0.0]);
    }

    #[test]
    fn potentials() {
        assert_eq!(
            NonlinearitySpec::power(1.0)
                .unwrap()
                .eval_potential(&[3.0, 4.0])
                .unwrap(),
            12.5
        );
        assert_eq!(
            NonlinearitySpec::cubic(2.0)
                .unwrap()
                .eval_potential(&[1.0, 0.0])
                .unwrap(),
            1.0
        );
        assert_eq!(
            NonlinearitySpec::cubic(2.0)
                .unwrap()
                .eval_potential(&[0.0, 0.0])
                .unwrap(),
            0.0
        );
        assert!(NonlinearitySpec::power(-1.0).is_err());
        assert!(NonlinearitySpec::cubic(0.0).is_err());
    }

    #[test]
    fn theta_profile() {
        let t = ThetaCutoff::default();
        assert_eq!(t.eval(0.7), 0.7);
        assert_eq!(t.eval(-1.0), -1.0);
        assert_eq!(t.eval(2.0), 0.0);
        assert_eq!(t.eval(-5.0), 0.0);
        assert!(t.sup_abs() >= 1.0 && t.sup_abs() < 2.0);
        assert!(ThetaCutoff::new(1.0).is_err());
    }

    #[test]
    fn truncation_bound_and_identity_region() {
        let g = Grid::periodic(&[6.0, 6.0], &[16, 16]).unwrap();
        let u0 = g.sample(|x| x[0].sin() * (2.0 * x[1]).cos());
        let base = NonlinearitySpec::cubic(1.0).unwrap();
        let h = truncate_to_h(&base, &gradient(&u0), ThetaCutoff::default());
        assert!(!h.is_conservative());
        let GForm::Truncated(t) = h.form() else {
            panic!()
        };
        let m = t.bound();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut gb, mut gh) = ([0.0; 2], [0.0; 2]);
        for _ in 0..10_000 {
            let p = rng.gen_range(0..g.len());
            let xi = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            h.eval_g_at(p, &xi, &mut gh);
            assert!(norm_sq(&gh).sqrt() <= m);
            base.eval_g_at(p, &xi, &mut gb);
            let r = [
                t.reference().component(0).values()[p],
                t.reference().component(1).values()[p],
            ];
            if (gb[0] - r[0]).abs() <= 1.0 && (gb[1] - r[1]).abs() <= 1.0 {
                assert_eq!(gh, gb);
            }
        }
    }
}
