use serde::Serialize;

use super::Trajectory;
use crate::grid::{gradient, lp_norm};
use crate::nonlinearity::NonlinearitySpec;

/// Discrete a priori quantities of a run, computed from the piecewise-constant
/// interpolants ū and ψ̄ with grid norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    /// sup_t ∫(ū² + |∇ū|²)
    pub sup_h1: f64,
    /// τ · sup_t ∫ū²
    pub tau_sup_l2: f64,
    /// ∫₀ᵀ∫(ψ̄² + |∇ψ̄|²)
    pub psi_h1: f64,
    /// τ · ∫₀ᵀ∫ψ̄²
    pub tau_psi_l2: f64,
    /// ∫₀ᵀ∫|∇ū|^{2α}
    pub grad_power: f64,
    /// ∫½(Δu_k)² + φ(∇u_k) per knot, for conservative g.
    pub energy: Option<Vec<f64>>,
}

impl EstimateReport {
    /// (name, value) for every scalar entry.
    pub fn entries(&self) -> [(&'static str, f64); 5] {
        [
            ("sup_h1", self.sup_h1),
            ("tau_sup_l2", self.tau_sup_l2),
            ("psi_h1", self.psi_h1),
            ("tau_psi_l2", self.tau_psi_l2),
            ("grad_power", self.grad_power),
        ]
    }
}

pub fn estimate_report(traj: &Trajectory, spec: &NonlinearitySpec) -> EstimateReport {
    let tau = traj.tau();
    let alpha = spec.growth_exponent();
    let (mut sup_h1, mut sup_l2) = (0.0f64, 0.0f64);
    let (mut psi_h1, mut psi_l2, mut grad_power) = (0.0, 0.0, 0.0);
    for (k, step) in traj.steps().iter().enumerate() {
        let grad = gradient(&step.u).magnitude();
        let l2 = lp_norm(&step.u, 2.0).powi(2);
        sup_l2 = sup_l2.max(l2);
        sup_h1 = sup_h1.max(l2 + lp_norm(&grad, 2.0).powi(2));
        if k == 0 {
            continue;
        }
        let p2 = lp_norm(&step.psi, 2.0).powi(2);
        psi_l2 += tau * p2;
        psi_h1 += tau * (p2 + lp_norm(&gradient(&step.psi), 2.0).powi(2));
        let dv = step.u.grid().cell_volume();
        grad_power += tau
            * grad
                .values()
                .iter()
                .map(|g| g.powf(2.0 * alpha))
                .sum::<f64>()
            * dv;
    }
    EstimateReport {
        sup_h1,
        tau_sup_l2: tau * sup_l2,
        psi_h1,
        tau_psi_l2: tau * psi_l2,
        grad_power,
        energy: traj.energies(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{run_ibvp, RotheConfig};
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn zero_solution_reports_zero() {
        let g = Grid::neumann(&[1.0, 1.0], &[8, 8]).unwrap();
        let spec = NonlinearitySpec::power(1.0).unwrap();
        let traj = run_ibvp(&g.zeros(), &spec, &RotheConfig::new(0.1, 3).unwrap()).unwrap();
        let r = estimate_report(&traj, &spec);
        assert!(r.entries().iter().all(|(_, v)| *v == 0.0));
        assert_eq!(r.energy, Some(vec![0.0; 4]));
    }
}
