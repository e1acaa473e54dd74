mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use thinfilm::grid::{apply_multiplier, dissipated_energy, Grid};
use thinfilm::mild::{
    duhamel_increment, heat_propagate, heat_propagate_direct, heat_propagate_periodic, picard_solve, DuhamelRule,
    HHistory, PicardConfig,
};
use thinfilm::nonlinearity::NonlinearitySpec;
use thinfilm::rothe::{run_ibvp, run_ibvp_partial, RotheConfig, RunLabel};
use thinfilm::Error;

use common::relative_l2;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mass_law_holds_for_any_small_data(
        a in -0.2..0.2f64, b in -0.2..0.2f64, mean in -1.0..1.0f64, steps in 4usize..24, c in 0.0..2.0f64,
    ) {
        let g = Grid::neumann(&[1.0, 1.0], &[12, 12]).unwrap();
        let u0 = g.sample(|x| mean + a * (PI * x[0]).cos() + b * (PI * x[0]).cos() * (2.0 * PI * x[1]).cos());
        let cfg = RotheConfig::new(0.01, steps).unwrap();
        let tau = cfg.tau();
        let traj = run_ibvp(&u0, &NonlinearitySpec::cubic(c).unwrap(), &cfg).unwrap();
        for w in traj.steps().windows(2) {
            let lhs = (1.0 + tau.powi(3)) * w[1].u.integral();
            let rhs = w[0].u.integral();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-12));
        }
    }

    #[test]
    fn energy_never_increases(a in -0.3..0.3f64, b in -0.3..0.3f64, steps in 8usize..40) {
        let g = Grid::neumann(&[1.0, 1.0], &[12, 12]).unwrap();
        let u0 = g.sample(|x| a * (PI * x[0]).cos() * (PI * x[1]).cos() + b * (2.0 * PI * x[1]).cos());
        let spec = NonlinearitySpec::cubic(1.0).unwrap();
        let traj = run_ibvp(&u0, &spec, &RotheConfig::new(0.02, steps).unwrap()).unwrap();
        let e: Vec<f64> = traj.steps().iter().map(|s| dissipated_energy(&s.u, &spec).unwrap()).collect();
        for w in e.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs());
        }
    }
}

#[test]
fn linear_rothe_matches_the_discrete_semigroup() {
    // Each step multiplies a mode with eigenvalue λ by 1/(1 + τ(λ + τ)²).
    let g = Grid::neumann(&[1.0, 2.0], &[16, 16]).unwrap();
    let u0 = g.sample(|x| 1.0 + (PI * x[0]).cos() + 0.3 * (1.5 * PI * x[1]).cos());
    let cfg = RotheConfig::new(0.02, 10).unwrap();
    let tau = cfg.tau();
    let traj = run_ibvp(&u0, &NonlinearitySpec::zero(), &cfg).unwrap();
    let exact = apply_multiplier(&u0, |l| (1.0 + tau * (l + tau).powi(2)).powi(-10));
    assert!(relative_l2(traj.endpoint(), &exact) < 1e-13);
    assert_eq!(traj.label(), RunLabel::Global);
}

#[test]
fn blow_up_horizon_is_enforced() {
    let g = Grid::neumann(&[1.0, 1.0], &[12, 12]).unwrap();
    let u0 = g.sample(|x| 0.5 * (PI * x[0]).cos());
    let mut cfg = RotheConfig::new(10.0, 8).unwrap();
    cfg.gronwall = Some((1.0, 1.0));
    let err = run_ibvp(&u0, &NonlinearitySpec::power(2.5).unwrap(), &cfg).unwrap_err();
    assert!(matches!(err, Error::BlowUpHorizon { .. }), "{err}");
}

#[test]
fn failed_inner_iteration_keeps_the_partial_trajectory() {
    let g = Grid::neumann(&[1.0, 1.0], &[12, 12]).unwrap();
    let u0 = g.sample(|x| 0.5 * (PI * x[0]).cos());
    let mut cfg = RotheConfig::new(0.01, 4).unwrap();
    cfg.inner_max_iter = 1;
    cfg.inner_tol = 1e-15;
    let (traj, err) = run_ibvp_partial(&u0, &NonlinearitySpec::cubic(1.0).unwrap(), &cfg).unwrap();
    assert!(matches!(err, Some(Error::InnerNonConvergence { .. })));
    assert_eq!(traj.steps().len(), 1);
    assert_eq!(traj.endpoint(), &u0);
}

#[test]
fn spectral_and_direct_propagation_agree() {
    let l = 60.0;
    let g = Grid::periodic(&[l], &[256]).unwrap();
    let u0 = g.sample(|x| (-(x[0] - 30.0).powi(2) / 4.0).exp());
    let t = 0.5;
    let spectral = heat_propagate(&u0, t).unwrap();
    let direct = heat_propagate_direct(&u0, t).unwrap();
    assert!(relative_l2(&spectral, &direct) < 1e-4);
    assert_eq!(heat_propagate_periodic(&u0, 0.0), u0);
}

#[test]
fn duhamel_rules_agree_on_a_varying_flux() {
    let l = 2.0 * PI;
    let g = Grid::periodic(&[l, l], &[32, 32]).unwrap();
    let times: Vec<f64> = (0..=16).map(|i| 0.05 * i as f64 / 16.0).collect();
    let fields: Vec<_> = times
        .iter()
        .map(|&t| {
            let a = g.sample(|x| (1.0 + t) * x[0].sin() * x[1].cos());
            let b = g.sample(|x| (2.0 * x[1]).cos() * (1.0 - t));
            thinfilm::grid::VectorField::new(vec![a, b]).unwrap()
        })
        .collect();
    let hist = HHistory::new(times, &fields).unwrap();
    let exact = duhamel_increment(&hist, 0.05, DuhamelRule::ExponentialLinear).unwrap();
    let gauss = duhamel_increment(&hist, 0.05, DuhamelRule::Gauss { points: 64, tol: 1e-6 }).unwrap();
    assert!(relative_l2(&gauss, &exact) < 1e-6);
}

#[test]
fn picard_and_rothe_agree_on_symmetric_data() {
    // On Fourier modes the periodic and Neumann problems coincide, so the
    // two solvers can be compared on symmetric data.
    let l = 2.0 * PI;
    let gp = Grid::periodic(&[l], &[64]).unwrap();
    let gn = Grid::neumann(&[PI], &[32]).unwrap();
    let f = |x: &[f64]| 0.2 * x[0].cos() + 0.1 * (2.0 * x[0]).cos();
    let spec = NonlinearitySpec::cubic(1.0).unwrap();
    let t = 0.05;
    let mut cfg = PicardConfig::new(t).unwrap();
    cfg.periodic_data = true;
    let picard = picard_solve(&gp.sample(f), &spec, &cfg).unwrap();
    assert!(picard.converged);
    let rothe = run_ibvp(&gn.sample(f), &spec, &RotheConfig::new(t, 800).unwrap()).unwrap();
    // Periodic nodes are x_i = iL/n; Neumann cell centres are (i + ½)π/32.
    // Compare through the first cosine coefficient instead of pointwise.
    let c_mild: f64 = picard
        .endpoint()
        .values()
        .iter()
        .zip(gp.coords(0))
        .map(|(v, x)| v * x.cos())
        .sum::<f64>()
        / 32.0;
    let c_rothe: f64 = rothe
        .endpoint()
        .values()
        .iter()
        .zip(gn.coords(0))
        .map(|(v, x)| v * x.cos())
        .sum::<f64>()
        / 16.0;
    assert!((c_mild - c_rothe).abs() < 1e-3 * c_mild.abs(), "{c_mild} vs {c_rothe}");
}
