//! Semi-implicit time discretization of the Neumann problem.
//!
//! Each step solves the coupled pair
//! −Δψ + τψ − div g(∇u) = −(u − v)/τ, −Δu + τu = ψ
//! by eliminating ψ and iterating on the nonlinear right-hand side.

mod ledger;
mod regime;

use rustfft::num_complex::Complex64;
use serde::Serialize;

pub use ledger::{estimate_report, EstimateReport};
pub use regime::{
    alpha_classify, gronwall_horizon, gronwall_sigma, initial_size, HorizonOptions, Regime,
};

use crate::error::{Error, Result};
use crate::grid::{
    dissipated_energy, divergence_spectrum, gradient_of_spectrum, ScalarField, Spectrum,
};
use crate::nonlinearity::NonlinearitySpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotheConfig {
    /// Final time T.
    pub horizon: f64,
    /// Number of steps j; τ = T/j.
    pub steps: usize,
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    /// Initial damping ω ∈ (0, 1]; halved whenever the inner residual grows, never below 0.25.
    pub damping: f64,
    /// Runs α outside every regime when set; the trajectory is marked exploratory.
    pub allow_unsupported: bool,
    /// (c₁, c₂) of the a priori inequality; when present, local-regime runs
    /// must end before the Gronwall horizon.
    pub gronwall: Option<(f64, f64)>,
    pub horizon_options: HorizonOptions,
}

impl RotheConfig {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        let cfg = RotheConfig {
            horizon,
            steps,
            inner_tol: 1e-10,
            inner_max_iter: 200,
            damping: 1.0,
            allow_unsupported: false,
            gronwall: None,
            horizon_options: HorizonOptions::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.steps == 0 {
            return Err(Error::invalid("steps must be positive"));
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::invalid(format!(
                "inner tolerance must be positive, got {}",
                self.inner_tol
            )));
        }
        if self.inner_max_iter == 0 {
            return Err(Error::invalid("inner iteration cap must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.horizon / self.steps as f64
    }
}

const DAMPING_FLOOR: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct RotheStep {
    pub index: usize,
    pub u: ScalarField,
    pub psi: ScalarField,
    pub iterations: usize,
    pub residual: f64,
}

fn relative_change(new: &[Complex64], old: &[Complex64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in new.iter().zip(old) {
        num += (a - b).norm_sqr();
        den += a.norm_sqr();
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

/// ψ = (−Δ + τ)u from a spectrum of u.
fn psi_of(spec: &Spectrum, tau: f64) -> ScalarField {
    let mut s = spec.clone();
    s.map_eigen(|l| l + tau);
    s.inverse()
}

/// One step from `v` with step size `tau`: the solution of
/// ((−Δ + τ)² + 1/τ)u = v/τ + div g(∇u) and ψ = (−Δ + τ)u.
pub fn rothe_step(
    v: &ScalarField,
    spec: &NonlinearitySpec,
    config: &RotheConfig,
    index: usize,
) -> Result<RotheStep> {
    config.validate()?;
    if !v.is_finite() {
        return Err(Error::NonFinite {
            step: index.saturating_sub(1),
        });
    }
    let tau = config.tau();
    let solve = |rhs: &mut Spectrum| rhs.map_eigen(|l| 1.0 / ((l + tau).powi(2) + 1.0 / tau));
    let mut base = Spectrum::forward(v);
    base.coeffs_mut().iter_mut().for_each(|c| *c /= tau);

    let mut u = base.clone();
    solve(&mut u);
    if spec.is_zero() {
        let psi = psi_of(&u, tau);
        return Ok(RotheStep {
            index,
            u: u.inverse(),
            psi,
            iterations: 1,
            residual: 0.0,
        });
    }

    let mut omega = config.damping;
    let mut last = f64::INFINITY;
    for iter in 1..=config.inner_max_iter {
        let flux = spec.apply(&gradient_of_spectrum(&u));
        let div = divergence_spectrum(&flux);
        let mut next = base.clone();
        next.add_assign(&div);
        solve(&mut next);
        let residual = relative_change(next.coeffs(), u.coeffs());
        if !residual.is_finite() {
            return Err(Error::NonFinite { step: index });
        }
        if residual < config.inner_tol {
            let psi = psi_of(&next, tau);
            return Ok(RotheStep {
                index,
                u: next.inverse(),
                psi,
                iterations: iter,
                residual,
            });
        }
        if residual > last {
            omega = (omega * 0.5).max(DAMPING_FLOOR.min(config.damping));
        }
        last = residual;
        u.coeffs_mut()
            .iter_mut()
            .zip(next.coeffs())
            .for_each(|(a, b)| *a = *a * (1.0 - omega) + b * omega);
        if iter == config.inner_max_iter {
            return Err(Error::InnerNonConvergence {
                iterations: iter,
                residual,
            });
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// How a run was admitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunLabel {
    Global,
    /// Local regime, bounded by the Gronwall horizon when constants are given.
    Local,
    /// Outside the classified regimes but g = ∇φ, so the energy bounds the run.
    Conservative,
    /// Outside every regime, run on explicit request.
    Exploratory,
}

/// Completed (or partially completed) sequence of steps; `steps[0]` holds u₀.
#[derive(Debug, Clone)]
pub struct Trajectory {
    tau: f64,
    steps: Vec<RotheStep>,
    label: RunLabel,
    alpha: f64,
}

impl Trajectory {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> &[RotheStep] {
        &self.steps
    }

    pub fn label(&self) -> RunLabel {
        self.label
    }

    pub fn is_exploratory(&self) -> bool {
        self.label == RunLabel::Exploratory
    }

    /// Growth exponent the run was classified with.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of completed steps (u₀ excluded).
    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.tau
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.len())
    }

    pub fn endpoint(&self) -> &ScalarField {
        &self.steps.last().expect("trajectory holds u0").u
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        if !(t >= 0.0 && t <= self.end_time() * (1.0 + 1e-12)) {
            return Err(Error::invalid(format!(
                "t = {t} is outside [0, {}]",
                self.end_time()
            )));
        }
        let s = t / self.tau;
        let k = (s.ceil() as usize).clamp(1, self.len().max(1));
        Ok((k, s - (k - 1) as f64))
    }

    /// ũ(t): linear between knots.
    pub fn piecewise_linear(&self, t: f64) -> Result<ScalarField> {
        if self.is_empty() {
            return Ok(self.steps[0].u.clone());
        }
        let (k, w) = self.locate(t)?;
        let w = w.clamp(0.0, 1.0);
        Ok(self.steps[k - 1]
            .u
            .zip_with(&self.steps[k].u, |a, b| a + w * (b - a)))
    }

    /// ū(t) = u_k on (t_{k−1}, t_k], ū(0) = u₀.
    pub fn piecewise_constant(&self, t: f64) -> Result<&ScalarField> {
        if t == 0.0 || self.is_empty() {
            self.locate(t)?;
            return Ok(&self.steps[0].u);
        }
        let (k, _) = self.locate(t)?;
        Ok(&self.steps[k].u)
    }

    /// ∫ ½(Δu_k)² + φ(∇u_k) for every knot; `None` unless g is conservative.
    pub fn energies(&self, spec: &NonlinearitySpec) -> Option<Vec<f64>> {
        if !spec.is_conservative() {
            return None;
        }
        self.steps
            .iter()
            .map(|s| dissipated_energy(&s.u, spec).ok())
            .collect()
    }
}

/// Decides whether a run may start and how it is labeled.
pub fn admit_run(
    u0: &ScalarField,
    spec: &NonlinearitySpec,
    config: &RotheConfig,
) -> Result<RunLabel> {
    let dims = u0.grid().dims();
    let alpha = spec.growth_exponent();
    if spec.is_zero() {
        return Ok(RunLabel::Global);
    }
    match alpha_classify(dims, alpha) {
        Regime::Global => Ok(RunLabel::Global),
        Regime::Local => {
            if let Some((c1, c2)) = config.gronwall {
                let horizon = gronwall_horizon(u0, alpha, c1, c2, &config.horizon_options)?;
                if config.horizon >= horizon {
                    return Err(Error::BlowUpHorizon {
                        requested: config.horizon,
                        horizon,
                    });
                }
            }
            Ok(RunLabel::Local)
        }
        Regime::Unsupported if spec.is_conservative() => Ok(RunLabel::Conservative),
        Regime::Unsupported if config.allow_unsupported => Ok(RunLabel::Exploratory),
        Regime::Unsupported => Err(Error::UnsupportedRegime {
            dimension: dims,
            alpha,
        }),
    }
}

/// Chains j steps. On a step failure the trajectory so far is returned
/// together with the error.
pub fn run_ibvp_partial(
    u0: &ScalarField,
    spec: &NonlinearitySpec,
    config: &RotheConfig,
) -> Result<(Trajectory, Option<Error>)> {
    config.validate()?;
    if !u0.is_finite() {
        return Err(Error::invalid("initial data has non-finite values"));
    }
    let label = admit_run(u0, spec, config)?;
    let tau = config.tau();
    let psi0 = psi_of(&Spectrum::forward(u0), tau);
    let mut steps = vec![RotheStep {
        index: 0,
        u: u0.clone(),
        psi: psi0,
        iterations: 0,
        residual: 0.0,
    }];
    let mut failure = None;
    for k in 1..=config.steps {
        match rothe_step(&steps[k - 1].u, spec, config, k) {
            Ok(s) if s.u.is_finite() && s.psi.is_finite() => steps.push(s),
            Ok(_) => {
                failure = Some(Error::NonFinite { step: k });
                break;
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    Ok((
        Trajectory {
            tau,
            steps,
            label,
            alpha: spec.growth_exponent(),
        },
        failure,
    ))
}

pub fn run_ibvp(
    u0: &ScalarField,
    spec: &NonlinearitySpec,
    config: &RotheConfig,
) -> Result<Trajectory> {
    match run_ibvp_partial(u0, spec, config)? {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}
