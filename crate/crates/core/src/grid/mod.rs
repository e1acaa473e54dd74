//! Rectangular domains, sampled fields and spectral differential operators.
//!
//! Periodic grids sample nodes x_j = j h and expand in Fourier modes.
//! Neumann boxes sample cell centres x_j = (j + ½) h and expand even fields
//! in cosines (∂u/∂ν = 0 on the walls) and odd fields in sines, one parity
//! bit per axis.

mod energy;
mod field;
mod io;
mod ops;
mod spectral;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

pub use energy::{dissipated_energy, energy};
pub use field::{ScalarField, VectorField};
pub use io::{read_field_csv, read_field_raw, write_field_csv, write_field_raw};
pub use ops::{
    apply_multiplier, divergence, gradient, helmholtz_solve, laplacian, lp_norm, mean_value,
    partial_derivative, spectral_l2_squared, Magnitude,
};
pub(crate) use ops::{divergence_spectrum, gradient_of_spectrum};
pub use spectral::Spectrum;

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Periodic,
    NeumannBox,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Periodic => "periodic",
            Boundary::NeumannBox => "neumann-box",
        })
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "neumann-box" | "neumann" => Ok(Boundary::NeumannBox),
            other => Err(Error::invalid(format!(
                "unknown boundary `{other}` (periodic | neumann-box)"
            ))),
        }
    }
}

/// A uniform tensor grid. Cloning is cheap; clones share transform plans.
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

struct GridInner {
    extents: Vec<f64>,
    points: Vec<usize>,
    boundary: Boundary,
    plans: spectral::Plans,
    eigen: [OnceLock<Vec<f64>>; 8],
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("extents", &self.0.extents)
            .field("points", &self.0.points)
            .field("boundary", &self.0.boundary)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.extents == other.0.extents
                && self.0.points == other.0.points
                && self.0.boundary == other.0.boundary)
    }
}

impl Grid {
    pub fn new(extents: &[f64], points: &[usize], boundary: Boundary) -> Result<Self> {
        if extents.is_empty() || extents.len() > 3 {
            return Err(Error::invalid(format!(
                "grid dimension must be 1..=3, got {}",
                extents.len()
            )));
        }
        if extents.len() != points.len() {
            return Err(Error::invalid(
                "extents and points must have one entry per axis",
            ));
        }
        if let Some(e) = extents.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::invalid(format!(
                "extents must be positive and finite, got {e}"
            )));
        }
        if let Some(p) = points.iter().find(|p| **p < MIN_POINTS) {
            return Err(Error::invalid(format!(
                "need at least {MIN_POINTS} points per axis, got {p}"
            )));
        }
        Ok(Grid(Arc::new(GridInner {
            extents: extents.to_vec(),
            points: points.to_vec(),
            boundary,
            plans: spectral::Plans::new(points, boundary),
            eigen: Default::default(),
        })))
    }

    pub fn periodic(extents: &[f64], points: &[usize]) -> Result<Self> {
        Self::new(extents, points, Boundary::Periodic)
    }

    pub fn neumann(extents: &[f64], points: &[usize]) -> Result<Self> {
        Self::new(extents, points, Boundary::NeumannBox)
    }

    pub fn dims(&self) -> usize {
        self.0.extents.len()
    }

    pub fn extents(&self) -> &[f64] {
        &self.0.extents
    }

    pub fn points(&self) -> &[usize] {
        &self.0.points
    }

    pub fn boundary(&self) -> Boundary {
        self.0.boundary
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.0.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.0.extents[axis] / self.0.points[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.0.extents.iter().product()
    }

    /// Sample coordinates along one axis.
    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing(axis);
        let offset = match self.0.boundary {
            Boundary::Periodic => 0.0,
            Boundary::NeumannBox => 0.5,
        };
        (0..self.0.points[axis])
            .map(|j| (j as f64 + offset) * h)
            .collect()
    }

    /// Multi-index of a flat (row-major, last axis fastest) index.
    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in (0..self.dims()).rev() {
            idx[a] = flat % self.0.points[a];
            flat /= self.0.points[a];
        }
        idx
    }

    /// Samples `f(x)` at every grid point.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> ScalarField {
        let coords: Vec<Vec<f64>> = (0..self.dims()).map(|a| self.coords(a)).collect();
        let mut x = vec![0.0; self.dims()];
        let values = (0..self.len())
            .map(|i| {
                let idx = self.multi_index(i);
                for a in 0..self.dims() {
                    x[a] = coords[a][idx[a]];
                }
                f(&x)
            })
            .collect();
        ScalarField::from_parts(self.clone(), values, 0)
    }

    pub fn zeros(&self) -> ScalarField {
        ScalarField::from_parts(self.clone(), vec![0.0; self.len()], 0)
    }

    pub fn constant(&self, c: f64) -> ScalarField {
        ScalarField::from_parts(self.clone(), vec![c; self.len()], 0)
    }

    /// Eigenvalues λ ≥ 0 of −Δ for every coefficient index of a field with
    /// the given parity mask.
    pub fn laplacian_eigenvalues(&self, parity: u8) -> &[f64] {
        let parity = if self.boundary() == Boundary::Periodic {
            0
        } else {
            parity
        };
        self.0.eigen[parity as usize].get_or_init(|| {
            let per_axis: Vec<Vec<f64>> = (0..self.dims())
                .map(|a| spectral::axis_eigenvalues(self, a, parity & (1 << a) != 0))
                .collect();
            (0..self.len())
                .map(|i| {
                    let idx = self.multi_index(i);
                    (0..self.dims()).map(|a| per_axis[a][idx[a]]).sum()
                })
                .collect()
        })
    }

    fn plans(&self) -> &spectral::Plans {
        &self.0.plans
    }
}
