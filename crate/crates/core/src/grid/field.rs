use std::ops::{Add, Mul, Sub};

use super::Grid;
use crate::error::{Error, Result};

/// Values of a real function at the grid points.
///
/// `parity` matters on Neumann boxes only: bit `a` set means the field is
/// expanded in sines along axis `a` (as ∂u/∂x_a is for a cosine field u).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    parity: u8,
}

impl ScalarField {
    /// Checked constructor: length must match the grid and values must be finite.
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        Self::with_parity(grid, values, 0)
    }

    pub fn with_parity(grid: &Grid, values: Vec<f64>, parity: u8) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "field has {} values, grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "field value at index {i} is not finite"
            )));
        }
        if parity >> grid.dims() != 0 {
            return Err(Error::invalid(format!(
                "parity mask {parity:#b} has bits beyond the grid dimension"
            )));
        }
        Ok(Self::from_parts(grid.clone(), values, parity))
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>, parity: u8) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField {
            grid,
            values,
            parity,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Pointwise image under `f`, keeping the parity.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
            self.parity,
        )
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_parts(self.grid.clone(), values, self.parity)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    /// Riemann sum ∫ f dx.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Max |f|.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scaled(rhs)
    }
}

/// N scalar components on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::invalid("vector field needs components"))?;
        if components.len() != first.grid().dims() {
            return Err(Error::invalid(format!(
                "vector field on a {}-d grid needs {} components, got {}",
                first.grid().dims(),
                first.grid().dims(),
                components.len()
            )));
        }
        if components.iter().any(|c| c.grid() != first.grid()) {
            return Err(Error::invalid("vector components live on different grids"));
        }
        Ok(VectorField { components })
    }

    pub(crate) fn from_components(components: Vec<ScalarField>) -> Self {
        VectorField { components }
    }

    /// The zero field whose component `i` has the parity of ∂/∂x_i of an even field.
    pub fn zeros(grid: &Grid) -> Self {
        let components = (0..grid.dims())
            .map(|i| {
                ScalarField::from_parts(
                    grid.clone(),
                    vec![0.0; grid.len()],
                    gradient_parity(grid, i),
                )
            })
            .collect();
        VectorField { components }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    /// The vector at flat grid index `i`.
    pub fn at(&self, i: usize, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.values()[i];
        }
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let n = self.grid().len();
        let values = (0..n)
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.values()[i].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        ScalarField::from_parts(self.grid().clone(), values, 0)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitude().max_abs()
    }

    pub fn zip_with(&self, other: &VectorField, f: impl Fn(f64, f64) -> f64 + Copy) -> Self {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.zip_with(b, f))
                .collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        VectorField {
            components: self.components.iter().map(|a| a.scaled(c)).collect(),
        }
    }
}

pub(crate) fn gradient_parity(grid: &Grid, axis: usize) -> u8 {
    match grid.boundary() {
        super::Boundary::Periodic => 0,
        super::Boundary::NeumannBox => 1 << axis,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checked_construction() {
        let g = Grid::periodic(&[1.0], &[8]).unwrap();
        assert!(ScalarField::new(&g, vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(ScalarField::new(&g, v).is_err());
        assert!(ScalarField::with_parity(&g, vec![0.0; 8], 2).is_err());
        let f = ScalarField::new(&g, vec![1.0; 8]).unwrap();
        assert!((f.integral() - 1.0).abs() < 1e-15);
        assert_eq!((&f + &f).values()[0], 2.0);
    }

    #[test]
    fn vector_shape_checks() {
        let g = Grid::periodic(&[1.0, 1.0], &[8, 8]).unwrap();
        assert!(VectorField::new(vec![g.zeros()]).is_err());
        let v = VectorField::new(vec![g.constant(3.0), g.constant(4.0)]).unwrap();
        assert_eq!(v.max_magnitude(), 5.0);
    }
}
