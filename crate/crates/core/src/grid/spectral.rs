use std::f64::consts::PI;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Boundary, Grid, ScalarField};

pub(super) enum AxisPlan {
    Fourier {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    },
    Trig(Arc<dyn TransformType2And3<f64>>),
}

pub(super) struct Plans(Vec<AxisPlan>);

impl Plans {
    pub(super) fn new(points: &[usize], boundary: Boundary) -> Self {
        match boundary {
            Boundary::Periodic => {
                let mut planner = FftPlanner::new();
                Plans(
                    points
                        .iter()
                        .map(|&n| AxisPlan::Fourier {
                            forward: planner.plan_fft_forward(n),
                            inverse: planner.plan_fft_inverse(n),
                        })
                        .collect(),
                )
            }
            Boundary::NeumannBox => {
                let mut planner = DctPlanner::new();
                Plans(
                    points
                        .iter()
                        .map(|&n| AxisPlan::Trig(planner.plan_dct2(n)))
                        .collect(),
                )
            }
        }
    }
}

/// Signed Fourier index of position `k` in an FFT of length `n`.
fn signed_index(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// −Δ eigenvalues along one axis by coefficient index.
pub(super) fn axis_eigenvalues(grid: &Grid, axis: usize, odd: bool) -> Vec<f64> {
    let n = grid.points()[axis];
    let l = grid.extents()[axis];
    match grid.boundary() {
        Boundary::Periodic => (0..n)
            .map(|k| (2.0 * PI * signed_index(k, n) / l).powi(2))
            .collect(),
        Boundary::NeumannBox => (0..n)
            .map(|k| {
                // Sine storage keeps mode n at index 0.
                let mode = if odd && k == 0 { n } else { k };
                (PI * mode as f64 / l).powi(2)
            })
            .collect(),
    }
}

/// Multipliers of ∂/∂x_axis by coefficient index along that axis.
fn axis_derivative(grid: &Grid, axis: usize, odd: bool) -> Vec<Complex64> {
    let n = grid.points()[axis];
    let l = grid.extents()[axis];
    match grid.boundary() {
        Boundary::Periodic => (0..n)
            .map(|k| {
                // The Nyquist mode has no real-valued derivative.
                if n.is_multiple_of(2) && k == n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, 2.0 * PI * signed_index(k, n) / l)
                }
            })
            .collect(),
        Boundary::NeumannBox => (0..n)
            .map(|k| {
                let kappa = PI * k as f64 / l;
                // cos → −κ sin and sin → κ cos; index 0 maps to a mode the grid cannot hold.
                let m = if k == 0 {
                    0.0
                } else if odd {
                    kappa
                } else {
                    -kappa
                };
                Complex64::new(m, 0.0)
            })
            .collect(),
    }
}

/// Applies `f` to every line of `data` along `axis` (row-major, last axis fastest).
fn for_each_line<T: Copy + Default>(
    data: &mut [T],
    shape: &[usize],
    axis: usize,
    mut f: impl FnMut(&mut [T]),
) {
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    if stride == 1 {
        for line in data.chunks_exact_mut(n) {
            f(line);
        }
        return;
    }
    let mut buf = vec![T::default(); n];
    for o in 0..outer {
        for i in 0..stride {
            let base = o * n * stride + i;
            for j in 0..n {
                buf[j] = data[base + j * stride];
            }
            f(&mut buf);
            for j in 0..n {
                data[base + j * stride] = buf[j];
            }
        }
    }
}

/// Expansion coefficients of a field in the grid's natural basis.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Grid,
    parity: u8,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn forward(field: &ScalarField) -> Self {
        let grid = field.grid().clone();
        let parity = field.parity();
        let shape = grid.points().to_vec();
        let mut coeffs: Vec<Complex64> = field
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        for axis in 0..grid.dims() {
            let n = shape[axis];
            match &grid.plans().0[axis] {
                AxisPlan::Fourier { forward, .. } => {
                    let scale = 1.0 / n as f64;
                    for_each_line(&mut coeffs, &shape, axis, |line| {
                        forward.process(line);
                        line.iter_mut().for_each(|c| *c *= scale);
                    });
                }
                AxisPlan::Trig(plan) => {
                    let odd = parity & (1 << axis) != 0;
                    let mut re = vec![0.0; n];
                    for_each_line(&mut coeffs, &shape, axis, |line| {
                        re.iter_mut().zip(line.iter()).for_each(|(r, c)| *r = c.re);
                        trig_forward(plan.as_ref(), &mut re, odd);
                        line.iter_mut()
                            .zip(re.iter())
                            .for_each(|(c, r)| *c = Complex64::new(*r, 0.0));
                    });
                }
            }
        }
        Spectrum {
            grid,
            parity,
            coeffs,
        }
    }

    pub fn inverse(&self) -> ScalarField {
        let shape = self.grid.points().to_vec();
        let mut data = self.coeffs.clone();
        for axis in 0..self.grid.dims() {
            let n = shape[axis];
            match &self.grid.plans().0[axis] {
                AxisPlan::Fourier { inverse, .. } => {
                    for_each_line(&mut data, &shape, axis, |line| inverse.process(line));
                }
                AxisPlan::Trig(plan) => {
                    let odd = self.parity & (1 << axis) != 0;
                    let mut re = vec![0.0; n];
                    for_each_line(&mut data, &shape, axis, |line| {
                        re.iter_mut().zip(line.iter()).for_each(|(r, c)| *r = c.re);
                        trig_inverse(plan.as_ref(), &mut re, odd);
                        line.iter_mut()
                            .zip(re.iter())
                            .for_each(|(c, r)| *c = Complex64::new(*r, 0.0));
                    });
                }
            }
        }
        let values = data.into_iter().map(|c| c.re).collect();
        ScalarField::from_parts(self.grid.clone(), values, self.parity)
    }

    /// Builds a spectrum from coefficients laid out like the grid's values.
    pub fn from_coeffs(grid: &Grid, parity: u8, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(
            coeffs.len(),
            grid.len(),
            "coefficient count must match the grid"
        );
        let parity = if grid.boundary() == Boundary::Periodic {
            0
        } else {
            parity
        };
        Spectrum {
            grid: grid.clone(),
            parity,
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn zeros_like(&self) -> Self {
        Spectrum {
            grid: self.grid.clone(),
            parity: self.parity,
            coeffs: vec![Complex64::default(); self.coeffs.len()],
        }
    }

    /// −Δ eigenvalue of every coefficient.
    pub fn eigenvalues(&self) -> &[f64] {
        self.grid.laplacian_eigenvalues(self.parity)
    }

    /// Multiplies each coefficient by `m(λ)`, λ the −Δ eigenvalue of its mode.
    pub fn map_eigen(&mut self, m: impl Fn(f64) -> f64) {
        let lambda = self.grid.laplacian_eigenvalues(self.parity);
        self.coeffs
            .iter_mut()
            .zip(lambda)
            .for_each(|(c, &l)| *c *= m(l));
    }

    /// Spectrum of ∂f/∂x_axis.
    pub fn derivative(&self, axis: usize) -> Self {
        let odd = self.parity & (1 << axis) != 0;
        let mult = axis_derivative(&self.grid, axis, odd);
        let mut out = self.clone();
        let parity = match self.grid.boundary() {
            Boundary::Periodic => 0,
            Boundary::NeumannBox => self.parity ^ (1 << axis),
        };
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            *c *= mult[self.grid.multi_index(i)[axis]];
        }
        out.parity = parity;
        out
    }

    /// Σ w_k |c_k|² |Ω|, equal to the grid L² norm squared of the inverse.
    pub fn l2_squared(&self) -> f64 {
        let weights: Vec<Vec<f64>> = (0..self.grid.dims())
            .map(|a| {
                let n = self.grid.points()[a];
                match self.grid.boundary() {
                    Boundary::Periodic => vec![1.0; n],
                    Boundary::NeumannBox => {
                        (0..n).map(|k| if k == 0 { 1.0 } else { 0.5 }).collect()
                    }
                }
            })
            .collect();
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let idx = self.grid.multi_index(i);
                let w: f64 = (0..self.grid.dims()).map(|a| weights[a][idx[a]]).product();
                w * c.norm_sqr()
            })
            .sum();
        sum * self.grid.volume()
    }

    pub(crate) fn add_assign(&mut self, other: &Spectrum) {
        debug_assert_eq!(self.parity, other.parity);
        self.coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .for_each(|(a, b)| *a += b);
    }
}

fn trig_forward(plan: &dyn TransformType2And3<f64>, x: &mut [f64], odd: bool) {
    let n = x.len() as f64;
    if odd {
        plan.process_dst2(x);
        x.rotate_right(1);
        x[0] /= n;
        x[1..].iter_mut().for_each(|v| *v *= 2.0 / n);
    } else {
        plan.process_dct2(x);
        x[0] /= n;
        x[1..].iter_mut().for_each(|v| *v *= 2.0 / n);
    }
}

fn trig_inverse(plan: &dyn TransformType2And3<f64>, x: &mut [f64], odd: bool) {
    if odd {
        x[0] *= 2.0;
        x.rotate_left(1);
        plan.process_dst3(x);
    } else {
        x[0] *= 2.0;
        plan.process_dct3(x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumann_modes_land_on_their_index() {
        let g = Grid::neumann(&[2.0], &[16]).unwrap();
        let l = 2.0;
        let f = g.sample(|x| 3.0 + 0.5 * (3.0 * PI * x[0] / l).cos());
        let s = Spectrum::forward(&f);
        assert!((s.coeffs()[0].re - 3.0).abs() < 1e-14);
        assert!((s.coeffs()[3].re - 0.5).abs() < 1e-14);
        let odd = ScalarField::from_parts(
            g.clone(),
            g.sample(|x| (5.0 * PI * x[0] / l).sin() - 2.0 * (16.0 * PI * x[0] / l).sin())
                .values()
                .to_vec(),
            1,
        );
        let s = Spectrum::forward(&odd);
        assert!((s.coeffs()[5].re - 1.0).abs() < 1e-14);
        assert!((s.coeffs()[0].re + 2.0).abs() < 1e-13);
        let back = s.inverse();
        for (a, b) in back.values().iter().zip(odd.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn periodic_round_trip_in_three_dimensions() {
        let g = Grid::periodic(&[1.0, 2.0, 3.0], &[8, 10, 12]).unwrap();
        let f = g.sample(|x| (x[0] * 7.0).sin() + x[1] * x[2]);
        let back = Spectrum::forward(&f).inverse();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
