//! Tabulated f_N with Hermite interpolation, decay-envelope fit and CSV IO.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::profile::{eval_f, eval_f_jet, QuadratureSpec};
use crate::error::{Error, Result};

/// Fitted envelope |f_N(η)| ≤ K exp(−μ η^{4/3}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub k: f64,
    pub mu: f64,
}

impl Envelope {
    pub fn bound(&self, eta: f64) -> f64 {
        self.k * (-self.mu * eta.powf(4.0 / 3.0)).exp()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TableMeta {
    dimension: usize,
    eta_max: f64,
    resolution: usize,
    tolerance: f64,
    interpolation_order: usize,
    k: f64,
    mu: f64,
    quadrature: QuadratureSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    dimension: usize,
    eta_max: f64,
    spacing: f64,
    /// Rows of (η, f, f′, f″).
    samples: Vec<[f64; 4]>,
    interpolation_order: usize,
    quad: QuadratureSpec,
    envelope: Envelope,
}

/// Tabulates f_N on `resolution` uniform intervals of [0, eta_max] with
/// quintic Hermite interpolation.
pub fn build_kernel_table(
    dimension: usize,
    eta_max: f64,
    resolution: usize,
    quad: &QuadratureSpec,
) -> Result<KernelTable> {
    KernelTable::build(dimension, eta_max, resolution, 5, quad)
}

impl KernelTable {
    /// `interpolation_order` is 3 (cubic Hermite on f, f′) or 5 (quintic on f, f′, f″).
    pub fn build(
        dimension: usize,
        eta_max: f64,
        resolution: usize,
        interpolation_order: usize,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !(eta_max > 0.0 && eta_max.is_finite()) {
            return Err(Error::invalid(format!(
                "eta_max must be positive, got {eta_max}"
            )));
        }
        if resolution < 16 {
            return Err(Error::invalid(format!(
                "table resolution must be at least 16, got {resolution}"
            )));
        }
        if interpolation_order != 3 && interpolation_order != 5 {
            return Err(Error::invalid(format!(
                "interpolation order must be 3 or 5, got {interpolation_order}"
            )));
        }
        quad.validate()?;
        let spacing = eta_max / resolution as f64;
        let samples = (0..=resolution)
            .map(|i| {
                let eta = if i == resolution {
                    eta_max
                } else {
                    i as f64 * spacing
                };
                let jet = eval_f_jet(dimension, eta, quad)?;
                Ok([eta, jet[0], jet[1], jet[2]])
            })
            .collect::<Result<Vec<_>>>()?;
        let envelope = fit_envelope(&samples, 100.0 * quad.abs_tol);
        Ok(KernelTable {
            dimension,
            eta_max,
            spacing,
            samples,
            interpolation_order,
            quad: *quad,
            envelope,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn eta_max(&self) -> f64 {
        self.eta_max
    }

    pub fn samples(&self) -> &[[f64; 4]] {
        &self.samples
    }

    pub fn interpolation_order(&self) -> usize {
        self.interpolation_order
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    /// Interpolated f_N(η); zero beyond `eta_max`.
    pub fn interpolate(&self, eta: f64) -> f64 {
        if !(eta >= 0.0) || eta > self.eta_max {
            return 0.0;
        }
        let last = self.samples.len() - 2;
        let i = ((eta / self.spacing) as usize).min(last);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b[0] - a[0];
        let t = (eta - a[0]) / h;
        let (t2, t3) = (t * t, t * t * t);
        if self.interpolation_order == 3 {
            let h00 = 1.0 - 3.0 * t2 + 2.0 * t3;
            let h10 = t - 2.0 * t2 + t3;
            let h01 = 3.0 * t2 - 2.0 * t3;
            let h11 = t3 - t2;
            return a[1] * h00 + h * (a[2] * h10 + b[2] * h11) + b[1] * h01;
        }
        let (t4, t5) = (t3 * t, t3 * t2);
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let g0 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let g1 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let g2 = 0.5 * (t3 - 2.0 * t4 + t5);
        a[1] * h0
            + h * a[2] * h1
            + h * h * a[3] * h2
            + b[1] * g0
            + h * b[2] * g1
            + h * h * b[3] * g2
    }

    /// b_N(x, t) = α t^{−N/4} f_N(|x| / t^{1/4}) from the table.
    pub fn kernel_value(&self, alpha: f64, radius: f64, t: f64) -> f64 {
        let s = t.powf(0.25);
        alpha / s.powi(self.dimension as i32) * self.interpolate(radius / s)
    }

    /// Number of sign changes of f_N on [0, min(limit, eta_max)], ignoring
    /// samples below the quadrature noise floor.
    pub fn sign_changes(&self, limit: f64) -> usize {
        let floor = 100.0 * self.quad.abs_tol;
        let mut count = 0;
        let mut last_sign = 0.0;
        for row in self.samples.iter().take_while(|r| r[0] <= limit) {
            if row[1].abs() <= floor {
                continue;
            }
            let s = row[1].signum();
            if last_sign != 0.0 && s != last_sign {
                count += 1;
            }
            last_sign = s;
        }
        count
    }

    /// Largest |interp − eval_f| at the cell midpoints.
    pub fn midpoint_error(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for w in self.samples.windows(2) {
            let eta = 0.5 * (w[0][0] + w[1][0]);
            let exact = eval_f(self.dimension, eta, &self.quad)?;
            worst = worst.max((self.interpolate(eta) - exact).abs());
        }
        Ok(worst)
    }

    /// Writes the `eta,f,f1,f2` CSV and its JSON metadata sidecar.
    pub fn write(&self, csv_path: &Path, meta_path: &Path) -> Result<()> {
        let mut out = String::from("eta,f,f1,f2\n");
        for r in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r[0], r[1], r[2], r[3]
            ));
        }
        write_file(csv_path, out.as_bytes())?;
        let meta = TableMeta {
            dimension: self.dimension,
            eta_max: self.eta_max,
            resolution: self.samples.len() - 1,
            tolerance: self.quad.abs_tol,
            interpolation_order: self.interpolation_order,
            k: self.envelope.k,
            mu: self.envelope.mu,
            quadrature: self.quad,
        };
        let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        write_file(meta_path, json.as_bytes())
    }

    pub fn read(csv_path: &Path, meta_path: &Path) -> Result<Self> {
        let meta_text = fs::read_to_string(meta_path).map_err(|e| Error::io(meta_path, e))?;
        let meta: TableMeta = serde_json::from_str(&meta_text).map_err(|e| Error::Format {
            path: meta_path.into(),
            reason: e.to_string(),
        })?;
        let text = fs::read_to_string(csv_path).map_err(|e| Error::io(csv_path, e))?;
        let bad = |reason: String| Error::Format {
            path: csv_path.into(),
            reason,
        };
        let mut lines = text.lines();
        if lines.next() != Some("eta,f,f1,f2") {
            return Err(bad("missing header `eta,f,f1,f2`".into()));
        }
        let mut samples = Vec::new();
        for (no, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("line {}: {e}", no + 2)))?;
            if vals.len() != 4 {
                return Err(bad(format!("line {}: expected 4 columns", no + 2)));
            }
            samples.push([vals[0], vals[1], vals[2], vals[3]]);
        }
        if samples.len() != meta.resolution + 1 {
            return Err(bad(format!(
                "expected {} rows, found {}",
                meta.resolution + 1,
                samples.len()
            )));
        }
        if samples.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(bad("eta column is not strictly increasing".into()));
        }
        Ok(KernelTable {
            dimension: meta.dimension,
            eta_max: meta.eta_max,
            spacing: meta.eta_max / meta.resolution as f64,
            samples,
            interpolation_order: meta.interpolation_order,
            quad: meta.quadrature,
            envelope: Envelope {
                k: meta.k,
                mu: meta.mu,
            },
        })
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Least squares of ln|f| against η^{4/3} over interior local maxima of |f|
/// above `floor` gives μ; K is then the smallest constant bounding every sample.
fn fit_envelope(samples: &[[f64; 4]], floor: f64) -> Envelope {
    let peaks: Vec<(f64, f64)> = samples
        .windows(3)
        .filter(|w| {
            let m = w[1][1].abs();
            m > floor && m >= w[0][1].abs() && m >= w[2][1].abs()
        })
        .map(|w| (w[1][0].powf(4.0 / 3.0), w[1][1].abs().ln()))
        .collect();
    let mu = if peaks.len() >= 2 {
        let n = peaks.len() as f64;
        let mx = peaks.iter().map(|p| p.0).sum::<f64>() / n;
        let my = peaks.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = peaks.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = peaks.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (-sxy / sxx).max(0.0)
    } else {
        0.0
    };
    let k = samples
        .iter()
        .map(|r| r[1].abs() * (mu * r[0].powf(4.0 / 3.0)).exp())
        .fold(0.0, f64::max);
    Envelope { k, mu }
}
