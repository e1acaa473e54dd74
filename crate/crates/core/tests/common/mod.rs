//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use thinfilm::grid::ScalarField;

/// Adaptive Dormand–Prince 5(4) integration of y′ = f(t, y) from t0 to t1.
/// Returns the solution at each of the requested `outputs` (ascending, within
/// [t0, t1]) or `None` once |y| exceeds `cap`.
pub fn dormand_prince(
    f: impl Fn(f64, f64) -> f64,
    t0: f64,
    y0: f64,
    outputs: &[f64],
    rtol: f64,
    atol: f64,
    cap: f64,
) -> Vec<Option<f64>> {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut out = Vec::with_capacity(outputs.len());
    let (mut t, mut y) = (t0, y0);
    let mut h = 1e-4 * (outputs.last().copied().unwrap_or(t0) - t0).max(1e-12);
    for &target in outputs {
        if y.abs() > cap || !y.is_finite() {
            out.push(None);
            continue;
        }
        while t < target {
            let step = h.min(target - t);
            let mut k = [0.0; 7];
            for s in 0..7 {
                let yi = y + step * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
                k[s] = f(t + C[s] * step, yi);
            }
            let y5 = y + step * (0..7).map(|j| B5[j] * k[j]).sum::<f64>();
            let y4 = y + step * (0..7).map(|j| B4[j] * k[j]).sum::<f64>();
            let err = (y5 - y4).abs() / (atol + rtol * y5.abs().max(y.abs()));
            if err <= 1.0 || step < 1e-14 {
                t += step;
                y = y5;
                if y.abs() > cap || !y.is_finite() {
                    break;
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = step * factor;
        }
        out.push((y.abs() <= cap && y.is_finite()).then_some(y));
    }
    out
}

/// Least-squares slope of y against x.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// ‖a − b‖₂ / ‖b‖₂ on the grid.
pub fn relative_l2(a: &ScalarField, b: &ScalarField) -> f64 {
    let num: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).powi(2))
        .sum();
    let den: f64 = b.values().iter().map(|y| y * y).sum();
    (num / den).sqrt()
}
