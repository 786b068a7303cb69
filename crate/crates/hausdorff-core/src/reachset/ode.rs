//! Adaptive Runge–Kutta integration of the transition-matrix ODE
//! `Φ̇(s) = A(s) Φ(s)`, `Φ(τ) = I`, for time-varying systems.
//!
//! Dormand–Prince 5(4) with elementwise error control; the fourth-order
//! embedded solution provides the step-size estimate while the fifth-order
//! one propagates.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const ABS_TOL: f64 = 1e-10;
pub const REL_TOL: f64 = 1e-8;
const MAX_STEPS: usize = 1_000_000;

// Dormand-Prince coefficients
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
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
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
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

/// Integrate `Φ̇ = A(s) Φ` from `s = from` to `s = to` with `Φ(from) = I`.
pub fn integrate_transition(
    a_of: &dyn Fn(f64) -> DMatrix<f64>,
    from: f64,
    to: f64,
    dim: usize,
) -> Result<DMatrix<f64>> {
    if to < from {
        return Err(Error::ArgumentOrder(format!(
            "transition integration runs forward, got [{from}, {to}]"
        )));
    }
    let mut phi = DMatrix::identity(dim, dim);
    if to == from {
        return Ok(phi);
    }
    let mut s = from;
    let mut h = (to - from).min(0.1).max(1e-8);
    let mut steps = 0usize;
    while s < to {
        if steps >= MAX_STEPS {
            return Err(Error::Integration {
                node: steps,
                message: format!("step limit reached at s = {s}"),
            });
        }
        steps += 1;
        h = h.min(to - s);
        let mut stages: Vec<DMatrix<f64>> = Vec::with_capacity(7);
        for i in 0..7 {
            let mut yi = phi.clone();
            for (j, stage) in stages.iter().enumerate() {
                if A[i][j] != 0.0 {
                    yi += stage * (h * A[i][j]);
                }
            }
            stages.push(a_of(s + C[i] * h) * yi);
        }
        let mut y5 = phi.clone();
        let mut y4 = phi.clone();
        for i in 0..7 {
            if B5[i] != 0.0 {
                y5 += &stages[i] * (h * B5[i]);
            }
            if B4[i] != 0.0 {
                y4 += &stages[i] * (h * B4[i]);
            }
        }
        let scale = ABS_TOL + REL_TOL * y5.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = y5
            .iter()
            .zip(y4.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale;
        if err <= 1.0 {
            s += h;
            phi = y5;
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h < 1e-14 {
            return Err(Error::Integration {
                node: steps,
                message: format!("step size underflow at s = {s}"),
            });
        }
    }
    Ok(phi)
}
