use crate::error::{Result, ScatterError};
use crate::scattering::{ScatteringMatrix, MODULUS_FLOOR};

use super::bloch_parameter;

/// Half-width of the window around `|z| = 1` where `U_n` is evaluated as a
/// polynomial instead of through its trigonometric or hyperbolic form.
pub const EDGE_WINDOW: f64 = 1e-8;

/// Chebyshev polynomial of the second kind, `U_n(z)`.
///
/// Inside the band `U_n(cos γ) = sin((n+1)γ)/sin γ`, outside it the
/// hyperbolic analogue with `z = ±cosh η`. Near `z = ±1` both forms are `0/0`,
/// so the three-term recurrence is used there; it reproduces
/// `U_n(1) = n + 1` and `U_n(-1) = (n + 1)(-1)^n` exactly.
pub fn chebyshev_u(n: usize, z: f64) -> f64 {
    let abs = z.abs();
    if (abs - 1.0).abs() <= EDGE_WINDOW {
        return recurrence(n, z);
    }
    let m = (n + 1) as f64;
    if abs < 1.0 {
        let gamma = z.acos();
        (m * gamma).sin() / gamma.sin()
    } else {
        let eta = abs.acosh();
        let magnitude = (m * eta).sinh() / eta.sinh();
        if z < 0.0 && n % 2 == 1 {
            -magnitude
        } else {
            magnitude
        }
    }
}

fn recurrence(n: usize, z: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * z);
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let next = 2.0 * z * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `|t^(N)|² = 1 / (1 + U²_{N-1}(z) (1 - |t|²)/|t|²)` from the single cell alone.
pub fn chebyshev_transmission(cell: &ScatteringMatrix, a: f64, cells: usize) -> Result<f64> {
    if cells == 0 {
        return Err(ScatterError::InvalidArgument("cell count must be at least 1".into()));
    }
    let tt = cell.t.norm_sqr();
    if !(cell.t.norm() >= MODULUS_FLOOR) {
        return Err(ScatterError::UndefinedPhase {
            label: crate::scattering::PhaseLabel::T,
            modulus: cell.t.norm(),
        });
    }
    let z = bloch_parameter(cell, a)?;
    let u = chebyshev_u(cells - 1, z);
    Ok(1.0 / (1.0 + u * u * (1.0 - tt) / tt))
}
