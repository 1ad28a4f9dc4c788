//! Phase-derivative time-delays, `τ = (1/v) dα/dk` with `v = k`.

use crate::error::{Result, ScatterError};
use crate::scattering::{
    principal_phases, unwrap, PhaseCurve, PhaseLabel, ScatteringMatrix, WaveNumber,
};

/// Default k-step of the finite-difference stencil.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Stencil descriptor recorded alongside each delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifference {
    pub step: f64,
}

impl FiniteDifference {
    pub fn describe(&self) -> String {
        format!("central h={:e} + Richardson (5-point)", self.step)
    }
}

/// Transmission and reflection delays at one wave number. A delay is `None`
/// when its amplitude has no phase somewhere on the stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayRecord {
    pub k: WaveNumber,
    pub tau_t: Option<f64>,
    pub tau_l: Option<f64>,
    pub tau_r: Option<f64>,
    pub method: FiniteDifference,
}

/// Unwrapped phase curves of `t`, `l` and `r` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTriple {
    pub t: Option<PhaseCurve>,
    pub l: Option<PhaseCurve>,
    pub r: Option<PhaseCurve>,
}

/// `dα/dk` at a grid point: central differences at `h` and `2h` combined by
/// one Richardson step, i.e. the 5-point stencil.
pub fn phase_derivative(curve: &PhaseCurve, k: WaveNumber) -> Result<f64> {
    let grid = curve.grid();
    let kv = k.value();
    let idx = grid
        .iter()
        .position(|g| (g.value() - kv).abs() <= 1e-12 * kv.max(1.0))
        .filter(|&i| i >= 2 && i + 2 < grid.len())
        .ok_or(ScatterError::EdgeOfGrid { k: kv })?;

    let x = |j: usize| grid[j].value();
    let f = curve.values();
    let h = x(idx + 1) - x(idx);
    let uniform = [x(idx) - x(idx - 1), x(idx - 1) - x(idx - 2), x(idx + 2) - x(idx + 1)]
        .iter()
        .all(|&d| (d - h).abs() <= 1e-6 * h);
    if !uniform {
        return Err(ScatterError::NonUniformGrid { k: kv });
    }

    let d_h = (f[idx + 1] - f[idx - 1]) / (x(idx + 1) - x(idx - 1));
    let d_2h = (f[idx + 2] - f[idx - 2]) / (x(idx + 2) - x(idx - 2));
    Ok((4.0 * d_h - d_2h) / 3.0)
}

/// `τ = (1/v) dα/dk` for one curve.
pub fn time_delay(curve: &PhaseCurve, k: WaveNumber) -> Result<f64> {
    Ok(phase_derivative(curve, k)? / k.velocity())
}

/// Delays of all three amplitudes at `k`.
pub fn time_delays(curves: &PhaseTriple, k: WaveNumber, method: FiniteDifference) -> Result<DelayRecord> {
    let delay = |curve: &Option<PhaseCurve>, expected: PhaseLabel| -> Result<Option<f64>> {
        match curve {
            None => Ok(None),
            Some(c) if c.label() != expected => {
                Err(ScatterError::WrongCurve { expected, found: c.label() })
            }
            Some(c) => time_delay(c, k).map(Some),
        }
    };
    Ok(DelayRecord {
        k,
        tau_t: delay(&curves.t, PhaseLabel::T)?,
        tau_l: delay(&curves.l, PhaseLabel::L)?,
        tau_r: delay(&curves.r, PhaseLabel::R)?,
        method,
    })
}

/// The five stencil points `k + j·step`, `j = -2..=2`.
pub fn stencil(k: WaveNumber, step: f64) -> Result<Vec<WaveNumber>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(ScatterError::InvalidArgument(format!("finite-difference step must be positive, got {step}")));
    }
    (-2..=2).map(|j| WaveNumber::new(k.value() + j as f64 * step)).collect()
}

/// Samples `system` on the stencil around `k` and unwraps each phase.
pub fn sample_phase_curves<F>(system: F, k: WaveNumber, step: f64) -> Result<PhaseTriple>
where
    F: Fn(WaveNumber) -> Result<ScatteringMatrix>,
{
    let grid = stencil(k, step)?;
    let phases = grid
        .iter()
        .map(|&kk| system(kk).map(|s| principal_phases(&s)))
        .collect::<Result<Vec<_>>>()?;
    let curve = |label: PhaseLabel| -> Result<Option<PhaseCurve>> {
        let raw: Option<Vec<(f64, f64)>> = grid
            .iter()
            .zip(&phases)
            .map(|(kk, p)| p.get(label).map(|v| (kk.value(), v)))
            .collect();
        raw.map(|raw| unwrap(label, &raw)).transpose()
    };
    Ok(PhaseTriple {
        t: curve(PhaseLabel::T)?,
        l: curve(PhaseLabel::L)?,
        r: curve(PhaseLabel::R)?,
    })
}

/// Samples and differentiates in one call.
pub fn delays_at<F>(system: F, k: WaveNumber, step: f64) -> Result<DelayRecord>
where
    F: Fn(WaveNumber) -> Result<ScatteringMatrix>,
{
    let curves = sample_phase_curves(system, k, step)?;
    time_delays(&curves, k, FiniteDifference { step })
}
