//! Large-`N` phase asymptotics inside a gap.
//!
//! When `t^(N) → 0` the left reflection amplitude settles on a pure phase,
//! while `α_r^(N) = α - 2Nka + o(1)` and `α_t^(N) = β - Nka + o(1)`. The fit
//! removes the linear drift and estimates the constants over the upper half of
//! the chain lengths.

use crate::analysis::bands::{band_classify, BandClass, DEFAULT_EDGE_TOL};
use crate::chain::ChainState;
use crate::error::{Result, ScatterError};
use crate::scattering::{distance_to_half_pi_branch, principal_phase, wrap_phase, PhaseLabel, MODULUS_FLOOR};

/// Chains shorter than this are refused.
pub const MIN_FIT_CELLS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticFit {
    /// Constant in `α_r^(N) = α - 2Nka`.
    pub alpha: f64,
    /// Constant in `α_t^(N) = β - Nka`.
    pub beta: f64,
    /// Largest deviation of either detrended phase from its constant.
    pub residual: f64,
    pub n_range: (usize, usize),
    /// Fitted slope of `α_r^(N)` in `N`; approaches `-2ka`.
    pub alpha_r_slope: f64,
    /// Fitted slope of `α_t^(N)` in `N`; approaches `-ka`.
    pub alpha_t_slope: f64,
    /// `|l^(N)|` at the longest chain.
    pub l_limit_modulus: f64,
    /// `α_l^(N)` at the longest chain.
    pub l_limit_phase: f64,
    /// Distance of `(α_l + α)/2 - β` from `π/2 mod π`.
    pub beta_relation_residual: f64,
}

pub fn asymptotic_phase_fit(chain: &ChainState) -> Result<AsymptoticFit> {
    let n_max = chain.len();
    if n_max < MIN_FIT_CELLS {
        return Err(ScatterError::InvalidArgument(format!(
            "asymptotic fit needs at least {MIN_FIT_CELLS} cells, chain has {n_max}"
        )));
    }
    let a = chain.lattice().period();
    let verdict = band_classify(chain.cell(), a, DEFAULT_EDGE_TOL)?;
    if verdict.class != BandClass::Gap {
        return Err(ScatterError::NotInGap { k: chain.k().value(), z: verdict.z });
    }
    let ka = chain.k().value() * a;
    let n_min = n_max / 2 + 1;

    let mut detrended_r = Vec::with_capacity(n_max - n_min + 1);
    let mut detrended_t = Vec::with_capacity(n_max - n_min + 1);
    for n in n_min..=n_max {
        let entry = chain.entry(n).expect("n within chain length");
        let alpha_r = principal_phase(entry.s.r, MODULUS_FLOOR).ok_or(ScatterError::UndefinedPhase {
            label: PhaseLabel::R,
            modulus: entry.s.r.norm(),
        })?;
        if !entry.t_polar.ln_modulus.is_finite() {
            return Err(ScatterError::UndefinedPhase { label: PhaseLabel::T, modulus: 0.0 });
        }
        let nf = n as f64;
        detrended_r.push(wrap_phase(alpha_r + 2.0 * nf * ka));
        detrended_t.push(wrap_phase(entry.t_polar.phase + nf * ka));
    }
    let detrended_r = unwrap_sequence(&detrended_r);
    let detrended_t = unwrap_sequence(&detrended_t);

    let ns: Vec<f64> = (n_min..=n_max).map(|n| n as f64).collect();
    let (alpha, dev_r) = constant_fit(&detrended_r);
    let (beta, dev_t) = constant_fit(&detrended_t);
    let alpha_r_slope = linear_slope(&ns, &detrended_r) - 2.0 * ka;
    let alpha_t_slope = linear_slope(&ns, &detrended_t) - ka;

    let last = chain.last();
    let l_limit_phase = principal_phase(last.s.l, MODULUS_FLOOR).ok_or(ScatterError::UndefinedPhase {
        label: PhaseLabel::L,
        modulus: last.s.l.norm(),
    })?;

    Ok(AsymptoticFit {
        alpha: wrap_phase(alpha),
        beta: wrap_phase(beta),
        residual: dev_r.max(dev_t),
        n_range: (n_min, n_max),
        alpha_r_slope,
        alpha_t_slope,
        l_limit_modulus: last.s.l.norm(),
        l_limit_phase,
        beta_relation_residual: distance_to_half_pi_branch(0.5 * (l_limit_phase + alpha) - beta),
    })
}

fn unwrap_sequence(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        match out.last() {
            None => out.push(v),
            Some(&prev) => out.push(prev + wrap_phase(v - values[i - 1])),
        }
    }
    out
}

/// Mean and largest absolute deviation from it.
fn constant_fit(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let dev = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    (mean, dev)
}

/// Ordinary least-squares slope.
fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{Lattice, PotentialCell};
    use crate::chain::chain_amplitudes;
    use crate::scattering::WaveNumber;

    fn gap_chain(n: usize) -> ChainState {
        let lattice = Lattice::new(PotentialCell::delta(5.0).unwrap(), 1.0, n).unwrap();
        chain_amplitudes(&lattice, WaveNumber::new(1.0).unwrap()).unwrap()
    }

    #[test]
    fn gap_phases_follow_linear_drift() {
        let chain = gap_chain(64);
        let fit = asymptotic_phase_fit(&chain).unwrap();
        assert!(fit.residual < 1e-6);
        assert_eq!(fit.n_range, (33, 64));
        assert!((fit.alpha_r_slope + 2.0).abs() < 1e-6);
        assert!((fit.alpha_t_slope + 1.0).abs() < 1e-6);
        assert!((fit.l_limit_modulus - 1.0).abs() < 1e-10);
        assert!(fit.beta_relation_residual < 1e-6);
    }

    #[test]
    fn successive_reflection_phases_step_by_two_ka() {
        let chain = gap_chain(64);
        let step = |n: usize| {
            let a = principal_phase(chain.entry(n).unwrap().s.r, MODULUS_FLOOR).unwrap();
            let b = principal_phase(chain.entry(n + 1).unwrap().s.r, MODULUS_FLOOR).unwrap();
            wrap_phase(b - a + 2.0).abs()
        };
        assert!(step(60) < 1e-12);
        assert!(step(40) <= step(4).max(1e-15));
    }

    #[test]
    fn refuses_band_points_and_short_chains() {
        assert!(matches!(asymptotic_phase_fit(&gap_chain(8)), Err(ScatterError::InvalidArgument(_))));
        let lattice = Lattice::new(PotentialCell::delta(1.0).unwrap(), 1.0, 32).unwrap();
        let band = chain_amplitudes(&lattice, WaveNumber::new(2.0).unwrap()).unwrap();
        assert!(matches!(asymptotic_phase_fit(&band), Err(ScatterError::NotInGap { .. })));
    }
}
