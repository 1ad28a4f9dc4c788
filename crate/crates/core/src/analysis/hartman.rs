//! Transmission delays of growing chains and the traversal time
//! `T^(N) = N a / v + τ_t^(N)`.

use crate::analysis::bands::{band_classify, BandClass, BandVerdict, DEFAULT_EDGE_TOL};
use crate::analysis::delay::{stencil, time_delay};
use crate::cells::{cell_smatrix, Lattice, PotentialCell};
use crate::chain::{chain_amplitudes, ChainState};
use crate::error::{Result, ScatterError};
use crate::scattering::{unwrap, wrap_phase, PhaseLabel, WaveNumber};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HartmanRecord {
    pub n: usize,
    pub k: WaveNumber,
    pub a: f64,
    pub tau_t: f64,
    /// Time spent inside the chain by the transmitted particle.
    pub traversal: f64,
}

impl HartmanRecord {
    /// Free-flight time `N a / v` across the chain.
    pub fn free_flight(&self) -> f64 {
        self.n as f64 * self.a / self.k.velocity()
    }
}

pub fn traversal_time(n: usize, a: f64, k: WaveNumber, tau_t: f64) -> HartmanRecord {
    HartmanRecord {
        n,
        k,
        a,
        tau_t,
        traversal: n as f64 * a / k.velocity() + tau_t,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HartmanScan {
    pub verdict: BandVerdict,
    /// Set when `k` is not in a gap; the traversal time then keeps growing.
    pub warning: Option<String>,
    pub records: Vec<HartmanRecord>,
}

impl HartmanScan {
    /// `T^(n+1) - T^(n)` for consecutive records.
    pub fn increments(&self) -> Vec<f64> {
        self.records.windows(2).map(|w| w[1].traversal - w[0].traversal).collect()
    }
}

/// `τ_t^(N)` and `T^(N)` for `N = 1..=n_max`, each from the `N`-cell phase
/// curve on the five-point stencil `k + j·step`.
pub fn hartman_scan(
    cell: &PotentialCell,
    a: f64,
    k: WaveNumber,
    n_max: usize,
    step: f64,
) -> Result<HartmanScan> {
    let lattice = Lattice::new(cell.clone(), a, n_max)?;
    let verdict = band_classify(&cell_smatrix(cell, k)?, a, DEFAULT_EDGE_TOL)?;
    let warning = match verdict.class {
        BandClass::Gap => None,
        class => Some(format!(
            "k = {} is classified {class} (z = {}); the traversal time does not saturate",
            k.value(),
            verdict.z
        )),
    };

    let grid = stencil(k, step)?;
    let chains = grid
        .iter()
        .map(|&kk| chain_amplitudes(&lattice, kk))
        .collect::<Result<Vec<ChainState>>>()?;

    let records = (1..=n_max)
        .map(|n| {
            let raw = grid
                .iter()
                .zip(&chains)
                .map(|(kk, chain)| {
                    let polar = chain.entry(n).expect("chain has n_max entries").t_polar;
                    if !polar.ln_modulus.is_finite() {
                        return Err(ScatterError::UndefinedPhase {
                            label: PhaseLabel::T,
                            modulus: polar.modulus(),
                        });
                    }
                    Ok((kk.value(), wrap_phase(polar.phase)))
                })
                .collect::<Result<Vec<_>>>()?;
            let curve = unwrap(PhaseLabel::T, &raw)?;
            Ok(traversal_time(n, a, k, time_delay(&curve, k)?))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(HartmanScan { verdict, warning, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::delay::DEFAULT_FD_STEP;

    fn k(v: f64) -> WaveNumber {
        WaveNumber::new(v).unwrap()
    }

    #[test]
    fn traversal_time_definition() {
        let free = traversal_time(5, 2.0, k(4.0), 0.0);
        assert_eq!(free.traversal, 2.5);
        assert_eq!(free.free_flight(), 2.5);
        let hartman = traversal_time(5, 2.0, k(4.0), -2.5);
        assert_eq!(hartman.traversal, 0.0);
    }

    #[test]
    fn free_chain_takes_free_flight_time() {
        let scan = hartman_scan(&PotentialCell::free(), 1.5, k(0.8), 10, DEFAULT_FD_STEP).unwrap();
        assert!(scan.warning.is_some());
        for rec in &scan.records {
            assert_eq!(rec.tau_t, 0.0);
            assert_eq!(rec.traversal, rec.n as f64 * 1.5 / 0.8);
        }
    }

    #[test]
    fn gap_traversal_time_saturates() {
        let cell = PotentialCell::delta(5.0).unwrap();
        let scan = hartman_scan(&cell, 1.0, k(1.0), 32, DEFAULT_FD_STEP).unwrap();
        assert!(scan.warning.is_none());
        assert_eq!(scan.verdict.class, BandClass::Gap);
        let recs = &scan.records;
        assert!(recs[19].traversal < recs[19].free_flight());
        let inc = scan.increments();
        for w in inc[3..].windows(2) {
            assert!(w[1].abs() <= w[0].abs() || w[1].abs() < 1e-9);
        }
        assert!(inc.last().unwrap().abs() < 1e-3);
        // τ_t^(N) ≈ -N a / v for long chains
        let last = recs.last().unwrap();
        assert!((last.tau_t / -last.free_flight() - 1.0).abs() < 0.1);
    }

    #[test]
    fn band_traversal_time_keeps_growing() {
        let cell = PotentialCell::delta(1.0).unwrap();
        let scan = hartman_scan(&cell, 1.0, k(2.0), 64, DEFAULT_FD_STEP).unwrap();
        assert_eq!(scan.verdict.class, BandClass::Band);
        assert!(scan.warning.is_some());
        let t = |n: usize| scan.records[n - 1].traversal;
        assert!(t(64) > 2.0 * t(16));
    }
}
