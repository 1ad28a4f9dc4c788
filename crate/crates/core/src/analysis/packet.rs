//! Gaussian-smeared transmission.
//!
//! In a band `|t^(N)(k)|²` oscillates in `N` at fixed `k` and has no limit.
//! Averaged over a packet of finite energy spread, the oscillating part washes
//! out and the average converges.

use rayon::prelude::*;

use crate::cells::{Lattice, PotentialCell};
use crate::chain::chain_amplitudes;
use crate::error::{Result, ScatterError};
use crate::scattering::WaveNumber;

/// The averaging window extends this many standard deviations each side.
pub const WINDOW_SIGMAS: f64 = 5.0;

/// Gaussian-weighted trapezoid average of `(k, |t|²)` samples over
/// `[k0 - 5σ, k0 + 5σ]`, normalised by the discrete weight integral.
pub fn wavepacket_average(samples: &[(f64, f64)], k0: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(ScatterError::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    if samples.len() < 2 {
        return Err(ScatterError::InvalidArgument("need at least two samples".into()));
    }
    for (i, w) in samples.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(ScatterError::NonIncreasingGrid { index: i + 1 });
        }
    }
    let (lo, hi) = (k0 - WINDOW_SIGMAS * sigma, k0 + WINDOW_SIGMAS * sigma);
    let (min, max) = (samples[0].0, samples[samples.len() - 1].0);
    // allow for the rounding of a grid built from the same endpoints
    let slack = 1e-12 * hi.abs().max(1.0);
    if lo < min - slack || hi > max + slack {
        return Err(ScatterError::Coverage { lo, hi, min, max });
    }

    let inside: Vec<(f64, f64, f64)> = samples
        .iter()
        .filter(|(k, _)| *k >= lo - slack && *k <= hi + slack)
        .map(|&(k, tt)| (k, tt, (-(k - k0).powi(2) / (2.0 * sigma * sigma)).exp()))
        .collect();
    if inside.len() < 2 {
        return Err(ScatterError::InvalidArgument("fewer than two samples inside the window".into()));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for w in inside.windows(2) {
        let dk = w[1].0 - w[0].0;
        num += 0.5 * dk * (w[0].2 * w[0].1 + w[1].2 * w[1].1);
        den += 0.5 * dk * (w[0].2 + w[1].2);
    }
    Ok(num / den)
}

/// Uniform grid covering the averaging window around `k0`.
pub fn packet_grid(k0: f64, sigma: f64, points: usize) -> Result<Vec<WaveNumber>> {
    if points < 2 {
        return Err(ScatterError::InvalidArgument("a packet grid needs at least two points".into()));
    }
    let lo = k0 - WINDOW_SIGMAS * sigma;
    let width = 2.0 * WINDOW_SIGMAS * sigma;
    (0..points)
        .map(|i| WaveNumber::new(lo + width * i as f64 / (points - 1) as f64))
        .collect()
}

/// Packet-averaged `|t^(N)|²` for each requested chain length.
///
/// One chain of `max(ns)` cells is built per grid point; every requested `N`
/// is read off the same chain. Results follow the order of `ns`.
pub fn averaged_transmission(
    cell: &PotentialCell,
    a: f64,
    ns: &[usize],
    k0: f64,
    sigma: f64,
    points: usize,
) -> Result<Vec<(usize, f64)>> {
    let n_max = ns.iter().copied().max().ok_or_else(|| {
        ScatterError::InvalidArgument("no chain lengths requested".into())
    })?;
    if ns.contains(&0) {
        return Err(ScatterError::InvalidArgument("chain lengths must be at least 1".into()));
    }
    let lattice = Lattice::new(cell.clone(), a, n_max)?;
    let grid = packet_grid(k0, sigma, points)?;
    let per_k: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&k| {
            chain_amplitudes(&lattice, k)
                .map(|chain| ns.iter().map(|&n| chain.entry(n).unwrap().transmission()).collect())
        })
        .collect::<Result<_>>()?;

    ns.iter()
        .enumerate()
        .map(|(j, &n)| {
            let samples: Vec<(f64, f64)> =
                grid.iter().zip(&per_k).map(|(k, row)| (k.value(), row[j])).collect();
            wavepacket_average(&samples, k0, sigma).map(|avg| (n, avg))
        })
        .collect()
}
