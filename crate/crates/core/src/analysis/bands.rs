//! Band/gap classification of the infinite chain from a single cell.

use std::fmt;

use crate::chain::bloch_parameter;
use crate::error::Result;
use crate::scattering::{ScatteringMatrix, WaveNumber};

pub const DEFAULT_EDGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BandClass {
    /// `|z| > 1`: total reflection as `N → ∞`.
    Gap,
    /// `|z| < 1`: Bloch propagation, `|t^(N)|²` keeps oscillating.
    Band,
    /// `|z| = 1`: `|t^(N)|²` decays like `1/N²`.
    Edge,
}

impl BandClass {
    pub fn as_str(self) -> &'static str {
        match self {
            BandClass::Gap => "gap",
            BandClass::Band => "band",
            BandClass::Edge => "edge",
        }
    }

    /// Total reflection in the infinite-chain limit, edges included.
    pub fn totally_reflecting(self) -> bool {
        matches!(self, BandClass::Gap | BandClass::Edge)
    }
}

impl fmt::Display for BandClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandVerdict {
    pub k: WaveNumber,
    pub z: f64,
    pub class: BandClass,
    pub edge_tolerance: f64,
}

/// Classifies on `|z|`: the total-reflection condition is two-sided, since
/// `|U_N(z)|` grows without bound for `z ≤ -1` just as for `z ≥ 1`.
pub fn band_classify(cell: &ScatteringMatrix, a: f64, tol: f64) -> Result<BandVerdict> {
    let z = bloch_parameter(cell, a)?;
    Ok(BandVerdict { k: cell.k, z, class: classify_z(z, tol), edge_tolerance: tol })
}

pub fn classify_z(z: f64, tol: f64) -> BandClass {
    let excess = z.abs() - 1.0;
    if excess.abs() <= tol {
        BandClass::Edge
    } else if excess > 0.0 {
        BandClass::Gap
    } else {
        BandClass::Band
    }
}
