//! On-shell scattering matrices, unitarity checks and phase bookkeeping.
//!
//! Units are natural throughout: `ħ = m = 1`, so `E = k²/2` and the incoming
//! velocity is `v = k`. A scattering matrix at wave number `k` is stored as the
//! triple `(t, l, r)` and laid out as
//!
//! ```text
//!     s = | t  r |
//!         | l  t |
//! ```
//!
//! where `t` is the transmission amplitude, `l` the reflection amplitude for
//! incidence from the left and `r` the one for incidence from the right.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Result, ScatterError};

/// Amplitudes with modulus below this value have no meaningful phase.
pub const MODULUS_FLOOR: f64 = 1e-300;

/// Adjacent raw phase differences this close to `±π` cannot be unwrapped.
pub const BRANCH_AMBIGUITY_TOL: f64 = 1e-12;

/// Wave number of the incoming particle. Always strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WaveNumber(f64);

impl WaveNumber {
    pub fn new(k: f64) -> Result<Self> {
        if k > 0.0 && k.is_finite() {
            Ok(Self(k))
        } else {
            Err(ScatterError::NonPositiveWaveNumber(k))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `E = k²/2`.
    #[inline]
    pub fn energy(self) -> f64 {
        0.5 * self.0 * self.0
    }

    /// `v = k`.
    #[inline]
    pub fn velocity(self) -> f64 {
        self.0
    }
}

impl fmt::Display for WaveNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which amplitude a phase belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseLabel {
    T,
    L,
    R,
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhaseLabel::T => "t",
            PhaseLabel::L => "l",
            PhaseLabel::R => "r",
        };
        f.write_str(s)
    }
}

/// The 2×2 on-shell scattering matrix at one wave number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMatrix {
    pub t: Complex64,
    pub l: Complex64,
    pub r: Complex64,
    pub k: WaveNumber,
}

impl ScatteringMatrix {
    pub fn new(t: Complex64, l: Complex64, r: Complex64, k: WaveNumber) -> Self {
        Self { t, l, r, k }
    }

    /// Free propagation: `t = 1`, `l = r = 0`.
    pub fn identity(k: WaveNumber) -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default(), k)
    }

    /// Transmission probability `|t|²`.
    #[inline]
    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }

    /// Reflection probability `|l|²` (equal to `|r|²` for a unitary matrix).
    #[inline]
    pub fn reflection(&self) -> f64 {
        self.l.norm_sqr()
    }

    pub fn amplitude(&self, label: PhaseLabel) -> Complex64 {
        match label {
            PhaseLabel::T => self.t,
            PhaseLabel::L => self.l,
            PhaseLabel::R => self.r,
        }
    }

    pub fn residuals(&self) -> UnitarityResiduals {
        let tt = self.t.norm_sqr();
        UnitarityResiduals {
            left_column: (tt + self.l.norm_sqr() - 1.0).abs(),
            right_column: (tt + self.r.norm_sqr() - 1.0).abs(),
            orthogonality: (self.t * self.r.conj() + self.l * self.t.conj()).norm(),
        }
    }
}

/// The three unitarity residuals of a scattering matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarityResiduals {
    /// `| |t|² + |l|² - 1 |`
    pub left_column: f64,
    /// `| |t|² + |r|² - 1 |`
    pub right_column: f64,
    /// `| t r̄ + l t̄ |`
    pub orthogonality: f64,
}

impl UnitarityResiduals {
    pub fn max(&self) -> f64 {
        self.left_column.max(self.right_column).max(self.orthogonality)
    }
}

/// Largest of the three unitarity residuals; zero for an exactly unitary matrix.
pub fn unitarity_defect(s: &ScatteringMatrix) -> f64 {
    s.residuals().max()
}

/// Maps any real angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Principal argument in `(-π, π]`, or `None` when `|z| < floor`.
pub fn principal_phase(z: Complex64, floor: f64) -> Option<f64> {
    if z.norm() < floor || !z.norm().is_finite() {
        return None;
    }
    let arg = z.arg();
    // atan2 returns -π for a negative real with a -0.0 imaginary part
    Some(if arg <= -PI { PI } else { arg })
}

/// Principal phases `(α_t, α_l, α_r)`; an undefined phase is `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalPhases {
    pub t: Option<f64>,
    pub l: Option<f64>,
    pub r: Option<f64>,
}

impl PrincipalPhases {
    pub fn get(&self, label: PhaseLabel) -> Option<f64> {
        match label {
            PhaseLabel::T => self.t,
            PhaseLabel::L => self.l,
            PhaseLabel::R => self.r,
        }
    }

    /// Like [`PrincipalPhases::get`] but turns a missing phase into an error.
    pub fn require(&self, label: PhaseLabel, s: &ScatteringMatrix) -> Result<f64> {
        self.get(label).ok_or(ScatterError::UndefinedPhase {
            label,
            modulus: s.amplitude(label).norm(),
        })
    }
}

pub fn principal_phases(s: &ScatteringMatrix) -> PrincipalPhases {
    principal_phases_with_floor(s, MODULUS_FLOOR)
}

pub fn principal_phases_with_floor(s: &ScatteringMatrix, floor: f64) -> PrincipalPhases {
    PrincipalPhases {
        t: principal_phase(s.t, floor),
        l: principal_phase(s.l, floor),
        r: principal_phase(s.r, floor),
    }
}

/// Distance of `(α_l + α_r)/2 - α_t` from the nearest `π/2 + nπ`.
///
/// Unitarity forces this to vanish for any real potential, symmetric or not.
/// Since `(α_l + α_r)/2` is only defined modulo `π`, a distance to the nearest
/// admissible branch is reported rather than a signed residual.
pub fn phase_relation_residual(s: &ScatteringMatrix) -> Result<f64> {
    let phases = principal_phases(s);
    let at = phases.require(PhaseLabel::T, s)?;
    let al = phases.require(PhaseLabel::L, s)?;
    let ar = phases.require(PhaseLabel::R, s)?;
    Ok(distance_to_half_pi_branch(0.5 * (al + ar) - at))
}

/// Distance of `x` from the set `{π/2 + nπ}`.
pub fn distance_to_half_pi_branch(x: f64) -> f64 {
    let d = (x - 0.5 * PI).rem_euclid(PI);
    d.min(PI - d)
}

/// Continuous phase of one amplitude sampled on an increasing k-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCurve {
    label: PhaseLabel,
    grid: Vec<WaveNumber>,
    values: Vec<f64>,
}

impl PhaseCurve {
    /// Builds a curve from already continuous values, checking both invariants.
    pub fn new(label: PhaseLabel, grid: Vec<WaveNumber>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(ScatterError::InvalidArgument(format!(
                "grid has {} points but {} phase values were given",
                grid.len(),
                values.len()
            )));
        }
        check_increasing(grid.iter().map(|k| k.value()))?;
        for (i, pair) in values.windows(2).enumerate() {
            let jump = pair[1] - pair[0];
            if !(jump.abs() < PI) {
                return Err(ScatterError::UnresolvedPhaseJump { index: i + 1, jump });
            }
        }
        Ok(Self { label, grid, values })
    }

    pub fn label(&self) -> PhaseLabel {
        self.label
    }

    pub fn grid(&self) -> &[WaveNumber] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(k, phase)` pairs, the same shape [`unwrap`] consumes.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(k, &p)| (k.value(), p))
            .collect()
    }
}

fn check_increasing(grid: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev: Option<f64> = None;
    for (i, k) in grid.enumerate() {
        if let Some(p) = prev {
            if !(k > p) {
                return Err(ScatterError::NonIncreasingGrid { index: i });
            }
        }
        prev = Some(k);
    }
    Ok(())
}

/// Removes `2π` jumps by nearest-branch continuity. The first point is kept.
///
/// Fails when an adjacent difference sits on `±π` (within
/// [`BRANCH_AMBIGUITY_TOL`]), since either branch would be a guess.
pub fn unwrap(label: PhaseLabel, raw: &[(f64, f64)]) -> Result<PhaseCurve> {
    let grid = raw
        .iter()
        .map(|&(k, _)| WaveNumber::new(k))
        .collect::<Result<Vec<_>>>()?;
    check_increasing(grid.iter().map(|k| k.value()))?;

    let mut values = Vec::with_capacity(raw.len());
    for (i, &(_, phase)) in raw.iter().enumerate() {
        if !phase.is_finite() {
            return Err(ScatterError::InvalidArgument(format!(
                "phase at index {i} is not finite"
            )));
        }
        match values.last() {
            None => values.push(phase),
            Some(&prev_unwrapped) => {
                let step = wrap_phase(phase - raw[i - 1].1);
                if PI - step.abs() < BRANCH_AMBIGUITY_TOL {
                    return Err(ScatterError::AmbiguousBranch { index: i });
                }
                values.push(prev_unwrapped + step);
            }
        }
    }
    Ok(PhaseCurve { label, grid, values })
}
