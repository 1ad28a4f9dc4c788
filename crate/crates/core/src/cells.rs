//! Unit-cell potentials and their single-cell scattering matrices.
//!
//! Every cell is described with its support starting at `x = 0`; placing it
//! elsewhere on the lattice is left to [`crate::chain::displace`]. Two
//! independent routes produce the amplitudes:
//!
//! * [`cell_smatrix`] uses closed-form delta and rectangular-barrier
//!   amplitudes, with piecewise profiles assembled by S-matrix composition.
//! * [`transfer_oracle`] multiplies exact real `(ψ, ψ')` propagators across the
//!   profile and converts the result to a plane-wave transfer matrix.

use std::ops::Mul;

use num_complex::Complex64;

use crate::chain::{compose, displace};
use crate::error::{Result, ScatterError};
use crate::scattering::{ScatteringMatrix, WaveNumber, MODULUS_FLOOR};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this `|q·w|` the segment propagator uses its Taylor expansion.
const SMALL_PHASE: f64 = 1e-6;

/// Largest barrier opacity `κ·w` whose amplitudes are still representable.
const MAX_OPACITY: f64 = 700.0;

/// One constant piece of a piecewise-constant profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellShape {
    /// `V(x) = g·δ(x)`.
    DeltaSpike { g: f64 },
    /// `V(x) = height` on `[0, width]`; a negative height is a well.
    RectBarrier { height: f64, width: f64 },
    PiecewiseConstant { segments: Vec<Segment> },
}

/// The potential of a single cell, supported on `[0, support_width]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCell {
    shape: CellShape,
    support_width: f64,
}

impl PotentialCell {
    /// The zero potential.
    pub fn free() -> Self {
        Self::delta(0.0).expect("zero strength is valid")
    }

    pub fn delta(g: f64) -> Result<Self> {
        if !g.is_finite() {
            return Err(ScatterError::InvalidCell(format!("delta strength {g} is not finite")));
        }
        Ok(Self { shape: CellShape::DeltaSpike { g }, support_width: 0.0 })
    }

    pub fn barrier(height: f64, width: f64) -> Result<Self> {
        check_segment(0, width, height)?;
        Ok(Self { shape: CellShape::RectBarrier { height, width }, support_width: width })
    }

    pub fn piecewise(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(ScatterError::InvalidCell("piecewise profile has no segments".into()));
        }
        for (i, seg) in segments.iter().enumerate() {
            check_segment(i, seg.width, seg.height)?;
        }
        let support_width = segments.iter().map(|s| s.width).sum();
        Ok(Self { shape: CellShape::PiecewiseConstant { segments }, support_width })
    }

    pub fn shape(&self) -> &CellShape {
        &self.shape
    }

    pub fn support_width(&self) -> f64 {
        self.support_width
    }

    /// True when `V(x) = V(w - x)` on the support, so that `l` and `r` agree
    /// up to the displacement phase of the cell centre.
    pub fn is_parity_symmetric(&self) -> bool {
        match &self.shape {
            CellShape::DeltaSpike { .. } | CellShape::RectBarrier { .. } => true,
            CellShape::PiecewiseConstant { segments } => {
                segments.iter().zip(segments.iter().rev()).all(|(a, b)| a == b)
            }
        }
    }

    /// The cell as a list of constant segments, with a delta spike kept apart.
    fn segments(&self) -> Vec<Segment> {
        match &self.shape {
            CellShape::DeltaSpike { .. } => Vec::new(),
            CellShape::RectBarrier { height, width } => {
                vec![Segment { width: *width, height: *height }]
            }
            CellShape::PiecewiseConstant { segments } => segments.clone(),
        }
    }
}

fn check_segment(index: usize, width: f64, height: f64) -> Result<()> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(ScatterError::InvalidCell(format!(
            "segment {index}: width must be strictly positive, got {width}"
        )));
    }
    if !height.is_finite() {
        return Err(ScatterError::InvalidCell(format!("segment {index}: height {height} is not finite")));
    }
    Ok(())
}

/// `N` copies of a cell with period `a`; cell `n` starts at `x = (n - 1)·a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    cell: PotentialCell,
    period: f64,
    cells: usize,
}

impl Lattice {
    pub fn new(cell: PotentialCell, period: f64, cells: usize) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(ScatterError::InvalidLattice(format!("period must be positive, got {period}")));
        }
        if cells == 0 {
            return Err(ScatterError::InvalidLattice("cell count must be at least 1".into()));
        }
        if period < cell.support_width() {
            return Err(ScatterError::InvalidLattice(format!(
                "period {period} is shorter than the cell support {}; cells would overlap",
                cell.support_width()
            )));
        }
        Ok(Self { cell, period, cells })
    }

    pub fn cell(&self) -> &PotentialCell {
        &self.cell
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn with_cells(&self, cells: usize) -> Result<Self> {
        Self::new(self.cell.clone(), self.period, cells)
    }
}

/// Closed-form S-matrix of a cell whose support starts at the origin.
pub fn cell_smatrix(cell: &PotentialCell, k: WaveNumber) -> Result<ScatteringMatrix> {
    match cell.shape() {
        CellShape::DeltaSpike { g } => Ok(delta_smatrix(*g, k)),
        CellShape::RectBarrier { height, width } => rect_smatrix(*height, *width, k),
        CellShape::PiecewiseConstant { segments } => {
            let mut total = ScatteringMatrix::identity(k);
            let mut offset = 0.0;
            for seg in segments {
                let piece = displace(&rect_smatrix(seg.height, seg.width, k)?, offset);
                total = compose(&total, &piece)?;
                offset += seg.width;
            }
            Ok(total)
        }
    }
}

fn delta_smatrix(g: f64, k: WaveNumber) -> ScatteringMatrix {
    let t = 1.0 / Complex64::new(1.0, g / k.value());
    let l = t - 1.0;
    ScatteringMatrix::new(t, l, l, k)
}

/// Amplitudes of `V = height` on `[0, width]`, with `q² = k² - 2·height`.
///
/// `q` is imaginary under the barrier and the formulas stay analytic in `q²`,
/// so `E = V` needs no special casing beyond the small-`q` expansion of
/// `sin(q w)/q`.
fn rect_smatrix(height: f64, width: f64, k: WaveNumber) -> Result<ScatteringMatrix> {
    let kv = k.value();
    let q2 = kv * kv - 2.0 * height;
    if q2 < 0.0 && (-q2).sqrt() * width > MAX_OPACITY {
        return Err(ScatterError::InvalidCell(format!(
            "barrier opacity {} exceeds {MAX_OPACITY}; amplitudes are not representable",
            (-q2).sqrt() * width
        )));
    }
    let q = Complex64::new(q2, 0.0).sqrt();
    let qw = q * width;
    let cos_qw = qw.cos();
    let sinc = if qw.norm() < SMALL_PHASE {
        width * (1.0 - qw * qw / 6.0)
    } else {
        qw.sin() / q
    };
    let q2c = Complex64::new(q2, 0.0);
    let denom = cos_qw - I * (kv * kv + q2c) * sinc / (2.0 * kv);
    let t = Complex64::from_polar(1.0, -kv * width) / denom;
    let refl = I * (q2c - kv * kv) * sinc / (2.0 * kv) * t;
    let l = refl * Complex64::from_polar(1.0, kv * width);
    let r = refl * Complex64::from_polar(1.0, -kv * width);
    Ok(ScatteringMatrix::new(t, l, r, k))
}

/// Plane-wave transfer matrix.
///
/// Maps the coefficients `(A, B)` of `A e^{ikx} + B e^{-ikx}` to the left of
/// the potential onto the coefficients `(C, D)` to its right, both referred to
/// the global coordinate `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
    pub k: WaveNumber,
}

impl TransferMatrix {
    pub fn identity(k: WaveNumber) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::default();
        Self { m11: one, m12: zero, m21: zero, m22: one, k }
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Largest deviation from `det = 1`, `m22 = m̄11` and `m21 = m̄12`.
    pub fn structure_defect(&self) -> f64 {
        (self.det() - 1.0)
            .norm()
            .max((self.m22 - self.m11.conj()).norm())
            .max((self.m21 - self.m12.conj()).norm())
    }

    /// Transfer matrix of the same potential rigidly shifted by `a`.
    pub fn displaced(&self, a: f64) -> Self {
        let ph = Complex64::from_polar(1.0, 2.0 * self.k.value() * a);
        Self {
            m11: self.m11,
            m12: self.m12 / ph,
            m21: self.m21 * ph,
            m22: self.m22,
            k: self.k,
        }
    }
}

/// `right * left`: the potential of `left` followed by that of `right`.
impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
            k: self.k,
        }
    }
}

/// Real propagator of `(ψ, ψ')`.
#[derive(Debug, Clone, Copy)]
struct StateMatrix([[f64; 2]; 2]);

impl StateMatrix {
    const IDENTITY: StateMatrix = StateMatrix([[1.0, 0.0], [0.0, 1.0]]);

    /// Across a flat segment, where `ψ'' = -q² ψ` with `q² = k² - 2V`.
    fn segment(k: f64, seg: Segment) -> Self {
        let q2 = k * k - 2.0 * seg.height;
        let w = seg.width;
        if q2 > 0.0 {
            let q = q2.sqrt();
            let (s, c) = (q * w).sin_cos();
            StateMatrix([[c, s / q], [-q * s, c]])
        } else if q2 < 0.0 {
            let kappa = (-q2).sqrt();
            let (s, c) = ((kappa * w).sinh(), (kappa * w).cosh());
            StateMatrix([[c, s / kappa], [kappa * s, c]])
        } else {
            StateMatrix([[1.0, w], [0.0, 1.0]])
        }
    }

    /// Derivative jump `ψ'(0⁺) - ψ'(0⁻) = 2 g ψ(0)`.
    fn delta_jump(g: f64) -> Self {
        StateMatrix([[1.0, 0.0], [2.0 * g, 1.0]])
    }

    fn then(self, next: StateMatrix) -> StateMatrix {
        let a = next.0;
        let b = self.0;
        StateMatrix([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

/// Exact transfer matrix of a cell at the origin, built from segment propagators.
pub fn transfer_oracle(cell: &PotentialCell, k: WaveNumber) -> Result<TransferMatrix> {
    let kv = k.value();
    let state = match cell.shape() {
        CellShape::DeltaSpike { g } => StateMatrix::delta_jump(*g),
        _ => cell
            .segments()
            .into_iter()
            .fold(StateMatrix::IDENTITY, |acc, seg| acc.then(StateMatrix::segment(kv, seg))),
    };
    let w = cell.support_width();
    let p = state.0;

    // (ψ, ψ') at x = 0 from (A, B): columns (1, ik) and (1, -ik)
    let ik = Complex64::new(0.0, kv);
    let col_a = [p[0][0] + p[0][1] * ik, p[1][0] + p[1][1] * ik];
    let col_b = [p[0][0] - p[0][1] * ik, p[1][0] - p[1][1] * ik];

    // back to plane-wave coefficients at x = w
    let e_minus = Complex64::from_polar(0.5, -kv * w);
    let e_plus = Complex64::from_polar(0.5, kv * w);
    let to_c = |v: [Complex64; 2]| e_minus * (v[0] + v[1] / ik);
    let to_d = |v: [Complex64; 2]| e_plus * (v[0] - v[1] / ik);

    Ok(TransferMatrix {
        m11: to_c(col_a),
        m12: to_c(col_b),
        m21: to_d(col_a),
        m22: to_d(col_b),
        k,
    })
}

/// `t = 1/m22`, `r = m12/m22`, `l = -m21/m22`.
pub fn transfer_to_smatrix(m: &TransferMatrix) -> Result<ScatteringMatrix> {
    let modulus = m.m22.norm();
    if !(modulus >= MODULUS_FLOOR) {
        return Err(ScatterError::SingularConversion { which: "m22", modulus });
    }
    let t = 1.0 / m.m22;
    Ok(ScatteringMatrix::new(t, -m.m21 * t, m.m12 * t, m.k))
}

/// Inverse of [`transfer_to_smatrix`]; impossible once `|t|` underflows.
pub fn smatrix_to_transfer(s: &ScatteringMatrix) -> Result<TransferMatrix> {
    let modulus = s.t.norm();
    if !(modulus >= MODULUS_FLOOR) {
        return Err(ScatterError::SingularConversion { which: "t", modulus });
    }
    Ok(TransferMatrix {
        m11: s.t - s.r * s.l / s.t,
        m12: s.r / s.t,
        m21: -s.l / s.t,
        m22: 1.0 / s.t,
        k: s.k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::{principal_phases, unitarity_defect, wrap_phase};
    use std::f64::consts::PI;

    fn k(v: f64) -> WaveNumber {
        WaveNumber::new(v).unwrap()
    }

    fn close(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm()
    }

    fn smatrix_distance(a: &ScatteringMatrix, b: &ScatteringMatrix) -> f64 {
        close(a.t, b.t).max(close(a.l, b.l)).max(close(a.r, b.r))
    }

    fn builtin_cells() -> Vec<PotentialCell> {
        vec![
            PotentialCell::free(),
            PotentialCell::delta(1.0).unwrap(),
            PotentialCell::delta(-2.5).unwrap(),
            PotentialCell::barrier(2.0, 1.0).unwrap(),
            PotentialCell::barrier(-1.0, 2.0).unwrap(),
            PotentialCell::piecewise(vec![
                Segment { width: 0.3, height: 1.5 },
                Segment { width: 0.2, height: -0.7 },
                Segment { width: 0.4, height: 3.0 },
            ])
            .unwrap(),
        ]
    }

    #[test]
    fn validation() {
        assert!(PotentialCell::barrier(1.0, 0.0).is_err());
        assert!(PotentialCell::barrier(1.0, -1.0).is_err());
        assert!(PotentialCell::piecewise(vec![]).is_err());
        assert!(PotentialCell::delta(f64::INFINITY).is_err());
        let pw = PotentialCell::piecewise(vec![
            Segment { width: 0.5, height: 1.0 },
            Segment { width: 0.25, height: 0.0 },
        ])
        .unwrap();
        assert_eq!(pw.support_width(), 0.75);
        assert!(Lattice::new(pw.clone(), 0.5, 3).is_err());
        assert!(Lattice::new(pw.clone(), 1.0, 0).is_err());
        assert!(Lattice::new(pw, 0.75, 3).is_ok());
    }

    #[test]
    fn free_cell_is_identity() {
        let s = cell_smatrix(&PotentialCell::free(), k(2.3)).unwrap();
        assert_eq!(s, ScatteringMatrix::identity(k(2.3)));
        let m = transfer_oracle(&PotentialCell::free(), k(2.3)).unwrap();
        assert!(close(m.m11, Complex64::new(1.0, 0.0)) < 1e-15);
        assert!(m.m12.norm() < 1e-15 && m.m21.norm() < 1e-15);
        assert!(close(m.m22, Complex64::new(1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn delta_spike_at_unit_strength() {
        let s = cell_smatrix(&PotentialCell::delta(1.0).unwrap(), k(1.0)).unwrap();
        assert!(close(s.t, Complex64::new(0.5, -0.5)) < 1e-16);
        assert!((s.transmission() - 0.5).abs() < 1e-15);
        assert!(unitarity_defect(&s) < 1e-15);
    }

    #[test]
    fn delta_jump_matrix() {
        let m = transfer_oracle(&PotentialCell::delta(1.0).unwrap(), k(1.0)).unwrap();
        assert!((m.m11.norm_sqr() - m.m12.norm_sqr() - 1.0).abs() < 1e-14);
        assert!(m.structure_defect() < 1e-14);
        let s = transfer_to_smatrix(&m).unwrap();
        let analytic = cell_smatrix(&PotentialCell::delta(1.0).unwrap(), k(1.0)).unwrap();
        assert!(smatrix_distance(&s, &analytic) < 1e-12);
    }

    #[test]
    fn well_transfer_matrix_is_unimodular() {
        let m = transfer_oracle(&PotentialCell::barrier(-1.0, 2.0).unwrap(), k(1.0)).unwrap();
        assert!((m.det() - 1.0).norm() < 1e-12);
        assert!(m.structure_defect() < 1e-12);
    }

    #[test]
    fn tunnelling_barrier_matches_textbook_formula() {
        let (v0, w, kv) = (2.0, 1.0, 1.0);
        let e = 0.5 * kv * kv;
        let kappa = (2.0f64 * (v0 - e)).sqrt();
        let expected = 1.0 / (1.0 + v0 * v0 * (kappa * w).sinh().powi(2) / (4.0 * e * (v0 - e)));
        let cell = PotentialCell::barrier(v0, w).unwrap();
        let s = cell_smatrix(&cell, k(kv)).unwrap();
        assert!(s.transmission() > 0.0 && s.transmission() < 1.0);
        assert!((s.transmission() - expected).abs() < 1e-14);
        let oracle = transfer_to_smatrix(&transfer_oracle(&cell, k(kv)).unwrap()).unwrap();
        assert!((oracle.transmission() - expected).abs() < 1e-10);
        assert!(smatrix_distance(&s, &oracle) < 1e-10);
    }

    #[test]
    fn energy_at_barrier_top() {
        // E = V0: k = sqrt(2 V0); the linear-wavefunction limit gives
        // |t|² = 1/(1 + (k w / 2)²)
        let (v0, w) = (2.0, 1.5);
        let kv = (2.0f64 * v0).sqrt();
        let cell = PotentialCell::barrier(v0, w).unwrap();
        let s = cell_smatrix(&cell, k(kv)).unwrap();
        let expected = 1.0 / (1.0 + (kv * w / 2.0).powi(2));
        assert!((s.transmission() - expected).abs() < 1e-14);
        assert!(unitarity_defect(&s) < 1e-14);
        let oracle = transfer_to_smatrix(&transfer_oracle(&cell, k(kv)).unwrap()).unwrap();
        assert!(smatrix_distance(&s, &oracle) < 1e-12);
    }

    #[test]
    fn analytic_and_oracle_agree_on_grid() {
        for cell in builtin_cells() {
            for i in 0..200 {
                let kv = 0.1 + 9.9 * i as f64 / 199.0;
                let s = cell_smatrix(&cell, k(kv)).unwrap();
                let m = transfer_oracle(&cell, k(kv)).unwrap();
                let o = transfer_to_smatrix(&m).unwrap();
                assert!(smatrix_distance(&s, &o) < 1e-10, "{cell:?} at k = {kv}");
                assert!(unitarity_defect(&s) < 1e-12, "{cell:?} at k = {kv}");
                assert!(m.structure_defect() < 1e-10 * m.m22.norm_sqr().max(1.0));
            }
        }
    }

    #[test]
    fn symmetric_cells_have_half_pi_relative_phase() {
        for cell in builtin_cells().into_iter().filter(PotentialCell::is_parity_symmetric) {
            for &kv in &[0.4, 1.0, 2.7, 6.1] {
                let s = cell_smatrix(&cell, k(kv)).unwrap();
                if s.l.norm() < 1e-12 {
                    continue;
                }
                // recentre so that the cell is symmetric about the origin
                let centred = displace(&s, -cell.support_width() / 2.0);
                assert!(close(centred.l, centred.r) < 1e-12);
                let p = principal_phases(&centred);
                let rel = wrap_phase(2.0 * (p.l.unwrap() - p.t.unwrap()));
                assert!((rel.abs() - PI).abs() < 1e-10, "{cell:?} at k = {kv}");
            }
        }
        let s = cell_smatrix(&PotentialCell::delta(1.7).unwrap(), k(0.9)).unwrap();
        assert_eq!(s.l, s.r);
    }

    #[test]
    fn staircase_converges_to_delta_at_first_order() {
        let (g, kv) = (1.0, 1.0);
        let exact = cell_smatrix(&PotentialCell::delta(g).unwrap(), k(kv)).unwrap();
        let err = |w: f64| {
            let stair = PotentialCell::barrier(g / w, w).unwrap();
            smatrix_distance(&cell_smatrix(&stair, k(kv)).unwrap(), &exact)
        };
        let (e1, e2, e3) = (err(1e-2), err(1e-3), err(1e-4));
        assert!(e3 < 1e-3);
        assert!((e1 / e2 - 10.0).abs() < 1.0, "ratio {}", e1 / e2);
        assert!((e2 / e3 - 10.0).abs() < 1.0, "ratio {}", e2 / e3);
        let stair = PotentialCell::barrier(g / 1e-4, 1e-4).unwrap();
        let oracle = transfer_to_smatrix(&transfer_oracle(&stair, k(kv)).unwrap()).unwrap();
        assert!(smatrix_distance(&oracle, &exact) < 1e-3);
    }

    #[test]
    fn conversion_round_trips() {
        let id = TransferMatrix::identity(k(1.0));
        assert_eq!(transfer_to_smatrix(&id).unwrap(), ScatteringMatrix::identity(k(1.0)));
        for cell in builtin_cells() {
            let m = transfer_oracle(&cell, k(1.3)).unwrap();
            let back = smatrix_to_transfer(&transfer_to_smatrix(&m).unwrap()).unwrap();
            for (a, b) in [(m.m11, back.m11), (m.m12, back.m12), (m.m21, back.m21), (m.m22, back.m22)] {
                assert!(close(a, b) < 1e-12);
            }
            let s = cell_smatrix(&cell, k(1.3)).unwrap();
            let s_back = transfer_to_smatrix(&smatrix_to_transfer(&s).unwrap()).unwrap();
            assert!(smatrix_distance(&s, &s_back) < 1e-12);
        }
    }

    #[test]
    fn conversions_refuse_singular_inputs() {
        let mut m = TransferMatrix::identity(k(1.0));
        m.m22 = Complex64::default();
        assert!(matches!(transfer_to_smatrix(&m), Err(ScatterError::SingularConversion { .. })));
        let s = ScatteringMatrix::new(
            Complex64::default(),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            k(1.0),
        );
        assert!(matches!(smatrix_to_transfer(&s), Err(ScatterError::SingularConversion { .. })));
    }

    #[test]
    fn opaque_barrier_is_rejected() {
        let cell = PotentialCell::barrier(1e6, 1.0).unwrap();
        assert!(cell_smatrix(&cell, k(1.0)).is_err());
    }

    #[test]
    fn displaced_transfer_matches_displaced_smatrix() {
        let cell = PotentialCell::barrier(2.0, 0.5).unwrap();
        let kv = k(1.7);
        let m = transfer_oracle(&cell, kv).unwrap().displaced(0.8);
        let via_transfer = transfer_to_smatrix(&m).unwrap();
        let via_s = displace(&cell_smatrix(&cell, kv).unwrap(), 0.8);
        assert!(smatrix_distance(&via_transfer, &via_s) < 1e-13);
    }
}
