//! Composition algebra for chains of identical, equally spaced cells.
//!
//! The S-matrix of an `N`-cell chain is built by adding one cell at a time.
//! Each new cell contributes the geometric series of its multiple reflections
//! with the chain already in place; positions enter only through the phase
//! factors `e^{±2ikna}` that a rigid displacement puts on the reflection
//! amplitudes.

mod chebyshev;

pub use chebyshev::{chebyshev_transmission, chebyshev_u, EDGE_WINDOW};

use num_complex::Complex64;

use crate::cells::{cell_smatrix, Lattice};
use crate::error::{Result, ScatterError};
use crate::scattering::{ScatteringMatrix, WaveNumber, MODULUS_FLOOR};

/// Smallest admissible `|1 - l_B r_A|` in a composition.
pub const RESONANCE_FLOOR: f64 = 1e-14;

/// Rigidly moves the potential by `a` (to the right for `a > 0`).
///
/// `t` is untouched; `l` picks up `e^{2ika}` and `r` picks up `e^{-2ika}`.
pub fn displace(s: &ScatteringMatrix, a: f64) -> ScatteringMatrix {
    if a == 0.0 {
        return *s;
    }
    let ph = Complex64::from_polar(1.0, 2.0 * s.k.value() * a);
    ScatteringMatrix::new(s.t, s.l * ph, s.r / ph, s.k)
}

/// S-matrix of system `a` followed by system `b` to its right.
///
/// Both matrices must be in global coordinates and at the same `k`.
pub fn compose(a: &ScatteringMatrix, b: &ScatteringMatrix) -> Result<ScatteringMatrix> {
    if a.k != b.k {
        return Err(ScatterError::InvalidArgument(format!(
            "cannot compose S-matrices at different wave numbers {} and {}",
            a.k, b.k
        )));
    }
    let denom = resonance_denominator(b.l, a.r)?;
    Ok(ScatteringMatrix::new(
        a.t * b.t / denom,
        a.l + a.t * a.t * b.l / denom,
        b.r + b.t * b.t * a.r / denom,
        a.k,
    ))
}

/// `1 - l·r`, the sum of the internal reflection series.
fn resonance_denominator(l: Complex64, r: Complex64) -> Result<Complex64> {
    let d = 1.0 - l * r;
    let modulus = d.norm();
    if !(modulus >= RESONANCE_FLOOR) {
        return Err(ScatterError::ResonanceDivergence { modulus });
    }
    Ok(d)
}

/// A complex amplitude held as `ln|z|` and an accumulated (not wrapped) phase.
///
/// The chain transmission amplitude shrinks geometrically inside a gap and
/// underflows long before its phase stops being meaningful.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarAmplitude {
    pub ln_modulus: f64,
    pub phase: f64,
}

impl PolarAmplitude {
    pub fn from_complex(z: Complex64) -> Self {
        Self { ln_modulus: z.norm().ln(), phase: z.arg() }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.ln_modulus.exp(), self.phase)
    }

    pub fn modulus(self) -> f64 {
        self.ln_modulus.exp()
    }

    /// `|z|²`, which may underflow to zero.
    pub fn norm_sqr(self) -> f64 {
        (2.0 * self.ln_modulus).exp()
    }

    fn squared(self) -> Complex64 {
        Complex64::from_polar((2.0 * self.ln_modulus).exp(), 2.0 * self.phase)
    }

    fn times_over(self, num: Complex64, den: Complex64) -> Self {
        Self {
            ln_modulus: self.ln_modulus + num.norm().ln() - den.norm().ln(),
            phase: self.phase + num.arg() - den.arg(),
        }
    }
}

/// S-matrix of the first `n` cells, with `t` also kept in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainEntry {
    pub s: ScatteringMatrix,
    pub t_polar: PolarAmplitude,
}

impl ChainEntry {
    /// `|t^(n)|²`, computed from the polar form.
    pub fn transmission(&self) -> f64 {
        self.t_polar.norm_sqr()
    }
}

/// The sequence `s^(1), …, s^(N)` for one lattice at one wave number.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    lattice: Lattice,
    k: WaveNumber,
    cell: ScatteringMatrix,
    entries: Vec<ChainEntry>,
}

impl ChainState {
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn k(&self) -> WaveNumber {
        self.k
    }

    /// Single-cell S-matrix at the origin.
    pub fn cell(&self) -> &ScatteringMatrix {
        &self.cell
    }

    pub fn entries(&self) -> &[ChainEntry] {
        &self.entries
    }

    /// Entry for the first `n` cells, `n` counted from 1.
    pub fn entry(&self, n: usize) -> Option<&ChainEntry> {
        n.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> &ChainEntry {
        self.entries.last().expect("a chain has at least one cell")
    }
}

fn first_entry(lattice: &Lattice, k: WaveNumber) -> Result<(ScatteringMatrix, ChainEntry)> {
    let cell = cell_smatrix(lattice.cell(), k)?;
    if !(cell.t.norm() >= MODULUS_FLOOR) {
        return Err(ScatterError::SingularConversion { which: "t", modulus: cell.t.norm() });
    }
    Ok((cell, ChainEntry { s: cell, t_polar: PolarAmplitude::from_complex(cell.t) }))
}

/// Builds `s^(1..=N)` by appending cells on the right.
///
/// With the cell S-matrix `(t, l, r)` taken at the origin and
/// `φ_n = e^{2ikna}`:
///
/// ```text
/// t^(n+1) = t^(n) t / (1 - l r^(n) φ_n)
/// l^(n+1) = l^(n) + (t^(n))² l φ_n / (1 - l r^(n) φ_n)
/// r^(n+1) = r / φ_n + t² r^(n) / (1 - l r^(n) φ_n)
/// ```
pub fn chain_amplitudes(lattice: &Lattice, k: WaveNumber) -> Result<ChainState> {
    let (cell, first) = first_entry(lattice, k)?;
    let (t, l, r) = (cell.t, cell.l, cell.r);
    let ka = k.value() * lattice.period();

    let mut entries = Vec::with_capacity(lattice.cells());
    entries.push(first);
    for n in 1..lattice.cells() {
        let prev = entries[n - 1];
        let ph = Complex64::from_polar(1.0, 2.0 * ka * n as f64);
        let denom = resonance_denominator(l * ph, prev.s.r)?;
        let t_polar = prev.t_polar.times_over(t, denom);
        let s = ScatteringMatrix::new(
            t_polar.to_complex(),
            prev.s.l + prev.t_polar.squared() * l * ph / denom,
            r / ph + t * t * prev.s.r / denom,
            k,
        );
        entries.push(ChainEntry { s, t_polar });
    }
    Ok(ChainState { lattice: lattice.clone(), k, cell, entries })
}

/// Builds `s^(1..=N)` by shifting the chain one period right and prepending a
/// cell at the origin:
///
/// ```text
/// r^(n+1) = r^(n) e^{-2ika} + (t^(n))² r / (1 - l^(n) r e^{2ika})
/// ```
///
/// with the matching expressions for `t` and `l`.
pub fn chain_amplitudes_addleft(lattice: &Lattice, k: WaveNumber) -> Result<ChainState> {
    let (cell, first) = first_entry(lattice, k)?;
    let (t, l, r) = (cell.t, cell.l, cell.r);
    let shift = Complex64::from_polar(1.0, 2.0 * k.value() * lattice.period());

    let mut entries = Vec::with_capacity(lattice.cells());
    entries.push(first);
    for n in 1..lattice.cells() {
        let prev = entries[n - 1];
        let shifted_l = prev.s.l * shift;
        let denom = resonance_denominator(shifted_l, r)?;
        let t_polar = prev.t_polar.times_over(t, denom);
        let s = ScatteringMatrix::new(
            t_polar.to_complex(),
            l + t * t * shifted_l / denom,
            prev.s.r / shift + prev.t_polar.squared() * r / denom,
            k,
        );
        entries.push(ChainEntry { s, t_polar });
    }
    Ok(ChainState { lattice: lattice.clone(), k, cell, entries })
}

/// `z = cos(α_t + ka)/|t|` for a cell S-matrix and period `a`.
///
/// `|z| > 1` marks a gap of the infinite chain.
pub fn bloch_parameter(cell: &ScatteringMatrix, a: f64) -> Result<f64> {
    let tt = cell.t.norm_sqr();
    if !(cell.t.norm() >= MODULUS_FLOOR) {
        return Err(ScatterError::UndefinedPhase {
            label: crate::scattering::PhaseLabel::T,
            modulus: cell.t.norm(),
        });
    }
    // cos(α_t + ka)/|t| = Re(t e^{ika}) / |t|²
    Ok((cell.t * Complex64::from_polar(1.0, cell.k.value() * a)).re / tt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::{transfer_oracle, transfer_to_smatrix, PotentialCell, Segment, TransferMatrix};
    use crate::scattering::{phase_relation_residual, unitarity_defect};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn k(v: f64) -> WaveNumber {
        WaveNumber::new(v).unwrap()
    }

    fn dist(a: &ScatteringMatrix, b: &ScatteringMatrix) -> f64 {
        (a.t - b.t).norm().max((a.l - b.l).norm()).max((a.r - b.r).norm())
    }

    fn delta_lattice(g: f64, a: f64, n: usize) -> Lattice {
        Lattice::new(PotentialCell::delta(g).unwrap(), a, n).unwrap()
    }

    fn delta(g: f64, kv: f64) -> ScatteringMatrix {
        cell_smatrix(&PotentialCell::delta(g).unwrap(), k(kv)).unwrap()
    }

    /// Product of displaced single-cell transfer matrices.
    fn transfer_chain(lattice: &Lattice, kv: f64, n: usize) -> ScatteringMatrix {
        let m = transfer_oracle(lattice.cell(), k(kv)).unwrap();
        let total = (0..n).fold(TransferMatrix::identity(k(kv)), |acc, j| {
            m.displaced(j as f64 * lattice.period()) * acc
        });
        transfer_to_smatrix(&total).unwrap()
    }

    #[test]
    fn displacement_basics() {
        let s = delta(1.0, 1.0);
        assert_eq!(displace(&s, 0.0), s);
        let full_turn = displace(&s, PI);
        assert_eq!(full_turn.t, s.t);
        assert!((full_turn.l - s.l).norm() < 1e-15);
        assert!((full_turn.r - s.r).norm() < 1e-15);
        let back = displace(&displace(&s, 0.37), -0.37);
        assert!(dist(&back, &s) < 1e-15);
    }

    #[test]
    fn compose_with_identity() {
        let s = displace(&delta(2.0, 1.4), 0.3);
        let id = ScatteringMatrix::identity(k(1.4));
        assert!(dist(&compose(&s, &id).unwrap(), &s) < 1e-16);
        assert!(dist(&compose(&id, &s).unwrap(), &s) < 1e-16);
    }

    #[test]
    fn compose_matches_transfer_product() {
        let lattice = delta_lattice(1.0, 1.0, 2);
        let s = delta(1.0, 1.0);
        let composed = compose(&s, &displace(&s, 1.0)).unwrap();
        assert!(dist(&composed, &transfer_chain(&lattice, 1.0, 2)) < 1e-12);
    }

    #[test]
    fn compose_rejects_mismatched_k() {
        assert!(compose(&delta(1.0, 1.0), &delta(1.0, 2.0)).is_err());
    }

    #[test]
    fn compose_is_associative_for_delta_cells() {
        let kv = 1.3;
        let a = displace(&delta(0.7, kv), 0.0);
        let b = displace(&delta(-1.9, kv), 0.8);
        let c = displace(&delta(3.1, kv), 2.1);
        let left = compose(&compose(&a, &b).unwrap(), &c).unwrap();
        let right = compose(&a, &compose(&b, &c).unwrap()).unwrap();
        assert!(dist(&left, &right) < 1e-12);
    }

    #[test]
    fn free_chain_stays_free() {
        let state = chain_amplitudes(&Lattice::new(PotentialCell::free(), 1.0, 20).unwrap(), k(0.8)).unwrap();
        for e in state.entries() {
            assert!((e.s.t - 1.0).norm() < 1e-15);
            assert_eq!(e.s.l.norm(), 0.0);
            assert_eq!(e.s.r.norm(), 0.0);
        }
        let left = chain_amplitudes_addleft(&Lattice::new(PotentialCell::free(), 1.0, 20).unwrap(), k(0.8)).unwrap();
        assert!(left.entries().iter().all(|e| e.s.r.norm() == 0.0));
    }

    #[test]
    fn two_cells_equal_one_composition() {
        let s = delta(1.0, 1.0);
        let expected = compose(&s, &displace(&s, 1.0)).unwrap();
        let state = chain_amplitudes(&delta_lattice(1.0, 1.0, 2), k(1.0)).unwrap();
        assert!(dist(&state.entry(2).unwrap().s, &expected) < 1e-13);
        assert_eq!(state.entry(1).unwrap().s, s);
        assert!(state.entry(0).is_none());
    }

    #[test]
    fn recurrence_matches_left_associated_composition() {
        let cell = PotentialCell::piecewise(vec![
            Segment { width: 0.2, height: 2.0 },
            Segment { width: 0.3, height: -1.0 },
        ])
        .unwrap();
        let lattice = Lattice::new(cell.clone(), 1.1, 24).unwrap();
        for &kv in &[0.5, 1.7, 3.3] {
            let state = chain_amplitudes(&lattice, k(kv)).unwrap();
            let s = cell_smatrix(&cell, k(kv)).unwrap();
            let mut acc = s;
            for n in 2..=24 {
                acc = compose(&acc, &displace(&s, (n - 1) as f64 * 1.1)).unwrap();
                assert!(dist(&state.entry(n).unwrap().s, &acc) < 1e-11, "k = {kv}, n = {n}");
            }
        }
    }

    #[test]
    fn recurrence_matches_transfer_oracle() {
        let lattice = delta_lattice(0.8, 1.0, 12);
        for &kv in &[0.6, 1.9, 4.2] {
            let state = chain_amplitudes(&lattice, k(kv)).unwrap();
            for n in [1, 5, 12] {
                let oracle = transfer_chain(&lattice, kv, n);
                assert!(dist(&state.entry(n).unwrap().s, &oracle) < 1e-10);
            }
        }
    }

    #[test]
    fn addleft_path_agrees() {
        let lattice = delta_lattice(1.0, 1.0, 32);
        let right = chain_amplitudes(&lattice, k(1.3)).unwrap();
        let left = chain_amplitudes_addleft(&lattice, k(1.3)).unwrap();
        assert_eq!(left.entry(1).unwrap().s.r, cell_smatrix(lattice.cell(), k(1.3)).unwrap().r);
        for (a, b) in right.entries().iter().zip(left.entries()) {
            assert!(dist(&a.s, &b.s) < 1e-10);
        }
    }

    #[test]
    fn gap_chain_matches_chebyshev() {
        let lattice = delta_lattice(5.0, 1.0, 8);
        let state = chain_amplitudes(&lattice, k(1.0)).unwrap();
        let cheb = chebyshev_transmission(state.cell(), 1.0, 8).unwrap();
        assert!((state.last().transmission() - cheb).abs() < 1e-10);
        assert!((state.last().s.transmission() - cheb).abs() < 1e-10);
        let z = bloch_parameter(state.cell(), 1.0).unwrap();
        assert!((z - 4.748).abs() < 1e-3);
    }

    #[test]
    fn deep_gap_keeps_polar_phase() {
        let lattice = delta_lattice(5.0, 1.0, 600);
        let state = chain_amplitudes(&lattice, k(1.0)).unwrap();
        let last = state.last();
        assert_eq!(last.s.t.norm(), 0.0);
        assert!(last.t_polar.ln_modulus.is_finite());
        assert!(last.t_polar.ln_modulus < -1000.0);
        assert!((last.s.l.norm() - 1.0).abs() < 1e-12);
        for e in state.entries() {
            assert!(unitarity_defect(&e.s) < 1e-10);
        }
    }

    #[test]
    fn chain_entries_remain_unitary_and_phase_consistent() {
        let lattice = Lattice::new(PotentialCell::barrier(3.0, 0.4).unwrap(), 1.0, 64).unwrap();
        for i in 0..50 {
            let kv = 0.1 + 0.2 * i as f64;
            let state = chain_amplitudes(&lattice, k(kv)).unwrap();
            for e in state.entries() {
                assert!(unitarity_defect(&e.s) < 1e-10);
                if e.s.t.norm() > 1e-300 && e.s.l.norm() > 1e-300 {
                    assert!(phase_relation_residual(&e.s).unwrap() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn bloch_parameter_values() {
        let free = ScatteringMatrix::identity(k(2.0));
        assert!((bloch_parameter(&free, 0.7).unwrap() - (1.4f64).cos()).abs() < 1e-16);
        for &(g, kv, a) in &[(5.0, 1.0, 1.0), (1.0, 0.3, 2.0), (-2.0, 4.0, 0.5)] {
            let z = bloch_parameter(&delta(g, kv), a).unwrap();
            let kp = (kv * a).cos() + g / kv * (kv * a).sin();
            assert!((z - kp).abs() < 1e-12);
        }
        let z = bloch_parameter(&delta(5.0, PI), 1.0).unwrap();
        assert!((z + 1.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn displacement_preserves_moduli_and_unitarity(
            g in -5.0f64..5.0, kv in 0.1f64..10.0, a in -10.0f64..10.0
        ) {
            let s = delta(g, kv);
            let d = displace(&s, a);
            prop_assert_eq!(d.t, s.t);
            prop_assert!((d.l.norm() - s.l.norm()).abs() < 1e-15);
            prop_assert!((d.r.norm() - s.r.norm()).abs() < 1e-15);
            prop_assert!(unitarity_defect(&d) < 1e-14);
        }

        #[test]
        fn compose_is_associative(
            g in prop::array::uniform3(-4.0f64..4.0),
            x in prop::array::uniform3(0.0f64..3.0),
            v0 in 0.0f64..3.0,
            kv in 0.2f64..6.0,
        ) {
            let cells = [
                displace(&delta(g[0], kv), x[0]),
                displace(&cell_smatrix(&PotentialCell::barrier(v0, 0.5).unwrap(), k(kv)).unwrap(), 3.0 + x[1]),
                displace(&delta(g[2], kv), 7.0 + x[2]),
            ];
            let left = compose(&compose(&cells[0], &cells[1]).unwrap(), &cells[2]).unwrap();
            let right = compose(&cells[0], &compose(&cells[1], &cells[2]).unwrap()).unwrap();
            prop_assert!(dist(&left, &right) < 1e-12);
            prop_assert!(unitarity_defect(&left) < 1e-12);
        }
    }
}
