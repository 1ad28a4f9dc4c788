//! Scattering by a finite chain of identical, equally spaced potential cells.
//!
//! The chain S-matrix is built two ways, by the multiple-reflection
//! recurrences in [`chain`] and by the Chebyshev closed form for `|t^(N)|²`,
//! and cross-checked against exact transfer-matrix products from [`cells`].
//! [`analysis`] turns the amplitudes into time-delays, traversal times,
//! band verdicts and packet-averaged transmission.
//!
//! Natural units are used throughout: `ħ = m = 1`, `E = k²/2`, `v = k`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cells;
pub mod chain;
pub mod error;
pub mod scattering;

pub use cells::{
    cell_smatrix, smatrix_to_transfer, transfer_oracle, transfer_to_smatrix, CellShape, Lattice,
    PotentialCell, Segment, TransferMatrix,
};
pub use chain::{
    bloch_parameter, chain_amplitudes, chain_amplitudes_addleft, chebyshev_transmission,
    chebyshev_u, compose, displace, ChainEntry, ChainState, PolarAmplitude,
};
pub use error::{Result, ScatterError};
pub use scattering::{
    phase_relation_residual, principal_phases, unitarity_defect, unwrap, PhaseCurve, PhaseLabel,
    PrincipalPhases, ScatteringMatrix, WaveNumber, MODULUS_FLOOR,
};
