//! Observables derived from chain amplitudes.

pub mod asymptotic;
pub mod bands;
pub mod delay;
pub mod hartman;
pub mod packet;

pub use asymptotic::{asymptotic_phase_fit, AsymptoticFit};
pub use bands::{band_classify, BandClass, BandVerdict, DEFAULT_EDGE_TOL};
pub use delay::{
    delays_at, phase_derivative, sample_phase_curves, time_delay, time_delays, DelayRecord,
    FiniteDifference, PhaseTriple, DEFAULT_FD_STEP,
};
pub use hartman::{hartman_scan, traversal_time, HartmanRecord, HartmanScan};
pub use packet::{averaged_transmission, wavepacket_average};
