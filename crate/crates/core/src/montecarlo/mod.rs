//! Deterministic parallel Monte Carlo: plain and conjugate-measure tail
//! estimates, Kolmogorov distances to the normal law, constant calibration
//! and per-path checks of the tilting inequalities.
//!
//! Path `i` of a run always uses the counter streams of `(seed, i)`, and
//! chunk summaries are combined in chunk order, so results depend on
//! `(seed, chunk_size)` only.

mod calibrate;
mod clt;
mod distance;
mod engine;
mod intervals;
mod sweep;
mod tail;

pub use calibrate::{
    calibrate_constant, calibrate_from_values, CalibrationEnvelope, CalibrationPoint, CalibrationReport,
};
pub use clt::{conjugate_clt_check, CltPoint, CltReport};
pub use distance::{be_distance_from_samples, estimate_be_distance, BEDistanceEstimate};
pub use engine::{SamplingMode, SimulationConfig, DEFAULT_CHUNK_SIZE, DEFAULT_CONFIDENCE};
pub use intervals::{clopper_pearson, dkw_band, normal_critical};
pub use sweep::{estimate_z_mean, lemma_sweep, LemmaSweep, Violation, ZMean};
pub use tail::{
    default_tilt, estimate_tail_is, estimate_tail_plain, estimate_tail_plain_many, EstimateMethod, TailEstimate,
};
