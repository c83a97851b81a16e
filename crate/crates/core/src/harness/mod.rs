//! Benchmark harness: data ingestion, synthetic signals, noise injection,
//! SNR measurement and sweeps.

pub mod io;
pub mod noise;
pub mod sweep;
pub mod synth;

pub use noise::{add_white_noise, snr_db, NoiseModel, RNG_ALGORITHM};
pub use sweep::{run_sweep, ExperimentResult, ExperimentSpec};
pub use synth::synthesize_smooth_signal;
