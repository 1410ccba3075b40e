//! Monte Carlo generation of the two labs' raw detection streams.

mod config;
mod eom;
mod qrng;
mod seeds;
mod simulate;

pub use config::{ChannelConfig, EomConfig, EomMode, QrngConfig, SourceConfig};
pub use eom::{duty_fractions, eom_state_at, EomState};
pub use qrng::{autocorrelation, qrng_stream, qrng_stream_with_rng, QrngBits};
pub use seeds::{derive_seed, subsystem_rng, Subsystem};
pub use simulate::{simulate_run, EmissionRecord, Experiment, RunOutput, RunPlan, RunStats, ScheduleStep};
