//! From coincidences to the physics quantities: conditional path
//! probabilities, fringe visibilities and the complementarity sweep.

mod fit;
mod predict;
mod probabilities;
mod runner;
mod sweep;
mod tally;

pub use fit::{
    fit_fringe, phase_difference, pi_shifted, subtract_background, subtract_estimated_accidentals, FringeFit,
    FringePoint, FringeScan,
};
pub use predict::{condition_drive, predict_endpoints, Prediction};
pub use probabilities::{conditional_probabilities, path_probabilities, probabilities_from_counts, PathProbabilities};
pub use runner::{
    calibrate_state, erasure_result, fringe_visibility, measure_path_probabilities, reconstruct, scan_phases,
    ErasureResult, Runner, SimulationRunner, VisibilityMeasurement,
};
pub use sweep::{
    bound_curve, complementarity_sweep, consistent_with_curve, write_sweep_csv, ComplementarityPoint,
};
pub use tally::{EnvCondition, Estimate, StepTally, Tally};
