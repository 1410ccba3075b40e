//! Exact (non-stochastic) quantum predictions for the hybrid-entangled pair.

mod complementarity;
mod interferometer;
mod optics;
mod state;

pub use complementarity::{
    complementarity_bound, derive_correction_factors, visibility_from_extrema, welcher_weg_parameter,
    ComplementarityFactors,
};
pub use interferometer::{
    conditional_fringes, joint_probabilities, Blocked, ConditionalFringes, EnvOutcome, InterferometerConfig,
    ProbabilityTable, SystemOutcome,
};
pub use optics::{chain_basis, extinction_contrast, ChainElement, MeasurementChain, PolarizationBasis, Retarder, Vector2c};
pub use state::{make_hybrid_state, HybridState, Matrix2c, Matrix4c, A_H, A_V, B_H, B_V, C64};
