//! Relativistic event geometry of the lab arrangements.
//!
//! Events are labelled `E_se` (pair emission), `C_e` (basis choice), `P_e`
//! (environment polarization projection) and `I_s` (everything the system
//! photon does inside the interferometer). Each is a point or a
//! fixed-position duration on a collinear lab axis.

mod event;
mod scenario;
mod verify;

pub use event::{
    classify_interval, min_required_signal_speed, relate_extended, required_signal_speed, ExtendedEvent,
    IntervalClass, Relation, SpacetimeEvent, GUIDED_SPEED, LIGHTLIKE_TOLERANCE_S, SPEED_OF_LIGHT,
};
pub use scenario::{
    build_scenario, eval_time_expr, EventSpec, ExpectedRelation, Medium, ScenarioConfig, ScenarioGeometry,
    SegmentSpec, BUNDLED_SCENARIOS,
};
pub use verify::{verify_scenario, RelationCheck, RelationMatrix, VerificationReport, TABLE_PAIRS};
