//! Finite-setting Leggett-type inequalities for polarization-entangled
//! photon pairs.
//!
//! The crate evaluates the inequality family for any number `N >= 2` of
//! settings per plane, predicts the quantum value for Bell-diagonal states,
//! checks the nonlocal-realistic bound against an adversarial search over
//! Malus-law subensembles, and simulates or analyzes coincidence counts.
//!
//! Geometry, states, the inequality and the hidden-variable search are
//! generic over [`Real`] (`f32` or `f64`); the `*F64` / `*F32` aliases below
//! name the concrete instantiations. Count statistics are `f64` only.

pub mod error;
pub mod expsim;
pub mod geometry;
pub mod hvmodel;
pub mod inequality;
pub mod optim;
pub mod quantum;
pub mod scalar;

pub use error::{Error, Result};
pub use expsim::{
    analyze_counts, estimate, read_counts_csv, run_experiment, simulate_pair, write_counts_csv,
    CountRecord, CountRow, EstimatedCorrelation, ExperimentConfig, PairEstimate, RunReport,
};
pub use geometry::{
    angle_between, canonical_layout, rotate_in_plane, DistinctPairs, GroupId, MeasurementLayout,
    PlaneFrame, SettingPair, Slot, UnitVec3,
};
pub use hvmodel::{
    correlation_interval, cosine_sum_min, malus_marginal, relaxed_max_s, relaxed_s,
    write_landscape, CorrelationInterval, SearchParams, SearchResult, Subensemble,
};
pub use inequality::{
    bound, bound_normalized, critical_visibility, evaluate, evaluate_distinct, k_factor,
    optimal_angle, optimal_angle_numeric, quantum_s, CorrelationSource, Criterion,
    EvaluationReport, LeggettInequality, Optimum, Term,
};
pub use quantum::{OutcomeProbs, PolarizationState};
pub use scalar::Real;

pub type UnitVec3F64 = UnitVec3<f64>;
pub type UnitVec3F32 = UnitVec3<f32>;
pub type PlaneFrameF64 = PlaneFrame<f64>;
pub type PlaneFrameF32 = PlaneFrame<f32>;
pub type SettingPairF64 = SettingPair<f64>;
pub type SettingPairF32 = SettingPair<f32>;
pub type MeasurementLayoutF64 = MeasurementLayout<f64>;
pub type MeasurementLayoutF32 = MeasurementLayout<f32>;
pub type PolarizationStateF64 = PolarizationState<f64>;
pub type PolarizationStateF32 = PolarizationState<f32>;
pub type LeggettInequalityF64 = LeggettInequality<f64>;
pub type LeggettInequalityF32 = LeggettInequality<f32>;
pub type EvaluationReportF64 = EvaluationReport<f64>;
pub type EvaluationReportF32 = EvaluationReport<f32>;
pub type SubensembleF64 = Subensemble<f64>;
pub type SubensembleF32 = Subensemble<f32>;
