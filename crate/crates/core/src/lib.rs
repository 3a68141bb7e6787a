//! Overlap times of customer pairs in the two-station M/M/∞ tandem queue:
//! closed forms, Monte Carlo estimators and independent verification paths.

pub mod analytic;
pub mod error;
pub mod model;
pub mod oracle;
pub mod sampling;
pub mod simulator;
pub mod specfun;
pub mod tables;

pub use analytic::{
    conjecture_joint_tail, cross_pair_tail, cross_pair_tail_with, joint_same_pair_tail,
    marginal_station1_tail, marginal_station2_tail, moments, rectangle_probabilities, sum_tail,
    CrossPairOptions, CrossPairValue, LedgerFlag, MomentSet, RectangleProbs, Variant,
};
pub use error::{Error, Result};
pub use oracle::{mc_event_probability, quadrature_cross_moment, EventSpec, Side};
pub use simulator::{
    conjecture_check, estimate_cross_pair_tail, estimate_moments, estimate_sum_tail, extract_overlap,
    simulate_tandem, ConjectureReport, MomentEstimate, SimConfig, TailEstimate, Trajectory,
};
pub use model::{
    classify, classify_case, validate_params, CaseId, CaseOrdering, PairGeometry, RateParams,
    Regime, Threshold,
};
