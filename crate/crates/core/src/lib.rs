//! Simulation and analytical prediction of n-tag systems.
//!
//! A tag system repeatedly removes n symbols from the front of a queue and
//! appends the production the removed tuple maps to. Its evolution splits
//! naturally into epochs: an epoch ends once every symbol present at its
//! start has been consumed. This crate
//!
//! * simulates tag systems step by step and reports per-epoch observables
//!   ([`simulator`]),
//! * predicts the per-epoch growth rate, symbol densities and queue length
//!   directly from the rules by evolving the distribution of n-tuples on the
//!   queue ([`predictor`]),
//! * checks predictions against seeded Monte-Carlo trials ([`harness`]).

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distribution;
pub mod harness;
pub mod predictor;
pub mod render;
pub mod report;
pub mod rules;
pub mod simulator;
pub mod symbol;

pub use distribution::{normalize, DistributionError, Normalize, ProductionDistribution, TupleDistribution};
pub use predictor::{
    expected_growth, expected_production_length, next_tuple_distribution, next_tuple_distribution_with, predict_epochs,
    predict_epochs_with, predict_length_at_step, prefix_probability, production_distribution, project_length,
    selection_distribution, symbol_densities, EmptyProductions, EpochPrediction, LengthProjection, PredictError,
    PredictOptions, Prediction, SelectionDistribution,
};
pub use rules::{format_rules, parse_rules, validate_rules, RuleError, RuleSet};
pub use simulator::{
    measure_tuple_distribution, random_queue, run_epochs, EpochReport, EpochRun, Halted, SimulationState,
};
pub use symbol::{Alphabet, Symbol, Word};
