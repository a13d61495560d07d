//! Conformal prediction sets for node classification.
//!
//! Calibrates Adaptive Prediction Sets either over a whole calibration
//! pool (split conformal) or over the k-hop graph neighbourhood of each
//! test node with non-exchangeable weighted quantiles. Includes graph
//! utilities, a stochastic-block-model data generator and an experiment
//! harness that measures coverage and set size over repeated splits.

pub mod aps;
pub mod conformal;
pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod rng;
pub mod synthetic;

pub use aps::{ProbabilityMatrix, RankedRow};
pub use conformal::{
    CalibrationPool, EmptyNeighborhoodPolicy, PredictionSet, Predictor, QuantileThreshold,
    ScoreSet, Scoring, WeightScheme,
};
pub use error::{Error, Result};
pub use graph::{Graph, HopNeighborhood, NodeLabels};
pub use harness::{Dataset, ExperimentConfig, ExperimentReport, Method, Metrics};
