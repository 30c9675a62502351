//! Collective decision-making under a budget.
//!
//! Stakeholder groups with different expertise evaluate a set of projects
//! with Gaussian perception noise. The evaluations are aggregated by one of
//! twelve direct or indirect methods, a collective 0/1 knapsack is filled from
//! the aggregate, and the portfolio is scored by the projects' intrinsic
//! values. Performance is estimated by Monte Carlo for any number of
//! projects, and by quadrature for the two-project case.
//!
//! Module map:
//!
//! * [`model`]: projects, expertise panels, cost structures, noisy sampling.
//! * [`knapsack`]: exact dynamic-programming solver and a brute-force oracle.
//! * [`aggregation`]: the twelve aggregation methods.
//! * [`simulator`]: replicas, performance estimates, information errors, sweeps.
//! * [`analytic`]: closed forms and quadrature for two projects.
//! * [`cli`]: config files, CSV output, SVG plots.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregation;
pub mod analytic;
pub mod cli;
pub mod error;
pub mod knapsack;
pub mod model;
pub mod rng;
pub mod simulator;
pub mod stats;

pub use aggregation::{AggregatedValues, AggregationMethod};
pub use error::{Error, Result};
pub use knapsack::{KnapsackInstance, Selection};
pub use model::{
    CostStructure, EvaluationMatrix, ExpertisePanel, Matrix, NoiseModel, ProjectSet, Rational,
};
pub use rng::RandomSource;
pub use simulator::{PerformanceEstimate, ScenarioConfig, SelectionRule, TieBreak};
