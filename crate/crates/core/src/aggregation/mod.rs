//! The twelve aggregation methods and the collective knapsack they feed.
//!
//! Direct methods turn each project's row of evaluations into a collective
//! value `v′_i`. Indirect methods score qualities `q_ij = v_ij / w_i` into
//! `q′_i`, and the knapsack then maximizes `Σ q′_i w_i x_i`.

pub mod direct;
pub mod indirect;

use std::fmt;

use crate::error::{Error, Result};
use crate::knapsack::KnapsackInstance;
use crate::model::{EvaluationMatrix, ExpertisePanel, ProjectSet, Rational};

pub use direct::{
    aggregate_min_variance, aggregate_order_weighted, min_variance_weights, order_weights,
    pick_delegate, pick_individual, trim_count, OrderScheme, OrderWeights,
};
pub use indirect::{qualities, scale_column, scale_qualities, score_borda, score_yes_no, ScaleScheme};

pub const DEFAULT_ALPHA: f64 = 0.2;
pub const DEFAULT_CUTOFF: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregationMethod {
    ArithmeticMean,
    Median,
    TrimmedMean { alpha: f64 },
    WinsorizedMean { alpha: f64 },
    MinimumVariance,
    Individual,
    Delegation,
    BordaCount,
    YesNoVoting { cutoff: f64 },
    MinMaxScaling,
    ZScore,
    StdDevScaling,
}

impl AggregationMethod {
    pub const NAMES: [&'static str; 12] = [
        "arithmetic_mean",
        "median",
        "trimmed_mean",
        "winsorized_mean",
        "min_variance",
        "individual",
        "delegation",
        "borda",
        "yes_no",
        "minmax",
        "zscore",
        "stddev_scaling",
    ];

    /// All twelve methods in canonical order.
    pub fn all(alpha: f64, cutoff: f64) -> Vec<Self> {
        Self::NAMES
            .iter()
            .map(|n| Self::from_name(n, alpha, cutoff).expect("known name"))
            .collect()
    }

    pub fn name(&self) -> &'static str {
        use AggregationMethod::*;
        match self {
            ArithmeticMean => "arithmetic_mean",
            Median => "median",
            TrimmedMean { .. } => "trimmed_mean",
            WinsorizedMean { .. } => "winsorized_mean",
            MinimumVariance => "min_variance",
            Individual => "individual",
            Delegation => "delegation",
            BordaCount => "borda",
            YesNoVoting { .. } => "yes_no",
            MinMaxScaling => "minmax",
            ZScore => "zscore",
            StdDevScaling => "stddev_scaling",
        }
    }

    /// Looks up a method by config name; `alpha` and `cutoff` fill the
    /// parameterized variants.
    pub fn from_name(name: &str, alpha: f64, cutoff: f64) -> Option<Self> {
        use AggregationMethod::*;
        Some(match name {
            "arithmetic_mean" => ArithmeticMean,
            "median" => Median,
            "trimmed_mean" => TrimmedMean { alpha },
            "winsorized_mean" => WinsorizedMean { alpha },
            "min_variance" => MinimumVariance,
            "individual" => Individual,
            "delegation" => Delegation,
            "borda" => BordaCount,
            "yes_no" => YesNoVoting { cutoff },
            "minmax" => MinMaxScaling,
            "zscore" => ZScore,
            "stddev_scaling" => StdDevScaling,
            _ => return None,
        })
    }

    pub fn is_direct(&self) -> bool {
        use AggregationMethod::*;
        matches!(
            self,
            ArithmeticMean
                | Median
                | TrimmedMean { .. }
                | WinsorizedMean { .. }
                | MinimumVariance
                | Individual
                | Delegation
        )
    }

    /// Checks parameters that depend on the panel size.
    pub fn validate(&self, n_groups: usize) -> Result<()> {
        match *self {
            AggregationMethod::TrimmedMean { alpha } | AggregationMethod::WinsorizedMean { alpha } => {
                if !(0.0..0.5).contains(&alpha) {
                    return Err(Error::invalid("alpha", format!("{alpha} is not in [0, 0.5)")));
                }
                let p = trim_count(alpha, n_groups);
                if 2 * p >= n_groups {
                    return Err(Error::invalid(
                        "alpha",
                        format!("trimming {p} per tail leaves nothing of {n_groups} groups"),
                    ));
                }
            }
            AggregationMethod::YesNoVoting { cutoff } if !cutoff.is_finite() => {
                return Err(Error::invalid("yes_no_cutoff", "must be finite"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Order-statistic scheme for the order-weighted methods.
    pub fn order_scheme(&self, n_groups: usize) -> Option<OrderScheme> {
        match *self {
            AggregationMethod::ArithmeticMean => Some(OrderScheme::Mean),
            AggregationMethod::Median => Some(OrderScheme::Median),
            AggregationMethod::TrimmedMean { alpha } => {
                Some(OrderScheme::Trimmed(trim_count(alpha, n_groups)))
            }
            AggregationMethod::WinsorizedMean { alpha } => {
                Some(OrderScheme::Winsorized(trim_count(alpha, n_groups)))
            }
            _ => None,
        }
    }
}

impl fmt::Display for AggregationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    /// Collective values `v′_i`.
    Direct,
    /// Scores `q′_i`; the knapsack weighs them by cost.
    Score,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedValues {
    pub kind: ValueKind,
    pub entries: Vec<f64>,
}

impl AggregatedValues {
    /// Knapsack objective coefficients: `v′_i`, or `q′_i·w_i` for scores.
    pub fn item_values(&self, costs: &[f64]) -> Vec<f64> {
        match self.kind {
            ValueKind::Direct => self.entries.clone(),
            ValueKind::Score => self.entries.iter().zip(costs).map(|(q, w)| q * w).collect(),
        }
    }
}

/// Per-replica information-error draws.
#[derive(Debug, Clone, Copy, Default)]
pub struct InfoErrorDraws<'a> {
    /// Delegate group chosen for each project, replacing the nearest-level rule.
    pub delegates: Option<&'a [usize]>,
    /// Projects whose minimum-variance estimate falls back to the arithmetic mean.
    pub degraded: Option<&'a [bool]>,
}

pub fn collective_values(
    method: &AggregationMethod,
    evals: &EvaluationMatrix,
    projects: &ProjectSet,
    panel: &ExpertisePanel,
) -> Result<AggregatedValues> {
    collective_values_with(method, evals, projects, panel, InfoErrorDraws::default())
}

pub fn collective_values_with(
    method: &AggregationMethod,
    evals: &EvaluationMatrix,
    projects: &ProjectSet,
    panel: &ExpertisePanel,
    draws: InfoErrorDraws<'_>,
) -> Result<AggregatedValues> {
    let n = evals.n_projects();
    let n_groups = evals.n_groups();
    if n != projects.count() || n_groups != panel.size() {
        return Err(Error::DimensionMismatch(format!(
            "evaluations are {n}×{n_groups}, projects {} and groups {}",
            projects.count(),
            panel.size()
        )));
    }
    method.validate(n_groups)?;
    let direct = |entries| {
        Ok(AggregatedValues {
            kind: ValueKind::Direct,
            entries,
        })
    };
    let score = |entries| {
        Ok(AggregatedValues {
            kind: ValueKind::Score,
            entries,
        })
    };
    if let Some(scheme) = method.order_scheme(n_groups) {
        let z = OrderWeights::new(n_groups, scheme)?;
        return direct((0..n).map(|i| z.apply(evals.row(i))).collect());
    }
    let as_f64 = |s: Vec<u64>| s.into_iter().map(|x| x as f64).collect::<Vec<_>>();
    match *method {
        AggregationMethod::MinimumVariance => {
            let mut entries = Vec::with_capacity(n);
            for i in 0..n {
                let degraded = draws.degraded.is_some_and(|d| d[i]);
                entries.push(if degraded {
                    aggregate_order_weighted(evals.row(i), OrderScheme::Mean)?
                } else {
                    aggregate_min_variance(evals.row(i), evals.sigma_row(i))?
                });
            }
            direct(entries)
        }
        AggregationMethod::Individual => {
            let (t_min, t_max) = projects.type_range();
            let k = pick_individual(panel, t_min, t_max);
            direct((0..n).map(|i| evals.value(i, k)).collect())
        }
        AggregationMethod::Delegation => direct(
            projects
                .types()
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let k = match draws.delegates {
                        Some(d) => d[i],
                        None => pick_delegate(t, panel),
                    };
                    evals.value(i, k)
                })
                .collect(),
        ),
        AggregationMethod::YesNoVoting { cutoff } => {
            score(as_f64(score_yes_no(evals.values(), cutoff)))
        }
        _ => {
            let q = qualities(evals.values(), &projects.costs_f64())?;
            match *method {
                AggregationMethod::BordaCount => score(as_f64(score_borda(&q))),
                AggregationMethod::MinMaxScaling => score(scale_qualities(&q, ScaleScheme::MinMax)?),
                AggregationMethod::ZScore => score(scale_qualities(&q, ScaleScheme::ZScore)?),
                AggregationMethod::StdDevScaling => score(scale_qualities(&q, ScaleScheme::StdDev)?),
                _ => unreachable!("every method is handled above"),
            }
        }
    }
}

/// Collective knapsack for `method`: item values from the aggregate, weights
/// and capacity from the projects and budget.
pub fn collective_instance(
    method: &AggregationMethod,
    evals: &EvaluationMatrix,
    projects: &ProjectSet,
    panel: &ExpertisePanel,
    budget: Rational,
) -> Result<KnapsackInstance> {
    let aggregated = collective_values(method, evals, projects, panel)?;
    KnapsackInstance::new(
        aggregated.item_values(&projects.costs_f64()),
        projects.costs().to_vec(),
        budget,
    )
}
