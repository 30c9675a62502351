//! Monte Carlo estimation of portfolio performance.
//!
//! A replica draws project types uniformly on `[t_min, t_max)`, samples the
//! panel's noisy evaluations, aggregates them, fills the collective knapsack
//! and scores the selection by the projects' true values.

use rand::seq::SliceRandom;
use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{self, pick_delegate, AggregationMethod, InfoErrorDraws};
use crate::error::{Error, Result};
use crate::knapsack::{ScaledWeights, DEFAULT_MAX_CELLS};
use crate::model::{
    build_panel, make_costs, rational_to_f64, sample_evaluations, CostStructure, ExpertisePanel,
    NoiseModel, ProjectSet, Rational,
};
use crate::rng::{RandomSource, Stream};
use crate::stats::mean_and_std_error;

/// How the collective portfolio is chosen from the item values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Optimal 0/1 knapsack; non-positive items are left out.
    #[default]
    Knapsack,
    /// Exactly one fitting item, the one with the largest collective value
    /// whatever its sign. Matches the two-project analysis, where one of the
    /// two projects is always funded.
    BestSingle,
}

impl SelectionRule {
    pub fn name(self) -> &'static str {
        match self {
            SelectionRule::Knapsack => "knapsack",
            SelectionRule::BestSingle => "best_single",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [SelectionRule::Knapsack, SelectionRule::BestSingle]
            .into_iter()
            .find(|r| r.name() == s)
    }
}

/// Which of several equally valued portfolios is funded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Items earlier in project order win.
    Index,
    /// Items are scanned in a fresh random order in every replica.
    #[default]
    Random,
}

impl TieBreak {
    pub fn name(self) -> &'static str {
        match self {
            TieBreak::Index => "index",
            TieBreak::Random => "random",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [TieBreak::Index, TieBreak::Random].into_iter().find(|r| r.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_projects: usize,
    pub n_groups: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub e_m: f64,
    pub beta: f64,
    pub cost_kind: CostStructure,
    /// Explicit costs; overrides `cost_kind` when set.
    pub costs: Option<Vec<Rational>>,
    /// Explicit project values; `v_i = i` when unset.
    pub values: Option<Vec<f64>>,
    pub budget: Rational,
    pub method: AggregationMethod,
    pub kappa: f64,
    pub info_error: f64,
    pub samples: usize,
    pub master_seed: u64,
    pub selection: SelectionRule,
    pub ties: TieBreak,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_projects: 30,
            n_groups: 3,
            t_min: 0.0,
            t_max: 10.0,
            e_m: 5.0,
            beta: 0.0,
            cost_kind: CostStructure::Uniform,
            costs: None,
            values: None,
            budget: Rational::new(15, 1),
            method: AggregationMethod::ArithmeticMean,
            kappa: 1.0,
            info_error: 0.0,
            samples: 20_000,
            master_seed: 0,
            selection: SelectionRule::Knapsack,
            ties: TieBreak::Random,
        }
    }
}

impl ScenarioConfig {
    /// Two unit-cost projects worth `a` and `b` with room for one of them.
    pub fn two_project(a: f64, b: f64) -> Self {
        Self {
            n_projects: 2,
            values: Some(vec![a, b]),
            budget: Rational::new(1, 1),
            selection: SelectionRule::BestSingle,
            ..Self::default()
        }
    }

    pub fn project_values(&self) -> Vec<f64> {
        match &self.values {
            Some(v) => v.clone(),
            None => (1..=self.n_projects).map(|i| i as f64).collect(),
        }
    }

    pub fn project_costs(&self) -> Vec<Rational> {
        match &self.costs {
            Some(c) => c.clone(),
            None => make_costs(self.cost_kind, self.n_projects),
        }
    }

    pub fn panel(&self) -> Result<ExpertisePanel> {
        build_panel(self.e_m, self.beta, self.n_groups)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_projects == 0 {
            return Err(Error::invalid("n_projects", "must be >= 1"));
        }
        if self.n_groups == 0 {
            return Err(Error::invalid("n_groups", "must be >= 1"));
        }
        if !(self.t_min < self.t_max) || !self.t_min.is_finite() || !self.t_max.is_finite() {
            return Err(Error::invalid(
                "t_min",
                format!("need finite t_min < t_max, got [{}, {}]", self.t_min, self.t_max),
            ));
        }
        if !self.e_m.is_finite() {
            return Err(Error::invalid("e_m", "must be finite"));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::invalid("beta", format!("{} is not >= 0", self.beta)));
        }
        if self.budget <= Rational::new(0, 1) {
            return Err(Error::invalid("budget", "must be > 0"));
        }
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::invalid("kappa", format!("{} is not >= 0", self.kappa)));
        }
        if !(0.0..=1.0).contains(&self.info_error) {
            return Err(Error::invalid("r", format!("{} is not in [0, 1]", self.info_error)));
        }
        if self.samples == 0 {
            return Err(Error::invalid("samples", "must be >= 1"));
        }
        if let Some(v) = &self.values {
            if v.len() != self.n_projects {
                return Err(Error::invalid(
                    "values",
                    format!("{} values for {} projects", v.len(), self.n_projects),
                ));
            }
            if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::invalid("values", "every value must be > 0"));
            }
        }
        if let Some(c) = &self.costs {
            if c.len() != self.n_projects {
                return Err(Error::invalid(
                    "costs",
                    format!("{} costs for {} projects", c.len(), self.n_projects),
                ));
            }
            if c.iter().any(|w| *w <= Rational::new(0, 1)) {
                return Err(Error::invalid("costs", "every cost must be > 0"));
            }
        }
        self.method.validate(self.n_groups)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl PerformanceEstimate {
    /// `|a − b|` in units of the combined standard error.
    pub fn z_distance(&self, other: &PerformanceEstimate) -> f64 {
        let se = self.std_error.hypot(other.std_error);
        (self.mean - other.mean).abs() / se
    }
}

/// Optimal delegate with probability `1 − (N_s − 1)r/N_s`; otherwise one of
/// the other groups, uniformly.
pub fn apply_info_error_delegation<R: RngExt + ?Sized>(
    optimal: usize,
    n_groups: usize,
    r: f64,
    rng: &mut R,
) -> usize {
    if r == 0.0 || n_groups == 1 {
        return optimal;
    }
    let keep = 1.0 - (n_groups - 1) as f64 * r / n_groups as f64;
    if rng.random::<f64>() < keep {
        return optimal;
    }
    let k = rng.random_range(0..n_groups - 1);
    if k >= optimal {
        k + 1
    } else {
        k
    }
}

/// `true` when the project's minimum-variance estimate degrades to the mean.
pub fn apply_info_error_minvar<R: RngExt + ?Sized>(r: f64, rng: &mut R) -> bool {
    r > 0.0 && rng.random::<f64>() < r
}

/// A validated scenario with everything that does not change between
/// replicas computed once.
#[derive(Debug, Clone)]
pub struct Scenario {
    config: ScenarioConfig,
    panel: ExpertisePanel,
    values: Vec<f64>,
    costs: Vec<Rational>,
    costs_f64: Vec<f64>,
    scaled: ScaledWeights,
    noise: NoiseModel,
    rng: RandomSource,
}

impl Scenario {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let costs = config.project_costs();
        let scaled = ScaledWeights::new(&costs, config.budget, DEFAULT_MAX_CELLS)?;
        Ok(Self {
            panel: config.panel()?,
            values: config.project_values(),
            costs_f64: costs.iter().map(rational_to_f64).collect(),
            costs,
            scaled,
            noise: NoiseModel::new(config.kappa)?,
            rng: RandomSource::new(config.master_seed),
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn panel(&self) -> &ExpertisePanel {
        &self.panel
    }

    /// Uniform project types of one replica.
    pub fn draw_types(&self, replica: u64) -> Vec<f64> {
        let (lo, hi) = (self.config.t_min, self.config.t_max);
        (0..self.config.n_projects)
            .map(|i| {
                let mut s = self.rng.stream(Stream::ProjectType {
                    replica,
                    project: i as u64,
                });
                let t = lo + (hi - lo) * s.random::<f64>();
                // rounding can land on the open end
                if t < hi {
                    t
                } else {
                    lo
                }
            })
            .collect()
    }

    pub fn projects(&self, replica: u64) -> Result<ProjectSet> {
        ProjectSet::new(
            self.values.clone(),
            self.costs.clone(),
            self.draw_types(replica),
            self.config.t_min,
            self.config.t_max,
        )
    }

    /// Delegates chosen under information error.
    pub fn delegates(&self, projects: &ProjectSet, replica: u64) -> Vec<usize> {
        projects
            .types()
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut s = self.rng.stream(Stream::Delegation {
                    replica,
                    project: i as u64,
                });
                let optimal = pick_delegate(t, &self.panel);
                apply_info_error_delegation(optimal, self.panel.size(), self.config.info_error, &mut s)
            })
            .collect()
    }

    /// Projects whose minimum-variance estimate degrades to the mean.
    pub fn degraded(&self, replica: u64) -> Vec<bool> {
        (0..self.config.n_projects)
            .map(|i| {
                let mut s = self.rng.stream(Stream::Degrade {
                    replica,
                    project: i as u64,
                });
                apply_info_error_minvar(self.config.info_error, &mut s)
            })
            .collect()
    }

    /// True value of the portfolio chosen in one replica.
    pub fn run_replica(&self, replica: u64) -> Result<f64> {
        let projects = self.projects(replica)?;
        let evals = sample_evaluations(&projects, &self.panel, self.noise, &self.rng, replica);
        let r = self.config.info_error;
        let delegates;
        let degraded;
        let mut draws = InfoErrorDraws::default();
        if r > 0.0 {
            match self.config.method {
                AggregationMethod::Delegation => {
                    delegates = self.delegates(&projects, replica);
                    draws.delegates = Some(&delegates);
                }
                AggregationMethod::MinimumVariance => {
                    degraded = self.degraded(replica);
                    draws.degraded = Some(&degraded);
                }
                _ => {}
            }
        }
        let aggregated = aggregation::collective_values_with(
            &self.config.method,
            &evals,
            &projects,
            &self.panel,
            draws,
        )?;
        let item_values = aggregated.item_values(&self.costs_f64);
        let chosen = self.select(&item_values, &self.scan_order(replica));
        Ok(chosen
            .iter()
            .zip(&self.values)
            .filter(|(x, _)| **x)
            .map(|(_, v)| v)
            .sum())
    }

    /// Item order for the selection step of one replica.
    pub fn scan_order(&self, replica: u64) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        if self.config.ties == TieBreak::Random {
            order.shuffle(&mut self.rng.stream(Stream::TieOrder { replica }));
        }
        order
    }

    fn select(&self, item_values: &[f64], order: &[usize]) -> Vec<bool> {
        match self.config.selection {
            SelectionRule::Knapsack => self.scaled.solve_in_order(item_values, order),
            SelectionRule::BestSingle => {
                let cap = self.scaled.capacity();
                let weights = self.scaled.weights();
                let mut best: Option<usize> = None;
                for &i in order {
                    if weights[i] <= cap && best.is_none_or(|b| item_values[i] > item_values[b]) {
                        best = Some(i);
                    }
                }
                let mut chosen = vec![false; item_values.len()];
                if let Some(b) = best {
                    chosen[b] = true;
                }
                chosen
            }
        }
    }

    /// Best achievable value when every project is seen exactly.
    pub fn noiseless_optimum(&self) -> f64 {
        let order: Vec<usize> = (0..self.values.len()).collect();
        self.select(&self.values, &order)
            .iter()
            .zip(&self.values)
            .filter(|(x, _)| **x)
            .map(|(_, v)| v)
            .sum()
    }

    /// Replica values in index order.
    pub fn replica_values(&self) -> Result<Vec<f64>> {
        (0..self.config.samples as u64)
            .into_par_iter()
            .map(|k| self.run_replica(k))
            .collect()
    }

    pub fn estimate(&self) -> Result<PerformanceEstimate> {
        let xs = self.replica_values()?;
        let (mean, std_error) = mean_and_std_error(&xs);
        Ok(PerformanceEstimate {
            mean,
            std_error,
            samples: xs.len(),
        })
    }
}

pub fn run_replica(config: &ScenarioConfig, replica: u64) -> Result<f64> {
    Scenario::new(config)?.run_replica(replica)
}

pub fn estimate_performance(config: &ScenarioConfig) -> Result<PerformanceEstimate> {
    Scenario::new(config)?.estimate()
}

/// Largest true value any selection can reach in this scenario.
pub fn v_max(config: &ScenarioConfig) -> Result<f64> {
    Ok(Scenario::new(config)?.noiseless_optimum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: AggregationMethod,
    pub n_groups: usize,
    pub beta: f64,
    pub cost: String,
    pub kappa: f64,
    pub r: f64,
    pub estimate: PerformanceEstimate,
}

impl SweepRow {
    fn new(config: &ScenarioConfig, estimate: PerformanceEstimate) -> Self {
        Self {
            method: config.method,
            n_groups: config.n_groups,
            beta: config.beta,
            cost: match config.costs {
                Some(_) => "custom".to_string(),
                None => config.cost_kind.name().to_string(),
            },
            kappa: config.kappa,
            r: config.info_error,
            estimate,
        }
    }
}

/// Runs each cell with its own seed derived from `master_seed` and the cell's
/// position, or with `master_seed` itself under common random numbers.
pub fn run_cells(
    cells: &[ScenarioConfig],
    master_seed: u64,
    common_random_numbers: bool,
) -> Result<Vec<SweepRow>> {
    let source = RandomSource::new(master_seed);
    cells
        .iter()
        .enumerate()
        .map(|(k, cell)| {
            let seed = if common_random_numbers {
                master_seed
            } else {
                source.cell_seed(k as u64)
            };
            let config = ScenarioConfig {
                master_seed: seed,
                ..cell.clone()
            };
            Ok(SweepRow::new(&config, estimate_performance(&config)?))
        })
        .collect()
}

/// Cross product over methods, panel sizes and breadths, in that nesting order.
pub fn sweep(
    base: &ScenarioConfig,
    beta_grid: &[f64],
    methods: &[AggregationMethod],
    group_sizes: &[usize],
    common_random_numbers: bool,
) -> Result<Vec<SweepRow>> {
    if beta_grid.is_empty() || methods.is_empty() || group_sizes.is_empty() {
        return Err(Error::invalid("grid", "sweep grids must be nonempty"));
    }
    let mut cells = Vec::with_capacity(beta_grid.len() * methods.len() * group_sizes.len());
    for method in methods {
        for &n_groups in group_sizes {
            for &beta in beta_grid {
                cells.push(ScenarioConfig {
                    method: *method,
                    n_groups,
                    beta,
                    ..base.clone()
                });
            }
        }
    }
    run_cells(&cells, base.master_seed, common_random_numbers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_pcg::Pcg64Mcg;

    fn noiseless(cost: CostStructure, method: AggregationMethod) -> ScenarioConfig {
        ScenarioConfig {
            cost_kind: cost,
            method,
            kappa: 0.0,
            beta: 3.0,
            samples: 50,
            master_seed: 11,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn noiseless_replicas_hit_the_optimum() {
        for (cost, best) in [
            (CostStructure::Uniform, 345.0),
            (CostStructure::Decreasing, 420.0),
            (CostStructure::Increasing, 232.0),
        ] {
            for m in AggregationMethod::all(0.2, 0.0).iter().filter(|m| m.is_direct()) {
                let cfg = noiseless(cost, *m);
                assert_eq!(run_replica(&cfg, 3).unwrap(), best, "{m} {cost:?}");
                let est = estimate_performance(&cfg).unwrap();
                assert_eq!((est.mean, est.std_error), (best, 0.0));
            }
            assert_eq!(v_max(&noiseless(cost, AggregationMethod::Median)).unwrap(), best);
        }
    }

    #[test]
    fn estimates_are_reproducible() {
        let cfg = ScenarioConfig {
            samples: 300,
            beta: 2.0,
            master_seed: 5,
            method: AggregationMethod::BordaCount,
            ..ScenarioConfig::default()
        };
        let a = estimate_performance(&cfg).unwrap();
        let b = estimate_performance(&cfg).unwrap();
        assert_eq!(a, b);
        let other = estimate_performance(&ScenarioConfig {
            master_seed: 6,
            ..cfg.clone()
        })
        .unwrap();
        assert_ne!(a.mean, other.mean);
    }

    #[test]
    fn replicas_never_exceed_the_optimum() {
        for cost in CostStructure::ALL {
            for m in AggregationMethod::all(0.2, 0.0) {
                let cfg = ScenarioConfig {
                    samples: 20,
                    cost_kind: cost,
                    method: m,
                    beta: 2.5,
                    ..ScenarioConfig::default()
                };
                let s = Scenario::new(&cfg).unwrap();
                let best = s.noiseless_optimum();
                for x in s.replica_values().unwrap() {
                    assert!(x <= best + 1e-9, "{m} {cost:?}: {x} > {best}");
                }
            }
        }
    }

    #[test]
    fn two_project_estimates_match_known_values() {
        let ind = estimate_performance(&ScenarioConfig {
            method: AggregationMethod::Individual,
            samples: 100_000,
            master_seed: 1,
            ..ScenarioConfig::two_project(1.0, 2.0)
        })
        .unwrap();
        assert!((ind.mean - 1.6257).abs() < 3.0 * ind.std_error + 1e-3, "{ind:?}");
        let mean = estimate_performance(&ScenarioConfig {
            method: AggregationMethod::ArithmeticMean,
            samples: 100_000,
            master_seed: 2,
            ..ScenarioConfig::two_project(1.0, 2.0)
        })
        .unwrap();
        assert!((mean.mean - 1.7004).abs() < 3.0 * mean.std_error + 1e-3, "{mean:?}");
    }

    #[test]
    fn delegation_error_frequencies() {
        let mut rng = Pcg64Mcg::seed_from_u64(9);
        let draws = 100_000;
        for _ in 0..100 {
            assert_eq!(apply_info_error_delegation(2, 3, 0.0, &mut rng), 2);
        }
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            counts[apply_info_error_delegation(1, 3, 1.0, &mut rng)] += 1;
        }
        let expected = draws as f64 / 3.0;
        let chi2: f64 = counts
            .iter()
            .map(|c| (*c as f64 - expected).powi(2) / expected)
            .sum();
        // 99.9% quantile of chi-square with 2 degrees of freedom
        assert!(chi2 < 13.82, "chi2 = {chi2}, counts {counts:?}");

        let hits = (0..draws)
            .filter(|_| apply_info_error_delegation(0, 3, 0.5, &mut rng) == 0)
            .count() as f64;
        let p = 2.0 / 3.0;
        let sd = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((hits / draws as f64 - p).abs() < 3.0 * sd);
    }

    #[test]
    fn degraded_count_is_binomial() {
        let cfg = ScenarioConfig {
            method: AggregationMethod::MinimumVariance,
            info_error: 0.5,
            samples: 1,
            ..ScenarioConfig::default()
        };
        let s = Scenario::new(&cfg).unwrap();
        let replicas = 4000;
        let total: usize = (0..replicas)
            .map(|k| s.degraded(k).iter().filter(|d| **d).count())
            .sum();
        let mean = total as f64 / replicas as f64;
        let bound = 3.0 * (30.0 * 0.25 / replicas as f64).sqrt();
        assert!((mean - 15.0).abs() < bound, "mean {mean}");
        let none = Scenario::new(&ScenarioConfig {
            info_error: 0.0,
            ..cfg
        })
        .unwrap();
        assert!(none.degraded(0).iter().all(|d| !d));
    }

    #[test]
    fn full_info_error_minvar_matches_mean() {
        let base = ScenarioConfig {
            beta: 4.0,
            samples: 4000,
            ..ScenarioConfig::default()
        };
        let mv = estimate_performance(&ScenarioConfig {
            method: AggregationMethod::MinimumVariance,
            info_error: 1.0,
            master_seed: 1,
            ..base.clone()
        })
        .unwrap();
        let am = estimate_performance(&ScenarioConfig {
            method: AggregationMethod::ArithmeticMean,
            master_seed: 2,
            ..base
        })
        .unwrap();
        assert!(mv.z_distance(&am) < 3.0, "{mv:?} vs {am:?}");
    }

    #[test]
    fn single_cell_sweep_is_one_estimate() {
        let base = ScenarioConfig {
            samples: 200,
            master_seed: 77,
            ..ScenarioConfig::default()
        };
        let rows = sweep(&base, &[1.5], &[AggregationMethod::Median], &[3], false).unwrap();
        assert_eq!(rows.len(), 1);
        let seeded = ScenarioConfig {
            method: AggregationMethod::Median,
            beta: 1.5,
            master_seed: RandomSource::new(77).cell_seed(0),
            ..base.clone()
        };
        assert_eq!(rows[0].estimate, estimate_performance(&seeded).unwrap());
        let crn = sweep(&base, &[1.5], &[AggregationMethod::Median], &[3], true).unwrap();
        let direct = estimate_performance(&ScenarioConfig {
            method: AggregationMethod::Median,
            beta: 1.5,
            ..base
        })
        .unwrap();
        assert_eq!(crn[0].estimate, direct);
    }

    #[test]
    fn invalid_configs_name_the_field() {
        let bad = |cfg: ScenarioConfig, key: &str| match cfg.validate() {
            Err(Error::InvalidArgument { name, .. }) => assert_eq!(name, key),
            other => panic!("expected {key} error, got {other:?}"),
        };
        bad(ScenarioConfig { t_min: 10.0, ..Default::default() }, "t_min");
        bad(ScenarioConfig { samples: 0, ..Default::default() }, "samples");
        bad(ScenarioConfig { info_error: 1.5, ..Default::default() }, "r");
        bad(ScenarioConfig { beta: -1.0, ..Default::default() }, "beta");
        bad(ScenarioConfig { budget: Rational::new(0, 1), ..Default::default() }, "budget");
        bad(
            ScenarioConfig { values: Some(vec![1.0]), ..Default::default() },
            "values",
        );
    }

    #[test]
    fn random_ties_lift_yes_no_above_index_order() {
        let base = ScenarioConfig {
            method: AggregationMethod::YesNoVoting { cutoff: 0.0 },
            beta: 4.0,
            samples: 400,
            master_seed: 5,
            ..ScenarioConfig::default()
        };
        let random = estimate_performance(&base).unwrap();
        let index = estimate_performance(&ScenarioConfig { ties: TieBreak::Index, ..base.clone() }).unwrap();
        assert!(random.mean > 232.5 && index.mean < 232.5, "{random:?} {index:?}");
        let scenario = Scenario::new(&base).unwrap();
        assert_eq!(scenario.scan_order(3), scenario.scan_order(3));
        assert_ne!(scenario.scan_order(3), scenario.scan_order(4));
    }
}
