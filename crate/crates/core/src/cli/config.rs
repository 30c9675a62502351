//! TOML run configuration.
//!
//! All keys sit at the top level. Sweepable keys (`n_groups`, `beta`, `cost`,
//! `kappa`, `r`) take a scalar or a list; the run is the cross product.
//!
//! ```toml
//! methods = "all"            # or ["delegation", "median"]; `method` for one
//! n_projects = 30
//! n_groups = [3, 5, 7]
//! beta_grid = { start = 0.0, stop = 10.0, step = 0.5 }
//! include_beta_opt = true
//! cost = ["uniform", "decreasing"]
//! budget = "15"              # rational, defaults to n_projects / 2
//! samples = 20000
//! ties = "random"          # or "index": equal-value portfolios favour low indices
//! seed = 1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregation::{AggregationMethod, DEFAULT_ALPHA, DEFAULT_CUTOFF};
use crate::analytic::{beta_opt, QuadratureSpec};
use crate::error::{Error, Result};
use crate::model::{format_rational, parse_rational, CostStructure, Rational};
use crate::simulator::{ScenarioConfig, SelectionRule, TieBreak};

/// Samples per cell in the `--paper-scale` preset.
pub const PAPER_SCALE_SAMPLES: usize = 500_000;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct Range {
    start: f64,
    stop: f64,
    step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
enum BetaGrid {
    Range(Range),
    List(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    fn to_rational(&self, key: &str) -> Result<Rational> {
        let text = match self {
            Number::Int(i) => return Ok(Rational::from_integer(*i)),
            Number::Float(f) => f.to_string(),
            Number::Text(s) => s.clone(),
        };
        parse_rational(&text).map_err(|_| Error::Config(format!("`{key}`: `{text}` is not a rational number")))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    methods: Option<OneOrMany<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_projects: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_groups: Option<OneOrMany<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    allow_even_groups: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<OneOrMany<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_grid: Option<BetaGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    include_beta_opt: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cost: Option<OneOrMany<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    costs: Option<Vec<Number>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<Number>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<OneOrMany<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<OneOrMany<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    yes_no_cutoff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    selection: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ties: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    common_random_numbers: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quad_nodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quad_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quad_max_nodes: Option<usize>,
}

/// A fully defaulted run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub methods: Vec<AggregationMethod>,
    pub n_projects: usize,
    pub group_sizes: Vec<usize>,
    pub allow_even_groups: bool,
    pub t_min: f64,
    pub t_max: f64,
    pub e_m: f64,
    pub betas: Vec<f64>,
    pub include_beta_opt: bool,
    pub cost_kinds: Vec<CostStructure>,
    pub costs: Option<Vec<Rational>>,
    pub budget: Rational,
    pub values: Option<Vec<f64>>,
    pub kappas: Vec<f64>,
    pub rs: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub alpha: f64,
    pub yes_no_cutoff: f64,
    pub selection: SelectionRule,
    pub ties: TieBreak,
    pub common_random_numbers: bool,
    pub quadrature: QuadratureSpec,
}

impl Default for RunSpec {
    fn default() -> Self {
        parse_config_str("").expect("the empty config is valid")
    }
}

fn bad(key: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{key}`: {reason}"))
}

fn expand_range(r: &Range) -> Result<Vec<f64>> {
    if !(r.step > 0.0) || !(r.stop >= r.start) {
        return Err(bad("beta_grid", "need step > 0 and stop >= start"));
    }
    let count = ((r.stop - r.start) / r.step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(bad("beta_grid", "more than 100000 points"));
    }
    // round away accumulated binary noise such as 0.30000000000000004
    Ok((0..count)
        .map(|k| ((r.start + k as f64 * r.step) * 1e12).round() / 1e12)
        .collect())
}

/// Parses a config document and fills every default.
pub fn parse_config_str(text: &str) -> Result<RunSpec> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    resolve(raw)
}

pub fn parse_config(path: &Path) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

fn resolve(raw: RawConfig) -> Result<RunSpec> {
    let alpha = raw.alpha.unwrap_or(DEFAULT_ALPHA);
    if !(0.0..0.5).contains(&alpha) {
        return Err(bad("alpha", format!("{alpha} is not in [0, 0.5)")));
    }
    let yes_no_cutoff = raw.yes_no_cutoff.unwrap_or(DEFAULT_CUTOFF);
    if !yes_no_cutoff.is_finite() {
        return Err(bad("yes_no_cutoff", "must be finite"));
    }

    let (key, names) = match (raw.method, raw.methods) {
        (Some(_), Some(_)) => return Err(bad("method", "give either `method` or `methods`, not both")),
        (Some(m), None) => ("method", vec![m]),
        (None, Some(ms)) => ("methods", ms.into_vec()),
        (None, None) => ("methods", vec!["arithmetic_mean".to_string()]),
    };
    let mut methods = Vec::new();
    for name in &names {
        if name == "all" {
            methods.extend(AggregationMethod::all(alpha, yes_no_cutoff));
            continue;
        }
        let m = AggregationMethod::from_name(name, alpha, yes_no_cutoff).ok_or_else(|| {
            bad(
                key,
                format!("unknown method `{name}`, expected \"all\" or one of {}", AggregationMethod::NAMES.join(", ")),
            )
        })?;
        methods.push(m);
    }
    if methods.is_empty() {
        return Err(bad(key, "no methods given"));
    }

    let n_projects = raw.n_projects.unwrap_or(30);
    if n_projects == 0 {
        return Err(bad("n_projects", "must be >= 1"));
    }
    let allow_even_groups = raw.allow_even_groups.unwrap_or(false);
    let group_sizes = raw.n_groups.map(OneOrMany::into_vec).unwrap_or_else(|| vec![3]);
    if group_sizes.is_empty() {
        return Err(bad("n_groups", "empty list"));
    }
    for &g in &group_sizes {
        if g == 0 {
            return Err(bad("n_groups", "must be >= 1"));
        }
        if g % 2 == 0 && !allow_even_groups {
            return Err(bad("n_groups", format!("{g} is even; set allow_even_groups = true to accept it")));
        }
        for m in &methods {
            m.validate(g).map_err(|e| bad("alpha", e))?;
        }
    }

    let t_min = raw.t_min.unwrap_or(0.0);
    let t_max = raw.t_max.unwrap_or(10.0);
    if !(t_min < t_max) || !t_min.is_finite() || !t_max.is_finite() {
        return Err(bad("t_min", format!("need finite t_min < t_max, got [{t_min}, {t_max}]")));
    }
    let e_m = raw.e_m.unwrap_or(5.0);
    if !e_m.is_finite() {
        return Err(bad("e_m", "must be finite"));
    }

    let betas = match (raw.beta, raw.beta_grid) {
        (Some(_), Some(_)) => return Err(bad("beta", "give either `beta` or `beta_grid`, not both")),
        (Some(b), None) => b.into_vec(),
        (None, Some(BetaGrid::List(v))) => v,
        (None, Some(BetaGrid::Range(r))) => expand_range(&r)?,
        (None, None) => vec![0.0],
    };
    if betas.is_empty() {
        return Err(bad("beta", "empty grid"));
    }
    if let Some(b) = betas.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
        return Err(bad("beta", format!("{b} is not >= 0")));
    }

    let cost_kinds = match raw.cost.map(OneOrMany::into_vec) {
        None => vec![CostStructure::Uniform],
        Some(names) => names
            .iter()
            .map(|n| {
                CostStructure::from_name(n)
                    .ok_or_else(|| bad("cost", format!("unknown cost structure `{n}`, expected uniform, decreasing or increasing")))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    if cost_kinds.is_empty() {
        return Err(bad("cost", "empty list"));
    }
    let costs = match raw.costs {
        None => None,
        Some(list) => {
            let parsed = list.iter().map(|c| c.to_rational("costs")).collect::<Result<Vec<_>>>()?;
            if parsed.len() != n_projects {
                return Err(bad("costs", format!("{} costs for {n_projects} projects", parsed.len())));
            }
            if parsed.iter().any(|w| *w <= Rational::from_integer(0)) {
                return Err(bad("costs", "every cost must be > 0"));
            }
            Some(parsed)
        }
    };
    let budget = match raw.budget {
        Some(b) => b.to_rational("budget")?,
        None => Rational::new(n_projects as i64, 2),
    };
    if budget <= Rational::from_integer(0) {
        return Err(bad("budget", "must be > 0"));
    }
    if let Some(v) = &raw.values {
        if v.len() != n_projects {
            return Err(bad("values", format!("{} values for {n_projects} projects", v.len())));
        }
        if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return Err(bad("values", "every value must be > 0"));
        }
    }

    let kappas = raw.kappa.map(OneOrMany::into_vec).unwrap_or_else(|| vec![1.0]);
    if kappas.is_empty() || kappas.iter().any(|k| !(*k >= 0.0) || !k.is_finite()) {
        return Err(bad("kappa", "need a nonempty list of values >= 0"));
    }
    let rs = raw.r.map(OneOrMany::into_vec).unwrap_or_else(|| vec![0.0]);
    if rs.is_empty() || rs.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(bad("r", "need a nonempty list of values in [0, 1]"));
    }
    let samples = raw.samples.unwrap_or(20_000);
    if samples == 0 {
        return Err(bad("samples", "must be >= 1"));
    }
    let selection = match raw.selection {
        None => SelectionRule::Knapsack,
        Some(s) => SelectionRule::from_name(&s)
            .ok_or_else(|| bad("selection", format!("unknown rule `{s}`, expected knapsack or best_single")))?,
    };
    let ties = match raw.ties {
        None => TieBreak::Random,
        Some(s) => TieBreak::from_name(&s)
            .ok_or_else(|| bad("ties", format!("unknown rule `{s}`, expected index or random")))?,
    };
    let defaults = QuadratureSpec::default();
    let quadrature = QuadratureSpec {
        nodes: raw.quad_nodes.unwrap_or(defaults.nodes),
        tolerance: raw.quad_tolerance.unwrap_or(defaults.tolerance),
        max_nodes: raw.quad_max_nodes.unwrap_or(defaults.max_nodes),
    };
    quadrature.validate().map_err(|e| match e {
        Error::InvalidArgument { name, reason } => bad(name, reason),
        other => other,
    })?;

    Ok(RunSpec {
        methods,
        n_projects,
        group_sizes,
        allow_even_groups,
        t_min,
        t_max,
        e_m,
        betas,
        include_beta_opt: raw.include_beta_opt.unwrap_or(false),
        cost_kinds,
        costs,
        budget,
        values: raw.values,
        kappas,
        rs,
        samples,
        seed: raw.seed.unwrap_or(0),
        alpha,
        yes_no_cutoff,
        selection,
        ties,
        common_random_numbers: raw.common_random_numbers.unwrap_or(false),
        quadrature,
    })
}

/// Writes every field explicitly, so the output parses back to `spec`.
pub fn write_config(spec: &RunSpec) -> String {
    let raw = RawConfig {
        method: None,
        methods: Some(OneOrMany::Many(spec.methods.iter().map(|m| m.name().to_string()).collect())),
        n_projects: Some(spec.n_projects),
        n_groups: Some(OneOrMany::Many(spec.group_sizes.clone())),
        allow_even_groups: Some(spec.allow_even_groups),
        t_min: Some(spec.t_min),
        t_max: Some(spec.t_max),
        e_m: Some(spec.e_m),
        beta: Some(OneOrMany::Many(spec.betas.clone())),
        beta_grid: None,
        include_beta_opt: Some(spec.include_beta_opt),
        cost: Some(OneOrMany::Many(spec.cost_kinds.iter().map(|c| c.name().to_string()).collect())),
        costs: spec
            .costs
            .as_ref()
            .map(|c| c.iter().map(|w| Number::Text(format_rational(w))).collect()),
        budget: Some(Number::Text(format_rational(&spec.budget))),
        values: spec.values.clone(),
        kappa: Some(OneOrMany::Many(spec.kappas.clone())),
        r: Some(OneOrMany::Many(spec.rs.clone())),
        samples: Some(spec.samples),
        seed: Some(spec.seed),
        alpha: Some(spec.alpha),
        yes_no_cutoff: Some(spec.yes_no_cutoff),
        selection: Some(spec.selection.name().to_string()),
        ties: Some(spec.ties.name().to_string()),
        common_random_numbers: Some(spec.common_random_numbers),
        quad_nodes: Some(spec.quadrature.nodes),
        quad_tolerance: Some(spec.quadrature.tolerance),
        quad_max_nodes: Some(spec.quadrature.max_nodes),
    };
    toml::to_string(&raw).expect("config serializes")
}

/// Hex SHA-256 of the canonical form of `spec`.
pub fn config_digest(spec: &RunSpec) -> String {
    hex::encode(Sha256::digest(write_config(spec).as_bytes()))
}

impl RunSpec {
    /// Breadths for one panel size, with `β_opt` merged in when requested.
    pub fn betas_for(&self, n_groups: usize) -> Vec<f64> {
        let mut betas = self.betas.clone();
        if self.include_beta_opt {
            if let Ok(b) = beta_opt(n_groups, self.e_m, self.t_min, self.t_max) {
                if b >= 0.0 {
                    betas.push(b);
                }
            }
            betas.sort_by(f64::total_cmp);
            betas.dedup();
        }
        betas
    }

    /// Scenario cells in output order: cost, κ, r, method, N_s, β.
    pub fn cells(&self) -> Vec<ScenarioConfig> {
        let costs: Vec<Option<CostStructure>> = match self.costs {
            Some(_) => vec![None],
            None => self.cost_kinds.iter().copied().map(Some).collect(),
        };
        let mut cells = Vec::new();
        for cost in &costs {
            for &kappa in &self.kappas {
                for &r in &self.rs {
                    for method in &self.methods {
                        for &n_groups in &self.group_sizes {
                            for beta in self.betas_for(n_groups) {
                                cells.push(ScenarioConfig {
                                    n_projects: self.n_projects,
                                    n_groups,
                                    t_min: self.t_min,
                                    t_max: self.t_max,
                                    e_m: self.e_m,
                                    beta,
                                    cost_kind: cost.unwrap_or(CostStructure::Uniform),
                                    costs: self.costs.clone(),
                                    values: self.values.clone(),
                                    budget: self.budget,
                                    method: *method,
                                    kappa,
                                    info_error: r,
                                    samples: self.samples,
                                    master_seed: self.seed,
                                    selection: self.selection,
                                    ties: self.ties,
                                });
                            }
                        }
                    }
                }
            }
        }
        cells
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let spec = parse_config_str(r#"method = "delegation""#).unwrap();
        assert_eq!(spec.methods, vec![AggregationMethod::Delegation]);
        assert_eq!(spec.n_projects, 30);
        assert_eq!(spec.budget, Rational::from_integer(15));
        assert_eq!((spec.t_min, spec.t_max, spec.e_m), (0.0, 10.0, 5.0));
        assert_eq!(spec.kappas, vec![1.0]);
        assert_eq!(spec.rs, vec![0.0]);
        assert_eq!(spec.samples, 20_000);
        let cell = &spec.cells()[0];
        assert_eq!(cell.project_values(), (1..=30).map(f64::from).collect::<Vec<_>>());
    }

    #[test]
    fn decreasing_cost_config() {
        let spec = parse_config_str(r#"cost = "decreasing""#).unwrap();
        let costs = spec.cells()[0].project_costs();
        for (i, w) in costs.iter().enumerate() {
            assert_eq!(*w, Rational::new(2 * (31 - (i as i64 + 1)), 31));
        }
    }

    #[test]
    fn full_sweep_config() {
        let spec = parse_config_str(
            "beta_grid = { start = 0.0, stop = 10.0, step = 0.5 }\nmethods = \"all\"\n",
        )
        .unwrap();
        assert_eq!(spec.methods.len(), 12);
        assert_eq!(spec.betas.len(), 21);
        assert_eq!(spec.betas[3], 1.5);
        assert_eq!(spec.cells().len(), 12 * 21);
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("bogus = 1", "bogus"),
            ("n_groups = 4", "n_groups"),
            ("beta = -1.0", "beta"),
            ("r = 2.0", "r"),
            ("method = \"plurality\"", "method"),
            ("cost = \"flat\"", "cost"),
            ("budget = \"0\"", "budget"),
            ("t_min = 10.0", "t_min"),
            ("samples = 0", "samples"),
            ("quad_nodes = 2", "quad_nodes"),
            ("alpha = 0.7", "alpha"),
            ("ties = \"coin\"", "ties"),
            ("costs = [\"1\", \"2\"]", "costs"),
        ];
        for (text, key) in cases {
            let err = parse_config_str(text).unwrap_err().to_string();
            assert!(err.contains(key), "{text}: {err}");
        }
        assert!(parse_config_str("n_groups = 4\nallow_even_groups = true").is_ok());
    }

    #[test]
    fn write_then_parse_is_identity() {
        let spec = parse_config_str(
            r#"
            methods = ["borda", "trimmed_mean"]
            n_projects = 3
            n_groups = [1, 3]
            beta = [0.0, 0.1, 2.5]
            include_beta_opt = true
            costs = ["1/10", "1", "9/10"]
            budget = "1"
            values = [10.0, 2.0, 1.0]
            kappa = [1.0, 4.0]
            r = 0.5
            seed = 9
            alpha = 0.1
            selection = "best_single"
            ties = "index"
            "#,
        )
        .unwrap();
        assert_eq!(parse_config_str(&write_config(&spec)).unwrap(), spec);
        assert_eq!(config_digest(&spec), config_digest(&spec.clone()));
    }

    #[test]
    fn beta_opt_is_merged_per_panel_size() {
        let spec = parse_config_str("beta = [0.0, 4.0]\nn_groups = [3, 5]\ninclude_beta_opt = true").unwrap();
        assert_eq!(spec.betas_for(5), vec![0.0, 4.0]);
        let b3 = spec.betas_for(3);
        assert_eq!(b3.len(), 3);
        assert!((b3[1] - 10.0 / 3.0).abs() < 1e-12);
    }
}
