//! Projects, stakeholder panels, cost structures and noisy evaluations.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use rand::RngExt;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{RandomSource, Stream};

/// Exact cost and budget arithmetic.
pub type Rational = Ratio<i64>;

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"3"`, `"-2"`, `"9/10"` or a finite decimal such as `"0.1"` or `"14.5"`
/// into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Config(format!("`{s}` is not a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_part: i64 = match int.trim_start_matches(['-', '+']) {
            "" => 0,
            digits => digits.parse().map_err(|_| bad())?,
        };
        let den = 10i64.pow(frac.len() as u32);
        let num: i64 = frac.parse().map_err(|_| bad())?;
        let mag = int_part
            .checked_mul(den)
            .and_then(|x| x.checked_add(num))
            .ok_or_else(bad)?;
        return Ok(Ratio::new(if neg { -mag } else { mag }, den));
    }
    let n: i64 = s.parse().map_err(|_| bad())?;
    Ok(Ratio::from_integer(n))
}

pub fn format_rational(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectSet {
    values: Vec<f64>,
    costs: Vec<Rational>,
    types: Vec<f64>,
    type_range: (f64, f64),
}

impl ProjectSet {
    /// Validates lengths, positivity and that every type lies in `[t_min, t_max]`.
    pub fn new(
        values: Vec<f64>,
        costs: Vec<Rational>,
        types: Vec<f64>,
        t_min: f64,
        t_max: f64,
    ) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::invalid("values", "at least one project is required"));
        }
        if costs.len() != n || types.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} values, {} costs, {} types",
                n,
                costs.len(),
                types.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid("values", format!("value {v} is not > 0")));
        }
        if let Some(w) = costs.iter().find(|w| **w <= Ratio::from_integer(0)) {
            return Err(Error::invalid("costs", format!("cost {w} is not > 0")));
        }
        if !(t_min < t_max) {
            return Err(Error::invalid("t_min", format!("t_min {t_min} must be < t_max {t_max}")));
        }
        if let Some(t) = types.iter().find(|t| !(**t >= t_min && **t <= t_max)) {
            return Err(Error::invalid(
                "types",
                format!("type {t} outside [{t_min}, {t_max}]"),
            ));
        }
        Ok(Self {
            values,
            costs,
            types,
            type_range: (t_min, t_max),
        })
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn costs(&self) -> &[Rational] {
        &self.costs
    }

    pub fn types(&self) -> &[f64] {
        &self.types
    }

    /// `(t_min, t_max)`.
    pub fn type_range(&self) -> (f64, f64) {
        self.type_range
    }

    pub fn costs_f64(&self) -> Vec<f64> {
        self.costs.iter().map(rational_to_f64).collect()
    }
}

/// Expertise levels spread uniformly over `[center − breadth, center + breadth]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertisePanel {
    center: f64,
    breadth: f64,
    levels: Vec<f64>,
}

impl ExpertisePanel {
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn breadth(&self) -> f64 {
        self.breadth
    }

    pub fn size(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Panel with explicit levels; used by tests and the ranking helpers.
    pub fn from_levels(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("size", "panel needs at least one group"));
        }
        let lo = levels.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = levels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            center: 0.5 * (lo + hi),
            breadth: 0.5 * (hi - lo),
            levels,
        })
    }
}

/// `e_j = e_M − (N_s + 1 − 2j)/(N_s − 1) · β` for `j = 1..=N_s`; a single group sits at `e_M`.
pub fn build_panel(center: f64, breadth: f64, size: usize) -> Result<ExpertisePanel> {
    if size == 0 {
        return Err(Error::invalid("size", "panel needs at least one group"));
    }
    if !(breadth >= 0.0) || !breadth.is_finite() {
        return Err(Error::invalid("breadth", format!("{breadth} is not >= 0")));
    }
    if !center.is_finite() {
        return Err(Error::invalid("center", "must be finite"));
    }
    if size == 1 {
        return Ok(ExpertisePanel {
            center,
            breadth,
            levels: vec![center],
        });
    }
    let span = (size - 1) as f64;
    let mut levels = vec![center; size];
    // fill mirrored pairs from the same offset so the panel is exactly symmetric
    for j in 0..size / 2 {
        let offset = ((size - 1 - 2 * j) as f64 / span) * breadth;
        levels[j] = center - offset;
        levels[size - 1 - j] = center + offset;
    }
    Ok(ExpertisePanel {
        center,
        breadth,
        levels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub multiplier: f64,
}

impl NoiseModel {
    pub fn new(multiplier: f64) -> Result<Self> {
        if !(multiplier >= 0.0) || !multiplier.is_finite() {
            return Err(Error::invalid("kappa", format!("{multiplier} is not >= 0")));
        }
        Ok(Self { multiplier })
    }

    pub fn baseline() -> Self {
        Self { multiplier: 1.0 }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::baseline()
    }
}

/// Perception error `κ·|t − e|`.
#[inline]
pub fn perception_sigma(t: f64, e: f64, multiplier: f64) -> f64 {
    multiplier * (t - e).abs()
}

/// Dense row-major matrix; rows are projects and columns are groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix".into()));
        }
        Ok(Self {
            rows: n_rows,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.cols).copied()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }
}

/// Sampled evaluations `v_ij` with their perception errors `σ_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationMatrix {
    values: Matrix,
    sigmas: Matrix,
}

impl EvaluationMatrix {
    pub fn new(values: Matrix, sigmas: Matrix) -> Result<Self> {
        if values.rows() != sigmas.rows() || values.cols() != sigmas.cols() {
            return Err(Error::DimensionMismatch(
                "values and sigmas differ in shape".into(),
            ));
        }
        if sigmas.data.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::invalid("sigmas", "perception errors must be >= 0"));
        }
        Ok(Self { values, sigmas })
    }

    pub fn from_rows(values: Vec<Vec<f64>>, sigmas: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(Matrix::from_rows(values)?, Matrix::from_rows(sigmas)?)
    }

    pub fn n_projects(&self) -> usize {
        self.values.rows()
    }

    pub fn n_groups(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn sigmas(&self) -> &Matrix {
        &self.sigmas
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        self.sigmas.get(i, j)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn sigma_row(&self, i: usize) -> &[f64] {
        self.sigmas.row(i)
    }
}

/// Draws `v_ij = v_i + σ_ij·Z` with `Z` from the stream keyed by `(replica, i, j)`.
/// A zero σ consumes no draw and reproduces `v_i` exactly.
pub fn sample_evaluations(
    projects: &ProjectSet,
    panel: &ExpertisePanel,
    noise: NoiseModel,
    rng: &RandomSource,
    replica: u64,
) -> EvaluationMatrix {
    let n_groups = panel.size();
    let n_projects = projects.count();
    let mut values = Vec::with_capacity(n_projects * n_groups);
    let mut sigmas = Vec::with_capacity(n_projects * n_groups);
    for (i, (&v, &t)) in projects.values().iter().zip(projects.types()).enumerate() {
        for (j, &e) in panel.levels().iter().enumerate() {
            let sigma = perception_sigma(t, e, noise.multiplier);
            let value = if sigma == 0.0 {
                v
            } else {
                let mut stream = rng.stream(Stream::Evaluation {
                    replica,
                    project: i as u64,
                    group: j as u64,
                });
                let z: f64 = stream.sample(StandardNormal);
                v + sigma * z
            };
            values.push(value);
            sigmas.push(sigma);
        }
    }
    EvaluationMatrix {
        values: Matrix {
            rows: n_projects,
            cols: n_groups,
            data: values,
        },
        sigmas: Matrix {
            rows: n_projects,
            cols: n_groups,
            data: sigmas,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostStructure {
    Uniform,
    Decreasing,
    Increasing,
}

impl CostStructure {
    pub const ALL: [CostStructure; 3] = [
        CostStructure::Uniform,
        CostStructure::Decreasing,
        CostStructure::Increasing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CostStructure::Uniform => "uniform",
            CostStructure::Decreasing => "decreasing",
            CostStructure::Increasing => "increasing",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Uniform `w_i = 1`, decreasing `2(n+1−i)/(n+1)` or increasing `2i/(n+1)`, `i = 1..=n`.
pub fn make_costs(kind: CostStructure, n: usize) -> Vec<Rational> {
    let d = n as i64 + 1;
    (1..=n as i64)
        .map(|i| match kind {
            CostStructure::Uniform => Ratio::from_integer(1),
            CostStructure::Decreasing => Ratio::new(2 * (d - i), d),
            CostStructure::Increasing => Ratio::new(2 * i, d),
        })
        .collect()
}
