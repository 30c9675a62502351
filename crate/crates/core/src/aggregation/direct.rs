//! Direct aggregation: order-statistic weights, minimum variance, and
//! single-group selection rules.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::model::ExpertisePanel;

/// Weighting of the ascending-sorted evaluations of one project.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderScheme {
    Mean,
    Median,
    /// Drop `p` evaluations on each tail and average the rest.
    Trimmed(usize),
    /// Replace `p` evaluations on each tail by the nearest kept one.
    Winsorized(usize),
}

/// `p = round(α·N_s)`, rounding halves up.
pub fn trim_count(alpha: f64, n_groups: usize) -> usize {
    (alpha * n_groups as f64 + 0.5).floor().max(0.0) as usize
}

/// Integer multiplicities of the sorted positions and their total, in lowest
/// terms; the weight `z_(j)` is the multiplicity over the total.
fn order_multiplicities(n: usize, scheme: OrderScheme) -> Result<(Vec<f64>, f64)> {
    if n == 0 {
        return Err(Error::invalid("row", "cannot aggregate an empty row"));
    }
    let mut m = vec![0u64; n];
    match scheme {
        OrderScheme::Mean => m.fill(1),
        OrderScheme::Median => {
            if n % 2 == 1 {
                m[n / 2] = 1;
            } else {
                m[n / 2 - 1] = 1;
                m[n / 2] = 1;
            }
        }
        OrderScheme::Trimmed(p) | OrderScheme::Winsorized(p) if 2 * p >= n => {
            return Err(Error::invalid(
                "alpha",
                format!("trimming p = {p} per tail leaves nothing of {n} evaluations"),
            ));
        }
        OrderScheme::Trimmed(p) => m[p..n - p].fill(1),
        OrderScheme::Winsorized(p) => {
            // every sorted position votes for its clamped position
            for k in 0..n {
                m[k.clamp(p, n - 1 - p)] += 1;
            }
        }
    }
    let total: u64 = m.iter().sum();
    let common = m.iter().fold(total, |g, &k| g.gcd(&k));
    Ok((m.iter().map(|&k| (k / common) as f64).collect(), (total / common) as f64))
}

/// Weights `z_(j)` applied to the sorted row; they always sum to one.
pub fn order_weights(n: usize, scheme: OrderScheme) -> Result<Vec<f64>> {
    let (m, total) = order_multiplicities(n, scheme)?;
    Ok(m.into_iter().map(|x| x / total).collect())
}

/// Weighted order statistic `Σ z_(j) v_(j)` of one project's evaluations.
pub fn aggregate_order_weighted(row: &[f64], scheme: OrderScheme) -> Result<f64> {
    let (m, total) = order_multiplicities(row.len(), scheme)?;
    Ok(apply_multiplicities(row, &m, total))
}

/// Prepared form of an order scheme for repeated rows of one length.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderWeights {
    multiplicities: Vec<f64>,
    total: f64,
}

impl OrderWeights {
    pub fn new(n: usize, scheme: OrderScheme) -> Result<Self> {
        let (multiplicities, total) = order_multiplicities(n, scheme)?;
        Ok(Self {
            multiplicities,
            total,
        })
    }

    pub fn apply(&self, row: &[f64]) -> f64 {
        apply_multiplicities(row, &self.multiplicities, self.total)
    }
}

fn apply_multiplicities(row: &[f64], m: &[f64], total: f64) -> f64 {
    let mut sorted = row.to_vec();
    sorted.sort_by(f64::total_cmp);
    match sorted.split_first() {
        Some((first, rest)) if rest.iter().all(|v| v == first) => *first,
        _ => sorted.iter().zip(m).filter(|(_, k)| **k > 0.0).map(|(v, k)| v * k).sum::<f64>() / total,
    }
}

/// Inverse-variance weights `σ⁻² / Σ σ⁻²`. When some σ are zero, the weight is
/// shared equally among exactly those groups.
pub fn min_variance_weights(sigmas: &[f64]) -> Vec<f64> {
    let exact = sigmas.iter().filter(|s| **s == 0.0).count();
    if exact > 0 {
        let w = 1.0 / exact as f64;
        return sigmas
            .iter()
            .map(|s| if *s == 0.0 { w } else { 0.0 })
            .collect();
    }
    let precision: Vec<f64> = sigmas.iter().map(|s| 1.0 / (s * s)).collect();
    let total: f64 = precision.iter().sum();
    precision.into_iter().map(|r| r / total).collect()
}

pub fn aggregate_min_variance(row: &[f64], sigmas: &[f64]) -> Result<f64> {
    if row.is_empty() || row.len() != sigmas.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} evaluations with {} sigmas",
            row.len(),
            sigmas.len()
        )));
    }
    let exact: Vec<f64> = row
        .iter()
        .zip(sigmas)
        .filter(|(_, s)| **s == 0.0)
        .map(|(v, _)| *v)
        .collect();
    if !exact.is_empty() {
        return aggregate_order_weighted(&exact, OrderScheme::Mean);
    }
    Ok(min_variance_weights(sigmas)
        .iter()
        .zip(row)
        .map(|(z, v)| z * v)
        .sum())
}

/// Index of the level nearest `target`; ties go to the smallest index.
fn nearest_level(target: f64, levels: &[f64]) -> usize {
    let mut best = 0;
    let mut best_distance = f64::INFINITY;
    for (k, e) in levels.iter().enumerate() {
        let d = (target - e).abs();
        if d < best_distance {
            best = k;
            best_distance = d;
        }
    }
    best
}

/// Group whose expertise is closest to the centre of the type range.
pub fn pick_individual(panel: &ExpertisePanel, t_min: f64, t_max: f64) -> usize {
    nearest_level(0.5 * (t_min + t_max), panel.levels())
}

/// Group whose expertise is closest to the project type.
pub fn pick_delegate(t: f64, panel: &ExpertisePanel) -> usize {
    nearest_level(t, panel.levels())
}
