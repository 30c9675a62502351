//! Indirect aggregation: scores built from qualities `q_ij = v_ij / w_i`.

use crate::error::{Error, Result};
use crate::model::Matrix;

/// Per-column rescaling applied before summing across groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleScheme {
    MinMax,
    ZScore,
    StdDev,
}

/// Qualities `q_ij = v_ij / w_i`.
pub fn qualities(values: &Matrix, costs: &[f64]) -> Result<Matrix> {
    if costs.len() != values.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows but {} costs",
            values.rows(),
            costs.len()
        )));
    }
    Ok(Matrix::from_fn(values.rows(), values.cols(), |i, j| {
        values.get(i, j) / costs[i]
    }))
}

/// Borda points summed over groups. In each column the best quality earns
/// `N_p − 1` points and the worst earns 0; equal qualities rank the lower
/// project index first.
pub fn score_borda(qualities: &Matrix) -> Vec<u64> {
    let n = qualities.rows();
    let mut scores = vec![0u64; n];
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..qualities.cols() {
        order.sort_by(|&a, &b| {
            qualities
                .get(b, j)
                .total_cmp(&qualities.get(a, j))
                .then(a.cmp(&b))
        });
        for (rank, &i) in order.iter().enumerate() {
            scores[i] += (n - 1 - rank) as u64;
        }
    }
    scores
}

/// Number of groups whose evaluation exceeds `cutoff`.
pub fn score_yes_no(values: &Matrix, cutoff: f64) -> Vec<u64> {
    values
        .iter_rows()
        .map(|row| row.iter().filter(|v| **v > cutoff).count() as u64)
        .collect()
}

/// Rescales one column in place.
///
/// Degenerate columns (all entries equal) map to 0.5 under min-max and to 0
/// under z-score; standard-deviation scaling leaves them unchanged.
pub fn scale_column(column: &mut [f64], scheme: ScaleScheme) {
    let n = column.len() as f64;
    match scheme {
        ScaleScheme::MinMax => {
            let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi == lo {
                column.fill(0.5);
            } else {
                let span = hi - lo;
                column.iter_mut().for_each(|q| *q = (*q - lo) / span);
            }
        }
        ScaleScheme::ZScore | ScaleScheme::StdDev => {
            // summing in sorted order makes the statistics independent of project order
            let mut sorted = column.to_vec();
            sorted.sort_by(f64::total_cmp);
            let mean = sorted.iter().sum::<f64>() / n;
            let mut dev: Vec<f64> = sorted.iter().map(|q| (q - mean) * (q - mean)).collect();
            dev.sort_by(f64::total_cmp);
            let var = dev.iter().sum::<f64>() / n;
            let s = var.sqrt();
            let degenerate = s == 0.0 || column.iter().all(|q| *q == column[0]);
            match (scheme, degenerate) {
                (ScaleScheme::ZScore, true) => column.fill(0.0),
                (ScaleScheme::ZScore, false) => {
                    column.iter_mut().for_each(|q| *q = (*q - mean) / s)
                }
                (_, true) => {}
                (_, false) => column.iter_mut().for_each(|q| *q /= s),
            }
        }
    }
}

/// Sum over groups of the rescaled qualities.
pub fn scale_qualities(qualities: &Matrix, scheme: ScaleScheme) -> Result<Vec<f64>> {
    let n = qualities.rows();
    if n < 2 && scheme != ScaleScheme::StdDev {
        return Err(Error::invalid(
            "n_projects",
            "min-max and z-score scaling need at least two projects",
        ));
    }
    let mut totals = vec![0.0; n];
    let mut column = Vec::with_capacity(n);
    for j in 0..qualities.cols() {
        column.clear();
        column.extend(qualities.column(j));
        scale_column(&mut column, scheme);
        for (t, q) in totals.iter_mut().zip(&column) {
            *t += q;
        }
    }
    Ok(totals)
}
