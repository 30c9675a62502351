//! Exact 0/1 knapsack.
//!
//! Weights are exact rationals. They are brought to a common denominator `D`
//! and the DP runs over integer capacities `0..=floor(W·D)`, tabulating the best
//! real-valued total per capacity. Values are never discretized.
//!
//! An item is taken only when it strictly improves the tabulated value, so
//! ties resolve toward leaving items out; items with non-positive value are
//! never taken.

use num_integer::Integer;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::model::Rational;

/// Default cap on `items × (capacity + 1)` DP cells.
pub const DEFAULT_MAX_CELLS: u128 = 100_000_000;

/// Largest instance accepted by [`brute_force`].
pub const BRUTE_FORCE_LIMIT: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackInstance {
    item_values: Vec<f64>,
    item_weights: Vec<Rational>,
    capacity: Rational,
}

impl KnapsackInstance {
    pub fn new(
        item_values: Vec<f64>,
        item_weights: Vec<Rational>,
        capacity: Rational,
    ) -> Result<Self> {
        if item_values.len() != item_weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values but {} weights",
                item_values.len(),
                item_weights.len()
            )));
        }
        let zero = Ratio::from_integer(0);
        if item_weights.iter().any(|w| *w <= zero) {
            return Err(Error::invalid("item_weights", "weights must be > 0"));
        }
        if capacity <= zero {
            return Err(Error::invalid("capacity", "capacity must be > 0"));
        }
        if item_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("item_values", "values must be finite"));
        }
        Ok(Self {
            item_values,
            item_weights,
            capacity,
        })
    }

    pub fn len(&self) -> usize {
        self.item_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.item_values.is_empty()
    }

    pub fn item_values(&self) -> &[f64] {
        &self.item_values
    }

    pub fn item_weights(&self) -> &[Rational] {
        &self.item_weights
    }

    pub fn capacity(&self) -> Rational {
        self.capacity
    }

    /// Evaluates an arbitrary packing against this instance.
    pub fn evaluate(&self, chosen: Vec<bool>) -> Selection {
        let total_value = chosen
            .iter()
            .zip(&self.item_values)
            .filter(|(x, _)| **x)
            .map(|(_, v)| *v)
            .sum();
        let total_weight = chosen
            .iter()
            .zip(&self.item_weights)
            .filter(|(x, _)| **x)
            .map(|(_, w)| *w)
            .sum();
        Selection {
            chosen,
            total_value,
            total_weight,
        }
    }

    pub fn is_feasible(&self, selection: &Selection) -> bool {
        selection.total_weight <= self.capacity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub chosen: Vec<bool>,
    pub total_value: f64,
    pub total_weight: Rational,
}

impl Selection {
    /// Zero-based indices of the chosen items.
    pub fn indices(&self) -> Vec<usize> {
        self.chosen
            .iter()
            .enumerate()
            .filter_map(|(i, x)| x.then_some(i))
            .collect()
    }
}

/// Weights and capacity scaled to integers by their least common denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledWeights {
    weights: Vec<usize>,
    capacity: usize,
    denominator: i64,
}

impl ScaledWeights {
    pub fn new(weights: &[Rational], capacity: Rational, max_cells: u128) -> Result<Self> {
        let too_large = |cells: u128| Error::TooLarge {
            cells,
            limit: max_cells,
        };
        let mut lcd: i128 = 1;
        for w in weights {
            lcd = lcd.lcm(&(*w.denom() as i128));
            if lcd > i64::MAX as i128 {
                return Err(too_large(u128::MAX));
            }
        }
        // positive operands, so integer division is the floor
        let capacity_scaled = *capacity.numer() as i128 * lcd / *capacity.denom() as i128;
        let cells = (weights.len() as u128).saturating_mul(capacity_scaled as u128 + 1);
        if cells > max_cells {
            return Err(too_large(cells));
        }
        let scaled = weights
            .iter()
            .map(|w| {
                let s = *w.numer() as i128 * (lcd / *w.denom() as i128);
                // an item heavier than the knapsack can never be taken
                s.min(capacity_scaled + 1) as usize
            })
            .collect();
        Ok(Self {
            weights: scaled,
            capacity: capacity_scaled as usize,
            denominator: lcd as i64,
        })
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn denominator(&self) -> i64 {
        self.denominator
    }

    /// Optimal packing for `values` over these weights.
    pub fn solve(&self, values: &[f64]) -> Vec<bool> {
        let order: Vec<usize> = (0..values.len()).collect();
        self.solve_in_order(values, &order)
    }

    /// Optimal packing, scanning items in `order`. Among equal-value packings
    /// the one using the earliest items of `order` wins.
    pub fn solve_in_order(&self, values: &[f64], order: &[usize]) -> Vec<bool> {
        assert_eq!(values.len(), self.weights.len(), "one value per weight");
        assert_eq!(order.len(), values.len(), "order must cover every item");
        let n = values.len();
        let cap = self.capacity;
        let words = cap / 64 + 1;
        let mut best = vec![0.0f64; cap + 1];
        let mut take = vec![0u64; n * words];
        for (k, &i) in order.iter().enumerate() {
            let (w, v) = (self.weights[i], values[i]);
            if v <= 0.0 || w > cap {
                continue;
            }
            let row = &mut take[k * words..(k + 1) * words];
            for c in (w..=cap).rev() {
                let candidate = best[c - w] + v;
                if candidate > best[c] {
                    best[c] = candidate;
                    row[c / 64] |= 1 << (c % 64);
                }
            }
        }
        let mut chosen = vec![false; n];
        let mut c = cap;
        for (k, &i) in order.iter().enumerate().rev() {
            if take[k * words + c / 64] >> (c % 64) & 1 == 1 {
                chosen[i] = true;
                c -= self.weights[i];
            }
        }
        chosen
    }
}

/// DP solver with a configurable table-size guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Solver {
    pub max_cells: u128,
}

impl Default for Solver {
    fn default() -> Self {
        Self {
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

impl Solver {
    pub fn with_max_cells(max_cells: u128) -> Self {
        Self { max_cells }
    }

    pub fn solve(&self, instance: &KnapsackInstance) -> Result<Selection> {
        let scaled = ScaledWeights::new(&instance.item_weights, instance.capacity, self.max_cells)?;
        Ok(instance.evaluate(scaled.solve(&instance.item_values)))
    }
}

/// Exact DP solve with the default memory guard.
pub fn solve(instance: &KnapsackInstance) -> Result<Selection> {
    Solver::default().solve(instance)
}

/// Exhaustive search over all `2^n` subsets with exact rational weights.
/// Subsets are visited in Gray-code order so each step changes one item.
pub fn brute_force(instance: &KnapsackInstance) -> Result<Selection> {
    let n = instance.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooManyItems {
            items: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut weight: Rational = Ratio::from_integer(0);
    let mut gray: u64 = 0;
    let mut best_mask = 0u64;
    let mut best_value = 0.0f64;
    for step in 1u64..(1u64 << n) {
        let bit = step.trailing_zeros() as usize;
        gray ^= 1 << bit;
        if gray >> bit & 1 == 1 {
            weight += instance.item_weights[bit];
        } else {
            weight -= instance.item_weights[bit];
        }
        if weight > instance.capacity {
            continue;
        }
        let value: f64 = (0..n)
            .filter(|i| gray >> i & 1 == 1)
            .map(|i| instance.item_values[i])
            .sum();
        if value > best_value {
            best_value = value;
            best_mask = gray;
        }
    }
    Ok(instance.evaluate((0..n).map(|i| best_mask >> i & 1 == 1).collect()))
}
