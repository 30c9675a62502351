//! Config files, CSV output and SVG plots.

pub mod config;
pub mod output;
pub mod plot;

pub use config::{config_digest, parse_config, parse_config_str, write_config, RunSpec, PAPER_SCALE_SAMPLES};
pub use output::{analytic, read_csv, simulate, write_csv, write_outputs, ResultRow, RunManifest};
pub use plot::{parse_y_range, plot_file, render, Chart, PlotOptions};

use crate::error::{Error, Result};
use crate::knapsack::{brute_force, solve, KnapsackInstance, Selection};
use crate::model::{format_rational, parse_rational, Rational};

/// Parses comma-separated numbers; `what` names the flag in errors.
pub fn parse_list<T>(text: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).ok_or_else(|| Error::Config(format!("`{what}`: `{s}` is not a number"))))
        .collect()
}

/// One knapsack on explicit values, costs and budget, as given on the command line.
pub fn solve_explicit(values: &str, costs: &str, budget: &str, exhaustive: bool) -> Result<(KnapsackInstance, Selection)> {
    let values = parse_list(values, "values", |s| s.parse::<f64>().ok())?;
    let costs = parse_list(costs, "costs", |s| parse_rational(s).ok())?;
    let budget: Rational =
        parse_rational(budget).map_err(|_| Error::Config(format!("`budget`: `{budget}` is not a number")))?;
    let instance = KnapsackInstance::new(values, costs, budget)?;
    let selection = if exhaustive { brute_force(&instance)? } else { solve(&instance)? };
    Ok((instance, selection))
}

/// Human-readable report with 1-based item numbers.
pub fn describe_selection(selection: &Selection) -> String {
    let items: Vec<String> = selection.indices().iter().map(|i| (i + 1).to_string()).collect();
    format!(
        "value = {}\nweight = {}\nitems = {{{}}}\n",
        selection.total_value,
        format_rational(&selection.total_weight),
        items.join(", ")
    )
}
