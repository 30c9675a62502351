//! Running a spec and the CSV result format.
//!
//! A result file starts with `#` comment lines carrying the artifact version,
//! seed and config digest, followed by
//! `method,N_s,beta,cost,kappa,r,samples,mean,std_error`. The wall-clock
//! timestamp goes into a `<stem>.manifest.json` sidecar so that reruns give
//! identical CSV bytes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{config_digest, RunSpec};
use crate::analytic::{performance_two, TwoProjectMethod, TwoProjectScenario};
use crate::error::{Error, Result};
use crate::model::Rational;
use crate::simulator::{run_cells, ScenarioConfig, SweepRow};

pub const HEADER: [&str; 9] = ["method", "N_s", "beta", "cost", "kappa", "r", "samples", "mean", "std_error"];
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub n_groups: usize,
    pub beta: f64,
    pub cost: String,
    pub kappa: f64,
    pub r: f64,
    /// Monte Carlo replicas; 0 for quadrature rows.
    pub samples: usize,
    pub mean: f64,
    pub std_error: f64,
}

impl From<SweepRow> for ResultRow {
    fn from(row: SweepRow) -> Self {
        Self {
            method: row.method.name().to_string(),
            n_groups: row.n_groups,
            beta: row.beta,
            cost: row.cost,
            kappa: row.kappa,
            r: row.r,
            samples: row.estimate.samples,
            mean: row.estimate.mean,
            std_error: row.estimate.std_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub version: String,
    pub seed: u64,
    pub timestamp: String,
}

impl RunManifest {
    pub fn for_spec(spec: &RunSpec) -> Self {
        Self {
            config_digest: config_digest(spec),
            version: VERSION.to_string(),
            seed: spec.seed,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// Monte Carlo over every cell of the spec.
pub fn simulate(spec: &RunSpec) -> Result<Vec<ResultRow>> {
    let cells = spec.cells();
    for cell in &cells {
        cell.validate()?;
    }
    Ok(run_cells(&cells, spec.seed, spec.common_random_numbers)?
        .into_iter()
        .map(ResultRow::from)
        .collect())
}

fn bad(key: &str, reason: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{key}`: {reason}"))
}

fn two_project_scenario(cell: &ScenarioConfig) -> Result<(TwoProjectScenario, TwoProjectMethod)> {
    let method = TwoProjectMethod::from_aggregation(&cell.method).ok_or_else(|| {
        bad(
            "method",
            format!("`{}` has no quadrature; use arithmetic_mean, individual, delegation or median", cell.method.name()),
        )
    })?;
    if cell.n_projects != 2 {
        return Err(bad("n_projects", "quadrature needs exactly 2 projects"));
    }
    if cell.kappa != 1.0 {
        return Err(bad("kappa", "quadrature assumes kappa = 1"));
    }
    if cell.info_error != 0.0 {
        return Err(bad("r", "quadrature assumes r = 0"));
    }
    if method == TwoProjectMethod::Median && cell.n_groups != 3 {
        return Err(bad("n_groups", "median quadrature needs exactly 3 groups"));
    }
    let costs = cell.project_costs();
    let total: Rational = costs.iter().sum();
    if costs.iter().any(|w| *w > cell.budget) || cell.budget >= total {
        return Err(bad("budget", "quadrature needs a budget that fits either project but not both"));
    }
    let values = cell.project_values();
    let scenario = TwoProjectScenario::with_panel(
        values[0],
        values[1],
        cell.e_m,
        cell.beta,
        cell.n_groups,
        (cell.t_min, cell.t_max),
    )
    .map_err(|e| bad("values", e))?;
    Ok((scenario, method))
}

/// Two-project quadrature over every cell. `std_error` holds the quadrature
/// error estimate and `samples` is 0.
pub fn analytic(spec: &RunSpec) -> Result<Vec<ResultRow>> {
    spec.cells()
        .iter()
        .map(|cell| {
            let (scenario, method) = two_project_scenario(cell)?;
            let integral = performance_two(&scenario, method, &spec.quadrature)?;
            Ok(ResultRow {
                method: cell.method.name().to_string(),
                n_groups: cell.n_groups,
                beta: cell.beta,
                cost: match cell.costs {
                    Some(_) => "custom".to_string(),
                    None => cell.cost_kind.name().to_string(),
                },
                kappa: cell.kappa,
                r: cell.info_error,
                samples: 0,
                mean: integral.value,
                std_error: integral.error,
            })
        })
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Csv(e.to_string())
}

/// Writes comment lines and rows. Floats use Rust's shortest round-trip form.
pub fn write_csv<W: Write>(mut out: W, manifest: &RunManifest, rows: &[ResultRow]) -> Result<()> {
    writeln!(out, "# collective-knapsack {}", manifest.version)?;
    writeln!(out, "# seed = {}", manifest.seed)?;
    writeln!(out, "# config_sha256 = {}", manifest.config_digest)?;
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    writer.write_record(HEADER).map_err(csv_error)?;
    for row in rows {
        writer
            .write_record([
                row.method.clone(),
                row.n_groups.to_string(),
                row.beta.to_string(),
                row.cost.clone(),
                row.kappa.to_string(),
                row.r.to_string(),
                row.samples.to_string(),
                row.mean.to_string(),
                row.std_error.to_string(),
            ])
            .map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn csv_string(manifest: &RunManifest, rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, manifest, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Parses a result file. Comment lines are skipped; the header must match.
pub fn read_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_error)?;
    if header.is_empty() || header.len() == 1 && header[0].is_empty() {
        return Err(Error::Csv("empty file".into()));
    }
    if header.iter().ne(HEADER) {
        return Err(Error::Csv(format!("expected header `{}`", HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = k + 2;
        let num = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|_| Error::Csv(format!("row {line}: `{}` in column {} is not a number", &record[i], HEADER[i])))
        };
        let int = |i: usize| -> Result<usize> {
            record[i]
                .parse::<usize>()
                .map_err(|_| Error::Csv(format!("row {line}: `{}` in column {} is not an integer", &record[i], HEADER[i])))
        };
        rows.push(ResultRow {
            method: record[0].to_string(),
            n_groups: int(1)?,
            beta: num(2)?,
            cost: record[3].to_string(),
            kappa: num(4)?,
            r: num(5)?,
            samples: int(6)?,
            mean: num(7)?,
            std_error: num(8)?,
        });
    }
    Ok(rows)
}

/// `<dir>/<stem>.manifest.json` next to `csv_path`.
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    csv_path.with_file_name(format!("{stem}.manifest.json"))
}

/// Writes the CSV and its manifest sidecar.
pub fn write_outputs(csv_path: &Path, manifest: &RunManifest, rows: &[ResultRow]) -> Result<()> {
    let text = csv_string(manifest, rows)?;
    std::fs::write(csv_path, text).map_err(|e| Error::Io(format!("{}: {e}", csv_path.display())))?;
    let sidecar = manifest_path(csv_path);
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(&sidecar, json + "\n").map_err(|e| Error::Io(format!("{}: {e}", sidecar.display())))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config_str;

    fn manifest() -> RunManifest {
        RunManifest {
            config_digest: "ab".repeat(32),
            version: VERSION.into(),
            seed: 3,
            timestamp: "2020-01-01T00:00:00Z".into(),
        }
    }

    #[test]
    fn csv_layout_and_read_back() {
        let rows = vec![ResultRow {
            method: "median".into(),
            n_groups: 3,
            beta: 0.5,
            cost: "uniform".into(),
            kappa: 1.0,
            r: 0.0,
            samples: 20000,
            mean: 301.25,
            std_error: 0.125,
        }];
        let text = csv_string(&manifest(), &rows).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# collective-knapsack {VERSION}"));
        assert_eq!(lines[1], "# seed = 3");
        assert_eq!(lines[3], "method,N_s,beta,cost,kappa,r,samples,mean,std_error");
        assert_eq!(lines[4], "median,3,0.5,uniform,1,0,20000,301.25,0.125");
        assert!(!text.contains('\r'));
        assert_eq!(read_csv(&text).unwrap(), rows);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(read_csv("").is_err());
        assert!(read_csv("a,b\n1,2\n").is_err());
        let bad_number = format!("{}\nmedian,3,x,uniform,1,0,1,2,3\n", HEADER.join(","));
        assert!(read_csv(&bad_number).unwrap_err().to_string().contains("beta"));
        let short = format!("{}\nmedian,3\n", HEADER.join(","));
        assert!(read_csv(&short).is_err());
    }

    #[test]
    fn analytic_individual_row() {
        let spec = parse_config_str("method = \"individual\"\nn_projects = 2").unwrap();
        let rows = analytic(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].samples, 0);
        assert!((rows[0].mean - 1.626).abs() < 5e-4, "{}", rows[0].mean);
    }

    #[test]
    fn analytic_rejects_unsupported_cells() {
        for (text, key) in [
            ("method = \"borda\"\nn_projects = 2", "method"),
            ("method = \"median\"", "n_projects"),
            ("method = \"median\"\nn_projects = 2\nkappa = 2.0", "kappa"),
            ("method = \"median\"\nn_projects = 2\nr = 0.5", "r"),
            ("method = \"median\"\nn_projects = 2\nn_groups = 5", "n_groups"),
            ("method = \"median\"\nn_projects = 2\nbudget = 2", "budget"),
        ] {
            let spec = parse_config_str(text).unwrap();
            let err = analytic(&spec).unwrap_err().to_string();
            assert!(err.contains(&format!("`{key}`")), "{text}: {err}");
        }
    }

    #[test]
    fn sidecar_holds_timestamp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_outputs(&path, &manifest(), &[]).unwrap();
        let json = std::fs::read_to_string(dir.path().join("out.manifest.json")).unwrap();
        let back: RunManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(back, manifest());
        assert!(!std::fs::read_to_string(&path).unwrap().contains("2020"));
    }
}
