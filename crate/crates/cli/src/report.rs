//! Summary JSON and CSV detail.

use std::fs;
use std::path::Path;

use qloop::EstimateWithError;
use serde::Serialize;

use crate::config::Run;
use crate::error::CliError;

/// Agreement rule for every sampled comparison, in standard errors.
pub const SIGMAS: f64 = 3.0;

/// One line of output. Rows with an `exact` value are comparisons.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub observable: String,
    pub x: Option<usize>,
    pub y: Option<usize>,
    pub mean: f64,
    pub stderr: Option<f64>,
    pub exact: Option<f64>,
    pub z: Option<f64>,
    pub pass: Option<bool>,
}

impl Row {
    pub fn value(observable: impl Into<String>, mean: f64) -> Row {
        Row {
            observable: observable.into(),
            x: None,
            y: None,
            mean,
            stderr: None,
            exact: None,
            z: None,
            pass: None,
        }
    }

    pub fn estimate(observable: impl Into<String>, est: EstimateWithError) -> Row {
        Row {
            stderr: Some(est.stderr),
            ..Row::value(observable, est.mean)
        }
    }

    /// `est` against `exact` under the 3-sigma rule, with `floor` added to
    /// the allowed deviation.
    pub fn compare(observable: impl Into<String>, est: EstimateWithError, exact: f64, floor: f64) -> Row {
        let pass = (est.mean - exact).abs() <= SIGMAS * est.stderr + floor;
        let z = est.z_score(exact);
        Row {
            exact: Some(exact),
            z: z.is_finite().then_some(z),
            pass: Some(pass),
            ..Row::estimate(observable, est)
        }
    }

    pub fn at(mut self, x: usize, y: usize) -> Row {
        self.x = Some(x);
        self.y = Some(y);
        self
    }
}

#[derive(Debug, Default)]
pub struct Report {
    pub rows: Vec<Row>,
    /// Extra task-specific block for the summary.
    pub oracle: Option<serde_json::Value>,
}

impl Report {
    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn n_failed(&self) -> usize {
        self.rows.iter().filter(|r| r.pass == Some(false)).count()
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    task: String,
    config_sha256: &'a str,
    seed: u64,
    passed: bool,
    n_comparisons: usize,
    n_failed: usize,
    comparisons: Vec<&'a Row>,
    estimates: Vec<&'a Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<&'a serde_json::Value>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    x: Option<usize>,
    y: Option<usize>,
    observable: &'a str,
    mean: f64,
    stderr: Option<f64>,
    exact: Option<f64>,
    pass: Option<bool>,
}

pub fn summary_json(run: &Run, report: &Report) -> Result<String, CliError> {
    let (comparisons, estimates): (Vec<&Row>, Vec<&Row>) = report.rows.iter().partition(|r| r.exact.is_some());
    let summary = Summary {
        task: run.task.to_string(),
        config_sha256: &run.config_sha256,
        seed: run.seed,
        passed: report.passed(),
        n_comparisons: comparisons.len(),
        n_failed: report.n_failed(),
        comparisons,
        estimates,
        oracle: report.oracle.as_ref(),
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    Ok(text)
}

pub fn detail_csv(report: &Report) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.rows {
        w.serialize(CsvRow {
            x: r.x,
            y: r.y,
            observable: &r.observable,
            mean: r.mean,
            stderr: r.stderr,
            exact: r.exact,
            pass: r.pass,
        })?;
    }
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

pub fn write(run: &Run, report: &Report) -> Result<(), CliError> {
    let dir = &run.out_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.clone(), source })?;
    put(&dir.join("summary.json"), summary_json(run, report)?.as_bytes())?;
    put(&dir.join("detail.csv"), &detail_csv(report)?)
}

fn put(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}
