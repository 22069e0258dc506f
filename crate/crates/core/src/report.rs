//! Report tables written and read by the command-line tools.
//!
//! CSV files carry rounded values for reading by eye (parameters and KS to 3
//! decimals, UP to 2); JSON files carry the same rows at full precision.
//! Column order is fixed:
//!
//! | file        | columns |
//! |-------------|---------|
//! | fit         | `stratum,indicator,year,n,status,a,b,ks,entropy,up,log_likelihood,iterations,restarts,reason` |
//! | correlation | `year,left,right,statistic,n_strata,coefficient,t,t_critical,significant_95,slope,intercept` |
//! | compare     | `stratum,indicator,year_t1,year_t2,a_t1,a_t2,delta_a,b_t1,b_t2,delta_b,up_t1,up_t2,delta_up` |

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{CorrelationReport, StratumFit};
use crate::error::{Error, Result};
use crate::estimation::FitResult;
use crate::series::Indicator;
use crate::uncertainty::{up_delta, UncertaintyRecord, UpConvention};

pub const FIT_COLUMNS: [&str; 14] = [
    "stratum",
    "indicator",
    "year",
    "n",
    "status",
    "a",
    "b",
    "ks",
    "entropy",
    "up",
    "log_likelihood",
    "iterations",
    "restarts",
    "reason",
];

pub const CORRELATION_COLUMNS: [&str; 11] = [
    "year",
    "left",
    "right",
    "statistic",
    "n_strata",
    "coefficient",
    "t",
    "t_critical",
    "significant_95",
    "slope",
    "intercept",
];

pub const COMPARE_COLUMNS: [&str; 13] = [
    "stratum",
    "indicator",
    "year_t1",
    "year_t2",
    "a_t1",
    "a_t2",
    "delta_a",
    "b_t1",
    "b_t2",
    "delta_b",
    "up_t1",
    "up_t2",
    "delta_up",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    Ok,
    NonConverged,
    Excluded,
    Failed,
}

impl FitStatus {
    pub fn label(self) -> &'static str {
        match self {
            FitStatus::Ok => "ok",
            FitStatus::NonConverged => "non-converged",
            FitStatus::Excluded => "excluded",
            FitStatus::Failed => "failed",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ok" => FitStatus::Ok,
            "non-converged" => FitStatus::NonConverged,
            "excluded" => FitStatus::Excluded,
            "failed" => FitStatus::Failed,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub stratum: String,
    pub indicator: Indicator,
    pub year: i32,
    pub n: Option<usize>,
    pub status: FitStatus,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub ks: Option<f64>,
    pub entropy: Option<f64>,
    pub up: Option<f64>,
    pub log_likelihood: Option<f64>,
    pub iterations: Option<usize>,
    pub restarts: Option<usize>,
    pub reason: Option<String>,
}

impl FitRow {
    pub fn from_fit(stratum: &str, indicator: &Indicator, year: i32, fit: &FitResult) -> Self {
        Self {
            stratum: stratum.to_string(),
            indicator: indicator.clone(),
            year,
            n: Some(fit.params.n()),
            status: if fit.converged {
                FitStatus::Ok
            } else {
                FitStatus::NonConverged
            },
            a: Some(fit.params.a()),
            b: Some(fit.params.b()),
            ks: Some(fit.ks),
            entropy: Some(fit.entropy),
            up: fit.up,
            log_likelihood: Some(fit.log_likelihood),
            iterations: Some(fit.iterations),
            restarts: Some(fit.restarts_used),
            reason: (!fit.converged).then(|| "optimizer did not converge".to_string()),
        }
    }

    /// A row without fitted values.
    pub fn without_fit(
        stratum: &str,
        indicator: &Indicator,
        year: i32,
        n: Option<usize>,
        status: FitStatus,
        reason: impl Into<String>,
    ) -> Self {
        Self {
            stratum: stratum.to_string(),
            indicator: indicator.clone(),
            year,
            n,
            status,
            a: None,
            b: None,
            ks: None,
            entropy: None,
            up: None,
            log_likelihood: None,
            iterations: None,
            restarts: None,
            reason: Some(reason.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub indicator: Indicator,
    pub year: i32,
    pub up_convention: UpConvention,
    pub rows: Vec<FitRow>,
}

impl FitReport {
    /// Rows that carry fitted parameters, as correlation inputs under `variable`.
    pub fn stratum_fits(&self, variable: &str) -> Vec<StratumFit> {
        self.rows
            .iter()
            .filter(|r| r.status == FitStatus::Ok)
            .filter_map(|r| {
                Some(StratumFit {
                    stratum: r.stratum.clone(),
                    variable: variable.to_string(),
                    a: r.a?,
                    b: r.b?,
                    up: r.up,
                })
            })
            .collect()
    }

    pub fn has_non_converged(&self) -> bool {
        self.rows
            .iter()
            .any(|r| matches!(r.status, FitStatus::NonConverged | FitStatus::Failed))
    }
}

/// Fixed-point text; never prints a negative zero.
pub fn fixed(value: f64, decimals: usize) -> String {
    let s = format!("{value:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn opt_fixed(value: Option<f64>, decimals: usize) -> String {
    value.map(|v| fixed(v, decimals)).unwrap_or_default()
}

fn opt_int(value: Option<usize>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_fit_csv<W: Write>(report: &FitReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIT_COLUMNS)?;
    for r in &report.rows {
        w.write_record([
            r.stratum.clone(),
            r.indicator.to_string(),
            r.year.to_string(),
            opt_int(r.n),
            r.status.label().to_string(),
            opt_fixed(r.a, 3),
            opt_fixed(r.b, 3),
            opt_fixed(r.ks, 3),
            opt_fixed(r.entropy, 4),
            opt_fixed(r.up, 2),
            opt_fixed(r.log_likelihood, 6),
            opt_int(r.iterations),
            opt_int(r.restarts),
            r.reason.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn parse_opt<T: std::str::FromStr>(raw: &str, column: &str, line: u64) -> Result<Option<T>> {
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse().map(Some).map_err(|_| Error::Parse {
        line,
        message: format!("{column}: cannot parse {raw:?}"),
    })
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let found: Vec<&str> = found
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}'))
        .collect();
    if found != expected {
        return Err(Error::Header(format!(
            "expected columns {}, found {}",
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

/// Read a fit report written by [`write_fit_csv`]. The UP convention is not
/// stored in CSV and is reported as the default.
pub fn parse_fit_report_csv<R: Read>(input: R) -> Result<FitReport> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    check_header(rdr.headers()?, &FIT_COLUMNS)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let parse_err = |message: String| Error::Parse { line, message };
        let indicator: Indicator = rec[1]
            .parse()
            .map_err(|e: Error| parse_err(e.to_string()))?;
        let year = rec[2]
            .parse()
            .map_err(|_| parse_err(format!("year: cannot parse {:?}", &rec[2])))?;
        let status = FitStatus::parse(&rec[4])
            .ok_or_else(|| parse_err(format!("status: unknown value {:?}", &rec[4])))?;
        rows.push(FitRow {
            stratum: rec[0].to_string(),
            indicator,
            year,
            n: parse_opt(&rec[3], "n", line)?,
            status,
            a: parse_opt(&rec[5], "a", line)?,
            b: parse_opt(&rec[6], "b", line)?,
            ks: parse_opt(&rec[7], "ks", line)?,
            entropy: parse_opt(&rec[8], "entropy", line)?,
            up: parse_opt(&rec[9], "up", line)?,
            log_likelihood: parse_opt(&rec[10], "log_likelihood", line)?,
            iterations: parse_opt(&rec[11], "iterations", line)?,
            restarts: parse_opt(&rec[12], "restarts", line)?,
            reason: (!rec[13].is_empty()).then(|| rec[13].to_string()),
        });
    }
    let first = rows
        .first()
        .ok_or_else(|| Error::InsufficientData("fit report has no rows".into()))?;
    let (indicator, year) = (first.indicator.clone(), first.year);
    if let Some(odd) = rows
        .iter()
        .find(|r| r.indicator != indicator || r.year != year)
    {
        return Err(Error::InvalidParameter(format!(
            "fit report mixes {indicator}/{year} with {}/{}",
            odd.indicator, odd.year
        )));
    }
    Ok(FitReport {
        indicator,
        year,
        up_convention: UpConvention::default(),
        rows,
    })
}

pub fn parse_fit_report_json(text: &str) -> Result<FitReport> {
    Ok(serde_json::from_str(text)?)
}

/// Read a fit report, choosing the format from the file extension.
pub fn read_fit_report(path: impl AsRef<Path>) -> Result<FitReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        parse_fit_report_json(&text)
    } else {
        parse_fit_report_csv(text.as_bytes())
    }
}

pub fn write_correlation_csv<W: Write>(report: &CorrelationReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CORRELATION_COLUMNS)?;
    for r in &report.rows {
        w.write_record([
            report.year.to_string(),
            r.left.clone(),
            r.right.clone(),
            r.statistic.label().to_string(),
            r.n_strata.to_string(),
            opt_fixed(r.coefficient, 6),
            opt_fixed(r.t.filter(|t| t.is_finite()), 6),
            fixed(r.t_critical, 6),
            r.significant_95.to_string(),
            opt_fixed(r.slope, 6),
            opt_fixed(r.intercept, 6),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub stratum: String,
    pub indicator: Indicator,
    pub year_t1: i32,
    pub year_t2: i32,
    pub a_t1: f64,
    pub a_t2: f64,
    pub delta_a: f64,
    pub b_t1: f64,
    pub b_t2: f64,
    pub delta_b: f64,
    pub up_t1: Option<f64>,
    pub up_t2: Option<f64>,
    pub delta_up: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
}

fn uncertainty_record(row: &FitRow) -> Option<UncertaintyRecord> {
    Some(UncertaintyRecord {
        stratum_id: row.stratum.clone(),
        indicator: row.indicator.clone(),
        year: row.year,
        n_units: row.n?,
        entropy: row.entropy?,
        up: row.up?,
    })
}

/// Per-stratum changes from `earlier` to `later`, largest `|delta UP|` first.
pub fn compare_fit_reports(earlier: &FitReport, later: &FitReport) -> Result<CompareReport> {
    if earlier.up_convention != later.up_convention {
        return Err(Error::Comparison(format!(
            "UP conventions differ: {} vs {}",
            earlier.up_convention, later.up_convention
        )));
    }
    let fitted = |rep: &FitReport| -> BTreeMap<(String, Indicator), FitRow> {
        rep.rows
            .iter()
            .filter(|r| r.a.is_some() && r.b.is_some())
            .map(|r| ((r.stratum.clone(), r.indicator.clone()), r.clone()))
            .collect()
    };
    let before = fitted(earlier);
    let after = fitted(later);
    let mut rows = Vec::new();
    for (key, r1) in &before {
        let Some(r2) = after.get(key) else { continue };
        let (a1, a2, b1, b2) = (r1.a.unwrap(), r2.a.unwrap(), r1.b.unwrap(), r2.b.unwrap());
        let delta_up = match (uncertainty_record(r1), uncertainty_record(r2)) {
            (Some(u1), Some(u2)) => Some(up_delta(&u1, &u2)?),
            _ => None,
        };
        rows.push(CompareRow {
            stratum: key.0.clone(),
            indicator: key.1.clone(),
            year_t1: r1.year,
            year_t2: r2.year,
            a_t1: a1,
            a_t2: a2,
            delta_a: a2 - a1,
            b_t1: b1,
            b_t2: b2,
            delta_b: b2 - b1,
            up_t1: r1.up,
            up_t2: r2.up,
            delta_up,
        });
    }
    if rows.is_empty() {
        return Err(Error::Comparison(
            "the reports share no fitted stratum".into(),
        ));
    }
    rows.sort_by(|x, y| {
        let mag = |r: &CompareRow| r.delta_up.map(f64::abs).unwrap_or(f64::NEG_INFINITY);
        mag(y)
            .total_cmp(&mag(x))
            .then_with(|| x.stratum.cmp(&y.stratum))
            .then_with(|| x.indicator.cmp(&y.indicator))
    });
    Ok(CompareReport { rows })
}

pub fn write_compare_csv<W: Write>(report: &CompareReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_COLUMNS)?;
    for r in &report.rows {
        w.write_record([
            r.stratum.clone(),
            r.indicator.to_string(),
            r.year_t1.to_string(),
            r.year_t2.to_string(),
            fixed(r.a_t1, 3),
            fixed(r.a_t2, 3),
            fixed(r.delta_a, 3),
            fixed(r.b_t1, 3),
            fixed(r.b_t2, 3),
            fixed(r.delta_b, 3),
            opt_fixed(r.up_t1, 2),
            opt_fixed(r.up_t2, 2),
            opt_fixed(r.delta_up, 2),
        ])?;
    }
    w.flush()?;
    Ok(())
}
