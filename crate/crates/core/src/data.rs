//! Unit-level census records: CSV ingestion, indicator derivation, grouping
//! into strata and ranking.
//!
//! Input columns (UTF-8, header row required):
//!
//! ```text
//! state,district,year,pop_t,pop_m,pop_f,lit_t,lit_m,lit_f,work_t,work_m,work_f
//! ```
//!
//! `state`, `district`, `year` and `pop_t` are required. The sex-split and
//! literate/worker columns may be omitted when no indicator needs them. Any
//! other column is kept verbatim and can be ranked with `custom:<column>`.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Indicator, RankEntry, RankSizeSeries};

pub const DEFAULT_MIN_UNITS: usize = 5;

const REQUIRED: [&str; 4] = ["state", "district", "year", "pop_t"];
const COUNT_COLUMNS: [&str; 9] = [
    "pop_t", "pop_m", "pop_f", "lit_t", "lit_m", "lit_f", "work_t", "work_m", "work_f",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SexCounts {
    pub total: Option<u64>,
    pub male: Option<u64>,
    pub female: Option<u64>,
}

impl SexCounts {
    fn pairs(&self) -> [(&'static str, Option<u64>); 3] {
        [
            ("total", self.total),
            ("male", self.male),
            ("female", self.female),
        ]
    }
}

/// One second-tier unit (district) with its raw counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub state: String,
    pub district: String,
    pub year: i32,
    pub population: SexCounts,
    pub literate: SexCounts,
    pub workers: SexCounts,
    /// Columns outside the fixed schema, verbatim.
    pub extra: BTreeMap<String, String>,
}

impl UnitRecord {
    /// Checks the count invariants; the error text is the rejection reason.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.state.is_empty() || self.district.is_empty() {
            return Err("state and district must be non-empty".into());
        }
        if self.population.total.is_none() {
            return Err("pop_t is required".into());
        }
        for (name, counts) in [("literate", &self.literate), ("workers", &self.workers)] {
            for ((sex, part), (_, pop)) in counts.pairs().into_iter().zip(self.population.pairs()) {
                if let (Some(part), Some(pop)) = (part, pop) {
                    if part > pop {
                        return Err(format!(
                            "{name} {sex} count {part} exceeds population {sex} count {pop}"
                        ));
                    }
                }
            }
        }
        for (name, counts) in [
            ("population", &self.population),
            ("literate", &self.literate),
            ("workers", &self.workers),
        ] {
            if let (Some(t), Some(m), Some(f)) = (counts.total, counts.male, counts.female) {
                if m.checked_add(f) != Some(t) {
                    return Err(format!("{name}: male {m} + female {f} != total {t}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowReject {
    /// 1-based line number in the input file.
    pub line: u64,
    pub reason: String,
}

/// Outcome of reading one input file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub records: Vec<UnitRecord>,
    pub rejects: Vec<RowReject>,
    pub rows_read: usize,
    pub warnings: Vec<String>,
}

impl LoadReport {
    pub fn summary(&self) -> String {
        format!(
            "{} rows read, {} accepted, {} rejected",
            self.rows_read,
            self.records.len(),
            self.rejects.len()
        )
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<LoadReport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    parse_units(file)
}

fn parse_count(raw: &str, column: &str) -> std::result::Result<Option<u64>, String> {
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<u64>()
        .map(Some)
        .map_err(|_| format!("{column}: expected a non-negative integer, got {raw:?}"))
}

/// Parse census-style rows from any reader. Malformed rows are collected in
/// [`LoadReport::rejects`]; only an unusable header or an I/O failure aborts.
pub fn parse_units<R: Read>(reader: R) -> Result<LoadReport> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();

    let mut report = LoadReport::default();
    if headers.iter().all(|h| h.is_empty()) {
        report.warnings.push("input is empty".into());
        return Ok(report);
    }

    let mut index = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        if h.is_empty() {
            return Err(Error::Header(format!("column {} has an empty name", i + 1)));
        }
        if index.insert(h.clone(), i).is_some() {
            return Err(Error::Header(format!("duplicate column {h:?}")));
        }
    }
    let missing: Vec<&str> = REQUIRED
        .iter()
        .copied()
        .filter(|c| !index.contains_key(*c))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Header(format!(
            "missing required column(s): {}",
            missing.join(", ")
        )));
    }

    let mut seen = HashSet::new();
    for row in rdr.records() {
        report.rows_read += 1;
        let row = match row {
            Ok(r) => r,
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                report.rejects.push(RowReject {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != headers.len() {
            report.rejects.push(RowReject {
                line,
                reason: format!("expected {} fields, found {}", headers.len(), row.len()),
            });
            continue;
        }
        match record_from_row(&row, &headers, &index) {
            Ok(rec) => {
                let key = (rec.state.clone(), rec.district.clone(), rec.year);
                if !seen.insert(key) {
                    report.rejects.push(RowReject {
                        line,
                        reason: format!(
                            "duplicate district {:?} in {:?} for year {}",
                            rec.district, rec.state, rec.year
                        ),
                    });
                } else {
                    report.records.push(rec);
                }
            }
            Err(reason) => report.rejects.push(RowReject { line, reason }),
        }
    }
    if report.rows_read == 0 {
        report
            .warnings
            .push("input has a header but no rows".into());
    }
    Ok(report)
}

fn record_from_row(
    row: &csv::StringRecord,
    headers: &[String],
    index: &BTreeMap<String, usize>,
) -> std::result::Result<UnitRecord, String> {
    let field = |name: &str| index.get(name).map(|&i| &row[i]).unwrap_or("");
    let year = field("year")
        .parse::<i32>()
        .map_err(|_| format!("year: expected an integer, got {:?}", field("year")))?;
    let mut counts = [None; 9];
    for (slot, column) in counts.iter_mut().zip(COUNT_COLUMNS) {
        *slot = parse_count(field(column), column)?;
    }
    let extra = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| !REQUIRED.contains(&h.as_str()) && !COUNT_COLUMNS.contains(&h.as_str()))
        .filter(|(i, _)| !row[*i].is_empty())
        .map(|(i, h)| (h.clone(), row[i].to_string()))
        .collect();
    let rec = UnitRecord {
        state: field("state").to_string(),
        district: field("district").to_string(),
        year,
        population: SexCounts {
            total: counts[0],
            male: counts[1],
            female: counts[2],
        },
        literate: SexCounts {
            total: counts[3],
            male: counts[4],
            female: counts[5],
        },
        workers: SexCounts {
            total: counts[6],
            male: counts[7],
            female: counts[8],
        },
        extra,
    };
    rec.validate()?;
    Ok(rec)
}

fn ratio(
    record: &UnitRecord,
    indicator: &Indicator,
    num: (Option<u64>, &str),
    den: (Option<u64>, &str),
) -> Result<f64> {
    let undefined = |reason: String| Error::IndicatorUndefined {
        unit: format!("{}/{}", record.state, record.district),
        indicator: indicator.to_string(),
        reason,
    };
    let n = num
        .0
        .ok_or_else(|| undefined(format!("{} is missing", num.1)))?;
    let d = den
        .0
        .ok_or_else(|| undefined(format!("{} is missing", den.1)))?;
    if d == 0 {
        return Err(undefined(format!("{} is zero", den.1)));
    }
    Ok(n as f64 / d as f64 * 100.0)
}

/// Indicator value of one unit. Rates are percentages; population is the raw count.
pub fn derive_indicator(record: &UnitRecord, indicator: &Indicator) -> Result<f64> {
    let pop = (record.population.total, "pop_t");
    match indicator {
        Indicator::Population => Ok(record.population.total.unwrap_or(0) as f64),
        Indicator::Lr => ratio(record, indicator, (record.literate.total, "lit_t"), pop),
        Indicator::Wpr => ratio(record, indicator, (record.workers.total, "work_t"), pop),
        Indicator::SrLr => ratio(
            record,
            indicator,
            (record.literate.female, "lit_f"),
            (record.literate.male, "lit_m"),
        ),
        Indicator::SrWpr => ratio(
            record,
            indicator,
            (record.workers.female, "work_f"),
            (record.workers.male, "work_m"),
        ),
        Indicator::Custom(column) => {
            let undefined = |reason: String| Error::IndicatorUndefined {
                unit: format!("{}/{}", record.state, record.district),
                indicator: indicator.to_string(),
                reason,
            };
            let raw = record
                .extra
                .get(&column.to_ascii_lowercase())
                .ok_or_else(|| undefined(format!("column {column:?} is missing")))?;
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
                _ => Err(undefined(format!("{raw:?} is not a non-negative number"))),
            }
        }
    }
}

/// All units of one stratum (state, or a pooled country-level set) for one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumDataset {
    pub stratum_id: String,
    pub year: i32,
    pub units: Vec<UnitRecord>,
    /// Pooled strata span several states; their unit ids carry the state.
    pub pooled: bool,
    pub included: bool,
    pub exclusion_reason: Option<String>,
}

impl StratumDataset {
    pub fn new(
        stratum_id: impl Into<String>,
        year: i32,
        mut units: Vec<UnitRecord>,
        pooled: bool,
        min_units: usize,
    ) -> Self {
        units.sort_by(|x, y| (&x.state, &x.district).cmp(&(&y.state, &y.district)));
        let included = units.len() >= min_units;
        let exclusion_reason = (!included).then(|| format!("fewer than {min_units} units"));
        Self {
            stratum_id: stratum_id.into(),
            year,
            units,
            pooled,
            included,
            exclusion_reason,
        }
    }

    fn unit_id(&self, rec: &UnitRecord) -> String {
        if self.pooled {
            format!("{}/{}", rec.state, rec.district)
        } else {
            rec.district.clone()
        }
    }
}

/// One dataset per state for `year`, ordered by state name.
pub fn group_strata(records: &[UnitRecord], year: i32, min_units: usize) -> Vec<StratumDataset> {
    let mut by_state: BTreeMap<&str, Vec<UnitRecord>> = BTreeMap::new();
    for rec in records.iter().filter(|r| r.year == year) {
        by_state.entry(&rec.state).or_default().push(rec.clone());
    }
    by_state
        .into_iter()
        .map(|(state, units)| StratumDataset::new(state, year, units, false, min_units))
        .collect()
}

/// Every unit of `year` pooled into a single stratum named `label`.
pub fn pooled_stratum(
    records: &[UnitRecord],
    year: i32,
    label: &str,
    min_units: usize,
) -> StratumDataset {
    let units = records.iter().filter(|r| r.year == year).cloned().collect();
    StratumDataset::new(label, year, units, true, min_units)
}

/// Rank the units of an included stratum by descending indicator value.
///
/// Equal values are ordered by ascending unit id. Units whose indicator is
/// undefined are dropped with a warning.
pub fn build_series(dataset: &StratumDataset, indicator: &Indicator) -> Result<RankSizeSeries> {
    if !dataset.included {
        return Err(Error::Excluded {
            stratum: dataset.stratum_id.clone(),
            reason: dataset
                .exclusion_reason
                .clone()
                .unwrap_or_else(|| "excluded".into()),
        });
    }
    let mut values: Vec<(String, f64)> = Vec::with_capacity(dataset.units.len());
    for rec in &dataset.units {
        match derive_indicator(rec, indicator) {
            Ok(v) => values.push((dataset.unit_id(rec), v)),
            Err(e) => warn!("{}: dropping unit: {e}", dataset.stratum_id),
        }
    }
    if values.is_empty() {
        return Err(Error::InvalidSeries(format!(
            "no unit of {:?} has a defined {indicator}",
            dataset.stratum_id
        )));
    }
    values.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    let entries = values
        .into_iter()
        .enumerate()
        .map(|(i, (unit_id, size))| RankEntry {
            unit_id,
            rank: i + 1,
            size,
        })
        .collect();
    RankSizeSeries::new(
        dataset.stratum_id.clone(),
        indicator.clone(),
        dataset.year,
        entries,
    )
}
