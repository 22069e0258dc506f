use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which per-unit quantity a series ranks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Indicator {
    /// Raw population count.
    Population,
    /// Literacy rate, literate / population x 100.
    Lr,
    /// Work participation rate, workers / population x 100.
    Wpr,
    /// Female-to-male literate ratio x 100.
    SrLr,
    /// Female-to-male worker ratio x 100.
    SrWpr,
    /// Value of an extra input column, taken as is.
    Custom(String),
}

impl Indicator {
    /// File-name friendly label.
    pub fn slug(&self) -> String {
        match self {
            Indicator::Custom(c) => {
                let cleaned: String = c
                    .chars()
                    .map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '_' })
                    .collect();
                format!("custom-{cleaned}")
            }
            other => other.to_string(),
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Indicator::Population => f.write_str("population"),
            Indicator::Lr => f.write_str("lr"),
            Indicator::Wpr => f.write_str("wpr"),
            Indicator::SrLr => f.write_str("sr-lr"),
            Indicator::SrWpr => f.write_str("sr-wpr"),
            Indicator::Custom(c) => write!(f, "custom:{c}"),
        }
    }
}

impl FromStr for Indicator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "population" | "pop" => Ok(Indicator::Population),
            "lr" => Ok(Indicator::Lr),
            "wpr" => Ok(Indicator::Wpr),
            "sr-lr" => Ok(Indicator::SrLr),
            "sr-wpr" => Ok(Indicator::SrWpr),
            _ => match t.split_once(':') {
                Some((head, col)) if head.eq_ignore_ascii_case("custom") && !col.trim().is_empty() => {
                    Ok(Indicator::Custom(col.trim().to_string()))
                }
                _ => Err(Error::InvalidParameter(format!(
                    "unknown indicator {t:?} (expected population, lr, wpr, sr-lr, sr-wpr or custom:<column>)"
                ))),
            },
        }
    }
}

impl TryFrom<String> for Indicator {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Indicator> for String {
    fn from(i: Indicator) -> Self {
        i.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub unit_id: String,
    pub rank: usize,
    pub size: f64,
}

/// One stratum's `(rank, size)` observations for one indicator and year.
///
/// Entries are held in rank order and the ranks are exactly `1..=N`.
/// Sizes are finite, non-negative and not all zero. Size ordering is not
/// enforced here: series built from data are non-increasing by construction,
/// while synthetic and rank-reversed series need not be.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSizeSeries {
    stratum_id: String,
    indicator: Indicator,
    year: i32,
    entries: Vec<RankEntry>,
}

impl RankSizeSeries {
    pub fn new(
        stratum_id: impl Into<String>,
        indicator: Indicator,
        year: i32,
        mut entries: Vec<RankEntry>,
    ) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::InvalidSeries("series has no entries".into()));
        }
        entries.sort_by_key(|e| e.rank);
        for (i, e) in entries.iter().enumerate() {
            if e.rank != i + 1 {
                return Err(Error::InvalidSeries(format!(
                    "ranks must be exactly 1..={n} without duplicates (found rank {} at position {})",
                    e.rank,
                    i + 1
                )));
            }
            if !e.size.is_finite() || e.size < 0.0 {
                return Err(Error::InvalidSeries(format!(
                    "size at rank {} must be finite and non-negative, got {}",
                    e.rank, e.size
                )));
            }
        }
        if !entries.iter().any(|e| e.size > 0.0) {
            return Err(Error::InvalidSeries("all sizes are zero".into()));
        }
        Ok(Self {
            stratum_id: stratum_id.into(),
            indicator,
            year,
            entries,
        })
    }

    /// Series whose size at rank `r` is `sizes[r - 1]`; unit ids are the ranks.
    pub fn from_sizes(
        stratum_id: impl Into<String>,
        indicator: Indicator,
        year: i32,
        sizes: &[f64],
    ) -> Result<Self> {
        let width = sizes.len().to_string().len();
        let entries = sizes
            .iter()
            .enumerate()
            .map(|(i, &size)| RankEntry {
                unit_id: format!("u{:0width$}", i + 1),
                rank: i + 1,
                size,
            })
            .collect();
        Self::new(stratum_id, indicator, year, entries)
    }

    pub fn stratum_id(&self) -> &str {
        &self.stratum_id
    }

    pub fn indicator(&self) -> &Indicator {
        &self.indicator
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn entries(&self) -> &[RankEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sizes in rank order.
    pub fn sizes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.size)
    }

    pub fn total(&self) -> f64 {
        self.sizes().sum()
    }

    /// True when sizes are non-increasing in rank.
    pub fn is_size_ordered(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].size >= w[1].size)
    }

    /// Every size multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive and finite, got {factor}"
            )));
        }
        let entries = self
            .entries
            .iter()
            .map(|e| RankEntry {
                size: e.size * factor,
                ..e.clone()
            })
            .collect();
        Self::new(
            self.stratum_id.clone(),
            self.indicator.clone(),
            self.year,
            entries,
        )
    }

    /// Rank `r` receives the unit formerly at rank `N + 1 - r`.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        let mut entries: Vec<RankEntry> = self
            .entries
            .iter()
            .map(|e| RankEntry {
                rank: n + 1 - e.rank,
                ..e.clone()
            })
            .collect();
        entries.reverse();
        Self {
            stratum_id: self.stratum_id.clone(),
            indicator: self.indicator.clone(),
            year: self.year,
            entries,
        }
    }
}
