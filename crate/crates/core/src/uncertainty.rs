//! Entropy-based uncertainty percentage (UP).
//!
//! `UP = S_N(a, b) / ln N x 100`: 100 means the fitted law spreads evenly
//! over all units, values near 0 mean it concentrates on one unit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dgb::DgbParams;
use crate::error::{Error, Result};
use crate::series::Indicator;

/// How entropy is scaled into a percentage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpConvention {
    /// Entropy over its maximum in the same base; uniform law gives 100.
    #[default]
    Normalized,
    /// Entropy in nats over `log2 N`. Uniform law gives `100 ln 2 = 69.31`.
    /// Matches the scale of previously published gender-ratio tables.
    NatsOverLog2,
}

impl fmt::Display for UpConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpConvention::Normalized => "normalized",
            UpConvention::NatsOverLog2 => "nats-over-log2",
        })
    }
}

impl FromStr for UpConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "normalized" => Ok(UpConvention::Normalized),
            "nats-over-log2" => Ok(UpConvention::NatsOverLog2),
            other => Err(Error::InvalidParameter(format!(
                "unknown UP convention {other:?} (expected normalized or nats-over-log2)"
            ))),
        }
    }
}

/// `entropy / ln n x 100`.
pub fn uncertainty_percentage(params: &DgbParams) -> Result<f64> {
    uncertainty_percentage_with(params, UpConvention::Normalized)
}

pub fn uncertainty_percentage_with(params: &DgbParams, convention: UpConvention) -> Result<f64> {
    let n = params.n();
    if n < 2 {
        return Err(Error::UndefinedUp { n });
    }
    let denom = match convention {
        UpConvention::Normalized => (n as f64).ln(),
        UpConvention::NatsOverLog2 => (n as f64).log2(),
    };
    Ok(params.entropy() / denom * 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyRecord {
    pub stratum_id: String,
    pub indicator: Indicator,
    pub year: i32,
    pub n_units: usize,
    pub entropy: f64,
    pub up: f64,
}

impl UncertaintyRecord {
    pub fn from_params(
        stratum_id: impl Into<String>,
        indicator: Indicator,
        year: i32,
        params: &DgbParams,
    ) -> Result<Self> {
        Ok(Self {
            stratum_id: stratum_id.into(),
            indicator,
            year,
            n_units: params.n(),
            entropy: params.entropy(),
            up: uncertainty_percentage(params)?,
        })
    }
}

/// `up(later) - up(earlier)` for the same stratum and indicator.
pub fn up_delta(earlier: &UncertaintyRecord, later: &UncertaintyRecord) -> Result<f64> {
    if earlier.stratum_id != later.stratum_id {
        return Err(Error::Comparison(format!(
            "strata differ: {:?} vs {:?}",
            earlier.stratum_id, later.stratum_id
        )));
    }
    if earlier.indicator != later.indicator {
        return Err(Error::Comparison(format!(
            "indicators differ: {} vs {}",
            earlier.indicator, later.indicator
        )));
    }
    Ok(later.up - earlier.up)
}
