//! Synthetic rank-size series drawn from known DGB parameters.

use crate::dgb::DgbParams;
use crate::error::{Error, Result};
use crate::series::{Indicator, RankSizeSeries};

pub const SYNTHETIC_STRATUM: &str = "synthetic";

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDomain(format!(
            "synthetic series need n >= 2, got {n}"
        )));
    }
    Ok(())
}

/// Sizes `total * f(r)`: a series whose weighted MLE is `(a, b)` by construction.
pub fn exact_series(a: f64, b: f64, n: usize, total: f64) -> Result<RankSizeSeries> {
    check_n(n)?;
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "total must be positive, got {total}"
        )));
    }
    let params = DgbParams::new(a, b, n)?;
    let sizes: Vec<f64> = params.pmf_vec().into_iter().map(|f| total * f).collect();
    RankSizeSeries::from_sizes(
        SYNTHETIC_STRATUM,
        Indicator::Custom("synthetic".into()),
        0,
        &sizes,
    )
}

/// Per-rank counts from `draws` i.i.d. samples.
pub fn sampled_counts(a: f64, b: f64, n: usize, draws: usize, seed: u64) -> Result<Vec<u64>> {
    check_n(n)?;
    if draws == 0 {
        return Err(Error::InvalidParameter("draws must be at least 1".into()));
    }
    let params = DgbParams::new(a, b, n)?;
    let mut counts = vec![0u64; n];
    for r in params.sample(draws, seed) {
        counts[r - 1] += 1;
    }
    Ok(counts)
}

/// [`sampled_counts`] as a rank-size series in model rank order.
pub fn sampled_series(a: f64, b: f64, n: usize, draws: usize, seed: u64) -> Result<RankSizeSeries> {
    let sizes: Vec<f64> = sampled_counts(a, b, n, draws, seed)?
        .into_iter()
        .map(|c| c as f64)
        .collect();
    RankSizeSeries::from_sizes(
        SYNTHETIC_STRATUM,
        Indicator::Custom("synthetic".into()),
        0,
        &sizes,
    )
}
