//! Cross-stratum correlation of fitted parameters and UP values.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "correlation needs at least 3 points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "correlation inputs must be finite".into(),
        ));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("first input"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("second input"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 1-based ranks, tied values sharing the mean of their positions.
pub fn mid_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation of mid-ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    pearson(&mid_ranks(xs), &mid_ranks(ys))
}

/// Two-sided 95% critical value of Student's t with `n - 2` degrees of freedom.
pub fn t_critical_95(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "t test needs n >= 3, got {n}"
        )));
    }
    let dist = StudentsT::new(0.0, 1.0, (n - 2) as f64)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(dist.inverse_cdf(0.975))
}

/// `t = r sqrt((n-2) / (1-r^2))`; infinite for `|r| = 1`.
pub fn t_statistic(r: f64, n: usize) -> f64 {
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        r.abs() * ((n as f64 - 2.0) / denom).sqrt()
    }
}

pub fn is_significant_95(r: f64, n: usize) -> Result<bool> {
    Ok(t_statistic(r, n) > t_critical_95(n)?)
}

/// Least-squares `(slope, intercept)` of `ys` on `xs`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    check_pair(xs, ys)?;
    let (mx, my) = (mean(xs), mean(ys));
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("regressor"));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Fitted values of one stratum under one variable label (an indicator, or
/// any distinguishing label for a set of fits).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumFit {
    pub stratum: String,
    pub variable: String,
    pub a: f64,
    pub b: f64,
    pub up: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    A,
    B,
    Up,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::A, Quantity::B, Quantity::Up];

    pub fn label(self) -> &'static str {
        match self {
            Quantity::A => "a",
            Quantity::B => "b",
            Quantity::Up => "up",
        }
    }

    fn of(self, fit: &StratumFit) -> Option<f64> {
        match self {
            Quantity::A => Some(fit.a),
            Quantity::B => Some(fit.b),
            Quantity::Up => fit.up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Pearson,
    Spearman,
}

impl Statistic {
    pub fn label(self) -> &'static str {
        match self {
            Statistic::Pearson => "pearson",
            Statistic::Spearman => "spearman",
        }
    }
}

/// One variable pair under one statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    /// `<variable>.<quantity>`
    pub left: String,
    pub right: String,
    pub statistic: Statistic,
    pub n_strata: usize,
    /// `None` when either side has zero variance.
    pub coefficient: Option<f64>,
    pub t: Option<f64>,
    pub t_critical: f64,
    pub significant_95: bool,
    /// Least-squares fit of right on left, only for significant Pearson rows.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub year: i32,
    /// Strata having a fit for every variable.
    pub n_strata: usize,
    pub rows: Vec<CorrelationRow>,
}

/// Correlate every pair of variables, quantity by quantity, across strata.
///
/// Strata are matched by name and processed in sorted order, so the result
/// does not depend on the order of `fits`.
pub fn correlate_fits(fits: &[StratumFit], year: i32) -> Result<CorrelationReport> {
    let mut table: BTreeMap<&str, BTreeMap<&str, &StratumFit>> = BTreeMap::new();
    for fit in fits {
        let prev = table
            .entry(fit.variable.as_str())
            .or_default()
            .insert(fit.stratum.as_str(), fit);
        if prev.is_some() {
            return Err(Error::InvalidParameter(format!(
                "duplicate fit for stratum {:?} under {:?}",
                fit.stratum, fit.variable
            )));
        }
    }
    let variables: Vec<&str> = table.keys().copied().collect();
    if variables.len() < 2 {
        return Err(Error::InsufficientData(
            "correlation needs fits for at least two variables".into(),
        ));
    }
    let common: BTreeSet<&str> = variables
        .iter()
        .map(|v| table[v].keys().copied().collect::<BTreeSet<_>>())
        .reduce(|acc, s| acc.intersection(&s).copied().collect())
        .unwrap_or_default();
    if common.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} strata are shared by all variables; at least 3 are needed",
            common.len()
        )));
    }

    let mut rows = Vec::new();
    for (i, left) in variables.iter().enumerate() {
        for right in &variables[i + 1..] {
            for q in Quantity::ALL {
                let (xs, ys): (Vec<f64>, Vec<f64>) = table[left]
                    .iter()
                    .filter_map(|(stratum, lf)| {
                        let rf = table[right].get(stratum)?;
                        Some((q.of(lf)?, q.of(rf)?))
                    })
                    .unzip();
                if xs.len() < 3 {
                    continue;
                }
                let critical = t_critical_95(xs.len())?;
                for stat in [Statistic::Pearson, Statistic::Spearman] {
                    let r = match stat {
                        Statistic::Pearson => pearson(&xs, &ys),
                        Statistic::Spearman => spearman(&xs, &ys),
                    };
                    let coefficient = match r {
                        Ok(r) => Some(r),
                        Err(Error::ZeroVariance(_)) => None,
                        Err(e) => return Err(e),
                    };
                    let t = coefficient.map(|r| t_statistic(r, xs.len()));
                    let significant_95 = t.is_some_and(|t| t > critical);
                    let (slope, intercept) = if significant_95 && stat == Statistic::Pearson {
                        let (s, c) = least_squares(&xs, &ys)?;
                        (Some(s), Some(c))
                    } else {
                        (None, None)
                    };
                    rows.push(CorrelationRow {
                        left: format!("{left}.{}", q.label()),
                        right: format!("{right}.{}", q.label()),
                        statistic: stat,
                        n_strata: xs.len(),
                        coefficient,
                        t,
                        t_critical: critical,
                        significant_95,
                        slope,
                        intercept,
                    });
                }
            }
        }
    }
    Ok(CorrelationReport {
        year,
        n_strata: common.len(),
        rows,
    })
}
