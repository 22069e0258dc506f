//! Kolmogorov-Smirnov style gap between observed and fitted cumulative
//! rank-sizes.

use crate::dgb::DgbParams;
use crate::error::{Error, Result};
use crate::series::RankSizeSeries;

/// Maximum absolute gap between the observed and predicted cumulative sizes,
/// divided by the total size `T` so the measure lies in `[0, 1]`.
///
/// The predicted size at rank `r` is `T f(r)`.
pub fn ks_measure(series: &RankSizeSeries, params: &DgbParams) -> Result<f64> {
    if params.n() != series.len() {
        return Err(Error::Dimension {
            expected: series.len(),
            found: params.n(),
        });
    }
    let total = series.total();
    let pmf = params.pmf_vec();
    let (mut observed, mut predicted, mut gap) = (0.0, 0.0, 0.0f64);
    for (x, f) in series.sizes().zip(&pmf) {
        observed += x;
        predicted += total * f;
        gap = gap.max((predicted - observed).abs());
    }
    debug_assert!(
        (predicted - observed).abs() <= 1e-9 * total,
        "cumulative curves must meet at rank N"
    );
    Ok((gap / total).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Indicator;

    fn series(sizes: &[f64]) -> RankSizeSeries {
        RankSizeSeries::from_sizes("t", Indicator::Population, 2011, sizes).unwrap()
    }

    #[test]
    fn perfect_fit_is_zero() {
        let p = DgbParams::new(0.7, 0.2, 40).unwrap();
        let sizes: Vec<f64> = p.pmf_vec().iter().map(|f| f * 12345.0).collect();
        assert!(ks_measure(&series(&sizes), &p).unwrap() <= 1e-12);
    }

    #[test]
    fn two_rank_hand_case() {
        let p = DgbParams::new(0.0, 0.0, 2).unwrap();
        assert_eq!(ks_measure(&series(&[1.0, 0.0]), &p).unwrap(), 0.5);
    }

    #[test]
    fn rescaling_is_invisible() {
        let s = series(&[10.0, 7.0, 6.5, 2.0, 1.0, 0.5]);
        let p = DgbParams::new(0.4, 0.3, 6).unwrap();
        let k1 = ks_measure(&s, &p).unwrap();
        let k2 = ks_measure(&s.scaled(1000.0).unwrap(), &p).unwrap();
        assert!((k1 - k2).abs() < 1e-12);
        assert!(k1 > 0.0 && k1 <= 1.0);
    }

    #[test]
    fn length_mismatch() {
        let p = DgbParams::new(0.0, 0.0, 3).unwrap();
        assert!(matches!(
            ks_measure(&series(&[1.0, 1.0]), &p),
            Err(Error::Dimension {
                expected: 2,
                found: 3
            })
        ));
    }
}
