use proptest::prelude::*;

use rankfit::analysis::{pearson, spearman};
use rankfit::data::{build_series, derive_indicator, parse_units, StratumDataset};
use rankfit::estimation::{grad_log_likelihood, log_likelihood};
use rankfit::gof::ks_measure;
use rankfit::synth::exact_series;
use rankfit::uncertainty::uncertainty_percentage;
use rankfit::{fit_mle, DgbParams, FitConfig, Indicator, RankSizeSeries};

fn config_for(n: usize) -> FitConfig {
    FitConfig {
        min_units: n.min(5),
        ..FitConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pmf_sums_to_one_and_is_positive(a in -10.0f64..10.0, b in -10.0f64..10.0, n in 1usize..800) {
        let p = DgbParams::new(a, b, n).unwrap();
        let f = p.pmf_vec();
        let total: f64 = f.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(f.iter().all(|&x| x > 0.0 || (a.abs().max(b.abs()) > 5.0 && n > 100)));
        prop_assert!((p.cdf(n).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_is_nondecreasing(a in -3.0f64..3.0, b in -3.0f64..3.0, n in 1usize..200) {
        let p = DgbParams::new(a, b, n).unwrap();
        let mut prev = 0.0;
        for r in 1..=n {
            let c = p.cdf(r).unwrap();
            prop_assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn rank_reversal_maps_to_negated_swap(a in -3.0f64..3.0, b in -3.0f64..3.0, n in 1usize..300) {
        let p = DgbParams::new(a, b, n).unwrap();
        let q = DgbParams::new(-b, -a, n).unwrap();
        for r in 1..=n {
            let (x, y) = (p.pmf(r).unwrap(), q.pmf(n + 1 - r).unwrap());
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1e-300));
        }
        prop_assert!((p.entropy() - q.entropy()).abs() <= 1e-10 * p.entropy().max(1e-12));
    }

    #[test]
    fn entropy_below_maximum(a in -3.0f64..3.0, b in -3.0f64..3.0, n in 3usize..300) {
        prop_assume!(a.abs() + b.abs() > 1e-3);
        let p = DgbParams::new(a, b, n).unwrap();
        prop_assert!(p.entropy() < (n as f64).ln());
        prop_assert!(p.entropy() >= 0.0);
        let up = uncertainty_percentage(&p).unwrap();
        prop_assert!(up > 0.0 && up < 100.0);
    }

    #[test]
    fn ks_in_unit_interval_and_scale_free(
        sizes in prop::collection::vec(0.0f64..1e4, 2..40),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        c in 1e-3f64..1e3,
    ) {
        prop_assume!(sizes.iter().any(|&x| x > 0.0));
        let s = RankSizeSeries::from_sizes("p", Indicator::Population, 2011, &sizes).unwrap();
        let p = DgbParams::new(a, b, sizes.len()).unwrap();
        let k = ks_measure(&s, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&k));
        let k2 = ks_measure(&s.scaled(c).unwrap(), &p).unwrap();
        prop_assert!((k - k2).abs() < 1e-12);
    }

    #[test]
    fn log_likelihood_scales_linearly(
        sizes in prop::collection::vec(0.0f64..100.0, 2..30),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        c in 0.01f64..100.0,
    ) {
        prop_assume!(sizes.iter().any(|&x| x > 0.0));
        let s = RankSizeSeries::from_sizes("p", Indicator::Lr, 2011, &sizes).unwrap();
        let l1 = log_likelihood(&s, a, b).unwrap();
        let l2 = log_likelihood(&s.scaled(c).unwrap(), a, b).unwrap();
        prop_assert!((l2 - c * l1).abs() <= 1e-9 * l2.abs().max(1.0));
    }

    #[test]
    fn spearman_ignores_monotone_transforms(
        xs in prop::collection::vec(-50.0f64..50.0, 3..30),
        seed in 0u64..1000,
    ) {
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * 0.5 + ((i as u64 * 7919 + seed) % 13) as f64).collect();
        prop_assume!(pearson(&xs, &ys).is_ok());
        let r = spearman(&xs, &ys).unwrap();
        let tx: Vec<f64> = xs.iter().map(|x| (x / 10.0).exp()).collect();
        let ty: Vec<f64> = ys.iter().map(|y| y * y * y + 4.0).collect();
        prop_assert!((spearman(&tx, &ty).unwrap() - r).abs() < 1e-12);
        prop_assert!(r.abs() <= 1.0);
    }

    #[test]
    fn pearson_affine_invariance(
        xs in prop::collection::vec(-50.0f64..50.0, 3..30),
        scale in 0.1f64..10.0,
        shift in -100.0f64..100.0,
    ) {
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x.sin() + i as f64).collect();
        prop_assume!(pearson(&xs, &ys).is_ok());
        let r = pearson(&xs, &ys).unwrap();
        let tx: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
        let nx: Vec<f64> = xs.iter().map(|x| -scale * x + shift).collect();
        prop_assert!((pearson(&tx, &ys).unwrap() - r).abs() < 1e-9);
        prop_assert!((pearson(&nx, &ys).unwrap() + r).abs() < 1e-9);
    }

    #[test]
    fn build_series_is_a_rank_permutation(values in prop::collection::vec(0u64..50, 1..40)) {
        let mut csv = String::from("state,district,year,pop_t\n");
        for (i, v) in values.iter().enumerate() {
            csv.push_str(&format!("S,d{i:03},2011,{v}\n"));
        }
        let rep = parse_units(csv.as_bytes()).unwrap();
        prop_assume!(values.iter().any(|&v| v > 0));
        let ds = StratumDataset::new("S", 2011, rep.records.clone(), false, 1);
        let s = build_series(&ds, &Indicator::Population).unwrap();
        prop_assert_eq!(s.len(), values.len());
        prop_assert!(s.is_size_ordered());
        let mut got: Vec<f64> = s.sizes().collect();
        let mut want: Vec<f64> = rep.records.iter().map(|r| derive_indicator(r, &Indicator::Population).unwrap()).collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        prop_assert_eq!(got, want);
        // same input, same ordering
        prop_assert_eq!(build_series(&ds, &Indicator::Population).unwrap(), s);
    }
}

#[test]
fn gradient_matches_finite_differences_on_random_series() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let n = rng.random_range(2..=100);
        let sizes: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1000.0)).collect();
        let s = RankSizeSeries::from_sizes("g", Indicator::Population, 2011, &sizes).unwrap();
        let (a, b) = (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let h = 1e-5;
        let (ga, gb) = grad_log_likelihood(&s, a, b).unwrap();
        let fa = (log_likelihood(&s, a + h, b).unwrap() - log_likelihood(&s, a - h, b).unwrap())
            / (2.0 * h);
        let fb = (log_likelihood(&s, a, b + h).unwrap() - log_likelihood(&s, a, b - h).unwrap())
            / (2.0 * h);
        assert!((ga - fa).abs() <= 1e-5 * fa.abs().max(1e-3), "{ga} vs {fa}");
        assert!((gb - fb).abs() <= 1e-5 * fb.abs().max(1e-3), "{gb} vs {fb}");
    }
}

#[test]
fn fit_is_scale_invariant() {
    let sizes = [812.0, 640.5, 601.0, 455.0, 300.0, 290.0, 120.0, 64.0, 12.0];
    let s = RankSizeSeries::from_sizes("s", Indicator::Population, 2011, &sizes).unwrap();
    let cfg = FitConfig::default();
    let f1 = fit_mle(&s, &cfg).unwrap();
    for c in [1e-3, 7.5, 1e6] {
        let f2 = fit_mle(&s.scaled(c).unwrap(), &cfg).unwrap();
        assert!((f1.params.a() - f2.params.a()).abs() < 1e-9);
        assert!((f1.params.b() - f2.params.b()).abs() < 1e-9);
        assert!((f2.log_likelihood - c * f1.log_likelihood).abs() < 1e-9 * f2.log_likelihood.abs());
    }
}

#[test]
fn reversed_series_fits_mirrored_parameters() {
    for &(a, b, n) in &[(0.3, 0.9, 30), (1.0, -0.3, 8), (0.252, 0.872, 640)] {
        let s = exact_series(a, b, n, 1e5).unwrap();
        let cfg = config_for(n);
        let f = fit_mle(&s, &cfg).unwrap();
        let g = fit_mle(&s.reversed(), &cfg).unwrap();
        assert!((g.params.a() + f.params.b()).abs() < 1e-6);
        assert!((g.params.b() + f.params.a()).abs() < 1e-6);
    }
}

#[test]
fn exact_series_recovery_grid() {
    let grid = [-0.5, 0.0, 0.3, 0.9];
    for &n in &[8usize, 30, 640] {
        for &a in &grid {
            for &b in &grid {
                let s = exact_series(a, b, n, 1e6).unwrap();
                let f = fit_mle(&s, &config_for(n)).unwrap();
                assert!(
                    (f.params.a() - a).abs() < 1e-3,
                    "a={a} b={b} n={n}: {:?}",
                    f.params
                );
                assert!(
                    (f.params.b() - b).abs() < 1e-3,
                    "a={a} b={b} n={n}: {:?}",
                    f.params
                );
                assert!(f.converged);
            }
        }
    }
}

/// Log-likelihood along random segments never has an interior dip.
#[test]
fn log_likelihood_unimodal_along_segments() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.random_range(3..60);
        let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let s = exact_series(a, b, n, 1000.0).unwrap();
        let p0 = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let p1 = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let vals: Vec<f64> = (0..=10)
            .map(|k| {
                let t = k as f64 / 10.0;
                log_likelihood(&s, p0.0 + t * (p1.0 - p0.0), p0.1 + t * (p1.1 - p0.1)).unwrap()
            })
            .collect();
        let peak = vals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .unwrap()
            .0;
        assert!(vals[..=peak].windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!(vals[peak..].windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }
}
