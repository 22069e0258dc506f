//! The discrete generalized beta (DGB) rank-order distribution
//!
//! ```text
//! f(r) = A (n + 1 - r)^b / r^a,   r = 1..n
//! ```
//!
//! All arithmetic goes through the per-rank log-weight
//! `b ln(n + 1 - r) - a ln r`; the normalizer is a log-sum-exp over those
//! weights so that large exponents or long supports never overflow.
//! With `b = 0` the law is the truncated Pareto/Zipf form `A r^-a`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, log_sum_exp};

/// Fitted or planted DGB parameters on ranks `1..=n`, with the log normalizer cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgbParams {
    a: f64,
    b: f64,
    n: usize,
    log_norm: f64,
}

fn check_params(a: f64, b: f64, n: usize) -> Result<()> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "exponents must be finite, got a={a}, b={b}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidDomain(
            "number of ranks must be at least 1".into(),
        ));
    }
    Ok(())
}

#[inline]
fn log_weight(a: f64, b: f64, n: usize, r: usize) -> f64 {
    // 0 * ln(x) is kept out of the sum so a = 0 or b = 0 stays exact.
    let rev = if b == 0.0 {
        0.0
    } else {
        b * ((n + 1 - r) as f64).ln()
    };
    let fwd = if a == 0.0 { 0.0 } else { a * (r as f64).ln() };
    rev - fwd
}

/// `ln A` where `A = 1 / sum_{r=1..n} (n+1-r)^b r^-a`.
pub fn log_normalizer(a: f64, b: f64, n: usize) -> Result<f64> {
    check_params(a, b, n)?;
    let weights: Vec<f64> = (1..=n).map(|r| log_weight(a, b, n, r)).collect();
    Ok(-log_sum_exp(&weights))
}

impl DgbParams {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        let log_norm = log_normalizer(a, b, n)?;
        Ok(Self { a, b, n, log_norm })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Cached `ln A`.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Parameters of the rank-reversed law, i.e. the law of `n + 1 - R`,
    /// which is `(-b, -a)`. The normalizer is unchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            a: -self.b,
            b: -self.a,
            n: self.n,
            log_norm: self.log_norm,
        }
    }

    fn check_rank(&self, r: usize) -> Result<()> {
        if r == 0 || r > self.n {
            return Err(Error::InvalidRank { rank: r, n: self.n });
        }
        Ok(())
    }

    pub fn ln_pmf(&self, r: usize) -> Result<f64> {
        self.check_rank(r)?;
        Ok(self.log_norm + log_weight(self.a, self.b, self.n, r))
    }

    pub fn pmf(&self, r: usize) -> Result<f64> {
        self.ln_pmf(r).map(f64::exp)
    }

    /// The whole mass function, index `r - 1` holding `f(r)`.
    pub fn pmf_vec(&self) -> Vec<f64> {
        (1..=self.n)
            .map(|r| (self.log_norm + log_weight(self.a, self.b, self.n, r)).exp())
            .collect()
    }

    /// `P(R <= r)`. Plain running sum so the result is nondecreasing in `r`.
    pub fn cdf(&self, r: usize) -> Result<f64> {
        self.check_rank(r)?;
        let s: f64 = (1..=r)
            .map(|k| (self.log_norm + log_weight(self.a, self.b, self.n, k)).exp())
            .sum();
        Ok(s.min(1.0))
    }

    /// Shannon entropy in nats, `-ln A - A sum_r w_r [b ln(n+1-r) - a ln r]`.
    pub fn entropy(&self) -> f64 {
        let max = (self.n as f64).ln();
        if self.a == 0.0 && self.b == 0.0 {
            return max;
        }
        let weighted = compensated_sum((1..=self.n).map(|r| {
            let lw = log_weight(self.a, self.b, self.n, r);
            let p = (self.log_norm + lw).exp();
            if p == 0.0 {
                0.0
            } else {
                p * lw
            }
        }));
        (-self.log_norm - weighted).clamp(0.0, max)
    }

    /// `count` i.i.d. ranks by inverse-CDF lookup, deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<usize> {
        let mut cumulative = Vec::with_capacity(self.n);
        let mut acc = 0.0;
        for p in self.pmf_vec() {
            acc += p;
            cumulative.push(acc);
        }
        let top = self.n - 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let u: f64 = rng.random::<f64>() * acc;
                cumulative.partition_point(|&c| c <= u).min(top) + 1
            })
            .collect()
    }
}

/// Precomputed `ln r` and `ln(n + 1 - r)` for repeated moment evaluation
/// during optimization.
#[derive(Debug, Clone)]
pub(crate) struct RankLogs {
    ln_rank: Vec<f64>,
    ln_rev: Vec<f64>,
}

/// First and second moments of `(ln R, ln(n+1-R))` under the DGB law.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Moments {
    pub log_norm: f64,
    pub mean_ln_rank: f64,
    pub mean_ln_rev: f64,
    pub var_ln_rank: f64,
    pub var_ln_rev: f64,
    pub cov: f64,
}

impl RankLogs {
    pub fn new(n: usize) -> Self {
        Self {
            ln_rank: (1..=n).map(|r| (r as f64).ln()).collect(),
            ln_rev: (1..=n).map(|r| ((n + 1 - r) as f64).ln()).collect(),
        }
    }

    pub fn ln_rank(&self, r: usize) -> f64 {
        self.ln_rank[r - 1]
    }

    pub fn ln_rev(&self, r: usize) -> f64 {
        self.ln_rev[r - 1]
    }

    pub fn moments(&self, a: f64, b: f64) -> Moments {
        let lw: Vec<f64> = self
            .ln_rank
            .iter()
            .zip(&self.ln_rev)
            .map(|(&lr, &lq)| b * lq - a * lr)
            .collect();
        let log_norm = -log_sum_exp(&lw);
        let p: Vec<f64> = lw.iter().map(|&w| (w + log_norm).exp()).collect();
        let mean_ln_rank = compensated_sum(p.iter().zip(&self.ln_rank).map(|(p, x)| p * x));
        let mean_ln_rev = compensated_sum(p.iter().zip(&self.ln_rev).map(|(p, x)| p * x));
        let (mut vr, mut vq, mut c) = (0.0, 0.0, 0.0);
        for ((&p, &lr), &lq) in p.iter().zip(&self.ln_rank).zip(&self.ln_rev) {
            let dr = lr - mean_ln_rank;
            let dq = lq - mean_ln_rev;
            vr += p * dr * dr;
            vq += p * dq * dq;
            c += p * dr * dq;
        }
        Moments {
            log_norm,
            mean_ln_rank,
            mean_ln_rev,
            var_ln_rank: vr,
            var_ln_rev: vq,
            cov: c,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct power-form oracle, no logs involved.
    fn naive_pmf(a: f64, b: f64, n: usize) -> Vec<f64> {
        let w: Vec<f64> = (1..=n)
            .map(|r| ((n + 1 - r) as f64).powf(b) / (r as f64).powf(a))
            .collect();
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    }

    fn naive_entropy(a: f64, b: f64, n: usize) -> f64 {
        -naive_pmf(a, b, n)
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * y.abs().max(1e-300)
    }

    #[test]
    fn log_normalizer_examples() {
        assert!((log_normalizer(0.0, 0.0, 10).unwrap() - (0.1f64).ln()).abs() < 1e-15);
        assert!((log_normalizer(1.0, 0.0, 2).unwrap() - (2.0f64 / 3.0).ln()).abs() < 1e-15);
        let p = DgbParams::new(0.252, 0.872, 640).unwrap();
        let total = compensated_sum(p.pmf_vec());
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_normalizer_errors() {
        assert!(matches!(
            log_normalizer(f64::NAN, 0.0, 3),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            log_normalizer(0.0, f64::INFINITY, 3),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            log_normalizer(0.0, 0.0, 0),
            Err(Error::InvalidDomain(_))
        ));
    }

    #[test]
    fn extreme_exponents_do_not_overflow() {
        for &(a, b) in &[(50.0, 50.0), (-50.0, 50.0), (50.0, -50.0), (-50.0, -50.0)] {
            let p = DgbParams::new(a, b, 100_000).unwrap();
            assert!(p.log_norm().is_finite());
            let total = compensated_sum(p.pmf_vec());
            assert!((total - 1.0).abs() < 1e-12, "a={a} b={b} total={total}");
            assert!(p.entropy().is_finite());
        }
    }

    #[test]
    fn pmf_examples() {
        let p = DgbParams::new(0.0, 0.0, 5).unwrap();
        assert!((p.pmf(3).unwrap() - 0.2).abs() < 1e-15);
        let p = DgbParams::new(1.0, 0.0, 2).unwrap();
        assert!((p.pmf(2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let p = DgbParams::new(0.0, 1.0, 3).unwrap();
        assert!((p.pmf(1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pmf_rank_out_of_range() {
        let p = DgbParams::new(0.5, 0.5, 4).unwrap();
        assert!(matches!(
            p.pmf(0),
            Err(Error::InvalidRank { rank: 0, n: 4 })
        ));
        assert!(matches!(
            p.pmf(5),
            Err(Error::InvalidRank { rank: 5, n: 4 })
        ));
        assert!(p.cdf(5).is_err());
    }

    #[test]
    fn cdf_examples() {
        let p = DgbParams::new(0.0, 0.0, 4).unwrap();
        assert!((p.cdf(2).unwrap() - 0.5).abs() < 1e-15);
        let p = DgbParams::new(0.0, 1.0, 3).unwrap();
        assert!((p.cdf(2).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        let p = DgbParams::new(0.7, -1.3, 57).unwrap();
        assert!((p.cdf(57).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let p = DgbParams::new(0.0, 0.0, 10).unwrap();
        assert_eq!(p.entropy(), 10f64.ln());
        let p = DgbParams::new(0.0, 0.0, 1).unwrap();
        assert_eq!(p.entropy(), 0.0);
        let p = DgbParams::new(1.0, 0.0, 2).unwrap();
        let expected = -(2.0f64 / 3.0) * (2.0f64 / 3.0).ln() - (1.0f64 / 3.0) * (1.0f64 / 3.0).ln();
        assert!(close(p.entropy(), expected, 1e-14));
    }

    #[test]
    fn entropy_matches_direct_summation_grid() {
        let grid = [-2.0, -0.5, 0.0, 0.5, 2.0];
        for &n in &[2usize, 10, 640] {
            for &a in &grid {
                for &b in &grid {
                    let got = DgbParams::new(a, b, n).unwrap().entropy();
                    let want = naive_entropy(a, b, n);
                    assert!(
                        close(got, want, 1e-10),
                        "a={a} b={b} n={n}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn pareto_reduction_at_b_zero() {
        for &a in &[0.5, 1.0, 2.0] {
            for &n in &[5usize, 50] {
                let p = DgbParams::new(a, 0.0, n).unwrap();
                let z: f64 = (1..=n).map(|r| (r as f64).powf(-a)).sum();
                for r in 1..=n {
                    let want = (r as f64).powf(-a) / z;
                    assert!(close(p.pmf(r).unwrap(), want, 1e-13));
                }
            }
        }
    }

    #[test]
    fn mirrored_parameters_reverse_ranks() {
        let p = DgbParams::new(0.3, 1.7, 25).unwrap();
        let q = p.mirrored();
        let q_fresh = DgbParams::new(-1.7, -0.3, 25).unwrap();
        assert!((q.log_norm() - q_fresh.log_norm()).abs() < 1e-13);
        for r in 1..=25 {
            assert!(close(p.pmf(r).unwrap(), q.pmf(26 - r).unwrap(), 1e-13));
        }
        assert!(close(p.entropy(), q.entropy(), 1e-12));
    }

    #[test]
    fn plain_exchange_is_not_a_symmetry() {
        // (a, b) -> (b, a) changes the law: weights (3, 2, 1) vs (6, 3, 2) / 11
        let p = DgbParams::new(0.0, 1.0, 3).unwrap();
        let q = DgbParams::new(1.0, 0.0, 3).unwrap();
        assert!((p.pmf(1).unwrap() - q.pmf(3).unwrap()).abs() > 0.1);
        assert!((p.entropy() - q.entropy()).abs() > 0.01);
    }

    #[test]
    fn n_two_is_uniform_along_antidiagonal() {
        // With two ranks the pmf depends on a + b only.
        let p = DgbParams::new(1.0, -1.0, 2).unwrap();
        assert!((p.entropy() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn sample_degenerate_support() {
        let p = DgbParams::new(0.0, 0.0, 1).unwrap();
        assert_eq!(p.sample(5, 7), vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn sample_uniform_frequencies() {
        let p = DgbParams::new(0.0, 0.0, 4).unwrap();
        let draws = p.sample(1_000_000, 1);
        let mut counts = [0usize; 4];
        for r in draws {
            counts[r - 1] += 1;
        }
        for c in counts {
            assert!((c as f64 / 1e6 - 0.25).abs() < 0.005);
        }
    }

    #[test]
    fn sample_matches_pmf_at_head() {
        let p = DgbParams::new(3.0, 0.0, 100).unwrap();
        let draws = p.sample(1_000_000, 1);
        let ones = draws.iter().filter(|&&r| r == 1).count() as f64 / 1e6;
        assert!((ones - p.pmf(1).unwrap()).abs() < 0.005);
        assert_eq!(draws, p.sample(1_000_000, 1));
    }

    #[test]
    fn moments_match_direct_expectations() {
        let (a, b, n) = (0.4, -0.6, 30);
        let m = RankLogs::new(n).moments(a, b);
        let f = naive_pmf(a, b, n);
        let e_lr: f64 = (1..=n).map(|r| f[r - 1] * (r as f64).ln()).sum();
        let e_lq: f64 = (1..=n).map(|r| f[r - 1] * ((n + 1 - r) as f64).ln()).sum();
        let v_lr: f64 = (1..=n)
            .map(|r| f[r - 1] * ((r as f64).ln() - e_lr).powi(2))
            .sum();
        assert!(close(m.mean_ln_rank, e_lr, 1e-12));
        assert!(close(m.mean_ln_rev, e_lq, 1e-12));
        assert!(close(m.var_ln_rank, v_lr, 1e-10));
        assert!((m.log_norm - log_normalizer(a, b, n).unwrap()).abs() < 1e-13);
    }
}
