//! Size-weighted maximum-likelihood estimation of `(a, b)`.
//!
//! The weighted log-likelihood of a rank-size series is
//!
//! ```text
//! l(a, b) = sum_i x_i [ b ln(N+1-r_i) - a ln r_i + ln A(a, b) ]
//! ```
//!
//! The DGB family is exponential in `(a, b)` with sufficient statistics
//! `(-ln r, ln(N+1-r))`, so `l / sum(x)` is concave and its Hessian is minus the
//! covariance matrix of those statistics. The optimizer works on `l / sum(x)`,
//! which makes tolerances independent of the units of `x`.
//!
//! Each start in the restart grid runs projected ascent along the
//! covariance-preconditioned gradient with Armijo backtracking. When the line
//! search stalls the run hands over to a box-constrained Nelder-Mead simplex.

use serde::{Deserialize, Serialize};

use crate::dgb::{DgbParams, RankLogs};
use crate::error::{Error, Result};
use crate::gof::ks_measure;
use crate::series::RankSizeSeries;
use crate::simplex;
use crate::uncertainty::{uncertainty_percentage_with, UpConvention};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Strata with fewer units are not fitted.
    pub min_units: usize,
    /// Convergence threshold on the infinity norm of the per-unit-weight gradient.
    pub grad_tol: f64,
    /// Convergence threshold on the simplex diameter for the fallback.
    pub simplex_tol: f64,
    /// Iteration cap per start, shared by both optimizers.
    pub max_iters: usize,
    /// Search box is `[-param_clamp, param_clamp]` for each exponent.
    pub param_clamp: f64,
    pub restart_grid: Vec<(f64, f64)>,
    pub up_convention: UpConvention,
}

impl Default for FitConfig {
    fn default() -> Self {
        let mut restart_grid = Vec::with_capacity(9);
        for a in [-1.0, 0.0, 1.0] {
            for b in [-1.0, 0.0, 1.0] {
                restart_grid.push((a, b));
            }
        }
        Self {
            min_units: 5,
            grad_tol: 1e-8,
            simplex_tol: 1e-10,
            max_iters: 10_000,
            param_clamp: 10.0,
            restart_grid,
            up_convention: UpConvention::Normalized,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.min_units == 0 {
            return Err(Error::InvalidParameter(
                "min_units must be at least 1".into(),
            ));
        }
        if !positive(self.grad_tol) || !positive(self.simplex_tol) || !positive(self.param_clamp) {
            return Err(Error::InvalidParameter(
                "tolerances and the parameter clamp must be positive".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        if self.restart_grid.is_empty() {
            return Err(Error::InvalidParameter("restart grid is empty".into()));
        }
        if self
            .restart_grid
            .iter()
            .any(|(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(Error::InvalidParameter(
                "restart points must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: DgbParams,
    /// Weighted log-likelihood in the units of the input sizes.
    pub log_likelihood: f64,
    pub ks: f64,
    /// Entropy of the fitted law, nats.
    pub entropy: f64,
    /// Uncertainty percentage; `None` when `N < 2`.
    pub up: Option<f64>,
    pub converged: bool,
    /// Iterations spent by the winning start.
    pub iterations: usize,
    /// Number of starts that were run.
    pub restarts_used: usize,
    /// Number of starts that needed the simplex fallback.
    pub fallbacks_used: usize,
    /// Infinity norm of the per-unit-weight gradient at `params`.
    pub grad_norm: f64,
}

/// Weighted sufficient statistics of a series.
#[derive(Debug, Clone)]
struct Objective {
    logs: RankLogs,
    total: f64,
    mean_ln_rank: f64,
    mean_ln_rev: f64,
}

#[derive(Debug, Clone, Copy)]
struct Eval {
    value: f64,
    grad: [f64; 2],
    /// Covariance of `(-ln R, ln(N+1-R))`, the negated Hessian.
    fisher: [[f64; 2]; 2],
}

impl Objective {
    fn new(series: &RankSizeSeries) -> Self {
        let logs = RankLogs::new(series.len());
        let total = series.total();
        let (mut sr, mut sq) = (0.0, 0.0);
        for e in series.entries() {
            if e.size > 0.0 {
                sr += e.size * logs.ln_rank(e.rank);
                sq += e.size * logs.ln_rev(e.rank);
            }
        }
        Self {
            logs,
            total,
            mean_ln_rank: sr / total,
            mean_ln_rev: sq / total,
        }
    }

    fn eval(&self, a: f64, b: f64) -> Eval {
        let m = self.logs.moments(a, b);
        Eval {
            value: b * self.mean_ln_rev - a * self.mean_ln_rank + m.log_norm,
            grad: [
                m.mean_ln_rank - self.mean_ln_rank,
                self.mean_ln_rev - m.mean_ln_rev,
            ],
            fisher: [[m.var_ln_rank, -m.cov], [-m.cov, m.var_ln_rev]],
        }
    }

    fn value(&self, a: f64, b: f64) -> f64 {
        b * self.mean_ln_rev - a * self.mean_ln_rank + self.logs.moments(a, b).log_norm
    }
}

fn check_params(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "a={a}, b={b} must be finite"
        )))
    }
}

/// `sum_i x_i ln f(r_i)` at `(a, b)`.
pub fn log_likelihood(series: &RankSizeSeries, a: f64, b: f64) -> Result<f64> {
    check_params(a, b)?;
    let obj = Objective::new(series);
    Ok(obj.total * obj.value(a, b))
}

/// `(dl/da, dl/db)` of [`log_likelihood`].
pub fn grad_log_likelihood(series: &RankSizeSeries, a: f64, b: f64) -> Result<(f64, f64)> {
    check_params(a, b)?;
    let obj = Objective::new(series);
    let g = obj.eval(a, b).grad;
    Ok((obj.total * g[0], obj.total * g[1]))
}

fn inf_norm(g: [f64; 2]) -> f64 {
    g[0].abs().max(g[1].abs())
}

/// Ascent direction: Newton step when the covariance is well conditioned,
/// plain gradient otherwise (e.g. `N = 2`, where only `a + b` is identified).
fn ascent_direction(e: &Eval) -> [f64; 2] {
    let [[p, q], [_, s]] = e.fisher;
    let det = p * s - q * q;
    let trace = p + s;
    if det > 1e-12 * trace * trace && det > 0.0 {
        let [g0, g1] = e.grad;
        [(s * g0 - q * g1) / det, (p * g1 - q * g0) / det]
    } else {
        e.grad
    }
}

#[derive(Debug, Clone, Copy)]
struct RunOutcome {
    point: [f64; 2],
    value: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
    used_fallback: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

fn run_from(obj: &Objective, start: (f64, f64), cfg: &FitConfig) -> RunOutcome {
    let bound = cfg.param_clamp;
    let project = |x: [f64; 2]| [x[0].clamp(-bound, bound), x[1].clamp(-bound, bound)];
    let mut x = project([start.0, start.1]);
    let mut cur = obj.eval(x[0], x[1]);
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        if inf_norm(cur.grad) < cfg.grad_tol {
            return RunOutcome {
                point: x,
                value: cur.value,
                grad_norm: inf_norm(cur.grad),
                iterations,
                converged: true,
                used_fallback: false,
            };
        }
        iterations += 1;
        let d = ascent_direction(&cur);
        let slack = 4.0 * f64::EPSILON * (1.0 + cur.value.abs());
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = project([x[0] + t * d[0], x[1] + t * d[1]]);
            let moved = [cand[0] - x[0], cand[1] - x[1]];
            if moved == [0.0, 0.0] {
                break;
            }
            let next = obj.eval(cand[0], cand[1]);
            let predicted = cur.grad[0] * moved[0] + cur.grad[1] * moved[1];
            let armijo = next.value >= cur.value + ARMIJO * predicted;
            // near the optimum the increase drowns in rounding; accept a
            // step that shrinks the gradient without losing value
            let flat_ok =
                next.value >= cur.value - slack && inf_norm(next.grad) < inf_norm(cur.grad);
            if armijo || flat_ok {
                accepted = Some((cand, next));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, next)) => {
                x = cand;
                cur = next;
            }
            None => return simplex_fallback(obj, x, iterations, cfg),
        }
    }
    RunOutcome {
        point: x,
        value: cur.value,
        grad_norm: inf_norm(cur.grad),
        iterations,
        converged: inf_norm(cur.grad) < cfg.grad_tol,
        used_fallback: false,
    }
}

fn simplex_fallback(obj: &Objective, x: [f64; 2], spent: usize, cfg: &FitConfig) -> RunOutcome {
    let remaining = cfg.max_iters.saturating_sub(spent).max(1);
    let out = simplex::minimize(
        |p: &[f64; 2]| -obj.value(p[0], p[1]),
        x,
        0.1,
        cfg.param_clamp,
        cfg.simplex_tol,
        remaining,
    );
    let e = obj.eval(out.point[0], out.point[1]);
    RunOutcome {
        point: out.point,
        value: e.value,
        grad_norm: inf_norm(e.grad),
        iterations: spent + out.iterations,
        converged: out.converged || inf_norm(e.grad) < cfg.grad_tol,
        used_fallback: true,
    }
}

fn on_clamp(point: [f64; 2], bound: f64) -> bool {
    point.iter().any(|v| v.abs() >= bound - 1e-9)
}

/// Maximum-likelihood fit of the DGB law to `series`.
///
/// Starts from every point of `config.restart_grid`; among converged runs the
/// highest likelihood wins, with near-ties (equal up to rounding, as happens
/// along the flat ridge at `N = 2`) resolved toward the smallest `(a, b)` norm.
/// A run that ends on the clamp box is not counted as converged.
pub fn fit_mle(series: &RankSizeSeries, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let n = series.len();
    if n < config.min_units {
        return Err(Error::StratumTooSmall {
            stratum: series.stratum_id().to_string(),
            n,
            min: config.min_units,
        });
    }
    let obj = Objective::new(series);

    let runs: Vec<RunOutcome> = config
        .restart_grid
        .iter()
        .map(|&start| {
            let mut run = run_from(&obj, start, config);
            if on_clamp(run.point, config.param_clamp) {
                run.converged = false;
            }
            run
        })
        .collect();
    let fallbacks_used = runs.iter().filter(|r| r.used_fallback).count();

    let pick = |pool: &mut dyn Iterator<Item = &RunOutcome>| -> Option<RunOutcome> {
        let pool: Vec<&RunOutcome> = pool.collect();
        let top = pool
            .iter()
            .map(|r| r.value)
            .fold(f64::NEG_INFINITY, f64::max);
        let tie = 1e-12 * (1.0 + top.abs());
        pool.into_iter()
            .filter(|r| r.value >= top - tie)
            .min_by(|x, y| {
                let nx = x.point[0].hypot(x.point[1]);
                let ny = y.point[0].hypot(y.point[1]);
                nx.total_cmp(&ny)
            })
            .copied()
    };

    let converged = pick(&mut runs.iter().filter(|r| r.converged));
    let (best, ok) = match converged {
        Some(r) => (r, true),
        None => (
            pick(&mut runs.iter()).expect("restart grid is non-empty"),
            false,
        ),
    };

    let result = assemble(series, &obj, best, runs.len(), fallbacks_used, config)?;
    if ok {
        Ok(result)
    } else {
        Err(Error::NonConvergence {
            best: Box::new(result),
        })
    }
}

fn assemble(
    series: &RankSizeSeries,
    obj: &Objective,
    run: RunOutcome,
    restarts_used: usize,
    fallbacks_used: usize,
    config: &FitConfig,
) -> Result<FitResult> {
    let params = DgbParams::new(run.point[0], run.point[1], series.len())?;
    let up = if params.n() >= 2 {
        Some(uncertainty_percentage_with(&params, config.up_convention)?)
    } else {
        None
    };
    Ok(FitResult {
        log_likelihood: obj.total * run.value,
        ks: ks_measure(series, &params)?,
        entropy: params.entropy(),
        up,
        converged: run.converged,
        iterations: run.iterations,
        restarts_used,
        fallbacks_used,
        grad_norm: run.grad_norm,
        params,
    })
}
