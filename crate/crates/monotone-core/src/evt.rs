//! Peaks-over-threshold extreme-value analysis of a positive sample,
//! aimed at the monotone-class ratio `r = |c0/c1|`.
//!
//! Excesses `y_i = x_i - u` above a threshold `u` are modeled with the
//! generalized Pareto distribution. Its log-likelihood is
//!
//! ```text
//! l(xi, sigma) = -N ln(sigma) - (1 + 1/xi) sum ln(1 + xi y_i / sigma)
//! ```
//!
//! with the exponential limit `-N ln(sigma) - sum y_i / sigma` at
//! `xi -> 0`, subject to `1 + xi y_i / sigma > 0` for every excess.
//! Maximization runs a deterministic coarse grid over
//! `(xi, ln sigma)` followed by Nelder-Mead refinement; `xi` is kept in
//! `[-0.999, 2]` because the likelihood is unbounded below `xi = -1`.
//!
//! A negative shape means a finite upper endpoint `u - sigma/xi`; the
//! exceedance probability of a level `t > u` combines the empirical
//! exceedance rate with the fitted tail. Bootstrap resampling of the
//! excess set gives percentile confidence intervals for that
//! probability.

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[allow(unused_imports)]
use num_traits::Float;

use crate::rng::RngStream;

/// Minimum excess count for a GPD fit.
pub const MIN_EXCEEDANCES: usize = 30;

/// Shape parameter box for the optimizer.
pub const XI_MIN: f64 = -0.999;
pub const XI_MAX: f64 = 2.0;

/// Treat `|xi|` below this as the exponential limit.
const XI_ZERO: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvtError {
    #[error("insufficient tail: {have} excesses above u = {u}, need {need}")]
    InsufficientTail { u: f64, have: usize, need: usize },
    #[error("GPD fit did not converge: {0}")]
    NonConvergence(&'static str),
    #[error("no grid threshold has any exceedance")]
    EmptyTail,
    #[error("bootstrap invalid: {failed} of {replicates} replicate fits failed")]
    BootstrapInvalid { failed: usize, replicates: usize },
    #[error("exceedance level {t} is not above the threshold {u}")]
    LevelBelowThreshold { t: f64, u: f64 },
}

/// Maximum-likelihood GPD fit of the excesses above `u`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GpdFit {
    pub u: f64,
    pub xi: f64,
    pub sigma: f64,
    pub n_exceed: usize,
    pub n_total: usize,
    pub loglik: f64,
    /// Standard errors from the observed information matrix; NaN when
    /// the Hessian is not positive definite (boundary fits).
    pub se_xi: f64,
    pub se_sigma: f64,
    /// Excesses the fit was computed on.
    pub excesses: Vec<f64>,
}

/// Upper endpoint implied by a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Endpoint {
    Finite(f64),
    Unbounded,
}

/// GPD log-likelihood of `excesses` at `(xi, sigma)`; `-inf` outside the
/// support.
pub fn gpd_loglik(xi: f64, sigma: f64, excesses: &[f64]) -> f64 {
    if sigma <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let n = excesses.len() as f64;
    if xi.abs() < XI_ZERO {
        let sum: f64 = excesses.iter().sum();
        return -n * sigma.ln() - sum / sigma;
    }
    let mut acc = 0.0;
    for &y in excesses {
        let term = 1.0 + xi * y / sigma;
        if term <= 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += term.ln();
    }
    -n * sigma.ln() - (1.0 + 1.0 / xi) * acc
}

/// GPD quantile function (inverse CDF) for probability `p` in `[0, 1)`.
pub fn gpd_quantile(xi: f64, sigma: f64, p: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&p) && sigma > 0.0);
    if xi.abs() < XI_ZERO {
        -sigma * (1.0 - p).ln()
    } else {
        sigma / xi * ((1.0 - p).powf(-xi) - 1.0)
    }
}

/// GPD survival function `P(Y > y)` for an excess `y >= 0`.
pub fn gpd_survival(xi: f64, sigma: f64, y: f64) -> f64 {
    debug_assert!(sigma > 0.0);
    if y <= 0.0 {
        return 1.0;
    }
    if xi.abs() < XI_ZERO {
        (-y / sigma).exp()
    } else {
        let term = 1.0 + xi * y / sigma;
        if term <= 0.0 {
            // Beyond a finite endpoint.
            return 0.0;
        }
        term.powf(-1.0 / xi)
    }
}

/// Deterministic Nelder-Mead on `(xi, ln sigma)`, minimizing `f`.
#[allow(clippy::needless_range_loop)]
fn nelder_mead<F: Fn(f64, f64) -> f64>(
    f: F,
    start: (f64, f64),
    steps: (f64, f64),
    max_iter: usize,
) -> Result<(f64, f64, f64), EvtError> {
    type P = (f64, f64);
    let eval = |p: P| f(p.0, p.1);
    let mut simplex: Vec<(P, f64)> = vec![
        (start, eval(start)),
        ((start.0 + steps.0, start.1), f64::NAN),
        ((start.0, start.1 + steps.1), f64::NAN),
    ];
    simplex[1].1 = eval(simplex[1].0);
    simplex[2].1 = eval(simplex[2].0);
    if !simplex[0].1.is_finite() {
        return Err(EvtError::NonConvergence("infeasible start"));
    }

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
        let best = simplex[0];
        let worst = simplex[2];
        let spread = (worst.1 - best.1).abs();
        let size = (simplex[1].0 .0 - best.0 .0).abs().max(
            (simplex[2].0 .0 - best.0 .0)
                .abs()
                .max((simplex[1].0 .1 - best.0 .1).abs())
                .max((simplex[2].0 .1 - best.0 .1).abs()),
        );
        if spread <= 1e-10 * (1.0 + best.1.abs()) && size <= 1e-9 {
            return Ok((best.0 .0, best.0 .1, best.1));
        }
        let centroid = (
            0.5 * (simplex[0].0 .0 + simplex[1].0 .0),
            0.5 * (simplex[0].0 .1 + simplex[1].0 .1),
        );
        let reflect = (
            centroid.0 + (centroid.0 - worst.0 .0),
            centroid.1 + (centroid.1 - worst.0 .1),
        );
        let fr = eval(reflect);
        if fr < best.1 {
            let expand = (
                centroid.0 + 2.0 * (centroid.0 - worst.0 .0),
                centroid.1 + 2.0 * (centroid.1 - worst.0 .1),
            );
            let fe = eval(expand);
            simplex[2] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (reflect, fr);
        } else {
            let contract = (
                centroid.0 + 0.5 * (worst.0 .0 - centroid.0),
                centroid.1 + 0.5 * (worst.0 .1 - centroid.1),
            );
            let fc = eval(contract);
            if fc < worst.1 {
                simplex[2] = (contract, fc);
            } else {
                // Shrink toward the best vertex.
                for k in 1..3 {
                    let p = (
                        best.0 .0 + 0.5 * (simplex[k].0 .0 - best.0 .0),
                        best.0 .1 + 0.5 * (simplex[k].0 .1 - best.0 .1),
                    );
                    simplex[k] = (p, eval(p));
                }
            }
        }
    }
    // Accept the best point if the simplex has essentially collapsed.
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
    let spread = (simplex[2].1 - simplex[0].1).abs();
    if spread <= 1e-6 * (1.0 + simplex[0].1.abs()) {
        let best = simplex[0];
        return Ok((best.0 .0, best.0 .1, best.1));
    }
    Err(EvtError::NonConvergence("iteration cap"))
}

/// Negative log-likelihood in `(xi, ln sigma)` with the shape box.
fn neg_loglik(excesses: &[f64]) -> impl Fn(f64, f64) -> f64 + '_ {
    move |xi: f64, ln_sigma: f64| {
        if !(XI_MIN..=XI_MAX).contains(&xi) || !(-700.0..700.0).contains(&ln_sigma) {
            return f64::INFINITY;
        }
        let l = gpd_loglik(xi, ln_sigma.exp(), excesses);
        if l.is_finite() {
            -l
        } else {
            f64::INFINITY
        }
    }
}

fn excesses_above(xs: &[f64], u: f64) -> Vec<f64> {
    xs.iter().filter(|&&x| x > u).map(|&x| x - u).collect()
}

/// Standard errors from the observed information (numerical Hessian of
/// the negative log-likelihood at the optimum, in `(xi, sigma)` space).
fn standard_errors(xi: f64, sigma: f64, excesses: &[f64]) -> (f64, f64) {
    let f = |a: f64, b: f64| -gpd_loglik(a, b, excesses);
    let h_xi = 1e-5 * (1.0 + xi.abs());
    let h_sg = 1e-5 * sigma;
    let f00 = f(xi, sigma);
    let dxx = (f(xi + h_xi, sigma) - 2.0 * f00 + f(xi - h_xi, sigma)) / (h_xi * h_xi);
    let dss = (f(xi, sigma + h_sg) - 2.0 * f00 + f(xi, sigma - h_sg)) / (h_sg * h_sg);
    let dxs =
        (f(xi + h_xi, sigma + h_sg) - f(xi + h_xi, sigma - h_sg) - f(xi - h_xi, sigma + h_sg)
            + f(xi - h_xi, sigma - h_sg))
            / (4.0 * h_xi * h_sg);
    let det = dxx * dss - dxs * dxs;
    if !det.is_finite() || det <= 0.0 || dxx <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    // Inverse of the 2x2 information matrix.
    ((dss / det).sqrt(), (dxx / det).sqrt())
}

fn fit_excesses(
    excesses: Vec<f64>,
    u: f64,
    n_total: usize,
    warm: Option<(f64, f64)>,
) -> Result<GpdFit, EvtError> {
    let n = excesses.len();
    let ymax = excesses.iter().fold(0.0f64, |m, &y| m.max(y));
    let ymin = excesses.iter().fold(f64::INFINITY, |m, &y| m.min(y));
    if ymax - ymin <= 1e-15 * ymax.max(1e-300) {
        return Err(EvtError::NonConvergence("degenerate excesses"));
    }
    let (xi, ln_sigma, nl) = {
        let nll = neg_loglik(&excesses);
        let start = match warm {
            Some((xi0, sigma0)) if nll(xi0, sigma0.ln()).is_finite() => (xi0, sigma0.ln()),
            _ => {
                // Coarse deterministic grid over (xi, ln sigma).
                let mean_y = excesses.iter().sum::<f64>() / n as f64;
                let center = mean_y.ln();
                let mut best = (0.0, center, f64::INFINITY);
                let mut xi = -0.9;
                while xi <= 1.0 + 1e-12 {
                    let mut k = -15i32;
                    while k <= 15 {
                        let ls = center + f64::from(k) * 0.2;
                        let v = nll(xi, ls);
                        if v < best.2 {
                            best = (xi, ls, v);
                        }
                        k += 1;
                    }
                    xi += 0.05;
                }
                if !best.2.is_finite() {
                    return Err(EvtError::NonConvergence("no feasible grid point"));
                }
                (best.0, best.1)
            }
        };
        nelder_mead(&nll, start, (0.05, 0.1), 2000)?
    };
    let sigma = ln_sigma.exp();
    let (se_xi, se_sigma) = standard_errors(xi, sigma, &excesses);
    Ok(GpdFit {
        u,
        xi,
        sigma,
        n_exceed: n,
        n_total,
        loglik: -nl,
        se_xi,
        se_sigma,
        excesses,
    })
}

/// Fit the GPD to the excesses of `xs` above `u`.
pub fn fit_gpd(xs: &[f64], u: f64) -> Result<GpdFit, EvtError> {
    let excesses = excesses_above(xs, u);
    if excesses.len() < MIN_EXCEEDANCES {
        return Err(EvtError::InsufficientTail {
            u,
            have: excesses.len(),
            need: MIN_EXCEEDANCES,
        });
    }
    fit_excesses(excesses, u, xs.len(), None)
}

impl GpdFit {
    /// Exceedance rate `N_u / N`.
    pub fn zeta(&self) -> f64 {
        self.n_exceed as f64 / self.n_total as f64
    }
}

/// Upper endpoint `u - sigma/xi` when `xi < 0`, unbounded otherwise.
pub fn endpoint_estimate(fit: &GpdFit) -> Endpoint {
    if fit.xi < 0.0 {
        Endpoint::Finite(fit.u - fit.sigma / fit.xi)
    } else {
        Endpoint::Unbounded
    }
}

/// `P(X > t)` for `t > u`: empirical exceedance rate times the fitted
/// survival function.
pub fn exceedance_prob(fit: &GpdFit, t: f64) -> Result<f64, EvtError> {
    if t < fit.u {
        return Err(EvtError::LevelBelowThreshold { t, u: fit.u });
    }
    Ok(fit.zeta() * gpd_survival(fit.xi, fit.sigma, t - fit.u))
}

/// Mean residual life curve over a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MrlCurve {
    pub thresholds: Vec<f64>,
    /// Conditional mean excess per threshold; NaN where no exceedances.
    pub mean_excess: Vec<f64>,
    pub counts: Vec<usize>,
    /// Grid points with fewer than 10 exceedances.
    pub flagged: Vec<bool>,
}

/// Exact conditional mean excesses over `grid`.
pub fn mean_residual_life(xs: &[f64], grid: &[f64]) -> Result<MrlCurve, EvtError> {
    let mut mean_excess = Vec::with_capacity(grid.len());
    let mut counts = Vec::with_capacity(grid.len());
    let mut flagged = Vec::with_capacity(grid.len());
    let mut any = false;
    for &u in grid {
        let ys = excesses_above(xs, u);
        let n = ys.len();
        counts.push(n);
        flagged.push(n < 10);
        if n == 0 {
            mean_excess.push(f64::NAN);
        } else {
            any = true;
            mean_excess.push(ys.iter().sum::<f64>() / n as f64);
        }
    }
    if !any {
        return Err(EvtError::EmptyTail);
    }
    Ok(MrlCurve {
        thresholds: grid.to_vec(),
        mean_excess,
        counts,
        flagged,
    })
}

/// Per-threshold fits for the stability diagnostic; failures are kept
/// as rows, not dropped.
#[derive(Debug, Clone)]
pub struct StabilityScan {
    pub thresholds: Vec<f64>,
    pub fits: Vec<Result<GpdFit, EvtError>>,
}

impl StabilityScan {
    /// Fitted shapes, NaN for failed rows.
    pub fn xi_hat(&self) -> Vec<f64> {
        self.fits
            .iter()
            .map(|f| f.as_ref().map(|g| g.xi).unwrap_or(f64::NAN))
            .collect()
    }

    /// Mean and standard deviation of `P(X > t)` over converged rows.
    pub fn exceedance_stats(&self, t: f64) -> Option<(f64, f64)> {
        let probs: Vec<f64> = self
            .fits
            .iter()
            .filter_map(|f| f.as_ref().ok())
            .filter_map(|g| exceedance_prob(g, t).ok())
            .collect();
        if probs.is_empty() {
            return None;
        }
        let n = probs.len() as f64;
        let mean = probs.iter().sum::<f64>() / n;
        let var = probs.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / n;
        Some((mean, var.sqrt()))
    }
}

/// Independent GPD fits along a threshold grid.
pub fn stability_scan(xs: &[f64], grid: &[f64]) -> StabilityScan {
    StabilityScan {
        thresholds: grid.to_vec(),
        fits: grid.iter().map(|&u| fit_gpd(xs, u)).collect(),
    }
}

/// Percentile bootstrap for the exceedance probability at `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapCi {
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub replicates: usize,
    pub failed: usize,
    /// Sorted replicate probabilities behind the percentile bounds.
    pub probs: Vec<f64>,
}

/// Resample the excess set with replacement, refit, and take percentile
/// bounds of the exceedance probability. More than 5% failed replicate
/// fits invalidates the interval.
pub fn bootstrap_ci(
    xs: &[f64],
    u: f64,
    t: f64,
    replicates: usize,
    seed: u64,
    level: f64,
) -> Result<BootstrapCi, EvtError> {
    assert!(replicates >= 200, "need at least 200 replicates");
    assert!((0.0..1.0).contains(&level) && level > 0.5);
    let base = fit_gpd(xs, u)?;
    let point = exceedance_prob(&base, t)?;
    let n = base.excesses.len();

    let mut probs = Vec::with_capacity(replicates);
    let mut failed = 0usize;
    for r in 0..replicates {
        let mut rng = RngStream::new(seed, r as u32);
        let resampled: Vec<f64> = (0..n).map(|_| base.excesses[rng.index(n)]).collect();
        // Warm-started refit; resampled maxima never exceed the original,
        // so the parent parameters stay feasible.
        match fit_excesses(resampled, u, base.n_total, Some((base.xi, base.sigma))) {
            Ok(fit) => match exceedance_prob(&fit, t) {
                Ok(p) => probs.push(p),
                Err(_) => failed += 1,
            },
            Err(_) => failed += 1,
        }
    }
    if failed * 20 > replicates {
        return Err(EvtError::BootstrapInvalid { failed, replicates });
    }
    probs.sort_by(|a, b| a.partial_cmp(b).expect("finite probabilities"));
    let quantile = |q: f64| -> f64 {
        let idx = q * (probs.len() - 1) as f64;
        let lo = idx as usize;
        let hi = (lo + 1).min(probs.len() - 1);
        let frac = idx - lo as f64;
        probs[lo] * (1.0 - frac) + probs[hi] * frac
    };
    let alpha = (1.0 - level) / 2.0;
    Ok(BootstrapCi {
        point,
        ci_low: quantile(alpha),
        ci_high: quantile(1.0 - alpha),
        level,
        replicates,
        failed,
        probs,
    })
}

/// Composite tail report for one sample.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailSummary {
    /// Sample maximum, exactly `max(xs)`.
    pub sample_max: f64,
    pub endpoint: Endpoint,
    /// Exceedance probability at the probed level.
    pub exceed_prob: f64,
    /// Level the probability refers to (defaults to the sample maximum).
    pub level: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub fit: GpdFit,
}

/// Bundle sample maximum, endpoint, exceedance probability at `t`
/// (default: the sample maximum), and its bootstrap CI.
pub fn tail_summary(
    xs: &[f64],
    u: f64,
    t: Option<f64>,
    replicates: usize,
    seed: u64,
    level: f64,
) -> Result<TailSummary, EvtError> {
    let sample_max = xs.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let probe = t.unwrap_or(sample_max);
    let fit = fit_gpd(xs, u)?;
    let exceed = exceedance_prob(&fit, probe)?;
    let ci = bootstrap_ci(xs, u, probe, replicates, seed, level)?;
    Ok(TailSummary {
        sample_max,
        endpoint: endpoint_estimate(&fit),
        exceed_prob: exceed,
        level: probe,
        ci_low: ci.ci_low,
        ci_high: ci.ci_high,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gpd_sample(xi: f64, sigma: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 0);
        (0..n)
            .map(|_| gpd_quantile(xi, sigma, rng.next_f64()))
            .collect()
    }

    #[test]
    fn loglik_matches_direct_density_product() {
        let xs = gpd_sample(0.2, 1.0, 500, 1);
        let fit = fit_gpd(&xs, 0.0).unwrap();
        // Direct density evaluation at the fitted parameters.
        let mut direct = 0.0;
        for &y in &fit.excesses {
            let term = 1.0 + fit.xi * y / fit.sigma;
            direct += -(fit.sigma.ln()) + (-(1.0 / fit.xi) - 1.0) * term.ln();
        }
        assert!(
            (fit.loglik - direct).abs() <= 1e-9 * direct.abs().max(1.0),
            "{} vs {direct}",
            fit.loglik
        );
    }

    #[test]
    fn self_recovery_across_shapes() {
        for (i, xi) in [-0.5, -0.1, 0.0, 0.2].iter().enumerate() {
            let sigma = 1.0;
            let xs = gpd_sample(*xi, sigma, 10_000, 100 + i as u64);
            let fit = fit_gpd(&xs, 0.0).unwrap();
            assert!((fit.xi - xi).abs() <= 0.05, "xi {xi}: fitted {}", fit.xi);
            assert!(
                (fit.sigma - sigma).abs() <= 0.05 * sigma,
                "xi {xi}: sigma {}",
                fit.sigma
            );
        }
    }

    #[test]
    fn uniform_excesses_recover_the_boundary_shape() {
        // Uniform(0, 2) = GPD(xi = -1, sigma = 2); the optimizer's box
        // stops just short of -1.
        let mut rng = RngStream::new(9, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.uniform(0.0, 2.0)).collect();
        let fit = fit_gpd(&xs, 0.0).unwrap();
        assert!((fit.xi + 1.0).abs() <= 0.1, "xi {}", fit.xi);
        assert!((fit.sigma - 2.0).abs() <= 0.1, "sigma {}", fit.sigma);
    }

    #[test]
    fn exponential_excesses_have_near_zero_shape() {
        let mut rng = RngStream::new(10, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| -(1.0 - rng.next_f64()).ln()).collect();
        let fit = fit_gpd(&xs, 0.0).unwrap();
        assert!(fit.xi.abs() <= 0.05, "xi {}", fit.xi);
        assert!((fit.sigma - 1.0).abs() <= 0.05);
    }

    #[test]
    fn insufficient_tail_is_an_error() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 40.0).collect();
        assert!(matches!(
            fit_gpd(&xs, 0.9),
            Err(EvtError::InsufficientTail { .. })
        ));
    }

    #[test]
    fn endpoint_estimates() {
        let mk = |xi: f64, sigma: f64, u: f64| GpdFit {
            u,
            xi,
            sigma,
            n_exceed: 100,
            n_total: 1000,
            loglik: 0.0,
            se_xi: 0.0,
            se_sigma: 0.0,
            excesses: Vec::new(),
        };
        // Published-parameter check: 0.075 + 0.021/0.028 = 0.825.
        match endpoint_estimate(&mk(-0.028, 0.021, 0.075)) {
            Endpoint::Finite(e) => assert!((e - 0.825).abs() <= 0.01, "{e}"),
            Endpoint::Unbounded => panic!("expected finite endpoint"),
        }
        assert_eq!(endpoint_estimate(&mk(0.1, 1.0, 0.0)), Endpoint::Unbounded);
        match endpoint_estimate(&mk(-1.0, 2.0, 0.0)) {
            Endpoint::Finite(e) => assert!((e - 2.0).abs() < 1e-12),
            Endpoint::Unbounded => panic!("uniform tail has an endpoint"),
        }
    }

    #[test]
    fn exceedance_probability_reference_point() {
        let fit = GpdFit {
            u: 0.075,
            xi: -0.028,
            sigma: 0.021,
            n_exceed: 562,
            n_total: 18_000,
            loglik: 0.0,
            se_xi: 0.0,
            se_sigma: 0.0,
            excesses: Vec::new(),
        };
        let p = exceedance_prob(&fit, 0.1755).unwrap();
        assert!((1.6e-4..=2.0e-4).contains(&p), "{p}");
        // Continuity at the threshold.
        let at_u = exceedance_prob(&fit, 0.075 + 1e-15).unwrap();
        assert!((at_u - 562.0 / 18_000.0).abs() < 1e-6);
        // Beyond a finite endpoint.
        let uni = GpdFit {
            u: 0.0,
            xi: -1.0,
            sigma: 2.0,
            n_exceed: 100,
            n_total: 100,
            loglik: 0.0,
            se_xi: 0.0,
            se_sigma: 0.0,
            excesses: Vec::new(),
        };
        assert_eq!(exceedance_prob(&uni, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn exceedance_probability_is_nonincreasing_in_level() {
        let xs = gpd_sample(-0.1, 1.0, 5000, 3);
        let fit = fit_gpd(&xs, 0.5).unwrap();
        let mut last = f64::INFINITY;
        let mut t = fit.u;
        for _ in 0..50 {
            t += 0.1;
            let p = exceedance_prob(&fit, t).unwrap();
            assert!(p <= last + 1e-15);
            last = p;
        }
    }

    #[test]
    fn mrl_on_synthetic_samples() {
        // Exponential: memoryless, mean excess = 1 at every threshold.
        let mut rng = RngStream::new(4, 0);
        let exp: Vec<f64> = (0..10_000).map(|_| -(1.0 - rng.next_f64()).ln()).collect();
        let curve = mean_residual_life(&exp, &[0.5, 1.0, 2.0]).unwrap();
        for (i, &m) in curve.mean_excess.iter().enumerate() {
            assert!((m - 1.0).abs() <= 0.05, "grid {i}: {m}");
            assert!(!curve.flagged[i]);
        }

        // Uniform(0,1): mean excess (1-u)/2.
        let uni: Vec<f64> = (0..10_000).map(|_| rng.next_f64()).collect();
        let curve = mean_residual_life(&uni, &[0.2, 0.5, 0.8]).unwrap();
        for (u, m) in curve.thresholds.iter().zip(&curve.mean_excess) {
            assert!((m - (1.0 - u) / 2.0).abs() <= 0.02, "u={u}: {m}");
        }

        // Negative MRL slope for a bounded tail, positive-ish for heavy.
        let bounded = gpd_sample(-0.4, 1.0, 20_000, 5);
        let c = mean_residual_life(&bounded, &[0.2, 0.6, 1.0, 1.4]).unwrap();
        assert!(c.mean_excess[3] < c.mean_excess[0]);

        // Threshold above the sample maximum: flagged empty, NaN mean.
        let curve = mean_residual_life(&uni, &[0.5, 2.0]).unwrap();
        assert!(curve.flagged[1]);
        assert!(curve.mean_excess[1].is_nan());
        assert!(matches!(
            mean_residual_life(&uni, &[5.0]),
            Err(EvtError::EmptyTail)
        ));
    }

    #[test]
    fn stability_scan_is_flat_on_exact_gpd_data() {
        let xs = gpd_sample(-0.2, 1.0, 20_000, 6);
        let grid = [0.1, 0.3, 0.5, 0.7, 0.9];
        let scan = stability_scan(&xs, &grid);
        for (u, fit) in scan.thresholds.iter().zip(&scan.fits) {
            let fit = fit.as_ref().expect("fit converges");
            assert!(
                (fit.xi + 0.2).abs() <= 2.0 * fit.se_xi.max(0.02),
                "u={u}: xi {} (se {})",
                fit.xi,
                fit.se_xi
            );
        }
        // Single-point grid equals a direct fit.
        let one = stability_scan(&xs, &[0.5]);
        let direct = fit_gpd(&xs, 0.5).unwrap();
        assert_eq!(one.fits[0].as_ref().unwrap().xi, direct.xi);
    }

    #[test]
    fn bootstrap_on_degenerate_sample_fails_loudly() {
        let xs = vec![1.0; 500];
        assert!(bootstrap_ci(&xs, 0.5, 0.9, 200, 1, 0.95).is_err());
    }

    #[test]
    fn bootstrap_brackets_the_point_estimate() {
        let xs = gpd_sample(-0.1, 1.0, 4000, 7);
        let ci = bootstrap_ci(&xs, 0.5, 4.0, 200, 11, 0.95).unwrap();
        assert!(ci.failed == 0, "{} failures", ci.failed);
        assert!(ci.ci_low <= ci.point && ci.point <= ci.ci_high, "{ci:?}");
        assert!(ci.ci_low < ci.ci_high);
    }

    #[test]
    fn tail_summary_bundles_everything() {
        let xs = [0.1, 0.2, 0.3];
        // Too small for a fit, but the sample max shortcut is exact.
        assert_eq!(xs.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)), 0.3);
        let sample = gpd_sample(-0.2, 0.5, 5000, 8);
        let summary = tail_summary(&sample, 0.5, None, 200, 3, 0.95).unwrap();
        let expected_max = sample.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        assert_eq!(summary.sample_max, expected_max);
        assert!(matches!(summary.endpoint, Endpoint::Finite(_)));
        assert!(summary.exceed_prob >= 0.0);
        assert!(summary.ci_low <= summary.ci_high);
    }
}
