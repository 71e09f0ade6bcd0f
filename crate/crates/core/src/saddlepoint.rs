//! Finite-n cumulant generating function of the terminal height and the
//! Daniels lattice saddlepoint approximation.
//!
//! Everything here is computed from one log-space row `log w_{n,k}`, so it
//! applies to any parameters, balanced or not. The accuracy guarantees that
//! the tests check only cover the balanced `A > 0` case.

use std::f64::consts::{LN_10, PI};
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::log_gaussian_local_law;
use crate::csvfmt::fmt17;
use crate::error::{Error, Result};
use crate::exact::{final_log_row, HeightDistribution};
use crate::model::ModelParams;
use crate::roots::{bracket_increasing, newton_increasing};

const MAX_NEWTON_ITER: usize = 80;
const THETA_SEARCH_LIMIT: f64 = 1e4;

pub const PROFILE_CSV_HEADER: &str = "k,log10_exact,log10_daniels,log10_gaussian";

/// `kappa_n(theta) = log sum_k w_{n,k} e^{theta k}` and its first four
/// derivatives, which are the cumulants of the tilted law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cumulants {
    pub kappa: f64,
    pub mean: f64,
    pub variance: f64,
    pub third: f64,
    pub fourth: f64,
}

impl Cumulants {
    /// The derivative of the requested order, `0..=4`.
    pub fn order(&self, order: usize) -> Option<f64> {
        match order {
            0 => Some(self.kappa),
            1 => Some(self.mean),
            2 => Some(self.variance),
            3 => Some(self.third),
            4 => Some(self.fourth),
            _ => None,
        }
    }
}

/// Read-only view of one row of the triangle as a lattice distribution.
#[derive(Debug, Clone)]
pub struct CumulantEvaluator {
    log_row: Vec<f64>,
    kappa_zero: f64,
    first_support: Option<usize>,
    last_support: Option<usize>,
}

impl CumulantEvaluator {
    pub fn from_log_row(log_row: Vec<f64>) -> Self {
        let first_support = log_row.iter().position(|v| v.is_finite());
        let last_support = log_row.iter().rposition(|v| v.is_finite());
        let mut ev = CumulantEvaluator {
            log_row,
            kappa_zero: 0.0,
            first_support,
            last_support,
        };
        ev.kappa_zero = ev.kappa(0.0);
        ev
    }

    /// Streams the recurrence up to row `n`.
    pub fn from_params(params: &ModelParams, n: usize) -> Self {
        Self::from_log_row(final_log_row(params, n))
    }

    pub fn n(&self) -> usize {
        self.log_row.len() - 1
    }

    pub fn log_row(&self) -> &[f64] {
        &self.log_row
    }

    /// `kappa_n(0) = log P_n(1)`.
    pub fn kappa_zero(&self) -> f64 {
        self.kappa_zero
    }

    pub fn kappa(&self, theta: f64) -> f64 {
        let shifted = self.shifted_terms(theta);
        shifted.max + shifted.sum.ln()
    }

    /// `kappa_n(theta) - kappa_n(0) = log M_n(theta)`.
    pub fn centered_kappa(&self, theta: f64) -> f64 {
        self.kappa(theta) - self.kappa_zero
    }

    pub fn kappa_derivatives(&self, theta: f64) -> Cumulants {
        let shifted = self.shifted_terms(theta);
        let kappa = shifted.max + shifted.sum.ln();
        let probs = || {
            shifted
                .weights
                .iter()
                .enumerate()
                .map(move |(k, w)| (k as f64, w / shifted.sum))
        };
        let mean: f64 = probs().map(|(k, p)| p * k).sum();
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for (k, p) in probs() {
            let d = k - mean;
            let d2 = d * d;
            m2 += p * d2;
            m3 += p * d2 * d;
            m4 += p * d2 * d2;
        }
        Cumulants {
            kappa,
            mean,
            variance: m2.max(0.0),
            third: m3,
            fourth: m4 - 3.0 * m2 * m2,
        }
    }

    /// The tilted law `w_{n,k} e^{theta k} / sum_j w_{n,j} e^{theta j}`.
    pub fn tilted_law(&self, theta: f64) -> Vec<f64> {
        let shifted = self.shifted_terms(theta);
        shifted.weights.iter().map(|w| w / shifted.sum).collect()
    }

    /// Exact `log p_{n,k}`.
    pub fn log_prob(&self, k: usize) -> f64 {
        self.log_row
            .get(k)
            .map_or(f64::NEG_INFINITY, |v| v - self.kappa_zero)
    }

    fn shifted_terms(&self, theta: f64) -> Shifted {
        let terms: Vec<f64> = self
            .log_row
            .iter()
            .enumerate()
            .map(|(k, lw)| lw + theta * k as f64)
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = terms.iter().map(|t| (t - max).exp()).collect();
        let sum = weights.iter().sum();
        Shifted { max, weights, sum }
    }
}

struct Shifted {
    max: f64,
    weights: Vec<f64>,
    sum: f64,
}

/// Solution of `kappa_n'(theta) = k` and the Daniels estimate built on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleResult {
    pub k: usize,
    pub theta: f64,
    pub kappa: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub log_p_daniels: f64,
    pub iterations: usize,
}

pub fn solve_saddle(ev: &CumulantEvaluator, k: usize) -> Result<SaddleResult> {
    let n = ev.n();
    if k == 0 || k >= n {
        return Err(Error::Boundary { n, k });
    }
    match (ev.first_support, ev.last_support) {
        (Some(lo), Some(hi)) if lo < k && k < hi => {}
        _ => return Err(Error::NoMass { k }),
    }
    let target = k as f64;
    let tol = 1e-9 * target.max(1.0);
    let (lo, hi) = bracket_increasing(
        |t| ev.kappa_derivatives(t).mean - target,
        0.0,
        1.0,
        -THETA_SEARCH_LIMIT,
        THETA_SEARCH_LIMIT,
    )?;
    let root = if lo == hi {
        crate::roots::Root {
            x: lo,
            residual: 0.0,
            iterations: 0,
        }
    } else {
        newton_increasing(
            |t| {
                let c = ev.kappa_derivatives(t);
                (c.mean - target, c.variance)
            },
            lo,
            hi,
            tol,
            MAX_NEWTON_ITER,
        )?
    };
    let c = ev.kappa_derivatives(root.x);
    if (c.mean - target).abs() > tol {
        return Err(Error::Accuracy(format!(
            "saddle residual {} exceeds {tol} at k={k}",
            (c.mean - target).abs()
        )));
    }
    let log_p_daniels =
        -0.5 * (2.0 * PI * c.variance).ln() + c.kappa - ev.kappa_zero - target * root.x;
    Ok(SaddleResult {
        k,
        theta: root.x,
        kappa: c.kappa,
        kappa1: c.mean,
        kappa2: c.variance,
        log_p_daniels,
        iterations: root.iterations,
    })
}

/// Daniels estimate of `log p_{n,k}` for an interior `k`.
pub fn daniels_pmf(ev: &CumulantEvaluator, k: usize) -> Result<f64> {
    Ok(solve_saddle(ev, k)?.log_p_daniels)
}

/// Natural-log probabilities for one value of `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub k: usize,
    pub log_exact: f64,
    pub log_daniels: f64,
    pub log_gaussian: f64,
}

/// `ceil(eps n) ..= floor((1 - eps) n)`, with a small guard so that products
/// such as `0.1 * 100` land on the intended integer.
pub fn interior_range(n: usize, epsilon: f64) -> Result<std::ops::RangeInclusive<usize>> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    let nf = n as f64;
    let lo = (epsilon * nf - 1e-9).ceil().max(0.0) as usize;
    let hi = ((1.0 - epsilon) * nf + 1e-9).floor() as usize;
    Ok(lo..=hi)
}

/// Exact, Daniels and Gaussian log-probabilities for `k` in
/// `[eps n, (1 - eps) n]`. The Gaussian column uses the exact mean and
/// variance of the row.
pub fn profile(ev: &CumulantEvaluator, epsilon: f64) -> Result<Vec<ProfileRow>> {
    let range = interior_range(ev.n(), epsilon)?;
    let dist = HeightDistribution::from_log_row(ev.log_row());
    range
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| {
            Ok(ProfileRow {
                k,
                log_exact: ev.log_prob(k),
                log_daniels: daniels_pmf(ev, k)?,
                log_gaussian: log_gaussian_local_law(dist.mean, dist.variance, k as f64),
            })
        })
        .collect()
}

/// Writes `k,log10_exact,log10_daniels,log10_gaussian`.
pub fn write_profile_csv<W: Write>(rows: &[ProfileRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{PROFILE_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.k,
            fmt17(r.log_exact / LN_10),
            fmt17(r.log_daniels / LN_10),
            fmt17(r.log_gaussian / LN_10)
        )?;
    }
    Ok(())
}

/// Largest `|exp(daniels - exact) - 1|` over `ks`.
pub fn max_relative_error(ev: &CumulantEvaluator, ks: impl IntoIterator<Item = usize>) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in ks {
        let d = daniels_pmf(ev, k)?;
        worst = worst.max((d - ev.log_prob(k)).exp_m1().abs());
    }
    Ok(worst)
}
