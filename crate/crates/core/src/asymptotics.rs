//! One-saddle asymptotics for `P_n(x)`, the leading-order moments of the
//! terminal height, and the Gaussian local law.
//!
//! * Quadratic drift (`A > 0`): near its singularity the generating function
//!   behaves like `amp(x) e^{c0 t} (1 - t/tau(x))^{-nu}`, which transfers to
//!   `P_n(x) ~ n! amp(x) e^{c0 tau} tau^{-n} n^{nu-1} / Gamma(nu)`.
//! * Constant drift (`A = B = 0`): `P_n(x) = H_n(alpha0 x + gamma0, alpha0 C)`
//!   exactly, plus a quadratic-saddle estimate.
//! * Linear drift (`A = 0, B > 0`): a transcendental saddle seeded from the
//!   Lambert W function.

use std::f64::consts::PI;

use serde::Serialize;

use crate::closedform::SingularityMap;
use crate::error::{Error, Result};
use crate::model::{classify, is_balanced, ModelParams, Regime};
use crate::roots::newton_increasing;
use crate::specfun::{hermite_kdf, hermite_kdf_sequence, lambert_w0, log_factorial, log_gamma};

/// Leading-order description of `P_n(x)` and the terminal-height moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticEstimate {
    pub n: usize,
    pub x: f64,
    pub log_pn: f64,
    pub mean: f64,
    pub variance: f64,
    #[serde(skip)]
    pub regime: Regime,
}

fn require_balanced(params: &ModelParams) -> Result<()> {
    if is_balanced(params) {
        Ok(())
    } else {
        Err(Error::Regime(format!(
            "asymptotic formulas need the balanced case beta0 == b; got beta0={} b={}",
            params.beta0, params.b
        )))
    }
}

/// `log P_n(x)` for `A > 0` from the coalescing-singularity transfer.
pub fn log_pn_quadratic(params: &ModelParams, x: f64, n: usize) -> Result<f64> {
    require_balanced(params)?;
    let regime = classify(params);
    let map = SingularityMap::new(regime)?;
    let k = *regime.quadratic().expect("quadratic regime");
    if params.alpha0 == 0 {
        return Err(Error::Degenerate(
            "alpha0 = 0 gives nu = 0: no singular growth to expand".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Domain("the expansion needs n >= 1".into()));
    }
    let tau = map.tau(x)?;
    let nu = k.nu.value();
    let log_amp = match regime {
        Regime::TwoRealRoots { r2, .. } => -nu * (k.a * (x - r2) * tau).ln(),
        Regime::DoubleRoot { .. } => 0.0,
        Regime::ComplexRoots { p, q, .. } => -nu * (k.a * (x - p).hypot(q) * tau).ln(),
        _ => unreachable!(),
    };
    let nf = n as f64;
    Ok(log_factorial(n as u64) + log_amp + k.c0 * tau - nf * tau.ln() + (nu - 1.0) * nf.ln()
        - log_gamma(nu)?)
}

/// Leading-order `(mu_n, sigma_n^2)` for `A > 0`:
/// `mu = n chi(1)`, `sigma^2 = mu + n (chi(1)^2 - tau''(1)/tau(1))`.
pub fn asymptotic_moments(params: &ModelParams, n: usize) -> Result<(f64, f64)> {
    require_balanced(params)?;
    let map = SingularityMap::from_params(params)?;
    let d = map.derivatives(1.0)?;
    let nf = n as f64;
    let mean = nf * d.chi;
    let variance = mean + nf * (d.chi * d.chi - d.curvature_ratio());
    Ok((mean, variance))
}

/// `(2 pi sigma^2)^{-1/2} exp(-(k - mu)^2 / (2 sigma^2))`.
pub fn gaussian_local_law(mean: f64, variance: f64, k: f64) -> f64 {
    let z = k - mean;
    (-z * z / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
}

pub fn log_gaussian_local_law(mean: f64, variance: f64, k: f64) -> f64 {
    let z = k - mean;
    -z * z / (2.0 * variance) - 0.5 * (2.0 * PI * variance).ln()
}

/// `(X, Y) = (alpha0 x + gamma0, alpha0 C)` for the constant-drift regime.
fn hermite_arguments(params: &ModelParams, x: f64) -> Result<(f64, f64)> {
    require_balanced(params)?;
    let regime = classify(params);
    if regime != Regime::Constant {
        return Err(Error::Regime(format!(
            "constant-drift formulas need A = B = 0, regime is {}",
            regime.name()
        )));
    }
    if params.alpha0 == 0 && params.gamma0 == 0 {
        return Err(Error::Degenerate(
            "alpha0 = gamma0 = 0: every path of positive length has weight zero".into(),
        ));
    }
    Ok((
        params.alpha0 as f64 * x + params.gamma0 as f64,
        params.alpha0 as f64 * params.b as f64,
    ))
}

/// Saddle estimate of `log P_n(x)` for constant drift; exact `n log X` when
/// `Y = 0`.
pub fn log_pn_constant_drift(params: &ModelParams, x: f64, n: usize) -> Result<f64> {
    let (big_x, big_y) = hermite_arguments(params, x)?;
    let nf = n as f64;
    if big_y == 0.0 {
        return Ok(nf * big_x.ln());
    }
    // Positive root of Y t^2 + X t - (n+1) = 0, in cancellation-free form.
    let m = nf + 1.0;
    let t = 2.0 * m / (big_x + (big_x * big_x + 4.0 * big_y * m).sqrt());
    let curvature = big_y + m / (t * t);
    Ok(log_factorial(n as u64) - 0.5 * (2.0 * PI * curvature).ln() + big_x * t
        + 0.5 * big_y * t * t
        - m * t.ln())
}

/// Exact `log P_n(x) = log H_n(X(x), Y)` for constant drift.
pub fn log_pn_hermite(params: &ModelParams, x: f64, n: usize) -> Result<f64> {
    let (big_x, big_y) = hermite_arguments(params, x)?;
    Ok(hermite_kdf(big_x, big_y, n).ln_abs)
}

/// Exact constant-drift moments from `d/dX H_n = n H_{n-1}`.
pub fn constant_drift_moments(params: &ModelParams, n: usize) -> Result<(f64, f64)> {
    let (big_x, big_y) = hermite_arguments(params, 1.0)?;
    if n == 0 {
        return Ok((0.0, 0.0));
    }
    let h = hermite_kdf_sequence(big_x, big_y, n);
    let alpha0 = params.alpha0 as f64;
    let nf = n as f64;
    let mean = alpha0 * nf * (h[n - 1].ln_abs - h[n].ln_abs).exp();
    let second = if n >= 2 {
        alpha0 * alpha0 * nf * (nf - 1.0) * (h[n - 2].ln_abs - h[n].ln_abs).exp()
    } else {
        0.0
    };
    Ok((mean, second + mean - mean * mean))
}

/// Saddle data for the linear-drift regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearDriftEstimate {
    pub log_pn: f64,
    /// Solution of `(n+1)/t = a_lin + B y(x) e^{B t}`.
    pub t_star: f64,
    /// `W(n / y(x)) / B`.
    pub t_seed: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Linear drift (`A = 0`, `B > 0`): saddle estimate of `log P_n(x)` and the
/// leading-order moments.
pub fn log_pn_linear_drift(params: &ModelParams, x: f64, n: usize) -> Result<LinearDriftEstimate> {
    require_balanced(params)?;
    let b = match classify(params) {
        Regime::Linear { b } => b,
        other => {
            return Err(Error::Regime(format!(
                "linear-drift formulas need A = 0 < B, regime is {}",
                other.name()
            )))
        }
    };
    if params.alpha0 == 0 {
        return Err(Error::Degenerate("alpha0 = 0 leaves no up-steps".into()));
    }
    let alpha0 = params.alpha0 as f64;
    let c = params.b as f64;
    // `a` in the usual write-up; renamed to avoid the step coefficient.
    let a_lin = params.gamma0 as f64 - alpha0 * c / b;
    let y = |x: f64| alpha0 / b * (x + c / b);
    let yx = y(x);
    let nf = n as f64;
    let m = nf + 1.0;

    let t_seed = lambert_w0(nf / yx)? / b;
    let h = |t: f64| {
        let e = (b * t).exp();
        (a_lin + b * yx * e - m / t, b * b * yx * e + m / (t * t))
    };
    let start = if t_seed > 0.0 { t_seed } else { 1.0 / b };
    let mut lo = start;
    while h(lo).0 > 0.0 {
        lo *= 0.5;
    }
    let mut hi = start;
    while h(hi).0 < 0.0 {
        hi *= 2.0;
    }
    let tol = 1e-12 * m / start;
    let t_star = newton_increasing(h, lo, hi, tol, 200)?.x;

    let lambda = alpha0 / b * (b * t_star).exp_m1();
    let curvature = h(t_star).1;
    let log_pn = log_factorial(n as u64) - 0.5 * (2.0 * PI * curvature).ln() + a_lin * t_star
        + (c / b + x) * lambda
        - m * t_star.ln();

    let share = b / (b + c);
    let w_s = lambert_w0(nf / y(1.0))?;
    let mean = share * nf / w_s;
    let variance = share * (1.0 - share) * nf / w_s + share * share * nf / (w_s * w_s + w_s);
    Ok(LinearDriftEstimate {
        log_pn,
        t_star,
        t_seed,
        mean,
        variance,
    })
}

/// Dispatches to the estimate appropriate for the regime.
pub fn estimate(params: &ModelParams, x: f64, n: usize) -> Result<AsymptoticEstimate> {
    let regime = classify(params);
    let (log_pn, mean, variance) = match regime {
        Regime::Constant => {
            let (mean, variance) = constant_drift_moments(params, n)?;
            (log_pn_constant_drift(params, x, n)?, mean, variance)
        }
        Regime::Linear { .. } => {
            let e = log_pn_linear_drift(params, x, n)?;
            (e.log_pn, e.mean, e.variance)
        }
        _ => {
            let (mean, variance) = asymptotic_moments(params, n)?;
            (log_pn_quadratic(params, x, n)?, mean, variance)
        }
    };
    Ok(AsymptoticEstimate {
        n,
        x,
        log_pn,
        mean,
        variance,
        regime,
    })
}
