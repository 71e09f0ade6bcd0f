//! Closed forms of the balanced exponential generating function
//! `w(x, t) = sum_n P_n(x) t^n / n!` and its moving singularity `tau(x)`.
//!
//! Each regime is written as `log w = c t + nu * log(base(t))` with an
//! elementary `base`, so the same code serves real evaluation and the complex
//! contour used for Taylor extraction.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{classify, is_balanced, ModelParams, Nu, Regime};

/// The balanced generating function for a fixed parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgfEvaluator {
    params: ModelParams,
    regime: Regime,
}

impl EgfEvaluator {
    pub fn new(params: &ModelParams) -> Result<Self> {
        if !is_balanced(params) {
            return Err(Error::Regime(format!(
                "closed forms need beta0 == b (balanced); got beta0={} b={}",
                params.beta0, params.b
            )));
        }
        Ok(EgfEvaluator {
            params: *params,
            regime: classify(params),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn regime(&self) -> &Regime {
        &self.regime
    }

    /// `w(x, t)`.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.log_eval(x, t)?.exp())
    }

    /// `log w(x, t)`, for `t` strictly before the singularity.
    pub fn log_eval(&self, x: f64, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let p = &self.params;
        let alpha0 = p.alpha0 as f64;
        let gamma0 = p.gamma0 as f64;
        let c = p.b as f64;
        match self.regime {
            Regime::Constant => Ok(alpha0 * x * t + 0.5 * alpha0 * c * t * t + gamma0 * t),
            Regime::Linear { b } => {
                let lambda = alpha0 / b * (b * t).exp_m1();
                Ok(lambda * (x + c / b) + (gamma0 - alpha0 * c / b) * t)
            }
            Regime::TwoRealRoots { r1, r2, k } => {
                self.check_before_singularity(x, t)?;
                if k.nu.is_one() {
                    two_roots_unit_nu(x, t, r1, r2, k.a, gamma0)
                } else {
                    two_roots_general(x, t, r1, r2, k.a, k.nu, alpha0, gamma0)
                }
            }
            Regime::DoubleRoot { r, k } => {
                self.check_before_singularity(x, t)?;
                let inner = -k.a * t * (x - r);
                if inner <= -1.0 {
                    return Err(domain_singular(x, t));
                }
                Ok(k.c0 * t - k.nu.value() * inner.ln_1p())
            }
            Regime::ComplexRoots { p: re, q, k } => {
                let phase = k.a * q * t + ((x - re) / q).atan();
                if !(phase > -FRAC_PI_2 && phase < FRAC_PI_2) {
                    return Err(Error::Domain(format!(
                        "cosine argument {phase} at (x={x}, t={t}) leaves (-pi/2, pi/2)"
                    )));
                }
                let denom = complex_denominator(x, Complex64::new(t, 0.0), re, q, k.a).re;
                if denom <= 0.0 {
                    return Err(domain_singular(x, t));
                }
                Ok(k.c0 * t - k.nu.value() * denom.ln())
            }
        }
    }

    fn check_before_singularity(&self, x: f64, t: f64) -> Result<()> {
        let map = SingularityMap::new(self.regime)?;
        let tau = map.tau(x)?;
        if t >= tau {
            return Err(Error::Domain(format!(
                "t={t} is at or beyond the singularity tau({x})={tau}"
            )));
        }
        Ok(())
    }

    /// `log w = lin(t) + nu * log(base(t))` at complex `t`. For `A = 0` the
    /// second part is absent.
    fn complex_parts(&self, x: f64, t: Complex64) -> (Complex64, Option<Complex64>) {
        let p = &self.params;
        let alpha0 = p.alpha0 as f64;
        let gamma0 = p.gamma0 as f64;
        let c = p.b as f64;
        match self.regime {
            Regime::Constant => (t * (alpha0 * x + gamma0) + t * t * (0.5 * alpha0 * c), None),
            Regime::Linear { b } => {
                let lambda = ((t * b).exp() - 1.0) * (alpha0 / b);
                (lambda * (x + c / b) + t * (gamma0 - alpha0 * c / b), None)
            }
            Regime::TwoRealRoots { r1, r2, k } => {
                let d = k.a * (r2 - r1);
                let em1 = (-t * d).exp() - 1.0;
                let denom = em1 * ((x - r1) / (r2 - r1)) + 1.0;
                (t * k.c0, Some(denom.inv()))
            }
            Regime::DoubleRoot { r, k } => {
                let denom = -t * (k.a * (x - r)) + 1.0;
                (t * k.c0, Some(denom.inv()))
            }
            Regime::ComplexRoots { p: re, q, k } => {
                (t * k.c0, Some(complex_denominator(x, t, re, q, k.a).inv()))
            }
        }
    }
}

fn domain_singular(x: f64, t: f64) -> Error {
    Error::Domain(format!("(x={x}, t={t}) is at or past the moving singularity"))
}

/// `cos(Aqt) - ((x-p)/q) sin(Aqt)`, which equals
/// `sqrt((x-p)^2+q^2) cos(Aqt + atan((x-p)/q)) / q`.
fn complex_denominator(x: f64, t: Complex64, p: f64, q: f64, a: f64) -> Complex64 {
    let arg = t * (a * q);
    arg.cos() - arg.sin() * ((x - p) / q)
}

/// General two-real-root form: `exp((alpha0 r1 + gamma0) t) * base^nu` with
/// `base = (r1-r2) / ((x-r2) - (x-r1) exp(A (r1-r2) t))`.
#[allow(clippy::too_many_arguments)]
fn two_roots_general(
    x: f64,
    t: f64,
    r1: f64,
    r2: f64,
    a: f64,
    nu: Nu,
    alpha0: f64,
    gamma0: f64,
) -> Result<f64> {
    let d = a * (r2 - r1);
    let inner = (x - r1) / (r2 - r1) * (-d * t).exp_m1();
    if inner <= -1.0 {
        return Err(domain_singular(x, t));
    }
    Ok((alpha0 * r1 + gamma0) * t - nu.value() * inner.ln_1p())
}

/// The `alpha0 = A` special case, a single fraction times an exponential.
fn two_roots_unit_nu(x: f64, t: f64, r1: f64, r2: f64, a: f64, gamma0: f64) -> Result<f64> {
    let frac = (r1 - r2) / ((x - r2) - (x - r1) * (a * (r1 - r2) * t).exp());
    if !(frac > 0.0) {
        return Err(domain_singular(x, t));
    }
    Ok(frac.ln() + (a * r1 + gamma0) * t)
}

/// `tau(x)`, the smallest positive singular time of `w(x, .)` for `A > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityMap {
    regime: Regime,
}

/// `tau` and its first two derivatives at one point, with
/// `chi = -tau'/tau` and `chi'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauDerivatives {
    pub tau: f64,
    pub d1: f64,
    pub d2: f64,
    pub chi: f64,
    pub chi_prime: f64,
}

impl TauDerivatives {
    /// `tau''/tau`.
    pub fn curvature_ratio(&self) -> f64 {
        self.d2 / self.tau
    }
}

impl SingularityMap {
    pub fn new(regime: Regime) -> Result<Self> {
        if !regime.is_quadratic() {
            return Err(Error::Regime(format!(
                "no moving algebraic singularity in the {} regime (A = 0)",
                regime.name()
            )));
        }
        Ok(SingularityMap { regime })
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        SingularityMap::new(classify(params))
    }

    pub fn regime(&self) -> &Regime {
        &self.regime
    }

    /// Lower end of the real component containing `x = 1`.
    pub fn domain_lower_bound(&self) -> f64 {
        match self.regime {
            Regime::TwoRealRoots { r2, .. } => r2,
            Regime::DoubleRoot { r, .. } => r,
            _ => 0.0,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && x > self.domain_lower_bound()
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "x={x} is outside the component (x > {}) of tau",
                self.domain_lower_bound()
            )))
        }
    }

    pub fn tau(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(match self.regime {
            Regime::TwoRealRoots { r1, r2, k } => {
                ((r2 - r1) / (x - r2)).ln_1p() / (k.a * (r2 - r1))
            }
            Regime::DoubleRoot { r, k } => 1.0 / (k.a * (x - r)),
            // pi/2 - atan((x-p)/q) == atan2(q, x-p) for q > 0
            Regime::ComplexRoots { p, q, k } => q.atan2(x - p) / (k.a * q),
            _ => unreachable!("constructor rejects A = 0"),
        })
    }

    /// `Q(x)` for the quadratic regimes, in factored form.
    fn q(&self, x: f64) -> (f64, f64) {
        match self.regime {
            Regime::TwoRealRoots { r1, r2, k } => {
                (k.a * (x - r1) * (x - r2), k.a * ((x - r1) + (x - r2)))
            }
            Regime::DoubleRoot { r, k } => (k.a * (x - r) * (x - r), 2.0 * k.a * (x - r)),
            Regime::ComplexRoots { p, q, k } => {
                (k.a * ((x - p) * (x - p) + q * q), 2.0 * k.a * (x - p))
            }
            _ => unreachable!("constructor rejects A = 0"),
        }
    }

    /// Differentiating each branch of `tau` gives `tau' = -1/Q` and hence
    /// `tau'' = Q'/Q^2` in all three regimes.
    pub fn derivatives(&self, x: f64) -> Result<TauDerivatives> {
        let tau = self.tau(x)?;
        let (q, qp) = self.q(x);
        let d1 = -1.0 / q;
        let d2 = qp / (q * q);
        let qt = q * tau;
        let chi = 1.0 / qt;
        let chi_prime = (1.0 - qp * tau) / (qt * qt);
        Ok(TauDerivatives {
            tau,
            d1,
            d2,
            chi,
            chi_prime,
        })
    }
}

/// Upper limit on the number of Taylor coefficients.
pub const MAX_TAYLOR_TERMS: usize = 30;

const MIN_NODES: usize = 32;
const MAX_NODES: usize = 1 << 16;
const AGREEMENT: f64 = 1e-10;
const ACCEPTABLE: f64 = 1e-8;

/// `P_n(x)/n!` for `n = 0..n_terms`, read off the `t`-expansion of the closed
/// form by trapezoidal quadrature of the Cauchy integral.
///
/// Quadratic regimes integrate on `|t| = tau(x)/2`. For `A = 0` the function
/// is entire and each coefficient gets its own radius at the saddle of
/// `log w(x, r) - n log r`.
pub fn taylor_coefficients(ev: &EgfEvaluator, x: f64, n_terms: usize) -> Result<Vec<f64>> {
    if n_terms > MAX_TAYLOR_TERMS {
        return Err(Error::Size(format!(
            "at most {MAX_TAYLOR_TERMS} Taylor terms, requested {n_terms}"
        )));
    }
    if ev.regime.is_quadratic() {
        let tau = SingularityMap::new(ev.regime)?.tau(x)?;
        let radius = 0.5 * tau;
        let nu = ev.regime.quadratic().expect("quadratic").nu;
        contour_coefficients(ev, x, radius, nu, 0..n_terms)
    } else {
        (0..n_terms)
            .map(|n| {
                let radius = entire_radius(ev, x, n)?;
                Ok(contour_coefficients(ev, x, radius, Nu::new(1, 1), n..n + 1)?[0])
            })
            .collect()
    }
}

fn entire_radius(ev: &EgfEvaluator, x: f64, n: usize) -> Result<f64> {
    // Golden-section search on s = log r; the objective is convex in s.
    let objective = |s: f64| -> f64 {
        let r = s.exp();
        ev.log_eval(x, r).unwrap_or(f64::INFINITY) - n as f64 * s
    };
    let (mut lo, mut hi) = ((0.05f64).ln(), (50.0f64).ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (objective(c), objective(d));
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = objective(d);
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

fn contour_coefficients(
    ev: &EgfEvaluator,
    x: f64,
    radius: f64,
    nu: Nu,
    orders: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    let mut nodes = MIN_NODES;
    let mut previous = quadrature(ev, x, radius, nu, orders.clone(), nodes);
    loop {
        nodes *= 2;
        let current = quadrature(ev, x, radius, nu, orders.clone(), nodes);
        let worst = previous
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
            .fold(0.0f64, f64::max);
        if worst <= AGREEMENT || (nodes >= MAX_NODES && worst <= ACCEPTABLE) {
            return Ok(current);
        }
        if nodes >= MAX_NODES {
            return Err(Error::Accuracy(format!(
                "contour quadrature residual {worst:e} exceeds {ACCEPTABLE:e}"
            )));
        }
        previous = current;
    }
}

fn quadrature(
    ev: &EgfEvaluator,
    x: f64,
    radius: f64,
    nu: Nu,
    orders: std::ops::Range<usize>,
    nodes: usize,
) -> Vec<f64> {
    let step = 2.0 * PI / nodes as f64;
    let mut values = Vec::with_capacity(nodes);
    let mut prev_log_base: Option<Complex64> = None;
    for j in 0..nodes {
        let angle = step * j as f64;
        let t = Complex64::from_polar(radius, angle);
        let (lin, base) = ev.complex_parts(x, t);
        let w = match (base, nu.as_integer()) {
            (None, _) => lin.exp(),
            (Some(base), Some(m)) => lin.exp() * base.powu(m as u32),
            (Some(base), None) => {
                // Follow the analytic branch of log(base) around the circle.
                let mut lb = base.ln();
                if let Some(prev) = prev_log_base {
                    let jump = ((lb.im - prev.im) / (2.0 * PI)).round();
                    lb.im -= jump * 2.0 * PI;
                }
                prev_log_base = Some(lb);
                (lin + lb * nu.value()).exp()
            }
        };
        values.push(w);
    }
    orders
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                let phase = -(n as f64) * step * j as f64;
                acc += v * Complex64::from_polar(1.0, phase);
            }
            acc.re / nodes as f64 / radius.powi(n as i32)
        })
        .collect()
}
