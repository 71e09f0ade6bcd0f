//! Limit cumulant generating function `F(theta) = log(tau(1)/tau(e^theta))`
//! of `K_n / n` and its Legendre transform, the rate function `I(u)`.
//!
//! Only the balanced `A > 0` regimes have a large-deviation principle at
//! speed `n`; everything here rejects `A = 0` with a regime error.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::closedform::SingularityMap;
use crate::csvfmt::fmt17;
use crate::error::{Error, Result};
use crate::exact::log_rows_at;
use crate::model::{classify, is_balanced, ModelParams, Regime};
use crate::roots::{bracket_increasing, newton_increasing};

/// Bracket limit for the saddle `F'(theta) = u`; beyond it `F'` is
/// numerically saturated at 0 or 1.
pub const THETA_LIMIT: f64 = 60.0;
/// Default distance kept between u-grids and the endpoints 0 and 1.
pub const DEFAULT_U_MARGIN: f64 = 1e-3;

/// `F`, `F'` and `F''` at one `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgfValue {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
}

/// The limit CGF of the balanced quadratic regimes.
#[derive(Debug, Clone, Copy)]
pub struct LimitCgf {
    map: SingularityMap,
    log_tau_one: f64,
}

impl LimitCgf {
    pub fn new(params: &ModelParams) -> Result<Self> {
        if !is_balanced(params) {
            return Err(Error::Regime(
                "the limit CGF is derived for the balanced case beta0 == b".into(),
            ));
        }
        let map = SingularityMap::new(classify(params)).map_err(|_| {
            Error::Regime(
                "A = 0: the natural exponential scale is sublinear in n, no speed-n LDP".into(),
            )
        })?;
        Ok(LimitCgf {
            map,
            log_tau_one: map.tau(1.0)?.ln(),
        })
    }

    pub fn regime(&self) -> &Regime {
        self.map.regime()
    }

    /// True for the double root at `r = 0`, where `F(theta) = theta` and
    /// the rate is infinite below `u = 1`.
    pub fn is_saturated(&self) -> bool {
        matches!(*self.map.regime(), Regime::DoubleRoot { r, .. } if r == 0.0)
    }

    pub fn eval(&self, theta: f64) -> Result<CgfValue> {
        let x = theta.exp();
        let f = self.log_tau_one - self.map.tau(x)?.ln();
        let (f1, f2) = self.slope_and_curvature(x);
        Ok(CgfValue { f, f1, f2 })
    }

    /// `F'(theta) = x chi(x)` and `F''(theta) = x d/dx F'` at `x = e^theta`.
    ///
    /// The direct form `x chi + x^2 chi'` loses every digit once `F''` drops
    /// below machine epsilon relative to `F'`, which happens for moderate
    /// `|theta|`. Each regime is rewritten so that `F'' / F'` is a sum of
    /// non-negative terms.
    fn slope_and_curvature(&self, x: f64) -> (f64, f64) {
        let (f1, f2) = self.slope_and_curvature_unclamped(x);
        // Rounding can push the slope an ulp past its supremum.
        (f1.min(1.0), f2)
    }

    fn slope_and_curvature_unclamped(&self, x: f64) -> (f64, f64) {
        match *self.map.regime() {
            Regime::TwoRealRoots { r1, r2, .. } => {
                let s = x - r2;
                let z = (r2 - r1) / s;
                let l = z.ln_1p();
                let g = (1.0 + z) * l / z;
                let f1 = x / s / g;
                // (z - ln(1+z)) / z, cancellation-free for small z
                let excess = if z < 1e-3 {
                    z * (0.5 - z * (1.0 / 3.0 - z * (0.25 - z / 5.0)))
                } else {
                    (z - l) / z
                };
                (f1, f1 * (-r2 / s + x / s * excess / g))
            }
            Regime::DoubleRoot { r, .. } => {
                let s = x - r;
                (x / s, -r * x / (s * s))
            }
            Regime::ComplexRoots { p, q, .. } => {
                let s = x - p;
                let rr = s * s + q * q;
                let phi = q.atan2(s);
                let f1 = x * q / (rr * phi);
                // h = q/phi - s
                let w = q / s;
                let h = if s > 0.0 && w < 1e-2 {
                    let w2 = w * w;
                    s * w2 * (1.0 / 3.0 - w2 * (4.0 / 45.0 - w2 * 44.0 / 945.0))
                } else {
                    q / phi - s
                };
                (f1, f1 * (q * q - p * s + x * h) / rr)
            }
            _ => unreachable!("constructor rejects A = 0"),
        }
    }

    /// `u0 = F'(0)`, the almost-sure limit of `K_n / n`.
    pub fn typical_value(&self) -> f64 {
        self.slope_and_curvature(1.0).0
    }

    /// `I(u) = sup_theta { u theta - F(theta) }` with its maximiser.
    pub fn rate(&self, u: f64) -> Result<RateSample> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("u must lie in (0, 1), got {u}")));
        }
        if self.is_saturated() {
            return Err(Error::Degenerate(
                "double root at 0: F'(theta) = 1, the rate is infinite for every u < 1".into(),
            ));
        }
        let slope = |t: f64| self.slope_and_curvature(t.exp());
        let (lo, hi) = bracket_increasing(|t| slope(t).0 - u, 0.0, 1.0, -THETA_LIMIT, THETA_LIMIT)?;
        let theta = if lo == hi {
            lo
        } else {
            newton_increasing(
                |t| {
                    let (f1, f2) = slope(t);
                    (f1 - u, f2)
                },
                lo,
                hi,
                1e-14,
                200,
            )?
            .x
        };
        let f = self.eval(theta)?.f;
        Ok(RateSample {
            u,
            theta,
            rate: u * theta - f,
        })
    }

    /// The `x`-parametrised curve `u = x chi(x)`, `I = u log x - F(log x)`.
    pub fn rate_at_x(&self, x: f64) -> Result<RateSample> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("x must be positive, got {x}")));
        }
        let theta = x.ln();
        let v = self.eval(theta)?;
        Ok(RateSample {
            u: v.f1,
            theta,
            rate: v.f1 * theta - v.f,
        })
    }
}

/// `(F, F', F'')` at `theta`.
pub fn limit_cgf(params: &ModelParams, theta: f64) -> Result<CgfValue> {
    LimitCgf::new(params)?.eval(theta)
}

/// `(I(u), theta(u))`.
pub fn rate_function(params: &ModelParams, u: f64) -> Result<RateSample> {
    LimitCgf::new(params)?.rate(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSample {
    pub u: f64,
    pub theta: f64,
    pub rate: f64,
}

/// A rate that may be `+inf` on part of its domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateValue {
    Finite(f64),
    Infinite,
}

impl RateValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            RateValue::Finite(v) => Some(v),
            RateValue::Infinite => None,
        }
    }
}

impl fmt::Display for RateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateValue::Finite(v) => write!(f, "{v}"),
            RateValue::Infinite => f.write_str("inf"),
        }
    }
}

fn xlogx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

/// Closed-form rate for a double root at `r <= 0`:
/// `u log u + (1-u) log(1-u) + (u-1) log(-r) + log(1-r)`.
pub fn rate_closed_form_double_root(r: f64, u: f64) -> Result<RateValue> {
    if !(r <= 0.0) {
        return Err(Error::Domain(format!("the double root must satisfy r <= 0, got {r}")));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("u must lie in [0, 1], got {u}")));
    }
    if r == 0.0 {
        return Ok(if u == 1.0 {
            RateValue::Finite(0.0)
        } else {
            RateValue::Infinite
        });
    }
    Ok(RateValue::Finite(
        xlogx(u) + xlogx(1.0 - u) + (u - 1.0) * (-r).ln() + (-r).ln_1p(),
    ))
}

/// Sampled rate function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateProfile {
    pub samples: Vec<RateSample>,
    #[serde(skip)]
    pub regime: Regime,
}

impl RateProfile {
    /// Legendre transform at each `u` of the grid.
    pub fn legendre(params: &ModelParams, u_grid: &[f64]) -> Result<Self> {
        let cgf = LimitCgf::new(params)?;
        let samples = u_grid
            .par_iter()
            .map(|&u| cgf.rate(u))
            .collect::<Result<Vec<_>>>()?;
        Ok(RateProfile {
            samples,
            regime: *cgf.regime(),
        })
    }

    /// The `x`-parametrised curve at each `x` of the grid.
    pub fn parametrized(params: &ModelParams, x_grid: &[f64]) -> Result<Self> {
        let cgf = LimitCgf::new(params)?;
        let samples = x_grid
            .iter()
            .map(|&x| cgf.rate_at_x(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(RateProfile {
            samples,
            regime: *cgf.regime(),
        })
    }

    /// Smallest discrete second difference of `I` over consecutive samples,
    /// scaled by the local spacing.
    pub fn min_second_difference(&self) -> f64 {
        self.samples
            .windows(3)
            .map(|w| {
                let (a, b, c) = (w[0], w[1], w[2]);
                let left = (b.rate - a.rate) / (b.u - a.u);
                let right = (c.rate - b.rate) / (c.u - b.u);
                right - left
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Same as [`parametrized_profile`] on a raw grid of `x` values.
pub fn parametrized_profile(params: &ModelParams, x_grid: &[f64]) -> Result<Vec<RateSample>> {
    Ok(RateProfile::parametrized(params, x_grid)?.samples)
}

/// `points` equally spaced values from `margin` to `1 - margin`.
pub fn default_u_grid(points: usize, margin: f64) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => {
            let step = (1.0 - 2.0 * margin) / (points - 1) as f64;
            (0..points).map(|i| margin + step * i as f64).collect()
        }
    }
}

/// `-(1/N) log p_{N, floor(uN)}` next to `I(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalRate {
    pub u: f64,
    pub n: usize,
    pub k: usize,
    pub empirical: f64,
    pub rate: f64,
}

impl EmpiricalRate {
    pub fn gap(&self) -> f64 {
        (self.empirical - self.rate).abs()
    }
}

/// `floor(u n)` with a guard for products like `0.85 * 200`.
pub fn lattice_index(u: f64, n: usize) -> usize {
    ((u * n as f64 + 1e-9).floor().max(0.0) as usize).min(n)
}

/// Empirical decay rates from the exact engine, ordered by `u` then `N`.
pub fn empirical_rate_check(
    params: &ModelParams,
    u_grid: &[f64],
    n_list: &[usize],
) -> Result<Vec<EmpiricalRate>> {
    let cgf = LimitCgf::new(params)?;
    let rates = u_grid
        .iter()
        .map(|&u| cgf.rate(u))
        .collect::<Result<Vec<_>>>()?;
    let rows = log_rows_at(params, n_list);
    let totals: Vec<f64> = rows
        .iter()
        .map(|row| crate::specfun::log_sum_exp_pos(row))
        .collect();
    let mut out = Vec::with_capacity(u_grid.len() * n_list.len());
    for sample in &rates {
        for ((&n, row), total) in n_list.iter().zip(&rows).zip(&totals) {
            let k = lattice_index(sample.u, n);
            let log_p = row[k] - total;
            out.push(EmpiricalRate {
                u: sample.u,
                n,
                k,
                empirical: -log_p / n as f64,
                rate: sample.rate,
            });
        }
    }
    Ok(out)
}

/// Rate function and empirical decay rates on a common u-grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpTable {
    pub samples: Vec<RateSample>,
    pub n_list: Vec<usize>,
    /// `empirical[i][j]` belongs to `samples[i]` and `n_list[j]`.
    pub empirical: Vec<Vec<f64>>,
}

impl LdpTable {
    pub fn build(params: &ModelParams, u_grid: &[f64], n_list: &[usize]) -> Result<Self> {
        let samples = RateProfile::legendre(params, u_grid)?.samples;
        let flat = if n_list.is_empty() {
            Vec::new()
        } else {
            empirical_rate_check(params, u_grid, n_list)?
        };
        let empirical = if n_list.is_empty() {
            vec![Vec::new(); samples.len()]
        } else {
            flat.chunks(n_list.len())
                .map(|c| c.iter().map(|e| e.empirical).collect())
                .collect()
        };
        Ok(LdpTable {
            samples,
            n_list: n_list.to_vec(),
            empirical,
        })
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("u,theta,I");
        for n in &self.n_list {
            h.push_str(&format!(",emp_{n}"));
        }
        h
    }

    /// Writes `u,theta,I,emp_<N>...`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.csv_header())?;
        for (s, emp) in self.samples.iter().zip(&self.empirical) {
            write!(out, "{},{},{}", fmt17(s.u), fmt17(s.theta), fmt17(s.rate))?;
            for e in emp {
                write!(out, ",{}", fmt17(*e))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::corpus;
    use crate::saddlepoint::CumulantEvaluator;

    fn double_root_unit() -> ModelParams {
        ModelParams::new(1, 1, 2, 1, 1, 0)
    }

    fn quadratic_corpus() -> Vec<ModelParams> {
        corpus()
            .into_iter()
            .filter(|p| is_balanced(p) && classify(p).is_quadratic())
            .collect()
    }

    #[test]
    fn cgf_examples() {
        let v = limit_cgf(&ModelParams::reference(), 0.0).unwrap();
        assert_eq!(v.f, 0.0);
        assert!((v.f1 - (1.0 / 3.0) / 3f64.ln()).abs() < 1e-15);
        let p = double_root_unit();
        for &t in &[-3.0, -0.4, 0.0, 1.2, 5.0] {
            let v = limit_cgf(&p, t).unwrap();
            assert!((v.f - ((t.exp() + 1.0) / 2.0).ln()).abs() < 1e-14);
        }
        assert_eq!(limit_cgf(&p, 0.0).unwrap().f1, 0.5);
    }

    #[test]
    fn rejects_linear_and_unbalanced() {
        assert!(matches!(limit_cgf(&ModelParams::new(0, 1, 1, 1, 1, 1), 0.0), Err(Error::Regime(_))));
        assert!(matches!(limit_cgf(&ModelParams::new(1, 5, 6, 8, 4, 1), 0.0), Err(Error::Regime(_))));
    }

    #[test]
    fn derivatives_agree_with_chi_form() {
        for p in quadratic_corpus() {
            let cgf = LimitCgf::new(&p).unwrap();
            let map = SingularityMap::from_params(&p).unwrap();
            for &t in &[-3.0, -1.0, 0.0, 0.5, 2.0, 4.0] {
                let x = f64::exp(t);
                let d = map.derivatives(x).unwrap();
                let v = cgf.eval(t).unwrap();
                assert!((v.f1 - x * d.chi).abs() < 1e-12, "{p} theta={t}");
                let direct = x * d.chi + x * x * d.chi_prime;
                assert!((v.f2 - direct).abs() < 1e-9 * (1.0 + direct.abs()), "{p} theta={t}");
            }
        }
    }

    #[test]
    fn derivatives_by_finite_difference() {
        for p in quadratic_corpus() {
            let cgf = LimitCgf::new(&p).unwrap();
            let h = 1e-5;
            for &t in &[-2.0, 0.3, 3.0] {
                let v = cgf.eval(t).unwrap();
                let (vp, vm) = (cgf.eval(t + h).unwrap(), cgf.eval(t - h).unwrap());
                assert!(((vp.f - vm.f) / (2.0 * h) - v.f1).abs() < 1e-7, "{p}");
                assert!(((vp.f1 - vm.f1) / (2.0 * h) - v.f2).abs() < 1e-7, "{p}");
            }
        }
    }

    #[test]
    fn slope_range_and_convexity() {
        for p in quadratic_corpus() {
            let cgf = LimitCgf::new(&p).unwrap();
            if cgf.is_saturated() {
                continue;
            }
            let hi = cgf.eval(40.0).unwrap();
            assert!(hi.f1 > 1.0 - 1e-3, "{p}");
            // With no down-steps the lower end of the domain is 0 itself and
            // F' only decays like 1/|theta|.
            if SingularityMap::from_params(&p).unwrap().domain_lower_bound() < 0.0 {
                assert!(cgf.eval(-40.0).unwrap().f1 < 1e-6, "{p}");
            }
            for i in 0..=160 {
                let t = -40.0 + 0.5 * i as f64;
                let v = cgf.eval(t).unwrap();
                // 1 - F' falls below half an ulp of 1 near theta = 37.
                assert!(v.f2 > 0.0 && v.f1 > 0.0 && v.f1 <= 1.0, "{p} theta={t}");
            }
        }
    }

    #[test]
    fn rate_examples() {
        let p = double_root_unit();
        let s = rate_function(&p, 0.5).unwrap();
        assert!(s.rate.abs() < 1e-14 && s.theta.abs() < 1e-12);
        let s = rate_function(&p, 0.9).unwrap();
        let closed = 0.9 * 0.9f64.ln() + 0.1 * 0.1f64.ln() + 2f64.ln();
        assert!((s.rate - closed).abs() < 1e-12);
        assert!((s.rate - 0.368064).abs() < 1e-6);
        let cgf = LimitCgf::new(&ModelParams::reference()).unwrap();
        let s = cgf.rate(cgf.typical_value()).unwrap();
        assert!(s.rate.abs() < 1e-10 && s.theta.abs() < 1e-10);
        assert!(matches!(cgf.rate(1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn closed_form_double_root() {
        for &r in &[-1.0, -0.3, -4.0] {
            let p_cgf = closed_form_params(r);
            for i in 1..=9 {
                let u = i as f64 / 10.0;
                let numeric = p_cgf.rate(u).unwrap().rate;
                let closed = rate_closed_form_double_root(r, u).unwrap().finite().unwrap();
                assert!((numeric - closed).abs() <= 1e-8, "r={r} u={u}");
            }
        }
        let ln2 = 2f64.ln();
        assert!((rate_closed_form_double_root(-1.0, 1e-12).unwrap().finite().unwrap() - ln2).abs() < 1e-9);
        assert!((rate_closed_form_double_root(-1.0, 1.0 - 1e-12).unwrap().finite().unwrap() - ln2).abs() < 1e-9);
        assert_eq!(rate_closed_form_double_root(0.0, 0.4).unwrap(), RateValue::Infinite);
        assert_eq!(rate_closed_form_double_root(0.0, 1.0).unwrap(), RateValue::Finite(0.0));
        assert!(matches!(rate_closed_form_double_root(0.5, 0.4), Err(Error::Domain(_))));
        assert_eq!(RateValue::Infinite.to_string(), "inf");
    }

    /// The rate only depends on the regime, so a bare double root at `r`
    /// with `A = 1` is enough.
    fn closed_form_params(r: f64) -> LimitCgf {
        let k = crate::model::QuadraticConstants {
            a: 1.0,
            nu: crate::model::Nu::new(1, 1),
            c0: 0.0,
        };
        let map = SingularityMap::new(Regime::DoubleRoot { r, k }).unwrap();
        LimitCgf {
            map,
            log_tau_one: map.tau(1.0).unwrap().ln(),
        }
    }

    #[test]
    fn saturated_double_root() {
        let cgf = LimitCgf::new(&ModelParams::new(1, 0, 0, 1, 0, 1)).unwrap();
        assert!(cgf.is_saturated());
        assert!(matches!(cgf.rate(0.5), Err(Error::Degenerate(_))));
    }

    #[test]
    fn parametrization_examples() {
        let cgf = LimitCgf::new(&ModelParams::reference()).unwrap();
        let s = cgf.rate_at_x(1.0).unwrap();
        assert_eq!(s.rate, 0.0);
        assert_eq!(s.u, cgf.typical_value());
        let s = LimitCgf::new(&double_root_unit()).unwrap().rate_at_x(3.0).unwrap();
        assert!((s.u - 0.75).abs() < 1e-15);
        let expected = 0.75 * 3f64.ln() - 2f64.ln();
        assert!((s.rate - expected).abs() < 1e-14);
        assert!((expected - 0.130812).abs() < 1e-6);
        let closed = rate_closed_form_double_root(-1.0, 0.75).unwrap().finite().unwrap();
        assert!((s.rate - closed).abs() < 1e-14);
    }

    #[test]
    fn parametrized_matches_legendre() {
        let xs: Vec<f64> = (0..41).map(|i| (-4.0 + 0.2 * i as f64).exp()).collect();
        for p in quadratic_corpus() {
            let cgf = LimitCgf::new(&p).unwrap();
            if cgf.is_saturated() {
                continue;
            }
            for s in parametrized_profile(&p, &xs).unwrap() {
                let l = cgf.rate(s.u).unwrap();
                assert!((s.rate - l.rate).abs() <= 1e-8, "{p} u={}", s.u);
            }
        }
    }

    #[test]
    fn profile_invariants() {
        for p in quadratic_corpus() {
            let cgf = LimitCgf::new(&p).unwrap();
            if cgf.is_saturated() {
                continue;
            }
            // Without down-steps F'(-60) is still about 1/60.
            let margin = if SingularityMap::from_params(&p).unwrap().domain_lower_bound() < 0.0 {
                DEFAULT_U_MARGIN
            } else {
                0.05
            };
            let grid = default_u_grid(199, margin);
            let prof = RateProfile::legendre(&p, &grid).unwrap();
            assert!(prof.min_second_difference() >= -1e-9, "{p}");
            assert!(prof.samples.windows(2).all(|w| w[1].theta > w[0].theta), "{p}");
            let u0 = cgf.typical_value();
            for s in &prof.samples {
                if (s.u - u0).abs() > 1e-3 {
                    assert!(s.rate > 0.0, "{p} u={}", s.u);
                }
            }
        }
    }

    #[test]
    fn rate_curvature_is_inverse_cgf_curvature() {
        let cgf = LimitCgf::new(&ModelParams::reference()).unwrap();
        let h = 1e-4;
        for &u in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            let (m, c, p) = (cgf.rate(u - h).unwrap(), cgf.rate(u).unwrap(), cgf.rate(u + h).unwrap());
            let second = (p.rate - 2.0 * c.rate + m.rate) / (h * h);
            let expected = 1.0 / cgf.eval(c.theta).unwrap().f2;
            assert!((second / expected - 1.0).abs() <= 1e-4, "u={u}");
        }
    }

    #[test]
    fn legendre_involution() {
        let cgf = LimitCgf::new(&ModelParams::reference()).unwrap();
        let grid = default_u_grid(4001, DEFAULT_U_MARGIN);
        let prof = RateProfile::legendre(&ModelParams::reference(), &grid).unwrap();
        for i in 0..=8 {
            let t = -2.0 + 0.5 * i as f64;
            let sup = prof
                .samples
                .iter()
                .map(|s| s.u * t - s.rate)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((sup - cgf.eval(t).unwrap().f).abs() <= 1e-6, "theta={t}");
        }
    }

    #[test]
    fn empirical_gap_shrinks() {
        let p = ModelParams::reference();
        let cgf = LimitCgf::new(&p).unwrap();
        let u0 = cgf.typical_value();
        let rows = empirical_rate_check(&p, &[0.15, 0.5, 0.85, u0], &[200, 800]).unwrap();
        for pair in rows.chunks(2) {
            assert!(pair[1].gap() < pair[0].gap(), "{pair:?}");
        }
        let at_u0 = rows[7];
        assert!(at_u0.gap() <= 2.0 * (800f64).ln() / 800.0);
    }

    #[test]
    fn lattice_index_guard() {
        assert_eq!(lattice_index(0.85, 200), 170);
        assert_eq!(lattice_index(0.15, 200), 30);
        assert_eq!(lattice_index(0.999, 10), 9);
    }

    #[test]
    fn finite_n_cgf_converges() {
        let p = ModelParams::reference();
        let cgf = LimitCgf::new(&p).unwrap();
        let evs: Vec<CumulantEvaluator> = log_rows_at(&p, &[100, 200, 400])
            .into_iter()
            .map(CumulantEvaluator::from_log_row)
            .collect();
        for i in 0..=8 {
            let t = -2.0 + 0.5 * i as f64;
            if t == 0.0 {
                continue;
            }
            let f = cgf.eval(t).unwrap().f;
            let gaps: Vec<f64> = evs
                .iter()
                .map(|ev| (ev.centered_kappa(t) / ev.n() as f64 - f).abs())
                .collect();
            assert!(gaps[1] < 0.75 * gaps[0] && gaps[2] < 0.75 * gaps[1], "theta={t}: {gaps:?}");
        }
        let ev800 = CumulantEvaluator::from_params(&p, 800);
        let bridge = ev800.kappa_derivatives(0.0).variance / 800.0;
        let f2 = cgf.eval(0.0).unwrap().f2;
        assert!((bridge / f2 - 1.0).abs() < 0.10);
    }

    #[test]
    fn table_csv() {
        let table = LdpTable::build(&ModelParams::reference(), &[0.2, 0.4], &[50, 100]).unwrap();
        assert_eq!(table.csv_header(), "u,theta,I,emp_50,emp_100");
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().skip(1).all(|l| l.split(',').count() == 5));
    }
}
