//! The weight triangle `w[n][k]`, its generating polynomials and the
//! normalized terminal-height distribution.
//!
//! Rows follow the three-term recurrence
//!
//! ```text
//! w[n+1][k] = alpha_{k-1} w[n][k-1] + gamma_k w[n][k] + beta_k w[n][k+1]
//! ```
//!
//! with `w[0][0] = 1` and zero outside `0 <= k <= n`. Two storage formats are
//! offered: exact big integers, and natural logs in `f64` where a zero weight
//! is `-inf`.

use std::io::{self, Write};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::csvfmt::fmt17;
use crate::error::{Error, Result};
use crate::model::{step_weights, ModelParams};
use crate::specfun::{log_add_exp, log_sum_exp_pos};

/// Default cap on the total size of an exact triangle.
pub const DEFAULT_EXACT_BUDGET_BYTES: usize = 1 << 30;

/// Largest `n` accepted by [`brute_force_oracle`].
pub const ORACLE_MAX_N: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Exact,
    LogSpace,
}

#[derive(Debug, Clone, PartialEq)]
enum Rows {
    Exact(Vec<Vec<BigUint>>),
    Log(Vec<Vec<f64>>),
}

/// Rows `0..=n_max` of the weight triangle; row `n` has `n + 1` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    n_max: usize,
    rows: Rows,
}

impl Triangle {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn representation(&self) -> Representation {
        match self.rows {
            Rows::Exact(_) => Representation::Exact,
            Rows::Log(_) => Representation::LogSpace,
        }
    }

    /// Row `n` as exact integers, if this triangle was built exactly.
    pub fn exact_row(&self, n: usize) -> Option<&[BigUint]> {
        match &self.rows {
            Rows::Exact(rows) => rows.get(n).map(Vec::as_slice),
            Rows::Log(_) => None,
        }
    }

    /// Row `n` as natural logs of the weights.
    pub fn log_row(&self, n: usize) -> Vec<f64> {
        match &self.rows {
            Rows::Exact(rows) => rows[n].iter().map(big_ln).collect(),
            Rows::Log(rows) => rows[n].clone(),
        }
    }

    /// Writes `n,k,log_weight` (plus `weight_decimal` for exact triangles).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        match &self.rows {
            Rows::Exact(rows) => {
                writeln!(out, "n,k,log_weight,weight_decimal")?;
                for (n, row) in rows.iter().enumerate() {
                    for (k, w) in row.iter().enumerate() {
                        writeln!(out, "{n},{k},{},{w}", fmt17(big_ln(w)))?;
                    }
                }
            }
            Rows::Log(rows) => {
                writeln!(out, "n,k,log_weight")?;
                for (n, row) in rows.iter().enumerate() {
                    for (k, lw) in row.iter().enumerate() {
                        writeln!(out, "{n},{k},{}", fmt17(*lw))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Natural log of a big integer; zero maps to `-inf`.
pub fn big_ln(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn build_triangle(
    params: &ModelParams,
    n_max: usize,
    representation: Representation,
) -> Result<Triangle> {
    build_triangle_with_budget(params, n_max, representation, DEFAULT_EXACT_BUDGET_BYTES)
}

/// Like [`build_triangle`], failing with [`Error::Capacity`] once the exact
/// integers would need more than `budget_bytes` of storage.
pub fn build_triangle_with_budget(
    params: &ModelParams,
    n_max: usize,
    representation: Representation,
    budget_bytes: usize,
) -> Result<Triangle> {
    let rows = match representation {
        Representation::Exact => {
            let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(n_max + 1);
            rows.push(vec![BigUint::from(1u32)]);
            let mut used = 8usize;
            for n in 0..n_max {
                let next = next_exact_row(params, &rows[n]);
                used += next.iter().map(|w| w.bits() as usize / 8 + 8).sum::<usize>();
                if used > budget_bytes {
                    return Err(Error::Capacity(format!(
                        "exact triangle exceeds {budget_bytes} bytes at row {}; \
                         use the log-space representation",
                        n + 1
                    )));
                }
                rows.push(next);
            }
            Rows::Exact(rows)
        }
        Representation::LogSpace => {
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
            rows.push(vec![0.0]);
            let mut cache = LogWeights::new(params);
            for n in 0..n_max {
                let next = next_log_row(&mut cache, &rows[n]);
                rows.push(next);
            }
            Rows::Log(rows)
        }
    };
    Ok(Triangle { n_max, rows })
}

fn next_exact_row(params: &ModelParams, row: &[BigUint]) -> Vec<BigUint> {
    let n = row.len() - 1;
    let mut next = Vec::with_capacity(n + 2);
    for k in 0..=n + 1 {
        let mut acc = BigUint::zero();
        if k >= 1 {
            let up = step_weights(params, k as u64 - 1).up;
            if up != 0 {
                acc += &row[k - 1] * up;
            }
        }
        if k <= n {
            let level = step_weights(params, k as u64).level;
            if level != 0 {
                acc += &row[k] * level;
            }
        }
        if k < n {
            let down = step_weights(params, k as u64).down;
            if down != 0 {
                acc += &row[k + 1] * down;
            }
        }
        next.push(acc);
    }
    next
}

/// Memoized `ln` of the step weights by height.
struct LogWeights {
    params: ModelParams,
    up: Vec<f64>,
    down: Vec<f64>,
    level: Vec<f64>,
}

impl LogWeights {
    fn new(params: &ModelParams) -> Self {
        LogWeights {
            params: *params,
            up: Vec::new(),
            down: Vec::new(),
            level: Vec::new(),
        }
    }

    fn ensure(&mut self, k: usize) {
        while self.up.len() <= k {
            let w = step_weights(&self.params, self.up.len() as u64);
            self.up.push((w.up as f64).ln());
            self.down.push((w.down as f64).ln());
            self.level.push((w.level as f64).ln());
        }
    }
}

fn next_log_row(lw: &mut LogWeights, row: &[f64]) -> Vec<f64> {
    let n = row.len() - 1;
    lw.ensure(n + 1);
    (0..=n + 1)
        .map(|k| {
            let mut acc = f64::NEG_INFINITY;
            if k >= 1 {
                acc = log_add_exp(acc, lw.up[k - 1] + row[k - 1]);
            }
            if k <= n {
                acc = log_add_exp(acc, lw.level[k] + row[k]);
            }
            if k < n {
                acc = log_add_exp(acc, lw.down[k] + row[k + 1]);
            }
            acc
        })
        .collect()
}

/// Row `n` in log space without keeping the earlier rows (O(n) memory).
pub fn final_log_row(params: &ModelParams, n: usize) -> Vec<f64> {
    let mut cache = LogWeights::new(params);
    let mut row = vec![0.0];
    for _ in 0..n {
        row = next_log_row(&mut cache, &row);
    }
    row
}

/// Log-space rows `n` for each requested `n`, computed in one sweep.
pub fn log_rows_at(params: &ModelParams, ns: &[usize]) -> Vec<Vec<f64>> {
    let max = ns.iter().copied().max().unwrap_or(0);
    let mut cache = LogWeights::new(params);
    let mut row = vec![0.0];
    let mut out: Vec<Option<Vec<f64>>> = vec![None; ns.len()];
    for n in 0..=max {
        for (slot, &want) in out.iter_mut().zip(ns) {
            if want == n {
                *slot = Some(row.clone());
            }
        }
        if n < max {
            row = next_log_row(&mut cache, &row);
        }
    }
    out.into_iter().map(|r| r.expect("row filled")).collect()
}

/// Sum of path weights by terminal height, by walking every step string of
/// length `n` that stays at or above zero. Independent of the recurrence.
pub fn brute_force_oracle(params: &ModelParams, n: usize) -> Result<Vec<BigUint>> {
    if n > ORACLE_MAX_N {
        return Err(Error::Size(format!(
            "brute-force enumeration is limited to n <= {ORACLE_MAX_N}, got {n}"
        )));
    }
    let mut totals = vec![BigUint::zero(); n + 1];
    enumerate(params, n, 0, BigUint::from(1u32), &mut totals);
    Ok(totals)
}

fn enumerate(params: &ModelParams, remaining: usize, height: usize, weight: BigUint, totals: &mut [BigUint]) {
    if weight.is_zero() {
        return;
    }
    if remaining == 0 {
        totals[height] += weight;
        return;
    }
    let here = step_weights(params, height as u64);
    // Up-step leaving `height`.
    enumerate(params, remaining - 1, height + 1, &weight * here.up, totals);
    // Level step at `height`.
    enumerate(params, remaining - 1, height, &weight * here.level, totals);
    // Down-step arriving at `height - 1`.
    if height > 0 {
        let down = step_weights(params, height as u64 - 1).down;
        enumerate(params, remaining - 1, height - 1, weight * down, totals);
    }
}

/// `log P_n(x) = log sum_k w[n][k] x^k` for `x > 0`.
pub fn polynomial_eval(triangle: &Triangle, n: usize, x: f64) -> f64 {
    log_poly_from_row(&triangle.log_row(n), x)
}

pub fn log_poly_from_row(log_row: &[f64], x: f64) -> f64 {
    let lx = x.ln();
    let terms: Vec<f64> = log_row
        .iter()
        .enumerate()
        .map(|(k, &lw)| if k == 0 { lw } else { lw + k as f64 * lx })
        .collect();
    log_sum_exp_pos(&terms)
}

/// Normalized law of the terminal height `K_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightDistribution {
    pub n: usize,
    pub log_p: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// `log P_n(1)`.
    pub log_total: f64,
}

impl HeightDistribution {
    pub fn from_log_row(log_row: &[f64]) -> Self {
        let n = log_row.len() - 1;
        let log_total = log_sum_exp_pos(log_row);
        let log_p: Vec<f64> = log_row.iter().map(|&lw| lw - log_total).collect();
        let probs: Vec<f64> = log_p.iter().map(|&lp| lp.exp()).collect();

        let mean = neumaier((0..=n).map(|k| k as f64 * probs[k]));
        let fact2 = neumaier((2..=n).map(|k| (k * (k - 1)) as f64 * probs[k]));
        let mut variance = fact2 + mean - mean * mean;
        if mean > 0.0 && !(variance / mean >= 1e-6) {
            // Factorial-moment form cancels badly here; use central moments.
            variance = neumaier((0..=n).map(|k| {
                let d = k as f64 - mean;
                d * d * probs[k]
            }));
        }
        HeightDistribution {
            n,
            log_p,
            mean,
            variance: variance.max(0.0),
            log_total,
        }
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.log_p[k].exp()
    }
}

fn neumaier<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn distribution(triangle: &Triangle, n: usize) -> HeightDistribution {
    HeightDistribution::from_log_row(&triangle.log_row(n))
}
