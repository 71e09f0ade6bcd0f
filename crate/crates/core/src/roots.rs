//! Safeguarded Newton iteration for monotone scalar equations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Finds the root of an increasing function `f` inside `[lo, hi]`.
///
/// `eval` returns `(f(x), f'(x))`. Newton steps that leave the current bracket
/// (or fail to shrink it fast enough) are replaced by bisection, so the
/// iteration always terminates with the bracket containing a sign change.
pub fn newton_increasing<F>(
    eval: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: Fn(f64) -> (f64, f64),
{
    let (flo, _) = eval(lo);
    let (fhi, _) = eval(hi);
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::Convergence(format!(
            "no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}"
        )));
    }
    if flo.abs() <= tol {
        return Ok(Root {
            x: lo,
            residual: flo,
            iterations: 0,
        });
    }
    if fhi.abs() <= tol {
        return Ok(Root {
            x: hi,
            residual: fhi,
            iterations: 0,
        });
    }
    let mut x = 0.5 * (lo + hi);
    let mut last_width = hi - lo;
    for iter in 1..=max_iter {
        let (fx, dfx) = eval(x);
        if !fx.is_finite() {
            return Err(Error::Convergence(format!("non-finite residual at x={x}")));
        }
        if fx.abs() <= tol {
            return Ok(Root {
                x,
                residual: fx,
                iterations: iter,
            });
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            return Ok(Root {
                x,
                residual: fx,
                iterations: iter,
            });
        }
        let newton = x - fx / dfx;
        let shrinking = width <= 0.5 * last_width;
        x = if dfx > 0.0 && newton > lo && newton < hi && (shrinking || iter % 4 != 0) {
            newton
        } else {
            0.5 * (lo + hi)
        };
        last_width = width;
    }
    Err(Error::Convergence(format!(
        "no convergence after {max_iter} iterations (bracket [{lo}, {hi}])"
    )))
}

/// Grows a bracket `[lo, hi]` around `start` for an increasing function by
/// geometric steps, stopping at `[min, max]`.
pub fn bracket_increasing<F>(f: F, start: f64, step: f64, min: f64, max: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let f0 = f(start);
    if f0 == 0.0 {
        return Ok((start, start));
    }
    let mut width = step;
    if f0 < 0.0 {
        let mut lo = start;
        loop {
            let hi = (start + width).min(max);
            if f(hi) >= 0.0 {
                return Ok((lo, hi));
            }
            if hi >= max {
                return Err(Error::Convergence(format!(
                    "root lies above the search limit {max}"
                )));
            }
            lo = hi;
            width *= 2.0;
        }
    } else {
        let mut hi = start;
        loop {
            let lo = (start - width).max(min);
            if f(lo) <= 0.0 {
                return Ok((lo, hi));
            }
            if lo <= min {
                return Err(Error::Convergence(format!(
                    "root lies below the search limit {min}"
                )));
            }
            hi = lo;
            width *= 2.0;
        }
    }
}
