//! Special functions: signed log-space arithmetic, log-gamma, the principal
//! Lambert W branch and Hermite–Kampé de Fériet polynomials.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};

/// A real number stored as `sign * exp(ln_abs)`. Zero is `sign == 0` with
/// `ln_abs == -inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub ln_abs: f64,
    pub sign: i8,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        ln_abs: f64::NEG_INFINITY,
        sign: 0,
    };

    pub const ONE: SignedLog = SignedLog {
        ln_abs: 0.0,
        sign: 1,
    };

    pub fn positive(ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog { ln_abs, sign: 1 }
        }
    }

    pub fn negative(ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog { ln_abs, sign: -1 }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v > 0.0 {
            Self::positive(v.ln())
        } else if v < 0.0 {
            Self::negative((-v).ln())
        } else {
            Self::ZERO
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => s as f64 * self.ln_abs.exp(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }
}

/// `log(exp(a) + exp(b))` for log-magnitudes; `-inf` acts as zero.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Log-sum-exp of nonnegative terms given as logs. Empty input or all `-inf`
/// returns `-inf`.
pub fn log_sum_exp_pos(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

/// Max-shifted sum of signed log-space terms.
pub fn log_sum_exp(terms: &[SignedLog]) -> SignedLog {
    let max = terms
        .iter()
        .filter(|t| t.sign != 0)
        .map(|t| t.ln_abs)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return SignedLog::ZERO;
    }
    // Neumaier summation: cancellations here are the whole point of the type.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms.iter().filter(|t| t.sign != 0) {
        let v = t.sign as f64 * (t.ln_abs - max).exp();
        let s = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - s) + v;
        } else {
            comp += (v - s) + sum;
        }
        sum = s;
    }
    let total = sum + comp;
    if total == 0.0 {
        SignedLog::ZERO
    } else if total > 0.0 {
        SignedLog::positive(max + total.ln())
    } else {
        SignedLog::negative(max + (-total).ln())
    }
}

const STIRLING_SHIFT: f64 = 15.0;

/// Natural log of the gamma function for `x > 0`.
///
/// Stirling's series at `x >= 15`; smaller arguments are shifted up with the
/// recurrence `Gamma(x+1) = x Gamma(x)`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    let mut shift_log = 0.0;
    let mut y = x;
    if y < STIRLING_SHIFT {
        let mut prod = 1.0f64;
        while y < STIRLING_SHIFT {
            prod *= y;
            y += 1.0;
        }
        shift_log = prod.ln();
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    // Bernoulli terms B_{2k} / (2k(2k-1) y^{2k-1}), k = 1..6
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2 * (1.0 / 1188.0 + inv2 * (-691.0 / 360360.0))))));
    let stirling = (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + series;
    Ok(stirling - shift_log)
}

/// `log n!` for integer `n`.
pub fn log_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    log_gamma(n as f64 + 1.0).expect("positive argument")
}

/// Principal branch `W0` of the Lambert W function on `[-1/e, inf)`.
pub fn lambert_w0(z: f64) -> Result<f64> {
    let branch_point = -1.0 / E;
    if z.is_nan() || z < branch_point - 4.0 * f64::EPSILON {
        return Err(Error::Domain(format!(
            "lambert_w0 requires z >= -1/e, got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if z <= branch_point {
        return Ok(-1.0);
    }

    let mut w = initial_guess(z);
    for _ in 0..32 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - 0.5 * (w + 2.0) * f / wp1;
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(z: f64) -> f64 {
    if z < -0.25 {
        // Expansion about the branch point.
        let p = (2.0 * (E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if z.abs() < 0.3 {
        z * (1.0 - z * (1.0 - z * (1.5 - z * 8.0 / 3.0)))
    } else if z > 3.0 {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    } else {
        // Winitzki's approximation, good to a few percent on (0.3, 3].
        let l = z.ln_1p();
        l * (1.0 - l.ln_1p() / (2.0 + l))
    }
}

/// Hermite–Kampé de Fériet polynomial `H_n(X, Y)`, defined through
/// `sum_n H_n t^n / n! = exp(X t + Y t^2 / 2)`.
///
/// Evaluated with the three-term recurrence `H_{n+1} = X H_n + n Y H_{n-1}`
/// on rescaled floats; the result is returned in signed log form.
pub fn hermite_kdf(x: f64, y: f64, n: usize) -> SignedLog {
    hermite_kdf_sequence(x, y, n)[n]
}

/// `H_0 .. H_n` at `(X, Y)`.
pub fn hermite_kdf_sequence(x: f64, y: f64, n: usize) -> Vec<SignedLog> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(SignedLog::ONE);
    if n == 0 {
        return out;
    }
    // Values are h * exp(scale).
    let mut scale = 0.0f64;
    let mut prev = 1.0f64;
    let mut cur = x;
    out.push(SignedLog::from_f64(cur));
    for m in 1..n {
        let next = x * cur + m as f64 * y * prev;
        prev = cur;
        cur = next;
        let mag = cur.abs().max(prev.abs());
        if mag > 1e150 || (mag < 1e-150 && mag > 0.0) {
            let lm = mag.ln();
            prev /= mag;
            cur /= mag;
            scale += lm;
        }
        let mut v = SignedLog::from_f64(cur);
        if v.sign != 0 {
            v.ln_abs += scale;
        }
        out.push(v);
    }
    out
}
