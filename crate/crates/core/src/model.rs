//! Step-weight parameters, drift classification and step weights.
//!
//! A path of the model takes up-, level- and down-steps whose weights depend
//! affinely on the height `k` the step touches:
//!
//! ```text
//! alpha_k = a k + alpha0   (up-step leaving k)
//! beta_k  = b k + beta0    (down-step arriving at k)
//! gamma_k = c k + gamma0   (level step at k)
//! ```
//!
//! The generating polynomials are driven by the quadratic `Q(x) = A x^2 + B x + C`
//! with `A = a`, `B = c`, `C = b`; its discriminant selects one of five regimes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six nonnegative step-weight coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub alpha0: u64,
    pub beta0: u64,
    pub gamma0: u64,
}

impl ModelParams {
    pub const fn new(a: u64, b: u64, c: u64, alpha0: u64, beta0: u64, gamma0: u64) -> Self {
        ModelParams {
            a,
            b,
            c,
            alpha0,
            beta0,
            gamma0,
        }
    }

    /// The parameters used for the reference figures: `A=1, B=6, C=5`,
    /// `alpha0=8, beta0=5, gamma0=1`.
    pub const fn reference() -> Self {
        ModelParams::new(1, 5, 6, 8, 5, 1)
    }

    /// Unweighted Motzkin paths (all step weights 1).
    pub const fn classical() -> Self {
        ModelParams::new(0, 0, 0, 1, 1, 1)
    }

    /// True when no up-step can ever be taken; the triangle collapses to the
    /// point mass at height zero.
    pub fn is_degenerate(&self) -> bool {
        self.alpha0 == 0 && self.a == 0
    }

    pub fn is_balanced(&self) -> bool {
        is_balanced(self)
    }

    pub fn drift(&self) -> DriftCoefficients {
        DriftCoefficients::from_params(self)
    }

    pub fn step_weights(&self, k: u64) -> StepWeights {
        step_weights(self, k)
    }

    pub fn classify(&self) -> Regime {
        classify(self)
    }

    /// Parses either the flat `a=1 b=5 c=6 alpha0=8 beta0=5 gamma0=1` form
    /// or the equivalent JSON object.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.starts_with('{') {
            return serde_json::from_str(trimmed)
                .map_err(|e| Error::InvalidParams(format!("bad JSON parameters: {e}")));
        }
        let mut slots: [Option<u64>; 6] = [None; 6];
        for token in trimmed.split(|ch: char| ch.is_whitespace() || ch == ',') {
            if token.is_empty() || token.starts_with('#') {
                continue;
            }
            let (key, value) = token.split_once('=').ok_or_else(|| {
                Error::InvalidParams(format!("expected key=value, found `{token}`"))
            })?;
            let idx = match key.trim() {
                "a" => 0,
                "b" => 1,
                "c" => 2,
                "alpha0" => 3,
                "beta0" => 4,
                "gamma0" => 5,
                other => {
                    return Err(Error::InvalidParams(format!(
                        "unknown parameter `{other}` (expected a, b, c, alpha0, beta0, gamma0)"
                    )))
                }
            };
            let parsed: u64 = value.trim().parse().map_err(|_| {
                Error::InvalidParams(format!(
                    "parameter `{key}` must be a nonnegative integer, found `{value}`"
                ))
            })?;
            if slots[idx].replace(parsed).is_some() {
                return Err(Error::InvalidParams(format!("parameter `{key}` given twice")));
            }
        }
        const NAMES: [&str; 6] = ["a", "b", "c", "alpha0", "beta0", "gamma0"];
        let mut values = [0u64; 6];
        for (i, slot) in slots.iter().enumerate() {
            values[i] = slot
                .ok_or_else(|| Error::InvalidParams(format!("missing parameter `{}`", NAMES[i])))?;
        }
        Ok(ModelParams::new(
            values[0], values[1], values[2], values[3], values[4], values[5],
        ))
    }
}

impl FromStr for ModelParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelParams::parse(s)
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a={} b={} c={} alpha0={} beta0={} gamma0={}",
            self.a, self.b, self.c, self.alpha0, self.beta0, self.gamma0
        )
    }
}

/// Coefficients of the drift polynomial `Q(x) = A x^2 + B x + C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DriftCoefficients {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    /// `B^2 - 4AC`, exact.
    pub discriminant: i64,
}

impl DriftCoefficients {
    pub fn from_params(p: &ModelParams) -> Self {
        let a = p.a as i64;
        let b = p.c as i64;
        let c = p.b as i64;
        DriftCoefficients {
            a,
            b,
            c,
            discriminant: b * b - 4 * a * c,
        }
    }

    pub fn q(&self, x: f64) -> f64 {
        (self.a as f64 * x + self.b as f64) * x + self.c as f64
    }

    pub fn q_prime(&self, x: f64) -> f64 {
        2.0 * self.a as f64 * x + self.b as f64
    }
}

/// Exponent `nu = alpha0 / A` kept as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Nu {
    pub num: u64,
    pub den: u64,
}

impl Nu {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "nu denominator must be positive");
        let g = gcd(num, den);
        Nu {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn as_integer(&self) -> Option<u64> {
        (self.den == 1).then_some(self.num)
    }

    pub fn is_one(&self) -> bool {
        self.num == 1 && self.den == 1
    }
}

fn gcd(mut x: u64, mut y: u64) -> u64 {
    while y != 0 {
        let t = x % y;
        x = y;
        y = t;
    }
    x.max(1)
}

/// Constants shared by the three quadratic regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticConstants {
    /// Leading drift coefficient `A > 0`.
    pub a: f64,
    pub nu: Nu,
    /// Exponential rate of the local representation near the singularity.
    pub c0: f64,
}

/// Drift regime with its regime-specific constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `A = B = 0`.
    Constant,
    /// `A = 0`, `B > 0`.
    Linear { b: f64 },
    /// `Delta > 0`, roots `r1 < r2`.
    TwoRealRoots {
        r1: f64,
        r2: f64,
        k: QuadraticConstants,
    },
    /// `Delta = 0`, root `r = -B/(2A)`.
    DoubleRoot { r: f64, k: QuadraticConstants },
    /// `Delta < 0`, roots `p +- i q`.
    ComplexRoots {
        p: f64,
        q: f64,
        k: QuadraticConstants,
    },
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Constant => "constant",
            Regime::Linear { .. } => "linear",
            Regime::TwoRealRoots { .. } => "two-real-roots",
            Regime::DoubleRoot { .. } => "double-root",
            Regime::ComplexRoots { .. } => "complex-roots",
        }
    }

    pub fn is_quadratic(&self) -> bool {
        self.quadratic().is_some()
    }

    pub fn quadratic(&self) -> Option<&QuadraticConstants> {
        match self {
            Regime::TwoRealRoots { k, .. }
            | Regime::DoubleRoot { k, .. }
            | Regime::ComplexRoots { k, .. } => Some(k),
            _ => None,
        }
    }

    pub fn nu(&self) -> Option<f64> {
        self.quadratic().map(|k| k.nu.value())
    }

    pub fn c0(&self) -> Option<f64> {
        self.quadratic().map(|k| k.c0)
    }
}

/// Classifies the drift regime. The branch is chosen from the exact integer
/// discriminant; only the stored constants are floating point.
pub fn classify(params: &ModelParams) -> Regime {
    let d = params.drift();
    if d.a == 0 {
        return if d.b == 0 {
            Regime::Constant
        } else {
            Regime::Linear { b: d.b as f64 }
        };
    }
    let a = d.a as f64;
    let b = d.b as f64;
    let c = d.c as f64;
    let alpha0 = params.alpha0 as f64;
    let gamma0 = params.gamma0 as f64;
    let nu = Nu::new(params.alpha0, params.a);
    match d.discriminant.signum() {
        1 => {
            // B >= 0, so the cancellation-free pairing is r1 = s/A, r2 = C/s.
            let s = -0.5 * (b + (d.discriminant as f64).sqrt());
            let r1 = s / a;
            let r2 = c / s;
            Regime::TwoRealRoots {
                r1,
                r2,
                k: QuadraticConstants {
                    a,
                    nu,
                    c0: alpha0 * r1 + gamma0,
                },
            }
        }
        0 => {
            let r = -b / (2.0 * a);
            Regime::DoubleRoot {
                r,
                k: QuadraticConstants {
                    a,
                    nu,
                    c0: alpha0 * r + gamma0,
                },
            }
        }
        _ => {
            let p = -b / (2.0 * a);
            let q = ((-d.discriminant) as f64).sqrt() / (2.0 * a);
            Regime::ComplexRoots {
                p,
                q,
                k: QuadraticConstants {
                    a,
                    nu,
                    c0: alpha0 * p + gamma0,
                },
            }
        }
    }
}

/// Balanced means `beta0 = C` (= `b`): the generating-function PDE then has no
/// nonlocal term.
pub fn is_balanced(params: &ModelParams) -> bool {
    params.beta0 == params.b
}

/// Weights `(alpha_k, beta_k, gamma_k)` at height `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepWeights {
    pub up: u64,
    pub down: u64,
    pub level: u64,
}

pub fn step_weights(params: &ModelParams, k: u64) -> StepWeights {
    StepWeights {
        up: params.a * k + params.alpha0,
        down: params.b * k + params.beta0,
        level: params.c * k + params.gamma0,
    }
}

/// A spread of parameter sets covering every regime, balanced and not.
/// Used by tests and the CLI self-checks.
pub fn corpus() -> Vec<ModelParams> {
    vec![
        // constant drift
        ModelParams::new(0, 0, 0, 1, 1, 1),
        ModelParams::new(0, 1, 0, 1, 1, 1),
        ModelParams::new(0, 2, 0, 2, 2, 0),
        ModelParams::new(0, 0, 0, 2, 0, 3),
        // linear drift
        ModelParams::new(0, 1, 1, 1, 1, 1),
        ModelParams::new(0, 0, 2, 1, 0, 1),
        ModelParams::new(0, 2, 1, 3, 0, 2),
        ModelParams::new(0, 3, 2, 1, 3, 0),
        // two real roots
        ModelParams::new(1, 5, 6, 8, 5, 1),
        ModelParams::new(1, 0, 1, 1, 0, 0),
        ModelParams::new(2, 1, 3, 1, 1, 2),
        ModelParams::new(1, 2, 4, 3, 0, 1),
        // double root
        ModelParams::new(1, 1, 2, 1, 1, 0),
        ModelParams::new(1, 4, 4, 2, 4, 1),
        ModelParams::new(2, 2, 4, 3, 1, 1),
        ModelParams::new(1, 0, 0, 1, 0, 1),
        // complex roots
        ModelParams::new(1, 1, 0, 1, 1, 0),
        ModelParams::new(1, 2, 1, 2, 2, 1),
        ModelParams::new(2, 3, 1, 1, 3, 2),
        ModelParams::new(1, 3, 2, 1, 0, 1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_parameters_have_two_real_roots() {
        let p = ModelParams::reference();
        match classify(&p) {
            Regime::TwoRealRoots { r1, r2, k } => {
                assert!((r1 + 5.0).abs() < 1e-14);
                assert!((r2 + 1.0).abs() < 1e-14);
                assert_eq!(k.nu.as_integer(), Some(8));
                assert!((k.c0 + 39.0).abs() < 1e-12);
            }
            other => panic!("unexpected regime {other:?}"),
        }
        assert!(p.is_balanced());
    }

    #[test]
    fn classical_is_constant_and_unbalanced() {
        let p = ModelParams::classical();
        assert_eq!(classify(&p), Regime::Constant);
        assert!(!is_balanced(&p));
        for k in [0, 1, 7, 1000] {
            assert_eq!(
                step_weights(&p, k),
                StepWeights {
                    up: 1,
                    down: 1,
                    level: 1
                }
            );
        }
    }

    #[test]
    fn double_root_example() {
        let p = ModelParams::new(1, 1, 2, 1, 1, 0);
        assert!(p.is_balanced());
        match classify(&p) {
            Regime::DoubleRoot { r, k } => {
                assert_eq!(r, -1.0);
                assert!(k.nu.is_one());
                assert_eq!(k.c0, -1.0);
            }
            other => panic!("unexpected regime {other:?}"),
        }
    }

    #[test]
    fn step_weights_at_height_three() {
        let w = step_weights(&ModelParams::reference(), 3);
        assert_eq!((w.up, w.down, w.level), (11, 20, 19));
        let w0 = step_weights(&ModelParams::reference(), 0);
        assert_eq!((w0.up, w0.down, w0.level), (8, 5, 1));
    }

    #[test]
    fn complex_roots_constants() {
        // a=1, b=1, c=0: Q(x) = x^2 + 1
        match classify(&ModelParams::new(1, 1, 0, 1, 1, 0)) {
            Regime::ComplexRoots { p, q, .. } => {
                assert_eq!(p, 0.0);
                assert!((q - 1.0).abs() < 1e-15);
            }
            other => panic!("unexpected regime {other:?}"),
        }
    }

    #[test]
    fn nu_is_reduced() {
        let nu = Nu::new(6, 4);
        assert_eq!((nu.num, nu.den), (3, 2));
        assert_eq!(nu.as_integer(), None);
        assert_eq!(Nu::new(8, 1).as_integer(), Some(8));
        assert_eq!(Nu::new(0, 3).value(), 0.0);
    }

    #[test]
    fn parse_flat_and_json() {
        let flat: ModelParams = "a=1 b=5 c=6 alpha0=8 beta0=5 gamma0=1".parse().unwrap();
        assert_eq!(flat, ModelParams::reference());
        let json = ModelParams::parse(
            r#"{"a":1,"b":5,"c":6,"alpha0":8,"beta0":5,"gamma0":1}"#,
        )
        .unwrap();
        assert_eq!(json, flat);
        assert_eq!(ModelParams::parse(&flat.to_string()).unwrap(), flat);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(ModelParams::parse("a=1 b=5").is_err());
        assert!(ModelParams::parse("a=1 b=5 c=6 alpha0=8 beta0=5 gamma0=-1").is_err());
        assert!(ModelParams::parse("a=1 a=2 b=5 c=6 alpha0=8 beta0=5 gamma0=1").is_err());
        assert!(ModelParams::parse("a=1 b=5 c=6 alpha0=8 beta0=5 delta=1").is_err());
        assert!(ModelParams::parse("{\"a\": 1}").is_err());
    }

    #[test]
    fn corpus_spans_all_regimes() {
        let mut seen = std::collections::BTreeSet::new();
        let mut balanced = 0;
        for p in corpus() {
            seen.insert(classify(&p).name());
            if p.is_balanced() {
                balanced += 1;
            }
        }
        assert_eq!(seen.len(), 5);
        assert!(balanced >= 10 && balanced < corpus().len());
    }

    #[test]
    fn degenerate_flag() {
        assert!(ModelParams::new(0, 1, 1, 0, 1, 1).is_degenerate());
        assert!(!ModelParams::new(1, 1, 1, 0, 1, 1).is_degenerate());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = ModelParams> {
            (0u64..5, 0u64..6, 0u64..8, 0u64..9, 0u64..6, 0u64..6)
                .prop_map(|(a, b, c, al, be, ga)| ModelParams::new(a, b, c, al, be, ga))
        }

        proptest! {
            #[test]
            fn roots_satisfy_vieta(p in params()) {
                let d = p.drift();
                match classify(&p) {
                    Regime::TwoRealRoots { r1, r2, .. } => {
                        prop_assert!(d.discriminant > 0);
                        prop_assert!(r1 < r2);
                        prop_assert!(r2 <= 0.0);
                        let sum = -(d.b as f64) / d.a as f64;
                        let prod = d.c as f64 / d.a as f64;
                        prop_assert!((r1 + r2 - sum).abs() <= 1e-12 * sum.abs().max(1.0));
                        prop_assert!((r1 * r2 - prod).abs() <= 1e-12 * prod.abs().max(1.0));
                    }
                    Regime::DoubleRoot { r, .. } => {
                        prop_assert_eq!(d.discriminant, 0);
                        prop_assert_eq!(r, -(d.b as f64) / (2.0 * d.a as f64));
                    }
                    Regime::ComplexRoots { p: re, q, .. } => {
                        prop_assert!(d.discriminant < 0);
                        prop_assert!(q > 0.0);
                        prop_assert_eq!(re, -(d.b as f64) / (2.0 * d.a as f64));
                    }
                    Regime::Linear { .. } => prop_assert!(d.a == 0 && d.b > 0),
                    Regime::Constant => prop_assert!(d.a == 0 && d.b == 0),
                }
            }

            #[test]
            fn step_weights_are_affine(p in params(), k in 0u64..1000) {
                let w0 = step_weights(&p, k);
                let w1 = step_weights(&p, k + 1);
                prop_assert_eq!(w1.up - w0.up, p.a);
                prop_assert_eq!(w1.down - w0.down, p.b);
                prop_assert_eq!(w1.level - w0.level, p.c);
            }
        }
    }
}
