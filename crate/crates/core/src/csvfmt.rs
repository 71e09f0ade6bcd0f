//! Number formatting shared by every CSV writer.

/// 17 significant digits, so a printed value round-trips to the same `f64`.
/// Infinities and NaN print as `inf`, `-inf` and `nan`.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for &v in &[0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt17(f64::NEG_INFINITY), "-inf");
    }
}
