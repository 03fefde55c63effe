//! Number formatting shared by the CSV writers.

/// Formats `v` with 17 significant digits in scientific notation, which
/// round-trips every finite `f64` exactly.
pub fn sig17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_examples() {
        assert_eq!(sig17(1.0), "1.0000000000000000e0");
        assert_eq!(sig17(0.0), "0.0000000000000000e0");
        assert_eq!(sig17(f64::NEG_INFINITY), "-inf");
    }

    proptest! {
        #[test]
        fn round_trips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let back: f64 = sig17(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
