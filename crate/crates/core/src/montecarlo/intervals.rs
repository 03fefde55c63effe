use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::gaussian::std_normal_quantile;

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("confidence level must lie in (0, 1), got {level}")))
    }
}

/// `x` with `I_x(a, b) = p`, by bisection.
fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..1100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact two-sided binomial interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: u64, n: u64, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if n == 0 || k > n {
        return Err(Error::Config(format!("need 0 <= k <= n and n >= 1, got k={k}, n={n}")));
    }
    let alpha = 1.0 - level;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        beta_quantile(0.5 * alpha, kf, nf - kf + 1.0)
    };
    let hi = if k == n {
        1.0
    } else {
        beta_quantile(1.0 - 0.5 * alpha, kf + 1.0, nf - kf)
    };
    Ok((lo, hi))
}

/// Dvoretzky–Kiefer–Wolfowitz half-width `√(ln(2/α)/(2n))` for the
/// empirical CDF of `n` samples.
pub fn dkw_band(n: u64, level: f64) -> Result<f64> {
    check_level(level)?;
    if n == 0 {
        return Err(Error::Config("DKW band needs at least one sample".into()));
    }
    Ok(((2.0 / (1.0 - level)).ln() / (2.0 * n as f64)).sqrt())
}

/// Two-sided normal critical value `z_{(1+level)/2}`.
pub fn normal_critical(level: f64) -> Result<f64> {
    check_level(level)?;
    std_normal_quantile(0.5 + 0.5 * level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clopper_pearson_reference_values() {
        // k=0: upper end 1 − (α/2)^{1/n}
        let (lo, hi) = clopper_pearson(0, 10, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-12);
        let (lo, hi) = clopper_pearson(10, 10, 0.95).unwrap();
        assert!((lo - 0.025f64.powf(0.1)).abs() < 1e-12);
        assert_eq!(hi, 1.0);
        // k=5, n=10, 95%: (0.187086, 0.812914)
        let (lo, hi) = clopper_pearson(5, 10, 0.95).unwrap();
        assert!((lo - 0.1870860).abs() < 1e-6 && (hi - 0.8129140).abs() < 1e-6);
        assert!(clopper_pearson(3, 2, 0.9).is_err());
    }

    #[test]
    fn interval_contains_estimate() {
        for &(k, n) in &[(1u64, 1_000_000u64), (312_500, 1_000_000), (999_999, 1_000_000)] {
            let (lo, hi) = clopper_pearson(k, n, 0.99).unwrap();
            let p = k as f64 / n as f64;
            assert!(lo < p && p < hi, "k={k}");
        }
    }

    #[test]
    fn dkw_values() {
        let b = dkw_band(10_000, 0.95).unwrap();
        assert!((b - (40f64.ln() / 20_000.0).sqrt()).abs() < 1e-15);
        assert!((normal_critical(0.95).unwrap() - 1.959963984540054).abs() < 1e-12);
    }
}
