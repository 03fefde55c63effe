//! Standard normal distribution primitives.
//!
//! The survival function is built on W. J. Cody's rational Chebyshev
//! approximations of `erfc` and the scaled `erfcx(y) = exp(y²) erfc(y)`.
//! For `x ≥ 0` the tail is assembled as
//!
//! ```text
//! 1 - Φ(x) = ½ · erfcx(x/√2) · exp(-x²/2)
//! ```
//!
//! where `x²` is split into a rounded head and an exact `fma` tail so that the
//! exponent carries no rounding error. The log-domain twin
//! `ln(½ erfcx(x/√2)) - x²/2` never underflows, which keeps tail comparisons
//! meaningful up to `x = 40` and beyond.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

const ONE_OVER_SQRT_PI: f64 = 0.564_189_583_547_756_286_9;
const SQRT_2PI: f64 = 2.506_628_274_631_000_502_4;
const CODY_SMALL: f64 = 0.468_75;

// erf on |y| <= 0.46875
const A: [f64; 5] = [
    3.161_123_743_870_565_6,
    113.864_154_151_050_156,
    377.485_237_685_302_021,
    3_209.377_589_138_469_47,
    0.185_777_706_184_603_153,
];
const B: [f64; 4] = [
    23.601_290_952_344_120_9,
    244.024_637_934_444_173,
    1_282.616_526_077_372_28,
    2_844.236_833_439_170_62,
];
// erfcx on 0.46875 < y <= 4
const C: [f64; 9] = [
    0.564_188_496_988_670_089,
    8.883_149_794_388_375_94,
    66.119_190_637_141_629_5,
    298.635_138_197_400_131,
    881.952_221_241_769_09,
    1_712.047_612_634_070_58,
    2_051.078_377_826_071_47,
    1_230.339_354_797_997_25,
    2.153_115_354_744_038_46e-8,
];
const D: [f64; 8] = [
    15.744_926_110_709_834_7,
    117.693_950_891_312_499,
    537.181_101_862_009_858,
    1_621.389_574_566_690_19,
    3_290.799_235_733_459_63,
    4_362.619_090_143_247_16,
    3_439.367_674_143_721_64,
    1_230.339_354_803_749_42,
];
// erfcx on y > 4, in the variable z = 1/y²
const P: [f64; 6] = [
    0.305_326_634_961_232_344,
    0.360_344_899_949_804_439,
    0.125_781_726_111_229_246,
    0.016_083_785_148_742_276_6,
    6.587_491_615_298_378_03e-4,
    0.016_315_387_137_302_097_8,
];
const Q: [f64; 5] = [
    2.568_520_192_289_822_42,
    1.872_952_849_923_460_47,
    0.527_905_102_951_428_412,
    0.060_518_341_312_441_319_1,
    0.002_335_204_976_268_691_85,
];

#[inline]
fn erf_small_ratio(z: f64) -> f64 {
    ((((A[4] * z + A[0]) * z + A[1]) * z + A[2]) * z + A[3])
        / ((((z + B[0]) * z + B[1]) * z + B[2]) * z + B[3])
}

#[inline]
fn erfcx_mid(y: f64) -> f64 {
    let mut num = C[8] * y;
    let mut den = y;
    for i in 0..7 {
        num = (num + C[i]) * y;
        den = (den + D[i]) * y;
    }
    (num + C[7]) / (den + D[7])
}

#[inline]
fn erfcx_large(y: f64) -> f64 {
    let z = 1.0 / (y * y);
    let mut num = P[5] * z;
    let mut den = z;
    for i in 0..4 {
        num = (num + P[i]) * z;
        den = (den + Q[i]) * z;
    }
    let r = z * (num + P[4]) / (den + Q[4]);
    (ONE_OVER_SQRT_PI - r) / y
}

/// `erfcx(y)` for `y > 0.46875`.
#[inline]
fn erfcx_above_small(y: f64) -> f64 {
    if y <= 4.0 {
        erfcx_mid(y)
    } else {
        erfcx_large(y)
    }
}

/// `exp(-x²/2)` with the square split into head and exact remainder.
#[inline]
fn exp_neg_half_square(x: f64) -> f64 {
    let head = x * x;
    let tail = x.mul_add(x, -head);
    (-0.5 * head).exp() * (-0.5 * tail).exp()
}

/// `1 - Φ(x)` for `x ≥ 0`.
fn upper_tail_nonneg(x: f64) -> f64 {
    let y = x * std::f64::consts::FRAC_1_SQRT_2;
    if y <= CODY_SMALL {
        0.5 - 0.5 * y * erf_small_ratio(y * y)
    } else {
        0.5 * erfcx_above_small(y) * exp_neg_half_square(x)
    }
}

/// `ln(1 - Φ(x))` for `x ≥ 0`; finite for every finite `x`.
fn log_upper_tail_nonneg(x: f64) -> f64 {
    let y = x * std::f64::consts::FRAC_1_SQRT_2;
    if y <= CODY_SMALL {
        upper_tail_nonneg(x).ln()
    } else {
        let head = x * x;
        let tail = x.mul_add(x, -head);
        (0.5 * erfcx_above_small(y)).ln() - 0.5 * head - 0.5 * tail
    }
}

/// Complementary error function, accurate to a few ulps in relative terms.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let y = x.abs();
    if y <= CODY_SMALL {
        return 1.0 - x * erf_small_ratio(y * y);
    }
    let head = y * y;
    let rest = y.mul_add(y, -head);
    let tail = erfcx_above_small(y) * (-head).exp() * (-rest).exp();
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    exp_neg_half_square(x) / SQRT_2PI
}

/// Φ(x).
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(if x >= 0.0 {
        1.0 - upper_tail_nonneg(x)
    } else {
        upper_tail_nonneg(-x)
    })
}

/// 1 − Φ(x).
pub fn std_normal_sf(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(if x >= 0.0 {
        upper_tail_nonneg(x)
    } else {
        1.0 - upper_tail_nonneg(-x)
    })
}

/// ln(1 − Φ(x)), finite for all finite x.
pub fn std_normal_log_sf(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(if x >= 0.0 {
        log_upper_tail_nonneg(x)
    } else {
        (-upper_tail_nonneg(-x)).ln_1p()
    })
}

/// Φ together with its survival function and log-survival twin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalEval {
    pub x: f64,
    pub cdf: f64,
    pub sf: f64,
    pub log_sf: f64,
}

impl NormalEval {
    pub fn at(x: f64) -> Result<Self> {
        Ok(Self {
            x,
            cdf: std_normal_cdf(x)?,
            sf: std_normal_sf(x)?,
            log_sf: std_normal_log_sf(x)?,
        })
    }
}

/// Inverse of Φ by bracketed bisection on the survival function.
///
/// Converges to the closest representable root; used where a quantile is
/// needed at modest precision (confidence levels, test thresholds).
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile level must lie in (0,1), got {p}")));
    }
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = if mid >= 0.0 {
            // compare tails to keep precision for p near 1
            upper_tail_nonneg(mid) > 1.0 - p
        } else {
            upper_tail_nonneg(-mid) < p
        };
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Two-sided Mills-ratio sandwich: returns `(1/(√(2π)(1+x)), 1/(√π(1+x)))`,
/// which bracket `(1 − Φ(x))·exp(x²/2)` for every `x ≥ 0`.
pub fn mills_sandwich(x: f64) -> Result<(f64, f64)> {
    ensure_finite("x", x)?;
    if x < 0.0 {
        return Err(Error::Domain(format!("Mills sandwich requires x >= 0, got {x}")));
    }
    Ok((1.0 / (SQRT_2PI * (1.0 + x)), ONE_OVER_SQRT_PI / (1.0 + x)))
}

/// Log-domain view of the sandwich: `(ln lower, ln((1−Φ(x))e^{x²/2}), ln upper)`.
pub fn log_mills_sandwich(x: f64) -> Result<(f64, f64, f64)> {
    let (lo, hi) = mills_sandwich(x)?;
    let scaled = std_normal_log_sf(x)? + 0.5 * x * x;
    Ok((lo.ln(), scaled, hi.ln()))
}
