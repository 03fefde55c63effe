use serde::{Deserialize, Serialize};

use crate::bounds::{eps_log_eps, BoundConstant, EnvelopeSource, RatioBand, TailEnvelope};
use crate::error::{ensure_finite, Error, Result};
use crate::martingales::MartingaleModel;

/// `Σξᵢ/√(Σξᵢ²)`.
pub fn self_norm_statistic(sample: &[f64]) -> Result<f64> {
    let (mut s, mut q) = (0.0, 0.0);
    for &x in sample {
        ensure_finite("sample value", x)?;
        s += x;
        q += x * x;
    }
    if q == 0.0 {
        return Err(Error::Domain("self-normalized statistic of an all-zero sample".into()));
    }
    Ok(s / q.sqrt())
}

/// `max|ξᵢ|/√(Σξᵢ²)`, the smallest valid `ε` for an observed sample.
pub fn self_norm_epsilon(sample: &[f64]) -> Result<f64> {
    self_norm_statistic(sample)?;
    let q: f64 = sample.iter().map(|x| x * x).sum();
    Ok(sample.iter().fold(0.0f64, |m, x| m.max(x.abs())) / q.sqrt())
}

fn check_eps(eps: f64) -> Result<()> {
    ensure_finite("epsilon", eps)?;
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParams(format!("epsilon = {eps} is outside (0, 1/2]")));
    }
    Ok(())
}

/// `C·ε|ln ε|(1+x²)e^{-x²/2}` and the ratio band `1 ∓ C(1+|x|³)ε|ln ε|`.
pub fn self_norm_envelope(x: f64, eps: f64, c: &BoundConstant) -> Result<(TailEnvelope, RatioBand)> {
    ensure_finite("x", x)?;
    check_eps(eps)?;
    let el = eps_log_eps(eps);
    let log_value = c.c.ln() + el.ln() + (x * x).ln_1p() - 0.5 * x * x;
    let a = x.abs();
    let width = c.c * (1.0 + a * a * a) * el;
    Ok((
        TailEnvelope::from_log(x, log_value, EnvelopeSource::SelfNormalized),
        RatioBand {
            lo: (1.0 - width).max(0.0),
            hi: 1.0 + width,
            valid: a <= eps.powf(-1.0 / 3.0),
        },
    ))
}

/// Comparison bound for symmetric independent summands, piecewise in `x`:
/// `C(L₃ₙ(1+x²) + Σ P(|ξᵢ| ≥ Bₙ/(6|x|)))e^{-x²/2}` for
/// `|x| ≤ (5L₃ₙ^{1/3})^{-1}`, else `(1 + 1/(√(2π)|x|))e^{-x²/2}`.
pub fn wang_jing_bound(x: f64, l3n: f64, tail_prob_sum: f64, c: &BoundConstant) -> Result<f64> {
    ensure_finite("x", x)?;
    for (name, v) in [("L3n", l3n), ("tail_prob_sum", tail_prob_sum)] {
        ensure_finite(name, v)?;
        if v < 0.0 {
            return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
        }
    }
    let a = x.abs();
    let g = (-0.5 * x * x).exp();
    let near = l3n == 0.0 || a * 5.0 * l3n.cbrt() <= 1.0;
    Ok(if near {
        c.c * (l3n * (1.0 + x * x) + tail_prob_sum) * g
    } else {
        (1.0 + 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * a)) * g
    })
}

/// `(L₃ₙ, Σ P(|ξᵢ| ≥ Bₙ/(6|x|)))` for the built-in independent families.
pub fn wang_jing_inputs(model: &MartingaleModel, x: f64) -> Result<(f64, f64)> {
    ensure_finite("x", x)?;
    // (magnitude, probability) atoms of |ξᵢ| per step
    let atoms: Vec<Vec<(f64, f64)>> = match model {
        MartingaleModel::ScaledRademacher { weights } => weights.iter().map(|&w| vec![(w, 1.0)]).collect(),
        MartingaleModel::SelfNormalized {
            n,
            magnitude_low: a,
            magnitude_high: b,
        } => vec![vec![(*a, 0.5), (*b, 0.5)]; *n],
        _ => {
            return Err(Error::UnsupportedModel(format!(
                "{} does not have independent summands",
                model.id()
            )))
        }
    };
    let bn2: f64 = atoms.iter().flatten().map(|(m, p)| p * m * m).sum();
    let third: f64 = atoms.iter().flatten().map(|(m, p)| p * m * m * m).sum();
    let bn = bn2.sqrt();
    let l3n = third / (bn2 * bn);
    let tail = if x == 0.0 {
        0.0
    } else {
        let t = bn / (6.0 * x.abs());
        atoms.iter().flatten().filter(|(m, _)| *m >= t).map(|(_, p)| p).sum()
    };
    Ok((l3n, tail))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfNormReport {
    pub statistic: f64,
    pub eps: f64,
    pub valid: bool,
    pub envelope_at: Vec<(f64, f64)>,
    pub ratio_band_at: Vec<(f64, (f64, f64))>,
}

pub fn self_norm_report(sample: &[f64], xs: &[f64], c: &BoundConstant) -> Result<SelfNormReport> {
    let statistic = self_norm_statistic(sample)?;
    let eps = self_norm_epsilon(sample)?;
    let valid = eps <= 0.5;
    let (mut env, mut band) = (Vec::new(), Vec::new());
    if valid {
        for &x in xs {
            let (e, b) = self_norm_envelope(x, eps, c)?;
            env.push((x, e.value));
            band.push((x, (b.lo, b.hi)));
        }
    }
    Ok(SelfNormReport {
        statistic,
        eps,
        valid,
        envelope_at: env,
        ratio_band_at: band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> BoundConstant {
        BoundConstant::absolute(1.0).unwrap()
    }

    #[test]
    fn statistic_arithmetic() {
        assert!((self_norm_statistic(&[1.0, -1.0, 1.0]).unwrap() - 3f64.sqrt().recip()).abs() < 1e-15);
        assert_eq!(self_norm_statistic(&[2.5; 9]).unwrap(), 3.0);
        assert!(self_norm_statistic(&[0.0, 0.0]).is_err());
        assert!(self_norm_statistic(&[]).is_err());
    }

    #[test]
    fn envelope_values() {
        let (e, b) = self_norm_envelope(0.0, 0.1, &unit()).unwrap();
        assert!((e.value - 0.1 * 10f64.ln()).abs() < 1e-15);
        assert!(b.valid && b.hi > 1.0);
        let (l, _) = self_norm_envelope(-1.3, 0.05, &unit()).unwrap();
        let (r, _) = self_norm_envelope(1.3, 0.05, &unit()).unwrap();
        assert_eq!(l.value, r.value);
        assert!(self_norm_envelope(0.0, 0.7, &unit()).is_err());
    }

    #[test]
    fn wang_jing_branches() {
        let g = (-0.5f64).exp();
        assert_eq!(wang_jing_bound(1.0, 0.0, 0.3, &unit()).unwrap(), 0.3 * g);
        // L3n = 0.1: the near branch ends at |x| = 1/(5·0.1^{1/3}) ≈ 0.431
        let far = wang_jing_bound(1.0, 0.1, 0.0, &unit()).unwrap();
        assert!((far - (1.0 + 1.0 / (2.0 * std::f64::consts::PI).sqrt()) * g).abs() < 1e-15);
        let near = wang_jing_bound(0.4, 0.1, 0.0, &unit()).unwrap();
        assert!((near - 0.1 * 1.16 * (-0.08f64).exp()).abs() < 1e-15);
        assert_eq!(wang_jing_bound(0.0, 0.1, 0.0, &unit()).unwrap(), 0.1);
    }

    #[test]
    fn rademacher_moments() {
        let m = MartingaleModel::equal_rademacher(100).unwrap();
        let (l3n, tail) = wang_jing_inputs(&m, 1.0).unwrap();
        assert!((l3n - 0.1).abs() < 1e-14);
        assert_eq!(tail, 0.0);
        // threshold 1/(6x) = 0.1 at x = 5/3; all 100 steps have |ξ| = 0.1
        let (_, tail) = wang_jing_inputs(&m, 5.0 / 3.0 + 1e-9).unwrap();
        assert_eq!(tail, 100.0);
    }

    #[test]
    fn report_scale_invariant() {
        let s = [0.3, -1.2, 0.8, 0.1, -0.4, 0.9, -0.2, 0.5, 1.1, -0.7];
        let a = self_norm_report(&s, &[0.0, 1.0], &unit()).unwrap();
        assert!(!a.valid);
        let s4: Vec<f64> = s.iter().map(|x| 4.0 * x).collect();
        assert_eq!(self_norm_statistic(&s4).unwrap(), a.statistic);
        let s7: Vec<f64> = s.iter().map(|x| 7.0 * x).collect();
        let b = self_norm_statistic(&s7).unwrap();
        assert!((b - a.statistic).abs() <= 4.0 * f64::EPSILON * a.statistic.abs());
    }
}
