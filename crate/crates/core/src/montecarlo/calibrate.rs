use serde::{Deserialize, Serialize};

use super::distance::{cdf_counts, check_grid};
use super::engine::SimulationConfig;
use super::intervals::clopper_pearson;
use super::tail::estimate_tail_plain_many;
use crate::bounds::{
    corollary_envelope, eps_log_eps, nonuniform_be_envelope, strengthened_tail_envelope, uniform_be_bound,
    BernsteinParams, BoundConstant,
};
use crate::error::{Error, Result};
use crate::gaussian::std_normal_cdf;
use crate::martingales::{enumerate_outcomes, exact_cdf, MartingaleModel, MAX_EXHAUSTIVE_OUTCOMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationEnvelope {
    /// Nonuniform Berry–Esseen envelope.
    Thm21,
    /// Strengthened tail bound on `P(Sₙ > x)`.
    Thm22,
    /// Envelope under the moment condition alone.
    Cor21,
    /// Uniform rate `C(ε|ln ε| + δ)`.
    Brmti,
    /// `C·ε|ln ε|(1+x²)e^{-x²/2}` for self-normalized sums.
    Selfnorm,
}

impl CalibrationEnvelope {
    pub fn name(self) -> &'static str {
        match self {
            Self::Thm21 => "thm21",
            Self::Thm22 => "thm22",
            Self::Cor21 => "cor21",
            Self::Brmti => "brmti",
            Self::Selfnorm => "selfnorm",
        }
    }
}

impl std::str::FromStr for CalibrationEnvelope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "thm21" => Self::Thm21,
            "thm22" => Self::Thm22,
            "cor21" => Self::Cor21,
            "brmti" => Self::Brmti,
            "selfnorm" => Self::Selfnorm,
            _ => return Err(Error::Config(format!("unknown calibration envelope '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub x: f64,
    /// Upper confidence end of the quantity the envelope must dominate.
    pub empirical: f64,
    /// Envelope value at `C = 0`.
    pub base: f64,
    /// Envelope growth per unit of `C`.
    pub slope: f64,
    pub needed_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub envelope: CalibrationEnvelope,
    pub model_id: String,
    pub c_hat: f64,
    /// Grid point that determines `c_hat`.
    pub binding_x: f64,
    pub points: Vec<CalibrationPoint>,
    pub paths: u64,
    pub seed: u64,
    pub exact: bool,
}

/// Smallest `C ≥ 0` with `base + C·slope ≥ empirical` at every point;
/// returns `(c, index of the binding point)`.
pub fn calibrate_from_values(empirical: &[f64], base: &[f64], slope: &[f64]) -> Result<(f64, usize)> {
    if empirical.len() != base.len() || base.len() != slope.len() || empirical.is_empty() {
        return Err(Error::Config("calibration inputs must be nonempty and of equal length".into()));
    }
    let mut best = (0.0, 0);
    for (i, ((&e, &b), &s)) in empirical.iter().zip(base).zip(slope).enumerate() {
        let need = needed(e, b, s);
        if need > best.0 {
            best = (need, i);
        }
    }
    Ok(best)
}

fn needed(empirical: f64, base: f64, slope: f64) -> f64 {
    let gap = empirical - base;
    if gap <= 0.0 {
        0.0
    } else if slope > 0.0 {
        gap / slope
    } else {
        f64::INFINITY
    }
}

/// `E|⟨S⟩ₙ − 1|`, exact for every built-in family it is known for.
fn qc_l1(model: &MartingaleModel) -> Result<f64> {
    match model {
        MartingaleModel::VarianceSwitch { .. } => {
            if model.outcome_count() > MAX_EXHAUSTIVE_OUTCOMES {
                return Err(Error::Unavailable(format!(
                    "E|<S>_n - 1| is not available in closed form for {}",
                    model.id()
                )));
            }
            let mut acc = 0.0;
            enumerate_outcomes(model, 0.0, |o| {
                let q: f64 = o.differences.iter().map(|d| d * d).sum();
                acc += o.prob * (q - 1.0).abs();
            })?;
            Ok(acc)
        }
        _ => Ok(0.0),
    }
}

/// Base and slope of an envelope that is affine in `C`.
fn affine(env: CalibrationEnvelope, x: f64, params: &BernsteinParams, l1: f64) -> Result<(f64, f64)> {
    let one = BoundConstant::absolute(1.0)?;
    Ok(match env {
        CalibrationEnvelope::Thm21 => (0.0, nonuniform_be_envelope(x, params, &one)?.value),
        CalibrationEnvelope::Thm22 => {
            let zero = BoundConstant::absolute(0.0)?;
            let base = strengthened_tail_envelope(x, params, &zero)?.value;
            (base, strengthened_tail_envelope(x, params, &one)?.value - base)
        }
        CalibrationEnvelope::Cor21 => (0.0, corollary_envelope(x, params.epsilon(), l1, &one)?.value),
        CalibrationEnvelope::Brmti => (0.0, uniform_be_bound(params, &one)?),
        CalibrationEnvelope::Selfnorm => (0.0, eps_log_eps(params.epsilon()) * (1.0 + x * x) * (-0.5 * x * x).exp()),
    })
}

/// Empirically smallest constant for which `envelope` dominates the model.
///
/// For `thm22` the dominated quantity is the upper Clopper–Pearson end of
/// `P(Sₙ > x)`; for the others it is the larger distance from `Φ(x)` to
/// either end of the interval for `P(Sₙ ≤ x)`. Exact laws use exact values.
pub fn calibrate_constant(
    cfg: &SimulationConfig,
    envelope: CalibrationEnvelope,
    x_grid: &[f64],
) -> Result<CalibrationReport> {
    cfg.validate()?;
    check_grid(x_grid)?;
    let params = cfg.model.bernstein_params()?;
    let l1 = if envelope == CalibrationEnvelope::Cor21 {
        qc_l1(&cfg.model)?
    } else {
        0.0
    };
    let exact = cfg.exhaustive()?;
    let empirical: Vec<f64> = if envelope == CalibrationEnvelope::Thm22 {
        estimate_tail_plain_many(cfg, x_grid)?.iter().map(|e| e.ci_hi).collect()
    } else if exact {
        exact_cdf(&cfg.model, x_grid)?
            .iter()
            .zip(x_grid)
            .map(|(&f, &x)| Ok((f - std_normal_cdf(x)?).abs()))
            .collect::<Result<_>>()?
    } else {
        let n = cfg.paths;
        cdf_counts(cfg, x_grid)?
            .iter()
            .zip(x_grid)
            .map(|(&k, &x)| {
                let (lo, hi) = clopper_pearson(k, n, cfg.confidence_level)?;
                let phi = std_normal_cdf(x)?;
                Ok((hi - phi).abs().max((lo - phi).abs()))
            })
            .collect::<Result<_>>()?
    };
    let mut points = Vec::with_capacity(x_grid.len());
    for (&x, &e) in x_grid.iter().zip(&empirical) {
        let (base, slope) = affine(envelope, x, &params, l1)?;
        points.push(CalibrationPoint {
            x,
            empirical: e,
            base,
            slope,
            needed_c: needed(e, base, slope),
        });
    }
    let (c_hat, i) = calibrate_from_values(
        &empirical,
        &points.iter().map(|p| p.base).collect::<Vec<_>>(),
        &points.iter().map(|p| p.slope).collect::<Vec<_>>(),
    )?;
    Ok(CalibrationReport {
        envelope,
        model_id: cfg.model.id(),
        c_hat,
        binding_x: x_grid[i],
        points,
        paths: if exact { 0 } else { cfg.paths },
        seed: cfg.seed,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_calibration() {
        assert_eq!(calibrate_from_values(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 2.0]).unwrap().0, 0.0);
        let (c, i) = calibrate_from_values(&[0.2, 0.3], &[0.0, 0.0], &[1.0, 2.0]).unwrap();
        assert_eq!((c, i), (0.2, 0));
        let (h, _) = calibrate_from_values(&[0.1, 0.15], &[0.0, 0.0], &[1.0, 2.0]).unwrap();
        assert_eq!(h, c / 2.0);
        assert!(calibrate_from_values(&[], &[], &[]).is_err());
        assert_eq!(calibrate_from_values(&[1.0], &[0.5], &[0.0]).unwrap().0, f64::INFINITY);
    }

    #[test]
    fn exact_lattice_calibration() {
        let m = MartingaleModel::equal_rademacher(16).unwrap();
        let cfg = SimulationConfig::new(m, 1, 0);
        let grid = [0.0, 0.5, 1.0, 1.5, 2.0];
        for env in [
            CalibrationEnvelope::Thm21,
            CalibrationEnvelope::Thm22,
            CalibrationEnvelope::Cor21,
            CalibrationEnvelope::Brmti,
        ] {
            let r = calibrate_constant(&cfg, env, &grid).unwrap();
            assert!(r.exact && r.c_hat.is_finite(), "{}", env.name());
            for p in &r.points {
                assert!(p.base + r.c_hat * p.slope >= p.empirical * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn cor21_needs_exact_characteristic() {
        let small = MartingaleModel::variance_switch(12, 0.5).unwrap();
        let r = calibrate_constant(&SimulationConfig::new(small, 1, 0), CalibrationEnvelope::Cor21, &[0.0]).unwrap();
        assert!(r.c_hat > 0.0);
        let big = MartingaleModel::variance_switch(400, 0.5).unwrap();
        let e = calibrate_constant(&SimulationConfig::new(big, 10, 0), CalibrationEnvelope::Cor21, &[0.0]);
        assert!(matches!(e, Err(Error::Unavailable(_))));
    }

    #[test]
    fn names_round_trip() {
        for e in [
            CalibrationEnvelope::Thm21,
            CalibrationEnvelope::Thm22,
            CalibrationEnvelope::Cor21,
            CalibrationEnvelope::Brmti,
            CalibrationEnvelope::Selfnorm,
        ] {
            assert_eq!(e.name().parse::<CalibrationEnvelope>().unwrap(), e);
        }
    }
}
