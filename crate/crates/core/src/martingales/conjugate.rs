use serde::{Deserialize, Serialize};

use super::model::{MartingaleModel, StepLaw, TiltedLaw};
use super::path::{check_tilt, PathSample};
use crate::bounds::BernsteinParams;
use crate::error::{Error, Result};

/// Objects of the conjugate measure along one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePathStats {
    pub lambda: f64,
    /// `Zₙ(λ) = exp(λSₙ − Ψₙ(λ))`.
    pub z: f64,
    pub log_z: f64,
    /// `Ψₙ(λ) = Σ ln E[e^{λξᵢ}|F_{i-1}]`.
    pub psi: f64,
    /// `Bₙ(λ) = Σ bᵢ(λ)`.
    pub b_drift: f64,
    /// `Yₙ(λ) = Sₙ − Bₙ(λ)`.
    pub y: f64,
    pub per_step_b: Vec<f64>,
    pub per_step_psi: Vec<f64>,
    pub s_n: f64,
    pub qc_n: f64,
    /// Steps are `±scale` with predictable scales and `⟨S⟩ₙ = 1`.
    pub half_cosh_applies: bool,
}

/// Conditional law of each step of `path` under `model`.
pub fn path_laws(path: &PathSample, model: &MartingaleModel) -> Result<Vec<StepLaw>> {
    if path.len() != model.len() {
        return Err(Error::InvalidModel(format!(
            "path has {} steps, model {} expects {}",
            path.len(),
            model.id(),
            model.len()
        )));
    }
    Ok(match model {
        MartingaleModel::ScaledRademacher { .. } | MartingaleModel::Regression { .. } => {
            model.fixed_laws().unwrap()
        }
        MartingaleModel::VarianceSwitch { .. } => {
            let (high, low) = model.switch_laws().unwrap();
            path.partial_sums[..path.len()]
                .iter()
                .map(|&s| if s >= 0.0 { high } else { low })
                .collect()
        }
        // magnitudes are known given the environment; only signs are random
        MartingaleModel::SelfNormalized { .. } => {
            path.differences.iter().map(|d| StepLaw::rademacher(d.abs())).collect()
        }
    })
}

pub fn conjugate_stats(path: &PathSample, model: &MartingaleModel, lambda: f64) -> Result<ConjugatePathStats> {
    check_tilt(model, lambda)?;
    let laws = path_laws(path, model)?;
    let mut per_step_b = Vec::with_capacity(laws.len());
    let mut per_step_psi = Vec::with_capacity(laws.len());
    // built-in families use at most a handful of distinct laws per path
    let mut seen: Vec<(StepLaw, TiltedLaw)> = Vec::with_capacity(4);
    for law in &laws {
        let t = match seen.iter().find(|(l, _)| l == law) {
            Some(&(_, t)) => t,
            None => {
                let t = law.tilted(lambda);
                if seen.len() < 8 {
                    seen.push((*law, t));
                }
                t
            }
        };
        per_step_b.push(t.mean);
        per_step_psi.push(t.psi);
    }
    let psi: f64 = per_step_psi.iter().sum();
    let b_drift: f64 = per_step_b.iter().sum();
    let s_n = path.terminal();
    let log_z = lambda * s_n - psi;
    Ok(ConjugatePathStats {
        lambda,
        z: log_z.exp(),
        log_z,
        psi,
        b_drift,
        y: s_n - b_drift,
        per_step_b,
        per_step_psi,
        s_n,
        qc_n: path.qc_terminal(),
        half_cosh_applies: model.half_cosh_applies(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn le(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs + 1e-12 * rhs.abs() + 1e-15,
        }
    }
}

/// The explicit inequalities of the conjugate-measure argument on one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lambda: f64,
    /// `Bₙ(λ) ≤ (λ − λ²ε/2)(1+δ²)/(1−λε)²`.
    pub b_upper: InequalityCheck,
    /// `Ψₙ(λ) ≤ λ²(1+δ²)/(2(1−λε))`.
    pub psi_upper: InequalityCheck,
    /// `max_k Ψₖ(λ) ≤ λ²/2`, for fair-sign normalized models only.
    pub half_cosh: Option<InequalityCheck>,
    /// `Bₙ(λ) − (λ − λδ² − λ²ε)`: the lower bound with its constant set
    /// to 1; reported, never asserted.
    pub b_lower_slack: f64,
    /// `|Yₙ + Bₙ − Sₙ|`, at most a few ulps.
    pub decomposition_residual: f64,
    /// `|ln Z − (λSₙ − Ψₙ)|`.
    pub log_z_residual: f64,
    pub violations: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn lemma_checks(stats: &ConjugatePathStats, params: &BernsteinParams) -> Result<LemmaReport> {
    params.require_strict()?;
    let (l, e) = (stats.lambda, params.epsilon());
    if l * e >= 1.0 {
        return Err(Error::Domain(format!("tilt {l} is not below 1/epsilon = {}", 1.0 / e)));
    }
    let v2 = params.variance_cap();
    let d2 = params.delta() * params.delta();
    let b_upper = InequalityCheck::le(stats.b_drift, (l - 0.5 * l * l * e) * v2 / (1.0 - l * e).powi(2));
    let psi_upper = InequalityCheck::le(stats.psi, l * l * v2 / (2.0 * (1.0 - l * e)));
    let half_cosh = stats.half_cosh_applies.then(|| {
        let mut acc = 0.0;
        let mut worst: f64 = 0.0;
        for p in &stats.per_step_psi {
            acc += p;
            worst = worst.max(acc);
        }
        InequalityCheck::le(worst, 0.5 * l * l)
    });
    let decomposition_residual = (stats.y + stats.b_drift - stats.s_n).abs();
    let log_z_residual = (stats.log_z - (l * stats.s_n - stats.psi)).abs();
    let ulps = |a: f64, b: f64, c: f64| 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(c.abs());
    let mut violations = Vec::new();
    if !b_upper.holds {
        violations.push(format!("drift bound: B = {} > {}", b_upper.lhs, b_upper.rhs));
    }
    if !psi_upper.holds {
        violations.push(format!("log-MGF bound: Psi = {} > {}", psi_upper.lhs, psi_upper.rhs));
    }
    if let Some(h) = half_cosh {
        if !h.holds {
            violations.push(format!("half-cosh bound: Psi_k = {} > {}", h.lhs, h.rhs));
        }
    }
    if decomposition_residual > ulps(stats.s_n, stats.y, stats.b_drift) {
        violations.push(format!("decomposition residual {decomposition_residual:e}"));
    }
    if log_z_residual > ulps(stats.log_z, l * stats.s_n, stats.psi) {
        violations.push(format!("log Z residual {log_z_residual:e}"));
    }
    Ok(LemmaReport {
        lambda: l,
        b_upper,
        psi_upper,
        half_cosh,
        b_lower_slack: stats.b_drift - (l - l * d2 - l * l * e),
        decomposition_residual,
        log_z_residual,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingales::path::{simulate_path, Simulator};

    #[test]
    fn quarter_model_at_unit_tilt() {
        let m = MartingaleModel::scaled_rademacher(vec![0.5; 4]).unwrap();
        let p = simulate_path(&m, 0).unwrap();
        let st = conjugate_stats(&p, &m, 1.0).unwrap();
        assert!((st.psi - 0.4804580278331101).abs() < 1e-15);
        assert!((st.b_drift - 0.9242343145200195).abs() < 1e-15);
        let r = lemma_checks(&st, &m.bernstein_params().unwrap()).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!((r.b_upper.rhs - 3.0).abs() < 1e-15);
        assert!((r.psi_upper.rhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_tilt_is_degenerate() {
        let m = MartingaleModel::variance_switch(16, 0.4).unwrap();
        let p = simulate_path(&m, 3).unwrap();
        let st = conjugate_stats(&p, &m, 0.0).unwrap();
        assert_eq!((st.z, st.psi, st.b_drift, st.y), (1.0, 0.0, 0.0, p.terminal()));
        let r = lemma_checks(&st, &m.bernstein_params().unwrap()).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn recorded_and_recomputed_agree() {
        let m = MartingaleModel::self_normalized(30, 1.0, 2.0).unwrap();
        let sim = Simulator::new(&m, 1.5).unwrap();
        let rec = sim.record(8, 2);
        let p = sim.path(8, 2);
        let st = conjugate_stats(&p, &m, 1.5).unwrap();
        assert_eq!(st.per_step_psi, rec.psi);
        assert_eq!(st.per_step_b, rec.mean);
    }
}
