use serde::{Deserialize, Serialize};

use super::engine::{SimulationConfig, WeightSums};
use crate::error::Result;
use crate::martingales::{check_tilt, conjugate_stats, lemma_checks, Simulator};

/// Sample mean of `Zₙ(λ)` under the original law, which has expectation 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZMean {
    pub lambda: f64,
    pub mean: f64,
    pub std_error: f64,
    pub paths: u64,
}

pub fn estimate_z_mean(cfg: &SimulationConfig, lambda: f64) -> Result<ZMean> {
    cfg.validate()?;
    check_tilt(&cfg.model, lambda)?;
    let sim = Simulator::new(&cfg.model, 0.0)?;
    let chunks = cfg.map_chunks(|a, b| -> Result<WeightSums> {
        let mut w = WeightSums::default();
        for i in a..b {
            let st = conjugate_stats(&sim.path(cfg.seed, i), &cfg.model, lambda)?;
            w.push(st.z);
        }
        Ok(w)
    })?;
    let mut w = WeightSums::default();
    for c in chunks {
        w.merge(&c?);
    }
    Ok(ZMean {
        lambda,
        mean: w.mean(),
        std_error: w.std_error(),
        paths: cfg.paths,
    })
}

/// First path that broke an inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub seed: u64,
    pub path_index: u64,
    pub lambda: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSweep {
    pub lambda: f64,
    pub paths: u64,
    pub violating_paths: u64,
    pub first_violation: Option<Violation>,
    /// Largest `B/bound` and `Ψ/bound` seen.
    pub max_b_ratio: f64,
    pub max_psi_ratio: f64,
    pub max_decomposition_residual: f64,
    pub max_log_z_residual: f64,
    /// Largest `|⟨S⟩ₙ − 1|`, checked against `δ²`.
    pub max_qc_deviation: f64,
    /// Sample mean and standard error of `Zₙ(λ)`.
    pub z_mean: f64,
    pub z_std_error: f64,
}

impl LemmaSweep {
    pub fn passed(&self) -> bool {
        self.violating_paths == 0
    }
}

#[derive(Default)]
struct Acc {
    bad: u64,
    first: Option<(u64, String)>,
    b: f64,
    psi: f64,
    dec: f64,
    lz: f64,
    qc: f64,
    z: WeightSums,
}

/// Runs the per-path conjugate-measure checks on every sampled path.
pub fn lemma_sweep(cfg: &SimulationConfig, lambda: f64) -> Result<LemmaSweep> {
    cfg.validate()?;
    let params = cfg.model.bernstein_params()?;
    params.require_strict()?;
    check_tilt(&cfg.model, lambda)?;
    let d2 = params.delta() * params.delta();
    let sim = Simulator::new(&cfg.model, 0.0)?;
    let chunks = cfg.map_chunks(|a, b| -> Result<Acc> {
        let mut acc = Acc::default();
        for i in a..b {
            let st = conjugate_stats(&sim.path(cfg.seed, i), &cfg.model, lambda)?;
            acc.z.push(st.z);
            let r = lemma_checks(&st, &params)?;
            acc.b = acc.b.max(ratio(r.b_upper.lhs, r.b_upper.rhs));
            acc.psi = acc.psi.max(ratio(r.psi_upper.lhs, r.psi_upper.rhs));
            acc.dec = acc.dec.max(r.decomposition_residual);
            acc.lz = acc.lz.max(r.log_z_residual);
            let dev = (st.qc_n - 1.0).abs();
            acc.qc = acc.qc.max(dev);
            let mut violations = r.violations;
            if dev > d2 + 1e-12 {
                violations.push(format!("quadratic characteristic: |<S>_n - 1| = {dev} > {d2}"));
            }
            if !violations.is_empty() {
                acc.bad += 1;
                if acc.first.is_none() {
                    acc.first = Some((i, violations.join("; ")));
                }
            }
        }
        Ok(acc)
    })?;
    let mut out = LemmaSweep {
        lambda,
        paths: cfg.paths,
        violating_paths: 0,
        first_violation: None,
        max_b_ratio: 0.0,
        max_psi_ratio: 0.0,
        max_decomposition_residual: 0.0,
        max_log_z_residual: 0.0,
        max_qc_deviation: 0.0,
        z_mean: 0.0,
        z_std_error: 0.0,
    };
    let mut z = WeightSums::default();
    for c in chunks {
        let c = c?;
        out.violating_paths += c.bad;
        if out.first_violation.is_none() {
            out.first_violation = c.first.map(|(i, message)| Violation {
                seed: cfg.seed,
                path_index: i,
                lambda,
                message,
            });
        }
        out.max_b_ratio = out.max_b_ratio.max(c.b);
        out.max_psi_ratio = out.max_psi_ratio.max(c.psi);
        out.max_decomposition_residual = out.max_decomposition_residual.max(c.dec);
        out.max_log_z_residual = out.max_log_z_residual.max(c.lz);
        out.max_qc_deviation = out.max_qc_deviation.max(c.qc);
        z.merge(&c.z);
    }
    out.z_mean = z.mean();
    out.z_std_error = z.std_error();
    Ok(out)
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingales::MartingaleModel;

    #[test]
    fn z_has_unit_mean() {
        let m = MartingaleModel::variance_switch(20, 0.5).unwrap();
        let eps = m.declared_epsilon();
        let cfg = SimulationConfig::new(m, 20_000, 8);
        let z = estimate_z_mean(&cfg, 0.5 / eps).unwrap();
        assert!((z.mean - 1.0).abs() < 4.0 * z.std_error, "{z:?}");
    }

    #[test]
    fn sweep_finds_no_violations() {
        let m = MartingaleModel::self_normalized(30, 1.0, 2.0).unwrap();
        let eps = m.declared_epsilon();
        let cfg = SimulationConfig::new(m, 2000, 1);
        let s = lemma_sweep(&cfg, 0.9 / eps).unwrap();
        assert!(s.passed(), "{:?}", s.first_violation);
        assert!(s.max_b_ratio <= 1.0 && s.max_psi_ratio <= 1.0);
        assert!((s.z_mean - 1.0).abs() < 4.0 * s.z_std_error);
        assert!(lemma_sweep(&cfg, 1.01 / eps).is_err());
    }
}
