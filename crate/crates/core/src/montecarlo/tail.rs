use serde::{Deserialize, Serialize};

use super::engine::{SimulationConfig, WeightSums};
use super::intervals::{clopper_pearson, normal_critical};
use crate::bounds::lambda_bar;
use crate::error::{ensure_finite, Error, Result};
use crate::martingales::{enumerate_outcomes, MartingaleModel, Simulator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    PlainClopperPearson,
    ImportanceSampledDelta,
    /// Exact value from enumerating the law; the interval is degenerate.
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub x: f64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub method: EstimateMethod,
    pub effective_samples: f64,
    pub seed: u64,
    pub paths: u64,
    pub chunk_size: u64,
    /// Paths with `Sₙ > x`.
    pub hits: u64,
    pub tilt: f64,
    pub std_error: f64,
}

impl TailEstimate {
    fn exact(cfg: &SimulationConfig, x: f64, p: f64, tilt: f64, atoms: u64) -> Self {
        Self {
            x,
            p_hat: p,
            ci_lo: p,
            ci_hi: p,
            method: EstimateMethod::Exhaustive,
            effective_samples: atoms as f64,
            seed: cfg.seed,
            paths: 0,
            chunk_size: cfg.chunk_size,
            hits: 0,
            tilt,
            std_error: 0.0,
        }
    }
}

/// Number of sampled terminal values strictly above each threshold.
pub(crate) fn exceedance_counts(cfg: &SimulationConfig, xs: &[f64]) -> Result<Vec<u64>> {
    let sim = Simulator::new(&cfg.model, 0.0)?;
    let tol = cfg.model.tie_tolerance();
    let chunks = cfg.map_chunks(|a, b| {
        let mut c = vec![0u64; xs.len()];
        for i in a..b {
            let s = sim.terminal(cfg.seed, i).s - tol;
            for (k, &x) in c.iter_mut().zip(xs) {
                *k += u64::from(s > x);
            }
        }
        c
    })?;
    let mut total = vec![0u64; xs.len()];
    for c in &chunks {
        for (t, k) in total.iter_mut().zip(c) {
            *t += k;
        }
    }
    Ok(total)
}

/// Plain estimates of `P(Sₙ > x)` at every `x`, sharing one set of paths.
pub fn estimate_tail_plain_many(cfg: &SimulationConfig, xs: &[f64]) -> Result<Vec<TailEstimate>> {
    cfg.validate()?;
    for &x in xs {
        ensure_finite("x", x)?;
    }
    if cfg.exhaustive()? {
        let mut p = vec![0.0; xs.len()];
        let tol = cfg.model.tie_tolerance();
        let atoms = enumerate_outcomes(&cfg.model, 0.0, |o| {
            for (pk, &x) in p.iter_mut().zip(xs) {
                if o.s > x + tol {
                    *pk += o.prob;
                }
            }
        })?;
        return Ok(xs
            .iter()
            .zip(p)
            .map(|(&x, p)| TailEstimate::exact(cfg, x, p.min(1.0), 0.0, atoms))
            .collect());
    }
    let counts = exceedance_counts(cfg, xs)?;
    let n = cfg.paths;
    xs.iter()
        .zip(counts)
        .map(|(&x, k)| {
            let (lo, hi) = clopper_pearson(k, n, cfg.confidence_level)?;
            let p = k as f64 / n as f64;
            Ok(TailEstimate {
                x,
                p_hat: p,
                ci_lo: lo,
                ci_hi: hi,
                method: EstimateMethod::PlainClopperPearson,
                effective_samples: n as f64,
                seed: cfg.seed,
                paths: n,
                chunk_size: cfg.chunk_size,
                hits: k,
                tilt: 0.0,
                std_error: (p * (1.0 - p) / n as f64).sqrt(),
            })
        })
        .collect()
}

/// Plain Monte Carlo estimate of `P(Sₙ > x)` with a Clopper–Pearson interval.
pub fn estimate_tail_plain(cfg: &SimulationConfig, x: f64) -> Result<TailEstimate> {
    Ok(estimate_tail_plain_many(cfg, &[x])?.remove(0))
}

/// Default tilt `λ̄(x)` for the model's declared `(ε, δ)`.
pub fn default_tilt(model: &MartingaleModel, x: f64) -> Result<f64> {
    lambda_bar(x, &model.bernstein_params()?)
}

/// Importance-sampled estimate of `P(Sₙ > x) = E_λ[Zₙ(λ)⁻¹ 1{Sₙ > x}]`
/// under the conjugate measure, with a delta-method interval.
pub fn estimate_tail_is(cfg: &SimulationConfig, x: f64, tilt: Option<f64>) -> Result<TailEstimate> {
    cfg.validate()?;
    ensure_finite("x", x)?;
    if x < 0.0 {
        return Err(Error::Domain(format!("x must be >= 0, got {x}")));
    }
    let lambda = match tilt {
        Some(t) => t,
        None => default_tilt(&cfg.model, x)?,
    };
    let sim = Simulator::new(&cfg.model, lambda)?;
    let xt = x + cfg.model.tie_tolerance();
    if cfg.exhaustive()? {
        let mut p = 0.0;
        let atoms = enumerate_outcomes(&cfg.model, lambda, |o| {
            if o.s > xt {
                p += o.prob * (-o.log_z(lambda)).exp();
            }
        })?;
        return Ok(TailEstimate::exact(cfg, x, p, lambda, atoms));
    }
    let chunks = cfg.map_chunks(|a, b| {
        let mut w = WeightSums::default();
        for i in a..b {
            let t = sim.terminal(cfg.seed, i);
            w.push(if t.s > xt { (t.psi - lambda * t.s).exp() } else { 0.0 });
        }
        w
    })?;
    let mut w = WeightSums::default();
    for c in &chunks {
        w.merge(c);
    }
    let p = w.mean();
    let se = w.std_error();
    let z = normal_critical(cfg.confidence_level)?;
    Ok(TailEstimate {
        x,
        p_hat: p,
        ci_lo: (p - z * se).max(0.0),
        ci_hi: p + z * se,
        method: EstimateMethod::ImportanceSampledDelta,
        effective_samples: w.kish(),
        seed: cfg.seed,
        paths: cfg.paths,
        chunk_size: cfg.chunk_size,
        hits: w.hits,
        tilt: lambda,
        std_error: se,
    })
}
