use serde::{Deserialize, Serialize};

use super::engine::SimulationConfig;
use super::tail::default_tilt;
use crate::bounds::xhat;
use crate::error::{ensure_finite, Error, Result};
use crate::gaussian::std_normal_cdf;
use crate::martingales::Simulator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltPoint {
    pub u: f64,
    pub phi: f64,
    /// `P̂_λ̄(Uₙ ≤ x̂u)`.
    pub p_u: f64,
    /// `P̂_λ̄(Yₙ ≤ u)`.
    pub p_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub x: f64,
    pub lambda_bar: f64,
    pub xhat: f64,
    /// `sup_u |P̂(Uₙ ≤ x̂u) − Φ(u)|`.
    pub sup_distance: f64,
    /// `sup_u |P̂(Yₙ ≤ u) − Φ(u)|`.
    pub sup_distance_y: f64,
    /// `λ̄ = 0`, so `Uₙ ≡ 0`.
    pub degenerate: bool,
    pub points: Vec<CltPoint>,
    pub paths: u64,
    pub seed: u64,
}

/// Normal approximation of `Uₙ(λ̄) = λ̄(Sₙ − x)` and of `Yₙ(λ̄)` under the
/// conjugate measure at the default tilt for `x`.
pub fn conjugate_clt_check(cfg: &SimulationConfig, x: f64, u_grid: &[f64]) -> Result<CltReport> {
    cfg.validate()?;
    ensure_finite("x", x)?;
    if x < 0.0 {
        return Err(Error::Domain(format!("x must be >= 0, got {x}")));
    }
    if u_grid.is_empty() {
        return Err(Error::Config("u grid must not be empty".into()));
    }
    for &u in u_grid {
        ensure_finite("u", u)?;
    }
    let params = cfg.model.bernstein_params()?;
    let lb = default_tilt(&cfg.model, x)?;
    let xh = xhat(x, &params)?;
    let sim = Simulator::new(&cfg.model, lb)?;
    let m = u_grid.len();
    let chunks = cfg.map_chunks(|a, b| {
        let mut c = vec![0u64; 2 * m];
        for i in a..b {
            let t = sim.terminal(cfg.seed, i);
            let un = lb * (t.s - x);
            let y = t.s - t.b;
            for (j, &u) in u_grid.iter().enumerate() {
                c[j] += u64::from(un <= xh * u);
                c[m + j] += u64::from(y <= u);
            }
        }
        c
    })?;
    let mut counts = vec![0u64; 2 * m];
    for c in &chunks {
        for (t, k) in counts.iter_mut().zip(c) {
            *t += k;
        }
    }
    let n = cfg.paths as f64;
    let mut points = Vec::with_capacity(m);
    let (mut sup_u, mut sup_y) = (0.0f64, 0.0f64);
    for (j, &u) in u_grid.iter().enumerate() {
        let phi = std_normal_cdf(u)?;
        let p = CltPoint {
            u,
            phi,
            p_u: counts[j] as f64 / n,
            p_y: counts[m + j] as f64 / n,
        };
        sup_u = sup_u.max((p.p_u - phi).abs());
        sup_y = sup_y.max((p.p_y - phi).abs());
        points.push(p);
    }
    Ok(CltReport {
        x,
        lambda_bar: lb,
        xhat: xh,
        sup_distance: sup_u,
        sup_distance_y: sup_y,
        degenerate: lb == 0.0,
        points,
        paths: cfg.paths,
        seed: cfg.seed,
    })
}
