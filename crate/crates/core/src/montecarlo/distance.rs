use serde::{Deserialize, Serialize};

use super::engine::SimulationConfig;
use super::intervals::dkw_band;
use crate::error::{ensure_finite, Error, Result};
use crate::gaussian::std_normal_cdf;
use crate::martingales::{exact_cdf, Simulator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BEDistanceEstimate {
    /// `max_j |F̂(x_j) − Φ(x_j)|`.
    pub d_hat: f64,
    pub grid: Vec<f64>,
    /// DKW half-width; 0 for an exact law.
    pub uniform_error_band: f64,
    pub paths: u64,
    pub ecdf: Vec<f64>,
    /// Grid point attaining `d_hat`.
    pub argmax: f64,
    pub exact: bool,
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("grid must not be empty".into()));
    }
    for &x in grid {
        ensure_finite("grid point", x)?;
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("grid must be sorted ascending".into()));
    }
    Ok(())
}

/// Counts of sampled `Sₙ ≤ x_j` on a sorted grid.
pub(crate) fn cdf_counts(cfg: &SimulationConfig, grid: &[f64]) -> Result<Vec<u64>> {
    let sim = Simulator::new(&cfg.model, 0.0)?;
    let tol = cfg.model.tie_tolerance();
    let chunks = cfg.map_chunks(|a, b| {
        // bucket j: first grid point with x_j ≥ s
        let mut hist = vec![0u64; grid.len() + 1];
        for i in a..b {
            let s = sim.terminal(cfg.seed, i).s - tol;
            hist[grid.partition_point(|&g| g < s)] += 1;
        }
        hist
    })?;
    let mut hist = vec![0u64; grid.len() + 1];
    for c in &chunks {
        for (h, k) in hist.iter_mut().zip(c) {
            *h += k;
        }
    }
    let mut acc = 0;
    Ok(hist[..grid.len()]
        .iter()
        .map(|h| {
            acc += h;
            acc
        })
        .collect())
}

/// Sup-distance between `ecdf` and `Φ` over `grid`.
fn sup_distance(grid: &[f64], ecdf: &[f64]) -> Result<(f64, f64)> {
    let mut best = (0.0, grid[0]);
    for (&x, &f) in grid.iter().zip(ecdf) {
        let d = (f - std_normal_cdf(x)?).abs();
        if d > best.0 {
            best = (d, x);
        }
    }
    Ok(best)
}

/// Empirical Kolmogorov distance of `Sₙ` to the standard normal on `grid`.
pub fn estimate_be_distance(cfg: &SimulationConfig, grid: &[f64]) -> Result<BEDistanceEstimate> {
    cfg.validate()?;
    check_grid(grid)?;
    let (ecdf, band, paths, exact) = if cfg.exhaustive()? {
        (exact_cdf(&cfg.model, grid)?, 0.0, 0, true)
    } else {
        let n = cfg.paths;
        let f = cdf_counts(cfg, grid)?.iter().map(|&k| k as f64 / n as f64).collect();
        (f, dkw_band(n, cfg.confidence_level)?, n, false)
    };
    let (d_hat, argmax) = sup_distance(grid, &ecdf)?;
    Ok(BEDistanceEstimate {
        d_hat,
        grid: grid.to_vec(),
        uniform_error_band: band,
        paths,
        ecdf,
        argmax,
        exact,
    })
}

/// The same estimate from externally supplied samples.
pub fn be_distance_from_samples(samples: &[f64], grid: &[f64], level: f64) -> Result<BEDistanceEstimate> {
    check_grid(grid)?;
    let n = samples.len() as u64;
    let band = dkw_band(n, level)?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let ecdf: Vec<f64> = grid
        .iter()
        .map(|&x| sorted.partition_point(|&s| s <= x) as f64 / n as f64)
        .collect();
    let (d_hat, argmax) = sup_distance(grid, &ecdf)?;
    Ok(BEDistanceEstimate {
        d_hat,
        grid: grid.to_vec(),
        uniform_error_band: band,
        paths: n,
        ecdf,
        argmax,
        exact: false,
    })
}
