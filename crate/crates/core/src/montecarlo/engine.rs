use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::martingales::{MartingaleModel, MAX_EXHAUSTIVE_OUTCOMES};

/// Whether to sample paths or enumerate the exact law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Enumerate when the law has at most 2²⁰ atoms, sample otherwise.
    #[default]
    Auto,
    Sample,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub model: MartingaleModel,
    pub paths: u64,
    pub seed: u64,
    pub chunk_size: u64,
    pub confidence_level: f64,
    /// Worker threads; 0 uses the available parallelism.
    pub workers: usize,
    pub mode: SamplingMode,
}

pub const DEFAULT_CHUNK_SIZE: u64 = 4096;
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

impl SimulationConfig {
    pub fn new(model: MartingaleModel, paths: u64, seed: u64) -> Self {
        Self {
            model,
            paths,
            seed,
            chunk_size: DEFAULT_CHUNK_SIZE,
            confidence_level: DEFAULT_CONFIDENCE,
            workers: 0,
            mode: SamplingMode::Auto,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    pub fn with_mode(mut self, mode: SamplingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_confidence(mut self, level: f64) -> Self {
        self.confidence_level = level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.paths == 0 {
            return Err(Error::Config("paths must be >= 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::Config("chunk_size must be >= 1".into()));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::Config(format!(
                "confidence level must lie in (0, 1), got {}",
                self.confidence_level
            )));
        }
        Ok(())
    }

    /// Whether this configuration resolves to exact enumeration.
    pub fn exhaustive(&self) -> Result<bool> {
        let small = self.model.outcome_count() <= MAX_EXHAUSTIVE_OUTCOMES;
        match self.mode {
            SamplingMode::Sample => Ok(false),
            SamplingMode::Auto => Ok(small),
            SamplingMode::Exhaustive if small => Ok(true),
            SamplingMode::Exhaustive => Err(Error::Config(format!(
                "{} has too many outcomes to enumerate",
                self.model.id()
            ))),
        }
    }

    pub(crate) fn chunk_count(&self) -> u64 {
        self.paths.div_ceil(self.chunk_size)
    }

    /// Evaluates `f(first, end)` on every chunk of path indices and returns
    /// the results in chunk order, whatever the worker count.
    pub(crate) fn map_chunks<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, u64) -> T + Sync,
    {
        self.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        let (cs, paths) = (self.chunk_size, self.paths);
        Ok(pool.install(|| {
            (0..self.chunk_count())
                .into_par_iter()
                .map(|c| f(c * cs, ((c + 1) * cs).min(paths)))
                .collect()
        }))
    }
}

/// Running sums of a weighted indicator, combined in chunk order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct WeightSums {
    pub n: u64,
    pub hits: u64,
    pub sum: f64,
    pub sum_sq: f64,
    pub max: f64,
}

impl WeightSums {
    #[inline]
    pub fn push(&mut self, w: f64) {
        self.n += 1;
        if w != 0.0 {
            self.hits += 1;
            self.sum += w;
            self.sum_sq += w * w;
            self.max = self.max.max(w);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.n += other.n;
        self.hits += other.hits;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.max = self.max.max(other.max);
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.mean();
        let var = ((self.sum_sq / n - m * m) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }

    /// Kish effective sample size of the nonzero weights.
    pub fn kish(&self) -> f64 {
        if self.sum_sq == 0.0 {
            0.0
        } else {
            self.sum * self.sum / self.sum_sq
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_all_paths_in_order() {
        let m = MartingaleModel::equal_rademacher(4).unwrap();
        let cfg = SimulationConfig::new(m, 10, 1).with_chunk_size(3).with_workers(3);
        let got = cfg.map_chunks(|a, b| (a, b)).unwrap();
        assert_eq!(got, vec![(0, 3), (3, 6), (6, 9), (9, 10)]);
    }

    #[test]
    fn config_validation() {
        let m = MartingaleModel::equal_rademacher(4).unwrap();
        assert!(SimulationConfig::new(m.clone(), 0, 1).validate().is_err());
        assert!(SimulationConfig::new(m.clone(), 5, 1).with_chunk_size(0).validate().is_err());
        assert!(SimulationConfig::new(m.clone(), 5, 1).with_confidence(1.0).validate().is_err());
        assert!(SimulationConfig::new(m.clone(), 5, 1).exhaustive().unwrap());
        let big = MartingaleModel::equal_rademacher(100).unwrap();
        assert!(SimulationConfig::new(big, 5, 1)
            .with_mode(SamplingMode::Exhaustive)
            .exhaustive()
            .is_err());
    }
}
