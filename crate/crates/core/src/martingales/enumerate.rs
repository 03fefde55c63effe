use super::model::{MartingaleModel, StepLaw, TiltedLaw};
use super::path::check_tilt;
use crate::error::{Error, Result};

/// Largest outcome count enumerated exhaustively.
pub const MAX_EXHAUSTIVE_OUTCOMES: u64 = 1 << 20;

/// One atom of the path law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<'a> {
    /// Probability under the tilted measure `P_λ`.
    pub prob: f64,
    pub s: f64,
    /// `Ψₙ(λ)` along this outcome.
    pub psi: f64,
    pub differences: &'a [f64],
}

impl Outcome<'_> {
    /// `ln Zₙ(λ) = λSₙ − Ψₙ(λ)`.
    pub fn log_z(&self, lambda: f64) -> f64 {
        lambda * self.s - self.psi
    }
}

fn branches(t: &TiltedLaw) -> [(f64, f64); 3] {
    [
        (t.scale, t.q_plus),
        (-t.scale, t.q_nonzero - t.q_plus),
        (0.0, 1.0 - t.q_nonzero),
    ]
}

fn arity(law: &StepLaw) -> usize {
    if law.is_rademacher() {
        2
    } else {
        3
    }
}

struct Walker<'v, F> {
    buf: Vec<f64>,
    visit: &'v mut F,
    visited: u64,
}

impl<F: FnMut(&Outcome)> Walker<'_, F> {
    fn leaf(&mut self, prob: f64, s: f64, psi: f64) {
        (self.visit)(&Outcome {
            prob,
            s,
            psi,
            differences: &self.buf,
        });
        self.visited += 1;
    }

    fn fixed(&mut self, laws: &[(TiltedLaw, usize)], k: usize, prob: f64, s: f64, psi: f64) {
        if k == laws.len() {
            return self.leaf(prob, s, psi);
        }
        let (t, arity) = &laws[k];
        for &(xi, q) in &branches(t)[..*arity] {
            self.buf.push(xi);
            self.fixed(laws, k + 1, prob * q, s + xi, psi + t.psi);
            self.buf.pop();
        }
    }

    fn switch(&mut self, n: usize, high: &TiltedLaw, low: &TiltedLaw, prob: f64, s: f64, psi: f64) {
        if self.buf.len() == n {
            return self.leaf(prob, s, psi);
        }
        let t = if s >= 0.0 { high } else { low };
        for &(xi, q) in &branches(t)[..2] {
            self.buf.push(xi);
            self.switch(n, high, low, prob * q, s + xi, psi + t.psi);
            self.buf.pop();
        }
    }
}

/// Visits every atom of the law of `(ξ₁..ξₙ)` under `P_λ`, in a fixed order.
/// Returns the number of atoms visited.
pub fn enumerate_outcomes<F: FnMut(&Outcome)>(
    model: &MartingaleModel,
    lambda: f64,
    mut visit: F,
) -> Result<u64> {
    model.validate()?;
    check_tilt(model, lambda)?;
    let count = model.outcome_count();
    if count > MAX_EXHAUSTIVE_OUTCOMES {
        return Err(Error::Config(format!(
            "{} has {count} outcomes, above the exhaustive limit {MAX_EXHAUSTIVE_OUTCOMES}",
            model.id()
        )));
    }
    let mut w = Walker {
        buf: Vec::with_capacity(model.len()),
        visit: &mut visit,
        visited: 0,
    };
    match model {
        MartingaleModel::ScaledRademacher { .. } | MartingaleModel::Regression { .. } => {
            let laws: Vec<_> = model
                .fixed_laws()
                .unwrap()
                .iter()
                .map(|l| (l.tilted(lambda), arity(l)))
                .collect();
            w.fixed(&laws, 0, 1.0, 0.0, 0.0);
        }
        MartingaleModel::VarianceSwitch { n, .. } => {
            let (high, low) = model.switch_laws().unwrap();
            w.switch(*n, &high.tilted(lambda), &low.tilted(lambda), 1.0, 0.0, 0.0);
        }
        MartingaleModel::SelfNormalized {
            n,
            magnitude_low: a,
            magnitude_high: b,
        } => {
            let n = *n;
            let patterns: u64 = if a == b { 1 } else { 1 << n };
            let weight = 1.0 / patterns as f64;
            for pattern in 0..patterns {
                let mags: Vec<f64> = (0..n).map(|i| if pattern >> i & 1 == 1 { *b } else { *a }).collect();
                let norm = mags.iter().map(|m| m * m).sum::<f64>().sqrt();
                let laws: Vec<_> = mags
                    .iter()
                    .map(|m| (StepLaw::rademacher(m / norm).tilted(lambda), 2))
                    .collect();
                w.fixed(&laws, 0, weight, 0.0, 0.0);
            }
        }
    }
    Ok(w.visited)
}

/// Exact `P(Sₙ > x)` by enumeration.
pub fn exact_tail(model: &MartingaleModel, x: f64) -> Result<f64> {
    let mut p = 0.0;
    let x = x + model.tie_tolerance();
    enumerate_outcomes(model, 0.0, |o| {
        if o.s > x {
            p += o.prob;
        }
    })?;
    Ok(p)
}

/// Exact `P(Sₙ ≤ x)` at each grid point by enumeration.
pub fn exact_cdf(model: &MartingaleModel, grid: &[f64]) -> Result<Vec<f64>> {
    let mut f = vec![0.0; grid.len()];
    let tol = model.tie_tolerance();
    enumerate_outcomes(model, 0.0, |o| {
        for (fx, &x) in f.iter_mut().zip(grid) {
            if o.s <= x + tol {
                *fx += o.prob;
            }
        }
    })?;
    Ok(f)
}
