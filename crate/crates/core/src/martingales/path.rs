use std::io::Write;

use serde::{Deserialize, Serialize};

use super::model::{MartingaleModel, StepLaw, TiltedLaw};
use crate::error::{ensure_finite, Error, Result};
use crate::numfmt::sig17;
use crate::rng::{PathRng, StreamDomain};

/// One realized difference sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub differences: Vec<f64>,
    /// `S₀..Sₙ`, with `S₀ = 0`.
    pub partial_sums: Vec<f64>,
    /// `⟨S⟩₀..⟨S⟩ₙ` under the untilted law.
    pub qc: Vec<f64>,
    /// `[S]ₙ = Σξᵢ²`.
    pub sq_bracket: f64,
    pub seed: u64,
    pub path_index: u64,
    pub model_id: String,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.differences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.differences.is_empty()
    }

    pub fn terminal(&self) -> f64 {
        *self.partial_sums.last().unwrap_or(&0.0)
    }

    pub fn qc_terminal(&self) -> f64 {
        *self.qc.last().unwrap_or(&0.0)
    }

    /// Builds the running sums from differences and conditional variances.
    pub fn from_steps(
        differences: Vec<f64>,
        variances: &[f64],
        seed: u64,
        path_index: u64,
        model_id: String,
    ) -> Self {
        let mut rec = Recorder::with_capacity(differences.len());
        for (&xi, &v) in differences.iter().zip(variances) {
            rec.step(xi, v, 0.0, 0.0);
        }
        rec.finish(seed, path_index, model_id)
    }

    /// Dumps `step,xi,s,qc` rows; row 0 is the origin.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["step", "xi", "s", "qc"])?;
        for k in 0..self.partial_sums.len() {
            let xi = if k == 0 { 0.0 } else { self.differences[k - 1] };
            w.write_record([
                k.to_string(),
                sig17(xi),
                sig17(self.partial_sums[k]),
                sig17(self.qc[k]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Receives each simulated step: the difference, its conditional variance,
/// and its conditional log-MGF and tilted mean at the simulator's `λ`.
pub(crate) trait StepSink {
    fn step(&mut self, xi: f64, variance: f64, psi: f64, mean: f64);
}

/// Terminal values `Sₙ`, `Ψₙ(λ)` and `Bₙ(λ)` of a path.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Terminal {
    pub s: f64,
    pub psi: f64,
    pub b: f64,
}

impl StepSink for Terminal {
    #[inline(always)]
    fn step(&mut self, xi: f64, _variance: f64, psi: f64, mean: f64) {
        self.s += xi;
        self.psi += psi;
        self.b += mean;
    }
}

/// Full per-step record.
pub(crate) struct Recorder {
    pub differences: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub qc: Vec<f64>,
    pub psi: Vec<f64>,
    pub mean: Vec<f64>,
    sq: f64,
}

impl Recorder {
    pub fn with_capacity(n: usize) -> Self {
        let mut partial_sums = Vec::with_capacity(n + 1);
        partial_sums.push(0.0);
        let mut qc = Vec::with_capacity(n + 1);
        qc.push(0.0);
        Self {
            differences: Vec::with_capacity(n),
            partial_sums,
            qc,
            psi: Vec::with_capacity(n),
            mean: Vec::with_capacity(n),
            sq: 0.0,
        }
    }

    pub fn finish(self, seed: u64, path_index: u64, model_id: String) -> PathSample {
        PathSample {
            differences: self.differences,
            partial_sums: self.partial_sums,
            qc: self.qc,
            sq_bracket: self.sq,
            seed,
            path_index,
            model_id,
        }
    }
}

impl StepSink for Recorder {
    fn step(&mut self, xi: f64, variance: f64, psi: f64, mean: f64) {
        let s = self.partial_sums.last().unwrap() + xi;
        let q = self.qc.last().unwrap() + variance;
        self.differences.push(xi);
        self.partial_sums.push(s);
        self.qc.push(q);
        self.psi.push(psi);
        self.mean.push(mean);
        self.sq += xi * xi;
    }
}

enum Plan {
    Fixed(Vec<TiltedLaw>),
    Switch { n: usize, high: TiltedLaw, low: TiltedLaw },
    SelfNorm { n: usize, a: f64, b: f64 },
}

/// Path generator for one model at a fixed tilt `λ` (`λ = 0` is the
/// untilted law). Paths are addressed by `(seed, path_index)`.
pub struct Simulator {
    model: MartingaleModel,
    model_id: String,
    lambda: f64,
    plan: Plan,
    /// Untilted fair-sign steps draw single bits instead of uniforms.
    bits: bool,
}

/// Rejects tilts outside `[0, 1/ε)`.
pub(crate) fn check_tilt(model: &MartingaleModel, lambda: f64) -> Result<()> {
    ensure_finite("lambda", lambda)?;
    if lambda < 0.0 {
        return Err(Error::Domain(format!("tilt must be >= 0, got {lambda}")));
    }
    let eps = model.declared_epsilon();
    if lambda * eps >= 1.0 {
        return Err(Error::Domain(format!(
            "tilt {lambda} is not below 1/epsilon = {}",
            1.0 / eps
        )));
    }
    Ok(())
}

impl Simulator {
    pub fn new(model: &MartingaleModel, lambda: f64) -> Result<Self> {
        model.validate()?;
        check_tilt(model, lambda)?;
        let plan = match model {
            MartingaleModel::ScaledRademacher { .. } | MartingaleModel::Regression { .. } => {
                Plan::Fixed(model.fixed_laws().unwrap().iter().map(|l| l.tilted(lambda)).collect())
            }
            MartingaleModel::VarianceSwitch { n, .. } => {
                let (high, low) = model.switch_laws().unwrap();
                Plan::Switch {
                    n: *n,
                    high: high.tilted(lambda),
                    low: low.tilted(lambda),
                }
            }
            MartingaleModel::SelfNormalized {
                n,
                magnitude_low,
                magnitude_high,
            } => Plan::SelfNorm {
                n: *n,
                a: *magnitude_low,
                b: *magnitude_high,
            },
        };
        let bits = lambda == 0.0
            && match &plan {
                Plan::Fixed(laws) => laws.iter().all(|t| t.q_nonzero == 1.0),
                _ => true,
            };
        Ok(Self {
            model: model.clone(),
            model_id: model.id(),
            lambda,
            plan,
            bits,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn model(&self) -> &MartingaleModel {
        &self.model
    }

    #[inline(always)]
    fn sign(&self, rng: &mut PathRng, t: &TiltedLaw) -> f64 {
        if self.bits {
            if rng.next_bit() {
                t.scale
            } else {
                -t.scale
            }
        } else {
            t.draw(rng.next_uniform())
        }
    }

    #[inline(always)]
    pub(crate) fn drive<K: StepSink>(&self, seed: u64, path_index: u64, sink: &mut K) {
        let mut rng = PathRng::new(seed, StreamDomain::Steps, path_index);
        match &self.plan {
            Plan::Fixed(laws) => {
                for t in laws {
                    let xi = self.sign(&mut rng, t);
                    sink.step(xi, t.variance, t.psi, t.mean);
                }
            }
            Plan::Switch { n, high, low } => {
                let mut s = 0.0;
                for _ in 0..*n {
                    let t = if s >= 0.0 { high } else { low };
                    let xi = self.sign(&mut rng, t);
                    s += xi;
                    sink.step(xi, t.variance, t.psi, t.mean);
                }
            }
            Plan::SelfNorm { n, a, b } => {
                if a == b {
                    let t = StepLaw::rademacher(1.0 / (*n as f64).sqrt()).tilted(self.lambda);
                    for _ in 0..*n {
                        let xi = self.sign(&mut rng, &t);
                        sink.step(xi, t.variance, t.psi, t.mean);
                    }
                    return;
                }
                // magnitudes are F₀-measurable: count them once to get the
                // norm, then replay the same environment stream
                let mut env = PathRng::new(seed, StreamDomain::Environment, path_index);
                let highs = (0..*n).filter(|_| env.next_bit()).count() as f64;
                let norm = (highs * b * b + (*n as f64 - highs) * a * a).sqrt();
                let th = StepLaw::rademacher(b / norm).tilted(self.lambda);
                let tl = StepLaw::rademacher(a / norm).tilted(self.lambda);
                let mut env = PathRng::new(seed, StreamDomain::Environment, path_index);
                for _ in 0..*n {
                    let t = if env.next_bit() { &th } else { &tl };
                    let xi = self.sign(&mut rng, t);
                    sink.step(xi, t.variance, t.psi, t.mean);
                }
            }
        }
    }

    /// `Sₙ`, `Ψₙ(λ)` and `Bₙ(λ)`; `ln Zₙ(λ) = λSₙ − Ψₙ(λ)`.
    #[inline]
    pub fn terminal(&self, seed: u64, path_index: u64) -> Terminal {
        let mut t = Terminal::default();
        self.drive(seed, path_index, &mut t);
        t
    }

    pub fn path(&self, seed: u64, path_index: u64) -> PathSample {
        self.record(seed, path_index).finish(seed, path_index, self.model_id.clone())
    }

    pub(crate) fn record(&self, seed: u64, path_index: u64) -> Recorder {
        let mut rec = Recorder::with_capacity(self.model.len());
        self.drive(seed, path_index, &mut rec);
        rec
    }
}

/// Path 0 of the untilted law for `seed`.
pub fn simulate_path(model: &MartingaleModel, seed: u64) -> Result<PathSample> {
    Ok(Simulator::new(model, 0.0)?.path(seed, 0))
}

/// Path 0 under the conjugate measure `P_λ`.
pub fn simulate_tilted_path(model: &MartingaleModel, lambda: f64, seed: u64) -> Result<PathSample> {
    Ok(Simulator::new(model, lambda)?.path(seed, 0))
}
