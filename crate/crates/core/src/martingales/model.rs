use serde::{Deserialize, Serialize};

use crate::bounds::BernsteinParams;
use crate::error::{Error, Result};

/// A symmetric step law: `±scale` with probability `p_nonzero/2` each and
/// `0` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLaw {
    pub scale: f64,
    pub p_nonzero: f64,
}

/// A [`StepLaw`] under the exponentially tilted measure at some `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedLaw {
    pub scale: f64,
    /// Conditional variance under the untilted law.
    pub variance: f64,
    /// `ln E[e^{λξ}]`.
    pub psi: f64,
    /// Tilted mean `E_λ[ξ]`.
    pub mean: f64,
    /// Tilted probability of `+scale`.
    pub q_plus: f64,
    /// Tilted probability of a nonzero step.
    pub q_nonzero: f64,
}

impl StepLaw {
    pub fn rademacher(scale: f64) -> Self {
        Self {
            scale,
            p_nonzero: 1.0,
        }
    }

    pub fn variance(&self) -> f64 {
        self.p_nonzero * self.scale * self.scale
    }

    /// `E[ξᵏ]`; odd moments vanish by symmetry.
    pub fn moment(&self, k: u32) -> f64 {
        if k == 0 {
            1.0
        } else if k % 2 == 1 {
            0.0
        } else {
            self.p_nonzero * self.scale.powi(k as i32)
        }
    }

    pub fn is_rademacher(&self) -> bool {
        self.p_nonzero == 1.0
    }

    /// Law of the step under `dP_λ ∝ e^{λξ} dP`.
    pub fn tilted(&self, lambda: f64) -> TiltedLaw {
        let (s, p) = (self.scale, self.p_nonzero);
        let t = lambda * s;
        let (psi, q_plus, q_minus) = if t.abs() < 1.0 {
            let half = (0.5 * t).sinh();
            let excess = 2.0 * p * half * half;
            let w = 1.0 + excess;
            (excess.ln_1p(), 0.5 * p * t.exp() / w, 0.5 * p * (-t).exp() / w)
        } else {
            let a = t.abs();
            let wp = 0.5 * p * (t - a).exp();
            let wm = 0.5 * p * (-t - a).exp();
            let w0 = (1.0 - p) * (-a).exp();
            let w = wp + wm + w0;
            (w.ln() + a, wp / w, wm / w)
        };
        TiltedLaw {
            scale: s,
            variance: self.variance(),
            psi,
            mean: s * (q_plus - q_minus),
            q_plus,
            q_nonzero: if p == 1.0 { 1.0 } else { q_plus + q_minus },
        }
    }
}

impl TiltedLaw {
    /// Maps a uniform draw onto `{+s, -s, 0}`.
    #[inline]
    pub fn draw(&self, u: f64) -> f64 {
        if u < self.q_plus {
            self.scale
        } else if u < self.q_nonzero {
            -self.scale
        } else {
            0.0
        }
    }
}

/// Noise law of the regression model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseFamily {
    /// `±σ` with equal probability.
    RademacherScaled,
    /// `±c` with probability `σ²/(2c²)` each, `0` otherwise; needs `c ≥ σ`.
    TruncatedSymmetric { support: f64 },
}

impl NoiseFamily {
    /// Largest absolute noise value.
    pub fn support(&self, sigma: f64) -> f64 {
        match *self {
            NoiseFamily::RademacherScaled => sigma,
            NoiseFamily::TruncatedSymmetric { support } => support,
        }
    }

    pub fn p_nonzero(&self, sigma: f64) -> f64 {
        let c = self.support(sigma);
        (sigma * sigma / (c * c)).min(1.0)
    }

    /// Smallest `ε₂` with `|E εᵏ| ≤ (k!/2) ε₂^{k-2} E ε²` for every `k ≥ 2`.
    ///
    /// For a symmetric law on `{-c, 0, c}` the ratio `E εᵏ / E ε² = c^{k-2}`
    /// for even `k`, so `ε₂ = c · sup_k (2/k!)^{1/(k-2)}`; the supremum is
    /// attained at `k = 4`, giving `c/√12`.
    pub fn bernstein_constant(&self, sigma: f64) -> f64 {
        self.support(sigma) * moment_ratio_factor(usize::MAX)
    }

    pub fn validate(&self, sigma: f64) -> Result<()> {
        if let NoiseFamily::TruncatedSymmetric { support } = *self {
            if !(support.is_finite() && support >= sigma) {
                return Err(Error::InvalidModel(format!(
                    "truncated noise support {support} must be finite and >= sigma = {sigma}"
                )));
            }
        }
        Ok(())
    }
}

/// `max over even k in 4..=max_order of (2/k!)^{1/(k-2)}`, or 0 when
/// `max_order < 4`. The sequence decreases in `k`, so any order ≥ 4 gives
/// `1/√12`.
pub(crate) fn moment_ratio_factor(max_order: usize) -> f64 {
    if max_order < 4 {
        0.0
    } else {
        (1.0f64 / 12.0).sqrt()
    }
}

/// Martingale families with closed-form conditional laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MartingaleModel {
    /// `ξᵢ = εᵢ·(±1)` with `Σεᵢ² = 1`.
    ScaledRademacher { weights: Vec<f64> },
    /// Step `i` is `±√((1 + δ² sign(S_{i-1}))/n)`, with `sign(0) = +1`.
    VarianceSwitch { n: usize, delta: f64 },
    /// Normalized least-squares error `Σ φₖ εₖ / (σ √Σφ²)` on the fixed
    /// design `φₖ = a + (b-a)(k-1)/(n-1)`.
    Regression {
        theta: f64,
        n: usize,
        covariate_low: f64,
        covariate_high: f64,
        sigma: f64,
        noise: NoiseFamily,
    },
    /// `ηᵢ = ξᵢ/√[S]ₙ` for independent symmetric `ξᵢ` whose magnitudes are
    /// `a` or `b` with equal probability.
    SelfNormalized {
        n: usize,
        magnitude_low: f64,
        magnitude_high: f64,
    },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl MartingaleModel {
    pub fn scaled_rademacher(weights: Vec<f64>) -> Result<Self> {
        let m = MartingaleModel::ScaledRademacher { weights };
        m.validate()?;
        Ok(m)
    }

    /// Equal weights `1/√n`.
    pub fn equal_rademacher(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("n must be >= 1".into()));
        }
        Self::scaled_rademacher(vec![1.0 / (n as f64).sqrt(); n])
    }

    pub fn variance_switch(n: usize, delta: f64) -> Result<Self> {
        let m = MartingaleModel::VarianceSwitch { n, delta };
        m.validate()?;
        Ok(m)
    }

    pub fn regression(
        theta: f64,
        n: usize,
        covariate_low: f64,
        covariate_high: f64,
        sigma: f64,
        noise: NoiseFamily,
    ) -> Result<Self> {
        let m = MartingaleModel::Regression {
            theta,
            n,
            covariate_low,
            covariate_high,
            sigma,
            noise,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn self_normalized(n: usize, magnitude_low: f64, magnitude_high: f64) -> Result<Self> {
        let m = MartingaleModel::SelfNormalized {
            n,
            magnitude_low,
            magnitude_high,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.len() == 0 {
            return Err(Error::InvalidModel("model needs at least one step".into()));
        }
        match self {
            MartingaleModel::ScaledRademacher { weights } => {
                for &w in weights {
                    positive("weight", w)?;
                }
                let total: f64 = weights.iter().map(|w| w * w).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidModel(format!(
                        "squared weights must sum to 1, got {total}"
                    )));
                }
            }
            MartingaleModel::VarianceSwitch { delta, .. } => {
                if !(0.0..=1.0).contains(delta) {
                    return Err(Error::InvalidModel(format!("delta = {delta} is outside [0, 1]")));
                }
            }
            MartingaleModel::Regression {
                theta,
                covariate_low,
                covariate_high,
                sigma,
                noise,
                ..
            } => {
                if !theta.is_finite() {
                    return Err(Error::InvalidModel(format!("theta must be finite, got {theta}")));
                }
                positive("covariate_low", *covariate_low)?;
                positive("covariate_high", *covariate_high)?;
                positive("sigma", *sigma)?;
                if covariate_high < covariate_low {
                    return Err(Error::InvalidModel("covariate_high < covariate_low".into()));
                }
                noise.validate(*sigma)?;
            }
            MartingaleModel::SelfNormalized {
                magnitude_low,
                magnitude_high,
                ..
            } => {
                positive("magnitude_low", *magnitude_low)?;
                positive("magnitude_high", *magnitude_high)?;
                if magnitude_high < magnitude_low {
                    return Err(Error::InvalidModel("magnitude_high < magnitude_low".into()));
                }
            }
        }
        let eps = self.declared_epsilon();
        if eps > 0.5 {
            return Err(Error::InvalidModel(format!(
                "declared epsilon {eps} exceeds 1/2; the moment condition (A1) needs more steps"
            )));
        }
        Ok(())
    }

    /// Number of steps `n`.
    pub fn len(&self) -> usize {
        match self {
            MartingaleModel::ScaledRademacher { weights } => weights.len(),
            MartingaleModel::VarianceSwitch { n, .. }
            | MartingaleModel::Regression { n, .. }
            | MartingaleModel::SelfNormalized { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn family(&self) -> &'static str {
        match self {
            MartingaleModel::ScaledRademacher { .. } => "scaled_rademacher",
            MartingaleModel::VarianceSwitch { .. } => "variance_switch",
            MartingaleModel::Regression { .. } => "regression",
            MartingaleModel::SelfNormalized { .. } => "self_normalized",
        }
    }

    /// Short human-readable identifier.
    pub fn id(&self) -> String {
        match self {
            MartingaleModel::ScaledRademacher { weights } => {
                format!("scaled_rademacher(n={})", weights.len())
            }
            MartingaleModel::VarianceSwitch { n, delta } => {
                format!("variance_switch(n={n},delta={delta})")
            }
            MartingaleModel::Regression {
                n,
                covariate_low,
                covariate_high,
                sigma,
                noise,
                ..
            } => {
                let kind = match noise {
                    NoiseFamily::RademacherScaled => "rademacher".to_string(),
                    NoiseFamily::TruncatedSymmetric { support } => format!("truncated({support})"),
                };
                format!("regression(n={n},a={covariate_low},b={covariate_high},sigma={sigma},{kind})")
            }
            MartingaleModel::SelfNormalized {
                n,
                magnitude_low,
                magnitude_high,
            } => format!("self_normalized(n={n},a={magnitude_low},b={magnitude_high})"),
        }
    }

    /// Regression design `φ₁..φₙ`.
    pub fn covariates(&self) -> Option<Vec<f64>> {
        match *self {
            MartingaleModel::Regression {
                n,
                covariate_low: a,
                covariate_high: b,
                ..
            } => Some(design(n, a, b)),
            _ => None,
        }
    }

    /// Step laws when they do not depend on the path.
    pub fn fixed_laws(&self) -> Option<Vec<StepLaw>> {
        match self {
            MartingaleModel::ScaledRademacher { weights } => {
                Some(weights.iter().map(|&w| StepLaw::rademacher(w)).collect())
            }
            MartingaleModel::Regression { sigma, noise, .. } => {
                let phi = self.covariates()?;
                let norm = phi.iter().map(|f| f * f).sum::<f64>().sqrt();
                let c = noise.support(*sigma);
                let p = noise.p_nonzero(*sigma);
                Some(
                    phi.iter()
                        .map(|f| StepLaw {
                            scale: f * c / (sigma * norm),
                            p_nonzero: p,
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// `(high, low)` laws of the variance-switch model.
    pub(crate) fn switch_laws(&self) -> Option<(StepLaw, StepLaw)> {
        match *self {
            MartingaleModel::VarianceSwitch { n, delta } => {
                let d2 = delta * delta;
                let n = n as f64;
                Some((
                    StepLaw::rademacher(((1.0 + d2) / n).sqrt()),
                    StepLaw::rademacher(((1.0 - d2).max(0.0) / n).sqrt()),
                ))
            }
            _ => None,
        }
    }

    /// `(ε₁, ε₂, ε)` of the regression model.
    pub fn regression_epsilons(&self) -> Option<(f64, f64, f64)> {
        match self {
            MartingaleModel::Regression { sigma, noise, .. } => {
                let phi = self.covariates()?;
                let norm = phi.iter().map(|f| f * f).sum::<f64>().sqrt();
                let eps1 = phi.iter().fold(0.0f64, |m, f| m.max(f.abs())) / norm;
                let eps2 = noise.bernstein_constant(*sigma);
                Some((eps1, eps2, eps1 * eps2 / sigma))
            }
            _ => None,
        }
    }

    /// The `ε` under which the model satisfies (A1).
    pub fn declared_epsilon(&self) -> f64 {
        match self {
            MartingaleModel::ScaledRademacher { weights } => weights.iter().fold(0.0, |m, &w| f64::max(m, w)),
            MartingaleModel::VarianceSwitch { n, delta } => ((1.0 + delta * delta) / *n as f64).sqrt(),
            MartingaleModel::Regression { .. } => self.regression_epsilons().map_or(f64::NAN, |e| e.2),
            MartingaleModel::SelfNormalized {
                n,
                magnitude_low,
                magnitude_high,
            } => magnitude_high / (magnitude_low * (*n as f64).sqrt()),
        }
    }

    /// The `δ` under which the model satisfies (A2).
    pub fn declared_delta(&self) -> f64 {
        match self {
            MartingaleModel::VarianceSwitch { delta, .. } => *delta,
            _ => 0.0,
        }
    }

    pub fn bernstein_params(&self) -> Result<BernsteinParams> {
        BernsteinParams::new(self.declared_epsilon(), self.declared_delta())
    }

    /// Whether every step is `±scale` with a predictable scale and
    /// `⟨S⟩ₙ = 1`, so that `Σ ln cosh(λsᵢ) ≤ λ²/2` along every path.
    pub fn half_cosh_applies(&self) -> bool {
        match self {
            MartingaleModel::ScaledRademacher { .. } | MartingaleModel::SelfNormalized { .. } => true,
            MartingaleModel::VarianceSwitch { delta, .. } => *delta == 0.0,
            MartingaleModel::Regression { noise, .. } => *noise == NoiseFamily::RademacherScaled,
        }
    }

    /// Atoms of a single step's joint law (magnitude and sign).
    pub(crate) fn atoms_per_step(&self) -> u32 {
        match self {
            MartingaleModel::Regression { sigma, noise, .. } if noise.p_nonzero(*sigma) < 1.0 => 3,
            MartingaleModel::SelfNormalized {
                magnitude_low,
                magnitude_high,
                ..
            } if magnitude_low != magnitude_high => 4,
            _ => 2,
        }
    }

    /// Rounding allowance when comparing a computed `Sₙ` with a threshold.
    /// Summing `n` steps can leave a lattice atom a few ulps off its exact
    /// value, so values within this distance of `x` count as equal to it.
    pub fn tie_tolerance(&self) -> f64 {
        16.0 * f64::EPSILON * (self.len().max(1) as f64).powf(1.5)
    }

    /// Number of equally indexed outcomes of a full path, saturating.
    pub fn outcome_count(&self) -> u64 {
        let k = self.atoms_per_step() as u64;
        let mut total: u64 = 1;
        for _ in 0..self.len() {
            total = total.saturating_mul(k);
            if total == u64::MAX {
                break;
            }
        }
        total
    }
}

pub(crate) fn design(n: usize, a: f64, b: f64) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|k| a + step * k as f64).collect()
}
