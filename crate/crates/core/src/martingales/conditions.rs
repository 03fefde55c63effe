use serde::{Deserialize, Serialize};

use super::model::{moment_ratio_factor, MartingaleModel, StepLaw};
use crate::error::{Error, Result};

/// Margin of the moment condition for one step law and one order `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentMargin {
    /// Step index (1-based), or a label for path-dependent laws.
    pub step: String,
    pub order: u32,
    /// `|E[ξᵏ|F]|`.
    pub lhs: f64,
    /// `(k!/2) ε^{k-2} E[ξ²|F]`.
    pub rhs: f64,
}

impl MomentMargin {
    /// `(rhs − lhs)/rhs`; 0 when both sides vanish.
    pub fn relative(&self) -> f64 {
        if self.rhs == 0.0 {
            if self.lhs == 0.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            (self.rhs - self.lhs) / self.rhs
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Report {
    pub declared_epsilon: f64,
    /// Smallest `ε` for which the condition holds up to `max_order`.
    pub binding_epsilon: f64,
    /// Smallest relative margin over orders `3..=max_order` (0 if none).
    pub worst_margin: f64,
    pub passed: bool,
    pub margins: Vec<MomentMargin>,
}

/// Every conditional law a step of `model` can have, with a label.
fn candidate_laws(model: &MartingaleModel) -> Vec<(String, StepLaw)> {
    match model {
        MartingaleModel::ScaledRademacher { .. } | MartingaleModel::Regression { .. } => model
            .fixed_laws()
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(i, l)| ((i + 1).to_string(), l))
            .collect(),
        MartingaleModel::VarianceSwitch { .. } => {
            let (high, low) = model.switch_laws().unwrap();
            vec![("high".into(), high), ("low".into(), low)]
        }
        MartingaleModel::SelfNormalized {
            n,
            magnitude_low: a,
            magnitude_high: b,
        } => {
            // extreme normalized magnitudes over all environments
            let m = (*n - 1) as f64;
            let largest = b / (b * b + m * a * a).sqrt();
            let smallest = a / (a * a + m * b * b).sqrt();
            vec![
                ("largest".into(), StepLaw::rademacher(largest)),
                ("smallest".into(), StepLaw::rademacher(smallest)),
            ]
        }
    }
}

fn half_factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product::<f64>() / 2.0
}

/// Checks `|E[ξᵏ|F]| ≤ (k!/2) ε^{k-2} E[ξ²|F]` for `2 ≤ k ≤ max_order` with
/// exact conditional moments, at the model's declared `ε`.
pub fn verify_a1(model: &MartingaleModel, max_order: u32, tol: f64) -> Result<A1Report> {
    model.validate()?;
    if max_order < 2 {
        return Err(Error::Domain(format!("max_order must be >= 2, got {max_order}")));
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!("tolerance must be finite and >= 0, got {tol}")));
    }
    let eps = model.declared_epsilon();
    let laws = candidate_laws(model);
    let mut margins = Vec::with_capacity(laws.len() * (max_order as usize - 1));
    let mut passed = true;
    let mut max_scale = 0.0f64;
    for (label, law) in &laws {
        max_scale = max_scale.max(law.scale);
        let var = law.variance();
        for k in 2..=max_order {
            let m = MomentMargin {
                step: label.clone(),
                order: k,
                lhs: law.moment(k).abs(),
                rhs: half_factorial(k) * eps.powi(k as i32 - 2) * var,
            };
            if m.lhs > m.rhs * (1.0 + tol) {
                passed = false;
            }
            margins.push(m);
        }
    }
    Ok(A1Report {
        declared_epsilon: eps,
        binding_epsilon: max_scale * moment_ratio_factor(max_order as usize),
        worst_margin: if max_order >= 3 { worst_relative(&margins) } else { 0.0 },
        passed,
        margins,
    })
}

fn worst_relative(margins: &[MomentMargin]) -> f64 {
    margins
        .iter()
        .filter(|m| m.order >= 3)
        .map(MomentMargin::relative)
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A2Report {
    /// Bound on `|⟨S⟩ₙ − 1|`.
    pub delta_sq_bound: f64,
    /// Whether the bound is attained by construction rather than estimated.
    pub exact: bool,
}

/// Structural bound on `|⟨S⟩ₙ − 1|`.
pub fn verify_a2(model: &MartingaleModel) -> Result<A2Report> {
    model.validate()?;
    Ok(match model {
        MartingaleModel::VarianceSwitch { delta, .. } => A2Report {
            delta_sq_bound: delta * delta,
            exact: true,
        },
        // Σεᵢ² = 1, Σφ²σ²/(σ²Σφ²) = 1 and Σηᵢ² = 1 respectively
        _ => A2Report {
            delta_sq_bound: 0.0,
            exact: true,
        },
    })
}
