//! Closed-form tail bounds and Berry–Esseen envelopes for martingales
//! satisfying the conditional Bernstein condition with parameters `(ε, δ)`.
//!
//! Every envelope is assembled in the log domain and exponentiated last, so
//! tails far beyond the underflow threshold of `exp(-x²/2)` keep a finite
//! `log_value`. Absolute constants are free parameters carried by
//! [`BoundConstant`]; they default to 1.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::gaussian::std_normal_log_sf;

/// Conditional Bernstein parameters: `ε` bounds the growth of conditional
/// moments, `δ²` bounds the deviation of the predictable quadratic
/// characteristic from 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernsteinParams {
    epsilon: f64,
    delta: f64,
    #[serde(default)]
    permissive: bool,
}

impl BernsteinParams {
    /// Strict construction: `0 < ε ≤ 1/2` and `0 ≤ δ ≤ 1`.
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        ensure_finite("epsilon", epsilon)?;
        ensure_finite("delta", delta)?;
        if !(epsilon > 0.0 && epsilon <= 0.5) {
            return Err(Error::InvalidParams(format!(
                "epsilon = {epsilon} is outside (0, 1/2] required by the moment condition (A1)"
            )));
        }
        Self::check_delta(delta)?;
        Ok(Self {
            epsilon,
            delta,
            permissive: false,
        })
    }

    /// Formula-evaluation mode that additionally admits `ε = 0`, the
    /// Gaussian limit. Such parameters are rejected by [`Self::require_strict`].
    pub fn permissive(epsilon: f64, delta: f64) -> Result<Self> {
        if epsilon == 0.0 {
            ensure_finite("delta", delta)?;
            Self::check_delta(delta)?;
            return Ok(Self {
                epsilon,
                delta,
                permissive: true,
            });
        }
        let mut p = Self::new(epsilon, delta)?;
        p.permissive = true;
        Ok(p)
    }

    fn check_delta(delta: f64) -> Result<()> {
        if (0.0..=1.0).contains(&delta) {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "delta = {delta} is outside [0, 1] required by the quadratic-characteristic condition (A2)"
            )))
        }
    }

    /// Fails for the ε = 0 limit, which violates (A1)'s range.
    pub fn require_strict(&self) -> Result<()> {
        if self.epsilon > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParams(
                "epsilon = 0 is only admitted for formula evaluation, not as condition (A1)".into(),
            ))
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_permissive(&self) -> bool {
        self.permissive
    }

    /// `1 + δ²`, the upper bound of the quadratic characteristic.
    pub fn variance_cap(&self) -> f64 {
        1.0 + self.delta * self.delta
    }

    /// `ε |ln ε|`, with the continuous extension 0 at ε = 0.
    pub fn eps_log_eps(&self) -> f64 {
        eps_log_eps(self.epsilon)
    }
}

pub(crate) fn eps_log_eps(epsilon: f64) -> f64 {
    if epsilon == 0.0 {
        0.0
    } else {
        epsilon * epsilon.ln().abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    /// An absolute constant `C`.
    AbsoluteC,
    /// A constant `C_δ` depending only on the moment order.
    CDelta,
    /// A constant `C_p` depending only on the exponent `p`.
    CP,
}

/// The unspecified constant of a bound, exposed as a caller-set parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstant {
    pub c: f64,
    pub kind: ConstantKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

impl Default for BoundConstant {
    fn default() -> Self {
        Self {
            c: 1.0,
            kind: ConstantKind::AbsoluteC,
            p: None,
        }
    }
}

impl BoundConstant {
    pub fn absolute(c: f64) -> Result<Self> {
        Self::check_value(c)?;
        Ok(Self {
            c,
            kind: ConstantKind::AbsoluteC,
            p: None,
        })
    }

    pub fn c_delta(c: f64) -> Result<Self> {
        Self::check_value(c)?;
        Ok(Self {
            c,
            kind: ConstantKind::CDelta,
            p: None,
        })
    }

    pub fn c_p(c: f64, p: f64) -> Result<Self> {
        Self::check_value(c)?;
        ensure_finite("p", p)?;
        if p < 1.0 {
            return Err(Error::Domain(format!("C_p needs p >= 1, got {p}")));
        }
        Ok(Self {
            c,
            kind: ConstantKind::CP,
            p: Some(p),
        })
    }

    fn check_value(c: f64) -> Result<()> {
        ensure_finite("C", c)?;
        if c < 0.0 {
            return Err(Error::InvalidParams(format!("constant must be >= 0, got {c}")));
        }
        Ok(())
    }

    fn expect_kind(&self, kind: ConstantKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "expected a constant of kind {kind:?}, got {:?}",
                self.kind
            )))
        }
    }
}

/// Which bound produced a [`TailEnvelope`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeSource {
    /// Bennett-type martingale bound with the consistent denominator.
    DeLaPenaBennett,
    /// Bennett-type bound with the denominator exactly as originally typeset.
    DeLaPenaBennettAsPrinted,
    /// Bernstein-type martingale bound.
    DeLaPenaBernstein,
    /// `exp(-x̂²/2)`.
    TailSquare,
    /// `(1-Φ(x̂))·[1 + C(1+x̂)(…)]`.
    StrengthenedTail,
    /// `F(x)·exp(-x̂²/2)`.
    StrengthenedTailFactor,
    /// Nonuniform Berry–Esseen envelope under both conditions.
    NonuniformBerryEsseen,
    /// Nonuniform envelope under the moment condition alone.
    Corollary,
    /// Least-squares regression envelope.
    Regression,
    /// Self-normalized sum envelope.
    SelfNormalized,
}

/// A bound value together with its logarithm and the quantities used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEnvelope {
    pub x: f64,
    pub value: f64,
    pub log_value: f64,
    pub source: EnvelopeSource,
    pub constant_used: Option<BoundConstant>,
    pub xhat: Option<f64>,
    pub lambda_bar: Option<f64>,
}

impl TailEnvelope {
    pub(crate) fn from_log(x: f64, log_value: f64, source: EnvelopeSource) -> Self {
        Self {
            x,
            value: log_value.exp(),
            log_value,
            source,
            constant_used: None,
            xhat: None,
            lambda_bar: None,
        }
    }

    fn with_constant(mut self, c: BoundConstant) -> Self {
        self.constant_used = Some(c);
        self
    }

    fn with_xhat(mut self, xhat: f64) -> Self {
        self.xhat = Some(xhat);
        self
    }

    fn with_lambda_bar(mut self, lambda_bar: f64) -> Self {
        self.lambda_bar = Some(lambda_bar);
        self
    }
}

/// `ln(a)` that maps an exact zero to `-∞` rather than erroring.
fn ln0(a: f64) -> f64 {
    if a == 0.0 {
        f64::NEG_INFINITY
    } else {
        a.ln()
    }
}

fn require_nonneg(name: &str, x: f64) -> Result<()> {
    ensure_finite(name, x)?;
    if x < 0.0 {
        Err(Error::Domain(format!("{name} must be >= 0, got {x}")))
    } else {
        Ok(())
    }
}

/// Deformed argument `x̂ = (2|x|/√(1+δ²)) / (1 + √(1 + 2|x|ε/(1+δ²)))`.
pub fn xhat(x: f64, params: &BernsteinParams) -> Result<f64> {
    ensure_finite("x", x)?;
    let v2 = params.variance_cap();
    let a = x.abs();
    let u = 2.0 * a * params.epsilon / v2;
    Ok(2.0 * a / v2.sqrt() / (1.0 + (1.0 + u).sqrt()))
}

/// `x̆ = 2|x| / (1 + √(1 + 2|x|ε))`, the δ = 0 case of [`xhat`].
pub fn breve_x(x: f64, epsilon: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    require_nonneg("epsilon", epsilon)?;
    let a = x.abs();
    Ok(2.0 * a / (1.0 + (1.0 + 2.0 * a * epsilon).sqrt()))
}

/// Optimal tilt `λ̄(x)`: the root in `[0, 1/ε)` of
/// `(λ - λ²ε/2)/(1-λε)² = x/(1+δ²)`, in closed form.
pub fn lambda_bar(x: f64, params: &BernsteinParams) -> Result<f64> {
    require_nonneg("x", x)?;
    let v2 = params.variance_cap();
    let u = 2.0 * x * params.epsilon / v2;
    Ok((2.0 * x / v2) / (1.0 + u + (1.0 + u).sqrt()))
}

/// Left-hand side of the tilt equation, `(λ - λ²ε/2)/(1-λε)²`.
pub fn tilt_equation_lhs(lambda: f64, epsilon: f64) -> f64 {
    let d = 1.0 - lambda * epsilon;
    (lambda - 0.5 * lambda * lambda * epsilon) / (d * d)
}

fn check_dlp_args(x: f64, v: f64, epsilon: f64) -> Result<()> {
    require_nonneg("x", x)?;
    ensure_finite("v", v)?;
    if v <= 0.0 {
        return Err(Error::Domain(format!("v must be > 0, got {v}")));
    }
    require_nonneg("epsilon", epsilon)
}

/// Bennett-type bound `exp{-x² / (v² + v²√(1+2xε/v²) + xε)}` on
/// `P(Sₙ > x, ⟨S⟩ₙ ≤ v²)`.
pub fn de_la_pena_bennett(x: f64, v: f64, epsilon: f64) -> Result<TailEnvelope> {
    check_dlp_args(x, v, epsilon)?;
    let v2 = v * v;
    let den = v2 + v2 * (1.0 + 2.0 * x * epsilon / v2).sqrt() + x * epsilon;
    Ok(TailEnvelope::from_log(x, -x * x / den, EnvelopeSource::DeLaPenaBennett))
}

/// The Bennett-type bound with the square-root term not multiplied by `v²`,
/// kept for comparison with the typeset formula.
pub fn de_la_pena_bennett_as_printed(x: f64, v: f64, epsilon: f64) -> Result<TailEnvelope> {
    check_dlp_args(x, v, epsilon)?;
    let v2 = v * v;
    let den = v2 + (1.0 + 2.0 * x * epsilon / v2).sqrt() + x * epsilon;
    Ok(TailEnvelope::from_log(
        x,
        -x * x / den,
        EnvelopeSource::DeLaPenaBennettAsPrinted,
    ))
}

/// Bernstein-type bound `exp{-x² / (2(v² + xε))}`.
pub fn de_la_pena_bernstein(x: f64, v: f64, epsilon: f64) -> Result<TailEnvelope> {
    check_dlp_args(x, v, epsilon)?;
    let den = 2.0 * (v * v + x * epsilon);
    Ok(TailEnvelope::from_log(x, -x * x / den, EnvelopeSource::DeLaPenaBernstein))
}

/// Constant-free tail bound `P(Sₙ > x) ≤ exp(-x̂²/2)`.
pub fn tail_bound_sq(x: f64, params: &BernsteinParams) -> Result<TailEnvelope> {
    require_nonneg("x", x)?;
    let xh = xhat(x, params)?;
    Ok(TailEnvelope::from_log(x, -0.5 * xh * xh, EnvelopeSource::TailSquare).with_xhat(xh))
}

fn strengthened_bracket(lambda: f64, params: &BernsteinParams) -> f64 {
    let (e, d) = (params.epsilon, params.delta);
    lambda * lambda * e + lambda * d * d + params.eps_log_eps() + d
}

/// Strengthened tail bound
/// `(1 − Φ(x̂))·[1 + C(1+x̂)(λ̄²ε + λ̄δ² + ε|ln ε| + δ)]`.
pub fn strengthened_tail_envelope(
    x: f64,
    params: &BernsteinParams,
    c: &BoundConstant,
) -> Result<TailEnvelope> {
    require_nonneg("x", x)?;
    c.expect_kind(ConstantKind::AbsoluteC)?;
    let xh = xhat(x, params)?;
    let lb = lambda_bar(x, params)?;
    let factor = 1.0 + c.c * (1.0 + xh) * strengthened_bracket(lb, params);
    let log_value = std_normal_log_sf(xh)? + factor.ln();
    Ok(TailEnvelope::from_log(x, log_value, EnvelopeSource::StrengthenedTail)
        .with_constant(*c)
        .with_xhat(xh)
        .with_lambda_bar(lb))
}

/// Factor form `F(x)·exp(-x̂²/2)` with
/// `F(x) = C(1/(1+x̂) + λ̄²ε + λ̄δ² + ε|ln ε| + δ)`.
pub fn strengthened_tail_factor_form(
    x: f64,
    params: &BernsteinParams,
    c: &BoundConstant,
) -> Result<TailEnvelope> {
    require_nonneg("x", x)?;
    c.expect_kind(ConstantKind::AbsoluteC)?;
    let xh = xhat(x, params)?;
    let lb = lambda_bar(x, params)?;
    let f = c.c * (1.0 / (1.0 + xh) + strengthened_bracket(lb, params));
    Ok(TailEnvelope::from_log(
        x,
        ln0(f) - 0.5 * xh * xh,
        EnvelopeSource::StrengthenedTailFactor,
    )
    .with_constant(*c)
    .with_xhat(xh)
    .with_lambda_bar(lb))
}

/// Nonuniform Berry–Esseen envelope
/// `C(1+x²)(ε|ln ε| + δ/(1+|x|))·exp(-x̂²/2)`, symmetric in `x`.
pub fn nonuniform_be_envelope(
    x: f64,
    params: &BernsteinParams,
    c: &BoundConstant,
) -> Result<TailEnvelope> {
    c.expect_kind(ConstantKind::AbsoluteC)?;
    let xh = xhat(x, params)?;
    let a = x.abs();
    let rate = params.eps_log_eps() + params.delta / (1.0 + a);
    let log_value = ln0(c.c) + (a * a).ln_1p() + ln0(rate) - 0.5 * xh * xh;
    Ok(
        TailEnvelope::from_log(x, log_value, EnvelopeSource::NonuniformBerryEsseen)
            .with_constant(*c)
            .with_xhat(xh),
    )
}

/// Two-sided band for the ratio `P(Sₙ > x)/(1 − Φ(x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBand {
    pub lo: f64,
    pub hi: f64,
    /// Whether `x` lies in the range where the band is asserted.
    pub valid: bool,
}

/// `1 ∓ C(1+x³)(ε|ln ε| + δ/(1+x))`, valid for `x ≤ min(ε^{-1/3}, δ^{-1})`.
pub fn cramer_ratio_band(x: f64, params: &BernsteinParams, c: &BoundConstant) -> Result<RatioBand> {
    require_nonneg("x", x)?;
    let width = c.c * (1.0 + x * x * x) * (params.eps_log_eps() + params.delta / (1.0 + x));
    let eps_range = if params.epsilon > 0.0 {
        params.epsilon.powf(-1.0 / 3.0)
    } else {
        f64::INFINITY
    };
    let delta_range = if params.delta > 0.0 {
        1.0 / params.delta
    } else {
        f64::INFINITY
    };
    Ok(RatioBand {
        lo: (1.0 - width).max(0.0),
        hi: 1.0 + width,
        valid: x <= eps_range.min(delta_range),
    })
}

fn check_corollary_eps(epsilon: f64) -> Result<()> {
    require_nonneg("epsilon", epsilon)?;
    if epsilon > 0.5 {
        return Err(Error::InvalidParams(format!(
            "epsilon = {epsilon} is outside (0, 1/2] required by the moment condition (A1)"
        )));
    }
    Ok(())
}

/// Envelope under the moment condition alone:
/// `C[(1+x²)ε|ln ε|·exp(-x̆²/2) + (E|⟨S⟩ₙ−1| + ε²)^{1/3}·exp(-x²/6)]`.
pub fn corollary_envelope(
    x: f64,
    epsilon: f64,
    qc_l1: f64,
    c: &BoundConstant,
) -> Result<TailEnvelope> {
    ensure_finite("x", x)?;
    check_corollary_eps(epsilon)?;
    require_nonneg("qc_l1", qc_l1)?;
    let xb = breve_x(x, epsilon)?;
    let first = (x * x).ln_1p() + ln0(eps_log_eps(epsilon)) - 0.5 * xb * xb;
    let second = ln0(qc_l1 + epsilon * epsilon) / 3.0 - x * x / 6.0;
    let hi = first.max(second);
    let log_sum = if hi == f64::NEG_INFINITY {
        hi
    } else {
        hi + ((first - hi).exp() + (second - hi).exp()).ln()
    };
    Ok(
        TailEnvelope::from_log(x, ln0(c.c) + log_sum, EnvelopeSource::Corollary)
            .with_constant(*c)
            .with_xhat(xb),
    )
}

/// Uniform form `C[(E|⟨S⟩ₙ−1|)^{1/3} + ε^{2/3}]`.
pub fn corollary_uniform(epsilon: f64, qc_l1: f64, c: &BoundConstant) -> Result<f64> {
    check_corollary_eps(epsilon)?;
    require_nonneg("qc_l1", qc_l1)?;
    Ok(c.c * (qc_l1.cbrt() + epsilon.powf(2.0 / 3.0)))
}

/// Generalised uniform bound `C_p[(E|⟨S⟩ₙ−1|^p)^{1/(2p+1)} + ε^{2p/(2p+1)}]`.
pub fn mourrat_envelope(p: f64, qc_lp: f64, epsilon: f64, c: &BoundConstant) -> Result<f64> {
    ensure_finite("p", p)?;
    if p < 1.0 {
        return Err(Error::Domain(format!("p must be >= 1, got {p}")));
    }
    c.expect_kind(ConstantKind::CP)?;
    if c.p != Some(p) {
        return Err(Error::InvalidParams(format!(
            "constant is C_p for p = {:?}, requested p = {p}",
            c.p
        )));
    }
    require_nonneg("qc_lp", qc_lp)?;
    require_nonneg("epsilon", epsilon)?;
    let q = 2.0 * p + 1.0;
    Ok(c.c * (qc_lp.powf(1.0 / q) + epsilon.powf(2.0 * p / q)))
}

/// Uniform Berry–Esseen bound `C(ε|ln ε| + δ)`.
pub fn uniform_be_bound(params: &BernsteinParams, c: &BoundConstant) -> Result<f64> {
    c.expect_kind(ConstantKind::AbsoluteC)?;
    Ok(c.c * (params.eps_log_eps() + params.delta))
}

/// Moment inputs of the classical comparison bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentSummary {
    /// `Σ E|ξᵢ|^{2+δₘ}`.
    pub third_moments_sum: f64,
    /// `Σ E[ξᵢ² 1{|ξᵢ| > 1+|x|}]`.
    pub truncated_second: f64,
    /// `Σ E[|ξᵢ|³ 1{|ξᵢ| ≤ 1+|x|}]`.
    pub truncated_third: f64,
    /// `E|⟨S⟩ₙ − 1|^{1+δₘ/2}`.
    pub qc_deviation_moment: f64,
    /// `B_n^{-3} Σ E|ξᵢ|³`.
    pub l3n: f64,
    /// `B_n² = E[Sₙ²]`.
    pub bn2: f64,
    /// `Σ P(|ξᵢ| ≥ B_n/(6|x|))`.
    pub tail_prob_sum: f64,
}

impl MomentSummary {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("third_moments_sum", self.third_moments_sum),
            ("truncated_second", self.truncated_second),
            ("truncated_third", self.truncated_third),
            ("qc_deviation_moment", self.qc_deviation_moment),
            ("l3n", self.l3n),
            ("tail_prob_sum", self.tail_prob_sum),
        ] {
            require_nonneg(name, v)?;
        }
        ensure_finite("bn2", self.bn2)?;
        if self.bn2 <= 0.0 {
            return Err(Error::Domain(format!("bn2 must be > 0, got {}", self.bn2)));
        }
        Ok(())
    }
}

/// The three polynomially decaying comparison bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalEnvelopes {
    pub bikelis: f64,
    pub chen_shao: f64,
    pub haeusler_joos: f64,
}

/// Bikelis, Chen–Shao and Haeusler–Joos bounds at `x` with moment order
/// `2 + δₘ`.
pub fn classical_envelopes(
    x: f64,
    moments: &MomentSummary,
    delta_m: f64,
    c: &BoundConstant,
) -> Result<ClassicalEnvelopes> {
    ensure_finite("x", x)?;
    moments.validate()?;
    ensure_finite("delta_m", delta_m)?;
    if !(delta_m > 0.0 && delta_m <= 1.0) {
        return Err(Error::Domain(format!("moment order delta must lie in (0, 1], got {delta_m}")));
    }
    let a = 1.0 + x.abs();
    let bikelis = c.c * moments.third_moments_sum / a.powf(2.0 + delta_m);
    let chen_shao = c.c * (moments.truncated_second / (a * a) + moments.truncated_third / (a * a * a));
    let haeusler_joos = c.c
        * (moments.third_moments_sum + moments.qc_deviation_moment).powf(1.0 / (3.0 + delta_m))
        / (1.0 + x.abs().powf(2.0 + delta_m));
    Ok(ClassicalEnvelopes {
        bikelis,
        chen_shao,
        haeusler_joos,
    })
}
