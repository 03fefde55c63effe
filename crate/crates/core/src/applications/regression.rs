use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::{breve_x, eps_log_eps, BoundConstant, EnvelopeSource, RatioBand, TailEnvelope};
use crate::error::{ensure_finite, Error, Result};
use crate::gaussian::std_normal_sf;
use crate::martingales::{MartingaleModel, NoiseFamily, Simulator};
use crate::montecarlo::{clopper_pearson, SimulationConfig};

/// Observations `Xₖ = θφₖ + εₖ` with known noise scale `σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionData {
    pub covariates: Vec<f64>,
    pub responses: Vec<f64>,
    pub sigma: f64,
}

#[derive(Deserialize)]
struct Row {
    phi: f64,
    x: f64,
}

impl RegressionData {
    pub fn new(covariates: Vec<f64>, responses: Vec<f64>, sigma: f64) -> Result<Self> {
        let d = Self {
            covariates,
            responses,
            sigma,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.covariates.is_empty() || self.covariates.len() != self.responses.len() {
            return Err(Error::InvalidParams(format!(
                "need equally many covariates and responses, at least one; got {} and {}",
                self.covariates.len(),
                self.responses.len()
            )));
        }
        ensure_finite("sigma", self.sigma)?;
        if self.sigma <= 0.0 {
            return Err(Error::Domain(format!("sigma must be > 0, got {}", self.sigma)));
        }
        for (&f, &x) in self.covariates.iter().zip(&self.responses) {
            ensure_finite("phi", f)?;
            ensure_finite("x", x)?;
        }
        if self.energy() <= 0.0 {
            return Err(Error::Domain("covariates have zero energy".into()));
        }
        Ok(())
    }

    /// Reads CSV with header `phi,x`.
    pub fn from_csv_reader<R: Read>(reader: R, sigma: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["phi", "x"] {
            return Err(Error::Parse(format!("expected header 'phi,x', got '{}'", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let (mut phi, mut x) = (Vec::new(), Vec::new());
        for row in rdr.deserialize() {
            let r: Row = row?;
            phi.push(r.phi);
            x.push(r.x);
        }
        Self::new(phi, x, sigma)
    }

    pub fn from_csv_path(path: &Path, sigma: f64) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?, sigma)
    }

    pub fn len(&self) -> usize {
        self.covariates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covariates.is_empty()
    }

    /// `Σφₖ²`.
    pub fn energy(&self) -> f64 {
        dot(&self.covariates, &self.covariates)
    }
}

/// Dot product carried in twice the working precision (error-free products
/// and sums), rounded once at the end.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let p = x * y;
        let pe = x.mul_add(y, -p);
        let t = s + p;
        let z = t - s;
        c += (s - (t - z)) + (p - z) + pe;
        s = t;
    }
    s + c
}

/// `θ̂ = Σφₖ Xₖ / Σφₖ²`.
pub fn least_squares(data: &RegressionData) -> Result<f64> {
    let e = data.energy();
    if !(e > 0.0) {
        return Err(Error::Domain("covariates have zero energy".into()));
    }
    Ok(dot(&data.covariates, &data.responses) / e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    /// `(θ̂ − θ)√(Σφ²)/σ`.
    pub lhs: f64,
    /// `Σφᵢεᵢ/(σ√(Σφ²))` with `εᵢ = Xᵢ − θφᵢ`.
    pub rhs: f64,
    pub residual: f64,
}

impl ReductionCheck {
    /// Residual relative to `max(|lhs|, |rhs|, 1)`; both sides are
    /// standardized, so the floor is one standard deviation.
    pub fn relative(&self) -> f64 {
        self.residual / self.lhs.abs().max(self.rhs.abs()).max(1.0)
    }
}

/// Both sides of the reduction of the standardized estimation error to a
/// martingale sum.
pub fn regression_reduction_check(data: &RegressionData, theta: f64) -> Result<ReductionCheck> {
    data.validate()?;
    ensure_finite("theta", theta)?;
    let e = data.energy();
    let norm = e.sqrt();
    let lhs = (least_squares(data)? - theta) * norm / data.sigma;
    let noise: Vec<f64> = data
        .covariates
        .iter()
        .zip(&data.responses)
        .map(|(f, x)| f.mul_add(-theta, *x))
        .collect();
    let rhs = dot(&data.covariates, &noise) / (data.sigma * norm);
    Ok(ReductionCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

fn check_eps(eps: f64) -> Result<()> {
    ensure_finite("epsilon", eps)?;
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidParams(format!("epsilon = {eps} is outside (0, 1/2]")));
    }
    Ok(())
}

/// Regression bounds at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionEnvelope {
    /// `C(1+x²)ε|ln ε|·exp(-x̆²/2)`.
    pub nonuniform: TailEnvelope,
    /// `C·ε|ln ε|`.
    pub uniform: f64,
    /// `1 ∓ C(1+x³)ε|ln ε|`, asserted for `x ≤ ε^{-1/3}`.
    pub ratio_band: RatioBand,
}

pub fn regression_envelope(x: f64, eps: f64, c: &BoundConstant) -> Result<RegressionEnvelope> {
    ensure_finite("x", x)?;
    check_eps(eps)?;
    let el = eps_log_eps(eps);
    let xb = breve_x(x, eps)?;
    let log_value = c.c.ln() + (x * x).ln_1p() + el.ln() - 0.5 * xb * xb;
    let a = x.abs();
    let width = c.c * (1.0 + a * a * a) * el;
    Ok(RegressionEnvelope {
        nonuniform: TailEnvelope::from_log(x, log_value, EnvelopeSource::Regression),
        uniform: c.c * el,
        ratio_band: RatioBand {
            lo: (1.0 - width).max(0.0),
            hi: 1.0 + width,
            valid: a <= eps.powf(-1.0 / 3.0),
        },
    })
}

/// `(ε₁, ε₂, ε)` for observed covariates and a noise family.
pub fn regression_epsilons(data: &RegressionData, noise: &NoiseFamily) -> Result<(f64, f64, f64)> {
    data.validate()?;
    noise.validate(data.sigma)?;
    let norm = data.energy().sqrt();
    let eps1 = data.covariates.iter().fold(0.0f64, |m, f| m.max(f.abs())) / norm;
    let eps2 = noise.bernstein_constant(data.sigma);
    Ok((eps1, eps2, eps1 * eps2 / data.sigma))
}

/// `(ε₁, ε₂, ε)` of a simulated regression model.
pub fn regression_model_epsilons(model: &MartingaleModel) -> Result<(f64, f64, f64)> {
    model
        .regression_epsilons()
        .ok_or_else(|| Error::UnsupportedModel(format!("{} is not a regression model", model.id())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub theta_hat: f64,
    /// Critical value `x*` in standardized units.
    pub x_star: f64,
    pub level: f64,
    /// False when `x*` lies outside the range where the inverted bound is
    /// asserted, or no finite `x*` exists.
    pub valid: bool,
    pub warning: Option<String>,
}

const X_MAX: f64 = 40.0;

/// Smallest `x ∈ [0, X_MAX]` with `f(x) ≤ target`, by a coarse scan and
/// bisection; `None` if there is none.
fn first_below(f: impl Fn(f64) -> Result<f64>, target: f64) -> Result<Option<f64>> {
    let h = 1.0 / 64.0;
    if f(0.0)? <= target {
        return Ok(Some(0.0));
    }
    let mut a = 0.0;
    while a < X_MAX {
        let b = a + h;
        if f(b)? <= target {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid)? <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(hi));
        }
        a = b;
    }
    Ok(None)
}

/// Interval `θ̂ ± x*σ/√(Σφ²)` where `x*` inverts the two-sided ratio band
/// `2(1−Φ(x))(1 + C(1+x³)ε|ln ε|) ≤ 1 − level`, or with `use_envelope` the
/// nonuniform envelope `2[(1−Φ(x)) + C(1+x²)ε|ln ε|e^{-x̆²/2}] ≤ 1 − level`.
pub fn regression_ci(
    data: &RegressionData,
    eps: f64,
    level: f64,
    c: &BoundConstant,
    use_envelope: bool,
) -> Result<ConfidenceInterval> {
    data.validate()?;
    ensure_finite("level", level)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("level must lie in (0, 1), got {level}")));
    }
    let c0 = c.c == 0.0;
    if !c0 {
        check_eps(eps)?;
    }
    let el = if c0 { 0.0 } else { eps_log_eps(eps) };
    let f = |x: f64| -> Result<f64> {
        let sf = std_normal_sf(x)?;
        Ok(if use_envelope {
            let tail = if c0 {
                0.0
            } else {
                c.c * (1.0 + x * x) * el * (-0.5 * breve_x(x, eps)?.powi(2)).exp()
            };
            2.0 * (sf + tail)
        } else {
            2.0 * sf * (1.0 + c.c * (1.0 + x * x * x) * el)
        })
    };
    let theta_hat = least_squares(data)?;
    let unit = data.sigma / data.energy().sqrt();
    match first_below(f, 1.0 - level)? {
        Some(x) => {
            let range = if c0 { f64::INFINITY } else { eps.powf(-1.0 / 3.0) };
            let valid = use_envelope || x <= range;
            Ok(ConfidenceInterval {
                lo: theta_hat - x * unit,
                hi: theta_hat + x * unit,
                theta_hat,
                x_star: x,
                level,
                valid,
                warning: (!valid).then(|| format!("x* = {x} exceeds the band's range eps^(-1/3) = {range}")),
            })
        }
        None => Ok(ConfidenceInterval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
            theta_hat,
            x_star: f64::INFINITY,
            level,
            valid: false,
            warning: Some(format!("no critical value below {X_MAX}")),
        }),
    }
}

/// Estimate, errors and envelope values for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub theta_hat: f64,
    pub standardized_error: Option<f64>,
    pub eps1: f64,
    pub eps2: f64,
    pub eps: f64,
    pub valid: bool,
    pub envelope_at: Vec<(f64, f64)>,
}

pub fn regression_report(
    data: &RegressionData,
    noise: &NoiseFamily,
    theta: Option<f64>,
    xs: &[f64],
    c: &BoundConstant,
) -> Result<RegressionReport> {
    let theta_hat = least_squares(data)?;
    let (eps1, eps2, eps) = regression_epsilons(data, noise)?;
    let valid = eps > 0.0 && eps <= 0.5;
    let envelope_at = if valid {
        xs.iter()
            .map(|&x| Ok((x, regression_envelope(x, eps, c)?.nonuniform.value)))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(RegressionReport {
        theta_hat,
        standardized_error: theta.map(|t| (theta_hat - t) * data.energy().sqrt() / data.sigma),
        eps1,
        eps2,
        eps,
        valid,
        envelope_at,
    })
}

/// Dataset of path `path_index` of a regression model with true slope `θ`.
pub fn simulate_regression_data(model: &MartingaleModel, seed: u64, path_index: u64) -> Result<RegressionData> {
    let MartingaleModel::Regression { theta, sigma, .. } = *model else {
        return Err(Error::UnsupportedModel(format!("{} is not a regression model", model.id())));
    };
    let phi = model.covariates().unwrap();
    let norm = phi.iter().map(|f| f * f).sum::<f64>().sqrt();
    let path = Simulator::new(model, 0.0)?.path(seed, path_index);
    // ξₖ = φₖεₖ/(σ√Σφ²)
    let x = phi
        .iter()
        .zip(&path.differences)
        .map(|(&f, &xi)| theta * f + xi * sigma * norm / f)
        .collect();
    RegressionData::new(phi, x, sigma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub level: f64,
    pub replications: u64,
    pub covered: u64,
    pub coverage: f64,
    pub std_error: f64,
    /// Clopper–Pearson interval at the run's confidence level.
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub eps: f64,
    pub seed: u64,
}

/// Fraction of simulated datasets whose interval covers the true slope.
/// Each path of `cfg` is one replication.
pub fn regression_coverage(
    cfg: &SimulationConfig,
    level: f64,
    c: &BoundConstant,
    use_envelope: bool,
) -> Result<CoverageReport> {
    cfg.validate()?;
    let MartingaleModel::Regression { theta, .. } = cfg.model else {
        return Err(Error::UnsupportedModel(format!("{} is not a regression model", cfg.model.id())));
    };
    if cfg.model.covariates().unwrap().contains(&0.0) {
        return Err(Error::InvalidModel("coverage needs nonzero covariates".into()));
    }
    let eps = regression_model_epsilons(&cfg.model)?.2;
    let chunks = cfg.map_chunks(|a, b| -> Result<u64> {
        let mut hits = 0;
        for i in a..b {
            let d = simulate_regression_data(&cfg.model, cfg.seed, i)?;
            let ci = regression_ci(&d, eps, level, c, use_envelope)?;
            hits += u64::from(ci.lo <= theta && theta <= ci.hi);
        }
        Ok(hits)
    })?;
    let mut covered = 0;
    for h in chunks {
        covered += h?;
    }
    let n = cfg.paths;
    let p = covered as f64 / n as f64;
    let (lo, hi) = clopper_pearson(covered, n, cfg.confidence_level)?;
    Ok(CoverageReport {
        level,
        replications: n,
        covered,
        coverage: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        ci_lo: lo,
        ci_hi: hi,
        eps,
        seed: cfg.seed,
    })
}
