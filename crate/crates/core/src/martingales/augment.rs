use super::path::PathSample;
use crate::error::{ensure_finite, Error, Result};
use crate::rng::{PathRng, StreamDomain};

/// Stops `path` at `τ = sup{k : ⟨S⟩ₖ ≤ 1}` and pads it so that the
/// quadratic characteristic ends at exactly 1.
///
/// After `τ` the original steps are replaced by zeros; then `r =
/// ⌊(1 − ⟨S⟩_τ)/ε²⌋` fair `±ε` steps are appended, followed by one step of
/// magnitude `√(1 − ⟨S⟩_τ − rε²)` and zeros, for a total length of
/// `n + ⌊1/ε²⌋ + 1`. The last nonzero step takes a fair random sign so the
/// padded sequence is still a martingale difference sequence. Randomness
/// comes from the augmentation stream of `(seed, path.path_index)`.
pub fn bolthausen_augment(path: &PathSample, epsilon: f64, seed: u64) -> Result<PathSample> {
    ensure_finite("epsilon", epsilon)?;
    if epsilon <= 0.0 {
        return Err(Error::Domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    let n = path.len();
    let e2 = epsilon * epsilon;
    let block = (1.0 / e2).floor();
    if block > 1e8 {
        return Err(Error::Domain(format!("epsilon = {epsilon} gives an oversized padding block")));
    }
    let block = block as usize + 1;
    // rounding in ⟨S⟩ₙ = 1 models must not stop the path one step early
    let tau = path.qc.iter().rposition(|&q| q <= 1.0 + 1e-12).unwrap_or(0);
    let q_tau = path.qc[tau];
    let r = (((1.0 - q_tau) / e2).floor().max(0.0) as usize).min(block - 1);
    let rest = (1.0 - q_tau - r as f64 * e2).max(0.0);

    let mut differences = Vec::with_capacity(n + block);
    let mut variances = Vec::with_capacity(n + block);
    for k in 0..n {
        if k < tau {
            differences.push(path.differences[k]);
            variances.push(path.qc[k + 1] - path.qc[k]);
        } else {
            differences.push(0.0);
            variances.push(0.0);
        }
    }
    let mut rng = PathRng::new(seed, StreamDomain::Augmentation, path.path_index);
    for _ in 0..r {
        differences.push(if rng.next_bit() { epsilon } else { -epsilon });
        variances.push(e2);
    }
    let last = rest.sqrt();
    differences.push(if rng.next_bit() { last } else { -last });
    variances.push(rest);
    differences.resize(n + block, 0.0);
    variances.resize(n + block, 0.0);

    let mut out = PathSample::from_steps(differences, &variances, seed, path.path_index, path.model_id.clone());
    // the stopped prefix keeps the original running values exactly
    out.qc[..=tau].copy_from_slice(&path.qc[..=tau]);
    let mut q = q_tau;
    for k in tau..n {
        out.qc[k + 1] = q;
    }
    for k in n..n + block {
        q += variances[k];
        out.qc[k + 1] = q;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingales::model::MartingaleModel;
    use crate::martingales::path::{simulate_path, Simulator};

    #[test]
    fn full_characteristic_needs_no_padding() {
        let m = MartingaleModel::scaled_rademacher(vec![0.5; 4]).unwrap();
        let p = simulate_path(&m, 5).unwrap();
        let a = bolthausen_augment(&p, 0.5, 5).unwrap();
        assert_eq!(a.len(), 4 + 4 + 1);
        assert_eq!(a.terminal(), p.terminal());
        assert_eq!(a.qc_terminal(), 1.0);
        assert!(a.differences[4..].iter().all(|&d| d == 0.0));
    }

    #[test]
    fn switch_paths_end_at_one() {
        let m = MartingaleModel::variance_switch(50, 0.5).unwrap();
        let eps = m.declared_epsilon();
        let sim = Simulator::new(&m, 0.0).unwrap();
        for i in 0..300 {
            let p = sim.path(9, i);
            let a = bolthausen_augment(&p, eps, 9).unwrap();
            assert_eq!(a.len(), 50 + (1.0 / (eps * eps)).floor() as usize + 1);
            assert!((a.qc_terminal() - 1.0).abs() <= 1e-12);
            assert!(a.qc.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn one_padding_step_restores_missing_variance() {
        // first step up-variance, then only down-variance steps
        let d: f64 = 0.5;
        let n = 8;
        let hi = ((1.0 + d * d) / n as f64).sqrt();
        let lo = ((1.0 - d * d) / n as f64).sqrt();
        let mut diffs = vec![-hi];
        diffs.extend(std::iter::repeat(-lo).take(n - 1));
        let vars: Vec<f64> = diffs.iter().map(|x| x * x).collect();
        let p = PathSample::from_steps(diffs, &vars, 0, 0, "forced".into());
        // ⟨S⟩ₙ = (1 + δ²)/n + (n−1)(1 − δ²)/n
        let qn = p.qc_terminal();
        assert!(qn < 1.0);
        let eps = (1.0 - qn).sqrt();
        let a = bolthausen_augment(&p, eps, 1).unwrap();
        assert!((a.qc_terminal() - 1.0).abs() <= 1e-12);
        assert_eq!(a.differences[n].abs(), eps);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let m = MartingaleModel::scaled_rademacher(vec![0.5; 4]).unwrap();
        let p = simulate_path(&m, 5).unwrap();
        assert!(bolthausen_augment(&p, 0.0, 1).is_err());
        assert!(bolthausen_augment(&p, f64::NAN, 1).is_err());
    }
}
