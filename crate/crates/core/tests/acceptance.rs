//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use mtail::applications::{
    regression_ci, regression_coverage, regression_model_epsilons, regression_reduction_check,
    simulate_regression_data,
};
use mtail::bounds::{
    de_la_pena_bennett, de_la_pena_bernstein, lambda_bar, tail_bound_sq, tilt_equation_lhs, xhat, BernsteinParams,
    BoundConstant,
};
use mtail::gaussian::{log_mills_sandwich, std_normal_quantile};
use mtail::martingales::{bolthausen_augment, exact_tail, MartingaleModel, NoiseFamily, Simulator};
use mtail::montecarlo::{
    calibrate_constant, conjugate_clt_check, estimate_be_distance, estimate_tail_is,
    estimate_tail_plain, estimate_tail_plain_many, estimate_z_mean, lemma_sweep, CalibrationEnvelope,
    EstimateMethod, SamplingMode, SimulationConfig,
};

use common::{rel_err, table};

type Check = Result<String, String>;

const EPS_GRID: [f64; 5] = [1e-4, 1e-3, 0.01, 0.1, 0.5];
const DELTA_GRID: [f64; 4] = [0.0, 0.25, 0.5, 1.0];

fn x_grid() -> impl Iterator<Item = f64> {
    (0..=1000).map(|i| i as f64 * 0.1)
}

macro_rules! ok {
    ($e:expr) => {
        $e.map_err(|e| e.to_string())?
    };
}

fn within(t: Instant, limit: Duration) -> Check {
    let el = t.elapsed();
    if el < limit {
        Ok(format!("{:.2?}", el))
    } else {
        Err(format!("took {:.2?}, limit {:?}", el, limit))
    }
}

fn rademacher(n: usize) -> MartingaleModel {
    MartingaleModel::equal_rademacher(n).unwrap()
}

fn regression(n: usize, noise: NoiseFamily) -> MartingaleModel {
    MartingaleModel::regression(0.7, n, 1.0, 2.0, 1.0, noise).unwrap()
}

fn truncated() -> NoiseFamily {
    NoiseFamily::TruncatedSymmetric { support: 2.0 }
}

fn epsilon(m: &MartingaleModel) -> f64 {
    m.bernstein_params().unwrap().epsilon()
}

fn c1_formulas() -> Check {
    let t = Instant::now();
    let (mut worst_res, mut worst_id) = (0.0f64, 0.0f64);
    for &e in &EPS_GRID {
        for &d in &DELTA_GRID {
            let q = ok!(BernsteinParams::new(e, d));
            let v2 = q.variance_cap();
            for x in x_grid() {
                let l = ok!(lambda_bar(x, &q));
                let xh = ok!(xhat(x, &q));
                worst_res = worst_res.max(rel_err(tilt_equation_lhs(l, e), x / v2));
                if x > 0.0 {
                    worst_id = worst_id.max(rel_err(l * v2.sqrt() / (1.0 - l * e), xh));
                }
            }
        }
    }
    let time = within(t, Duration::from_secs(1))?;
    let msg = format!("max residual {worst_res:.1e}, max identity error {worst_id:.1e}, {time}");
    if worst_res <= 1e-10 && worst_id <= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c2_mills() -> Check {
    let t = Instant::now();
    let rows = table("normal_tail.csv");
    let mut bad = Vec::new();
    for r in &rows {
        let (x, log_sf) = (r[0], r[2]);
        let scaled = log_sf + 0.5 * x * x;
        let (lo, mine, hi) = ok!(log_mills_sandwich(x));
        if !(lo <= scaled && scaled <= hi && lo <= mine && mine <= hi) {
            bad.push(x);
        }
    }
    let time = within(t, Duration::from_secs(1))?;
    if rows.len() != 4001 {
        return Err(format!("oracle table has {} rows", rows.len()));
    }
    if bad.is_empty() {
        Ok(format!("{} points on [0, 40], {time}", rows.len()))
    } else {
        Err(format!("sandwich fails at x = {bad:?}"))
    }
}

fn c3_ordering() -> Check {
    let mut worst_eq = 0.0f64;
    for &e in &EPS_GRID {
        for &v in &[0.5, 1.0, 2.0] {
            for x in x_grid() {
                let a = ok!(de_la_pena_bennett(x, v, e));
                let b = ok!(de_la_pena_bernstein(x, v, e));
                if !(a.log_value <= b.log_value && b.log_value <= 0.0) {
                    return Err(format!("ordering fails at x={x} v={v} eps={e}"));
                }
            }
        }
        for &d in &DELTA_GRID {
            let q = ok!(BernsteinParams::new(e, d));
            for x in x_grid() {
                let a = ok!(de_la_pena_bennett(x, (1.0 + d * d).sqrt(), e));
                let xh = ok!(xhat(x, &q));
                let want = (-0.5 * xh * xh).exp();
                let err = if want > f64::MIN_POSITIVE {
                    rel_err(a.value, want)
                } else {
                    rel_err(a.log_value, -0.5 * xh * xh)
                };
                worst_eq = worst_eq.max(err);
            }
        }
    }
    if worst_eq <= 1e-12 {
        Ok(format!("ordering holds on the grid, max equality error {worst_eq:.1e}"))
    } else {
        Err(format!("equality error {worst_eq:.1e}"))
    }
}

fn c4_domination() -> Check {
    let t = Instant::now();
    let models = vec![
        rademacher(100),
        rademacher(1000),
        MartingaleModel::variance_switch(200, 0.2).unwrap(),
        MartingaleModel::variance_switch(200, 0.5).unwrap(),
        MartingaleModel::self_normalized(200, 1.0, 2.0).unwrap(),
    ];
    let plain_x = [0.5, 1.0, 1.5, 2.0];
    let is_x = [2.5, 3.0, 3.5, 4.0];
    let mut tightest = (f64::INFINITY, String::new());
    for (k, m) in models.into_iter().enumerate() {
        let params = ok!(m.bernstein_params());
        let id = m.id();
        let cfg = SimulationConfig::new(m, 1_000_000, 40 + k as u64);
        let mut ests = ok!(estimate_tail_plain_many(&cfg, &plain_x));
        for &x in &is_x {
            ests.push(ok!(estimate_tail_is(&cfg, x, None)));
        }
        for e in ests {
            let b = ok!(tail_bound_sq(e.x, &params)).value;
            if e.ci_hi > b {
                return Err(format!("{id}: upper {} > bound {b} at x = {}", e.ci_hi, e.x));
            }
            if b / e.ci_hi < tightest.0 {
                tightest = (b / e.ci_hi, format!("{id} at x = {}", e.x));
            }
        }
    }
    let time = within(t, Duration::from_secs(300))?;
    Ok(format!("5 models x 8 points, tightest bound/upper = {:.3} ({}), {time}", tightest.0, tightest.1))
}

fn c5_enumeration() -> Check {
    let weights: Vec<f64> = {
        let raw: Vec<f64> = (4..=11).map(f64::from).collect();
        let s = raw.iter().map(|w| w * w).sum::<f64>().sqrt();
        raw.iter().map(|w| w / s).collect()
    };
    let models = vec![
        rademacher(16),
        MartingaleModel::scaled_rademacher(weights).unwrap(),
        MartingaleModel::variance_switch(16, 0.5).unwrap(),
        regression(16, NoiseFamily::RademacherScaled),
        regression(12, truncated()),
        MartingaleModel::self_normalized(16, 1.0, 1.0).unwrap(),
        MartingaleModel::self_normalized(10, 1.0, 1.5).unwrap(),
    ];
    let x = 0.5;
    let mut counts = Vec::new();
    let mut worst_is = 0.0f64;
    for m in &models {
        let exact = ok!(exact_tail(m, x));
        let mut covered = 0;
        for trial in 0..100 {
            let cfg = SimulationConfig::new(m.clone(), 10_000, 500 + trial).with_mode(SamplingMode::Sample);
            let e = ok!(estimate_tail_plain(&cfg, x));
            covered += u32::from(e.ci_lo <= exact && exact <= e.ci_hi);
        }
        counts.push(covered);
        let eps = epsilon(m);
        let cfg = SimulationConfig::new(m.clone(), 1, 0);
        for tilt in [Some(0.0), Some(0.3 / eps), Some(0.8 / eps), None] {
            let e = ok!(estimate_tail_is(&cfg, x, tilt));
            if e.method != EstimateMethod::Exhaustive {
                return Err(format!("{} was not enumerated", m.id()));
            }
            worst_is = worst_is.max(rel_err(e.p_hat, exact));
        }
    }
    let quarter = MartingaleModel::scaled_rademacher(vec![0.5; 4]).unwrap();
    let cfg = SimulationConfig::new(quarter, 1, 0);
    let mut quarter_ok = true;
    for tilt in [0.0, 0.3, 1.0, 1.9] {
        quarter_ok &= (ok!(estimate_tail_is(&cfg, 0.9, Some(tilt))).p_hat - 0.3125).abs() <= 1e-15;
    }
    let msg = format!(
        "covered/100 per model {counts:?}, tilted enumeration error {worst_is:.1e}, 5/16 {}",
        if quarter_ok { "reproduced" } else { "not reproduced" }
    );
    if counts.iter().all(|&c| c >= 99) && worst_is <= 1e-12 && quarter_ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6_identities() -> Check {
    let models = vec![
        rademacher(100),
        MartingaleModel::variance_switch(100, 0.3).unwrap(),
        regression(100, NoiseFamily::RademacherScaled),
        regression(100, truncated()),
        MartingaleModel::self_normalized(100, 1.0, 2.0).unwrap(),
    ];
    let mut half_cosh = 0;
    let (mut b, mut psi) = (0.0f64, 0.0f64);
    for (k, m) in models.iter().enumerate() {
        let eps = epsilon(m);
        half_cosh += usize::from(m.half_cosh_applies());
        let cfg = SimulationConfig::new(m.clone(), 100_000, 60 + k as u64);
        for r in [0.1, 0.5, 0.9] {
            let s = ok!(lemma_sweep(&cfg, r / eps));
            if !s.passed() {
                return Err(format!("{} at lambda eps = {r}: {} violating paths, first {:?}", m.id(), s.violating_paths, s.first_violation));
            }
            b = b.max(s.max_b_ratio);
            psi = psi.max(s.max_psi_ratio);
        }
    }
    Ok(format!(
        "{} models x 3 tilts x 1e5 paths, zero violations ({half_cosh} with the half-cosh check), max B ratio {b:.3}, max Psi ratio {psi:.3}",
        models.len()
    ))
}

fn c7_z_mean() -> Check {
    let models = vec![
        rademacher(4),
        rademacher(16),
        MartingaleModel::variance_switch(8, 0.5).unwrap(),
        regression(8, NoiseFamily::RademacherScaled),
        MartingaleModel::self_normalized(8, 1.0, 1.4).unwrap(),
    ];
    let mut worst = 0.0f64;
    for (k, m) in models.iter().enumerate() {
        let eps = epsilon(m);
        let cfg = SimulationConfig::new(m.clone(), 100_000, 70 + k as u64);
        for r in [0.1, 0.5, 0.9] {
            let z = ok!(estimate_z_mean(&cfg, r / eps));
            let dev = (z.mean - 1.0).abs() / z.std_error;
            if !(dev <= 4.0) {
                return Err(format!("{} at lambda eps = {r}: mean {} with std error {}", m.id(), z.mean, z.std_error));
            }
            worst = worst.max(dev);
        }
    }
    Ok(format!("{} models x 3 tilts, largest deviation {worst:.2} standard errors", models.len()))
}

fn c8_augmentation() -> Check {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (k, d) in [0.2, 0.5].into_iter().enumerate() {
        let m = MartingaleModel::variance_switch(100, d).unwrap();
        let eps = epsilon(&m);
        let sim = ok!(Simulator::new(&m, 0.0));
        for i in 0..10_000 {
            let seed = 80 + k as u64;
            let a = ok!(bolthausen_augment(&sim.path(seed, i), eps, seed));
            worst = worst.max((a.qc.last().unwrap() - 1.0).abs());
            count += 1;
        }
    }
    if worst <= 1e-12 {
        Ok(format!("{count} augmented paths, max |<S'>_N - 1| = {worst:.1e}"))
    } else {
        Err(format!("max |<S'>_N - 1| = {worst:.1e}"))
    }
}

fn c9_rate_trend() -> Check {
    let t = Instant::now();
    let grid: Vec<f64> = (0..=600).map(|i| (i as f64 - 300.0) / 100.0).collect();
    let mut lines = Vec::new();
    for (env, make) in [
        (CalibrationEnvelope::Brmti, (|n| rademacher(n)) as fn(usize) -> MartingaleModel),
        (CalibrationEnvelope::Selfnorm, |n| MartingaleModel::self_normalized(n, 1.0, 2.0).unwrap()),
    ] {
        let mut cs = Vec::new();
        for n in [250, 1000, 4000] {
            let m = make(n);
            if env == CalibrationEnvelope::Brmti && rel_err(epsilon(&m), 1.0 / (n as f64).sqrt()) > 1e-15 {
                return Err(format!("epsilon of {} is not n^(-1/2)", m.id()));
            }
            let cfg = SimulationConfig::new(m, 1_000_000, 90 + n as u64);
            cs.push(ok!(calibrate_constant(&cfg, env, &grid)).c_hat);
        }
        let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = cs.iter().cloned().fold(0.0, f64::max);
        let line = format!("{} c = {:.3}/{:.3}/{:.3} (ratio {:.2})", env.name(), cs[0], cs[1], cs[2], hi / lo);
        if !(lo > 0.0 && hi / lo <= 3.0) {
            return Err(line);
        }
        lines.push(line);
    }
    let time = within(t, Duration::from_secs(600))?;
    Ok(format!("{}, {time}", lines.join("; ")))
}

fn c10_regression() -> Check {
    let mut worst = 0.0f64;
    for i in 0..1000u64 {
        let n = [5, 50, 500][(i % 3) as usize];
        let theta = [-1.5, 0.0, 2.3][(i / 3 % 3) as usize];
        let sigma = [0.5, 1.0, 3.0][(i / 9 % 3) as usize];
        let noise = if i % 2 == 0 {
            NoiseFamily::RademacherScaled
        } else {
            NoiseFamily::TruncatedSymmetric { support: 2.0 * sigma }
        };
        let m = ok!(MartingaleModel::regression(theta, n, 0.5, 3.0, sigma, noise));
        let d = ok!(simulate_regression_data(&m, 100, i));
        worst = worst.max(ok!(regression_reduction_check(&d, theta)).relative());
    }
    if worst > 1e-12 {
        return Err(format!("reduction residual {worst:.1e}"));
    }

    let d = ok!(simulate_regression_data(&regression(50, NoiseFamily::RademacherScaled), 101, 0));
    let zero = ok!(BoundConstant::absolute(0.0));
    let mut worst_z = 0.0f64;
    for level in [0.8, 0.9, 0.95, 0.99] {
        let z = ok!(std_normal_quantile(1.0 - (1.0 - level) / 2.0));
        for env in [false, true] {
            let ci = ok!(regression_ci(&d, 0.05, level, &zero, env));
            worst_z = worst_z.max((ci.x_star - z).abs());
        }
    }
    if worst_z > 1e-9 {
        return Err(format!("C = 0 critical value off by {worst_z:.1e}"));
    }

    let m = ok!(MartingaleModel::regression(0.5, 2000, 1.0, 2.0, 1.0, NoiseFamily::RademacherScaled));
    let eps = ok!(regression_model_epsilons(&m)).2;
    if eps > 0.01 {
        return Err(format!("coverage model has epsilon {eps}"));
    }
    let cfg = SimulationConfig::new(m, 10_000, 102);
    let cov = ok!(regression_coverage(&cfg, 0.95, &ok!(BoundConstant::absolute(1.0)), false));
    let floor = 0.95 - 3.0 * (0.95f64 * 0.05 / 1e4).sqrt();
    let msg = format!(
        "reduction residual {worst:.1e}, C = 0 error {worst_z:.1e}, coverage {:.4} >= {floor:.4} at eps {eps:.4}",
        cov.coverage
    );
    if cov.coverage >= floor {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn mc_fingerprint(workers: usize) -> Result<String, String> {
    let grid: Vec<f64> = (0..=40).map(|i| (i as f64 - 20.0) / 10.0).collect();
    let mut out = Vec::new();
    let mut push = |v: serde_json::Result<String>| out.push(v.unwrap());
    for (k, m) in [rademacher(300), MartingaleModel::variance_switch(200, 0.4).unwrap()].into_iter().enumerate() {
        let eps = epsilon(&m);
        let cfg = SimulationConfig::new(m, 20_000, 110 + k as u64)
            .with_chunk_size(1024)
            .with_workers(workers);
        push(serde_json::to_string(&ok!(estimate_tail_plain_many(&cfg, &[0.5, 1.0, 2.0]))));
        push(serde_json::to_string(&ok!(estimate_tail_is(&cfg, 2.5, None))));
        push(serde_json::to_string(&ok!(estimate_be_distance(&cfg, &grid))));
        push(serde_json::to_string(&ok!(calibrate_constant(&cfg, CalibrationEnvelope::Thm21, &grid))));
        push(serde_json::to_string(&ok!(calibrate_constant(&cfg, CalibrationEnvelope::Thm22, &grid[20..]))));
        push(serde_json::to_string(&ok!(conjugate_clt_check(&cfg, 1.5, &grid))));
        push(serde_json::to_string(&ok!(lemma_sweep(&cfg, 0.5 / eps))));
        push(serde_json::to_string(&ok!(estimate_z_mean(&cfg, 0.5 / eps))));
    }
    let reg = SimulationConfig::new(regression(100, NoiseFamily::RademacherScaled), 5_000, 120)
        .with_chunk_size(512)
        .with_workers(workers);
    push(serde_json::to_string(&ok!(regression_coverage(&reg, 0.9, &ok!(BoundConstant::absolute(1.0)), false))));
    Ok(out.join("\n"))
}

fn cli_output(workers: usize) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mtail"))
        .args(["simulate", "--n", "200", "--paths", "30000", "--seed", "5", "--chunk-size", "2048"])
        .args(["--x", "0.5,1,2.5", "--format", "json", "--workers", &workers.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn c11_determinism() -> Check {
    let base = mc_fingerprint(1)?;
    let cli = cli_output(1)?;
    for w in [2, 8] {
        if mc_fingerprint(w)? != base {
            return Err(format!("library outputs differ between 1 and {w} workers"));
        }
        if cli_output(w)? != cli {
            return Err(format!("CLI output differs between 1 and {w} workers"));
        }
    }
    Ok(format!("{} library outputs and CLI output identical across 1, 2, 8 workers", base.lines().count()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("formula self-consistency", c1_formulas),
        ("Mills sandwich", c2_mills),
        ("bound ordering", c3_ordering),
        ("constant-free tail domination", c4_domination),
        ("exact enumeration oracle", c5_enumeration),
        ("per-path identities", c6_identities),
        ("Z mean one", c7_z_mean),
        ("augmentation", c8_augmentation),
        ("rate trend", c9_rate_trend),
        ("regression", c10_regression),
        ("determinism", c11_determinism),
    ];
    let only: Vec<usize> = std::env::var("MTAIL_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match r {
            Ok(d) => println!("criterion {id:>2} {name}: PASS ({d}) [{:.1?}]", t.elapsed()),
            Err(d) => {
                failed += 1;
                println!("criterion {id:>2} {name}: FAIL ({d}) [{:.1?}]", t.elapsed());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
