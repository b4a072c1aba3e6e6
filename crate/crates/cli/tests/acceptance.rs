//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::path::{Path, PathBuf};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::UnitQuaternion;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use stable_contact::estimator::DEFAULT_WINDOW;
use stable_contact::preprocess::{compensate, synthesize_raw, AttitudeState};
use stable_contact::synthgait::{scenario_names, Embedding, Segment};
use stable_contact::{
    estimate_series, generate, scenario_by_name, schmitt_contact, BiasEstimate, ComplementaryFilter, DeltaThresholds,
    EstimatorConfig, FootId, GaitScenario, GravityModel, ImuSample, Kde1d, NoiseModel, Phase, PhaseKind, Preprocessor,
    SchmittParams,
};
use stable_contact_cli::commands::read_sidecar;
use stable_contact_cli::io::{read_estimates, read_trace};
use stable_contact_cli::{cmd_bench, cmd_estimate, cmd_eval, cmd_generate, RunConfig};

const A1_CASES: usize = 1000;
const A1_MAX_N: usize = 200;
const A1_TOL: f64 = 1e-6;
const A1_BUDGET: Duration = Duration::from_secs(10);

const A2_Z: f64 = 1.959964;
const A2_TOL: f64 = 1e-6;

const A3_MIN_MISS_RATE: f64 = 0.9;
const A3_BUDGET: Duration = Duration::from_secs(30);

const A4_BUDGET: Duration = Duration::from_secs(10);

const A5_WINDOWS: usize = 1000;
const A5_DELTA_SIGMAS: f64 = 3.0;
const A5_MIN_MEDIAN: f64 = 0.93;
const A5_OFFSET_SIGMAS: f64 = 10.0;
const A5_MAX_SLIP_P: f64 = 0.01;
const A5_BUDGET: Duration = Duration::from_secs(30);

const A6_N: usize = 100_000;
const A6_MIN_HZ: f64 = 500.0;
const A6_BUDGET: Duration = Duration::from_secs(60);

const A7_CASES: usize = 1000;
const A7_TOL: f64 = 1e-9;
const A7_MAX_RESIDUAL_SIGMAS: f64 = 0.1;
const A7_BUDGET: Duration = Duration::from_secs(10);

const A8_MIN_STANCE_P: f64 = 0.9;
const A8_MAX_SWING_P: f64 = 0.1;
const A8_MIN_MEDIAN_GAP: f64 = 0.5;
const A8_BUDGET: Duration = Duration::from_secs(30);

const A9_IDENTITY_TOL: f64 = 1e-12;
const A9_BUDGET: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within(budget: Duration, start: Instant) -> Result<(), String> {
    let el = start.elapsed();
    if el > budget {
        Err(format!("runtime {:.1} s exceeds {:.0} s", el.as_secs_f64(), budget.as_secs_f64()))
    } else {
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn config() -> RunConfig {
    RunConfig::load(None, std::iter::empty()).expect("default config")
}

/// Generates, estimates and evaluates one scenario in `dir`.
fn round_trip(dir: &Path, scenario: &str, seed: Option<u64>) -> Result<(PathBuf, PathBuf, PathBuf), String> {
    let trace = dir.join(format!("{scenario}.csv"));
    let est = dir.join(format!("{scenario}.estimates.csv"));
    let report = dir.join(format!("{scenario}.report.json"));
    cmd_generate(scenario, seed, &trace).map_err(|e| e.to_string())?;
    cmd_estimate(&trace, &config(), &est).map_err(|e| e.to_string())?;
    cmd_eval(&trace, &est, &config(), &report).map_err(|e| e.to_string())?;
    Ok((trace, est, report))
}

// Adaptive Simpson over panels of width <= h/2; written independently of the library.
/// `fv` holds f at a, (a + b) / 2 and b.
fn simpson_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fv: [f64; 3], tol: f64, depth: u32) -> f64 {
    let [fa, fm, fb] = fv;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let m = 0.5 * (a + b);
    let (fl, fr) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
    let left = (m - a) / 6.0 * (fa + 4.0 * fl + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * fr + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_adaptive(f, a, m, [fa, fl, fm], tol / 2.0, depth - 1) + simpson_adaptive(f, m, b, [fm, fr, fb], tol / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panel: f64) -> f64 {
    let k = ((b - a) / panel).ceil().max(1.0) as usize;
    let w = (b - a) / k as f64;
    (0..k)
        .map(|i| {
            let lo = a + i as f64 * w;
            let hi = lo + w;
            simpson_adaptive(f, lo, hi, [f(lo), f(0.5 * (lo + hi)), f(hi)], 1e-11 / k as f64, 40)
        })
        .sum()
}

fn a1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xa1);
    let mut worst = 0.0f64;
    for _ in 0..A1_CASES {
        let n = 1 + (rng.next_u64() as usize % A1_MAX_N);
        let h = 10f64.powf(uniform(&mut rng, -2.5, 0.5));
        let centre = uniform(&mut rng, -1.0, 1.0);
        let spread = uniform(&mut rng, 0.0, 2.0);
        let samples: Vec<f64> = (0..n).map(|_| centre + uniform(&mut rng, -spread, spread)).collect();
        let delta = uniform(&mut rng, 0.1, 4.0) * h;
        let kde = Kde1d::new(samples.clone(), h).map_err(|e| e.to_string())?;
        let closed = kde.interval_prob(delta).map_err(|e| e.to_string())?;
        let density = |x: f64| {
            let s: f64 = samples
                .iter()
                .map(|m| (-0.5 * ((x - m) / h).powi(2)).exp())
                .sum();
            s / (n as f64 * h * (2.0 * std::f64::consts::PI).sqrt())
        };
        let numeric = integrate(&density, -delta, delta, 0.5 * h);
        worst = worst.max((closed - numeric).abs());
    }
    within(A1_BUDGET, start)?;
    check(
        worst <= A1_TOL,
        format!("max |closed - quadrature| = {worst:.3e} over {A1_CASES} cases (tol {A1_TOL:e})"),
    )
}

fn a2() -> Outcome {
    let mut worst = 0.0f64;
    for h in [1.0, 0.02467, 0.01653, 3.7] {
        let p = Kde1d::new(vec![0.0], h)
            .and_then(|k| k.interval_prob(A2_Z * h))
            .map_err(|e| e.to_string())?;
        worst = worst.max((p - 0.95).abs());
    }
    check(worst <= A2_TOL, format!("max |P - 0.95| = {worst:.3e} (tol {A2_TOL:e})"))
}

fn a3(dir: &Path) -> Outcome {
    let start = Instant::now();
    let (_, _, report) = round_trip(dir, "slip_walk", None)?;
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let method = json["method"]["rmse"].as_f64().ok_or("missing method rmse")?;
    let baseline = json["baseline"]["rmse"].as_f64().ok_or("missing baseline rmse")?;
    let rate = json["baseline_slip_misses"]["rate"].as_f64().ok_or("no loaded slip samples")?;
    let total = json["baseline_slip_misses"]["total"].as_u64().unwrap_or(0);
    within(A3_BUDGET, start)?;
    check(
        method < baseline && rate >= A3_MIN_MISS_RATE,
        format!(
            "rmse method {method:.4} vs baseline {baseline:.4}; baseline misses {:.1}% of {total} loaded slip samples (need >= {:.0}%)",
            100.0 * rate,
            100.0 * A3_MIN_MISS_RATE
        ),
    )
}

fn a4(dir: &Path) -> Outcome {
    let start = Instant::now();
    let (st, se, _) = round_trip(dir, "stable_walk", Some(11))?;
    let (ft, fe, _) = round_trip(dir, "soft_walk", Some(11))?;
    let (stable, soft) = (read_trace(&st).map_err(|e| e.to_string())?, read_trace(&ft).map_err(|e| e.to_string())?);
    let imu_equal = stable.rows.iter().zip(&soft.rows).all(|(a, b)| a.imu == b.imu) && stable.rows.len() == soft.rows.len();
    let fz = |t: &stable_contact_cli::io::TraceFile| -> Vec<f64> { t.rows.iter().map(|r| r.force.unwrap()[2]).collect() };
    let (fa, fb) = (fz(&stable), fz(&soft));
    let halved = fa.iter().zip(&fb).filter(|(a, b)| a != b).all(|(a, b)| (b - 0.5 * a).abs() < 1e-9);
    let est_equal = std::fs::read(&se).map_err(|e| e.to_string())? == std::fs::read(&fe).map_err(|e| e.to_string())?;
    let p = SchmittParams::default();
    let (ba, bb) = (
        schmitt_contact(&fa, &p, false).map_err(|e| e.to_string())?,
        schmitt_contact(&fb, &p, false).map_err(|e| e.to_string())?,
    );
    let differing = ba.iter().zip(&bb).filter(|(a, b)| a != b).count();
    within(A4_BUDGET, start)?;
    check(
        imu_equal && halved && est_equal && differing > 0,
        format!(
            "IMU identical: {imu_equal}, F_z halved: {halved}, estimate files byte-identical: {est_equal}, baseline differs on {differing} samples"
        ),
    )
}

fn stance_windows(seed: u64) -> Result<Vec<Vec<ImuSample>>, String> {
    let duration = (A5_WINDOWS * DEFAULT_WINDOW) as f64 / 1000.0 + 0.01;
    let scenario = GaitScenario {
        seed,
        ..GaitScenario::new("still", vec![Phase::new(PhaseKind::Stance, duration)])
    };
    let trace = generate(&scenario).map_err(|e| e.to_string())?;
    Ok(trace
        .imu
        .chunks_exact(DEFAULT_WINDOW)
        .take(A5_WINDOWS)
        .map(|c| c.to_vec())
        .collect())
}

fn final_p(config: &EstimatorConfig, window: &[ImuSample]) -> Result<f64, String> {
    estimate_series(config, window)
        .map_err(|e| e.to_string())?
        .last()
        .map(|e| e.p_total)
        .ok_or_else(|| "empty window".to_string())
}

fn a5() -> Outcome {
    let start = Instant::now();
    let noise = NoiseModel::nominal();
    let sigma = *noise.sigma();
    let at_3sigma = EstimatorConfig {
        delta: DeltaThresholds::sigma_multiple(&noise, A5_DELTA_SIGMAS).map_err(|e| e.to_string())?,
        ..EstimatorConfig::with_noise(noise)
    };
    let windows = stance_windows(5)?;
    let still: Vec<f64> = windows.iter().map(|w| final_p(&at_3sigma, w)).collect::<Result<_, _>>()?;
    let med = median(still);
    let default_med = median(
        windows
            .iter()
            .map(|w| final_p(&EstimatorConfig::default(), w))
            .collect::<Result<_, _>>()?,
    );

    let mut worst_slip = 0.0f64;
    for (i, w) in windows.iter().enumerate().take(120) {
        let axis = i % 6;
        let sign = if (i / 6) % 2 == 0 { 1.0 } else { -1.0 };
        let shifted: Vec<ImuSample> = w
            .iter()
            .map(|s| {
                let mut v = s.axes();
                v[axis] += sign * A5_OFFSET_SIGMAS * sigma[axis];
                ImuSample::from_axes(s.t, v, s.foot).unwrap()
            })
            .collect();
        worst_slip = worst_slip.max(final_p(&at_3sigma, &shifted)?);
    }
    within(A5_BUDGET, start)?;
    check(
        med >= A5_MIN_MEDIAN && worst_slip <= A5_MAX_SLIP_P,
        format!(
            "stationary median p_total at δ = 3σ: {med:.4} (need >= {A5_MIN_MEDIAN}; at the default δ = 3√2σ: {default_med:.4}); \
             max p_total with a 10σ offset: {worst_slip:.2e} (need <= {A5_MAX_SLIP_P})"
        ),
    )
}

fn a6() -> Outcome {
    let start = Instant::now();
    let r = cmd_bench(&config(), A6_N).map_err(|e| e.to_string())?;
    within(A6_BUDGET, start)?;
    check(
        r.throughput_hz >= A6_MIN_HZ && r.window_size == DEFAULT_WINDOW,
        format!("{:.0} Hz at d = {} over {} steps on {}", r.throughput_hz, r.window_size, r.n, r.machine),
    )
}

fn a7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xa7);
    let gravity = GravityModel::default();
    let mut worst = 0.0f64;
    for _ in 0..A7_CASES {
        let q = UnitQuaternion::from_euler_angles(
            uniform(&mut rng, -PI, PI),
            uniform(&mut rng, -1.55, 1.55),
            uniform(&mut rng, -PI, PI),
        );
        let bias = BiasEstimate {
            b_a: std::array::from_fn(|_| uniform(&mut rng, -0.5, 0.5)),
            b_w: std::array::from_fn(|_| uniform(&mut rng, -0.05, 0.05)),
        };
        let a: [f64; 3] = std::array::from_fn(|_| uniform(&mut rng, -30.0, 30.0));
        let w: [f64; 3] = std::array::from_fn(|_| uniform(&mut rng, -8.0, 8.0));
        let (ra, rw) = synthesize_raw(a, w, &q, &bias, &gravity);
        let raw = ImuSample::new(0.0, ra, rw, FootId::L).map_err(|e| e.to_string())?;
        let out = compensate(&raw, &AttitudeState { q, t_last: 0.0 }, &bias, &gravity);
        for k in 0..3 {
            worst = worst.max((out.a[k] - a[k]).abs()).max((out.w[k] - w[k]).abs());
        }
    }

    let noise = NoiseModel::nominal();
    let mut scenario = scenario_by_name("stable_walk").ok_or("no stable_walk")?;
    scenario.phases[0].duration = 3.0;
    scenario.embed = Some(Embedding::default());
    let trace = generate(&scenario).map_err(|e| e.to_string())?;
    let mut pre = Preprocessor::calibrate(ComplementaryFilter::default(), &trace.imu[..2000], &noise)
        .map_err(|e| e.to_string())?;
    let out: Vec<ImuSample> = trace.imu.iter().map(|s| pre.process(s)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let stance = &out[..3000];
    let residual = (0..3)
        .map(|k| (stance.iter().map(|s| s.a[k]).sum::<f64>() / stance.len() as f64).abs())
        .fold(0.0, f64::max);
    let limit = A7_MAX_RESIDUAL_SIGMAS * noise.sigma()[0];
    within(A7_BUDGET, start)?;
    check(
        worst <= A7_TOL && residual < limit,
        format!(
            "noiseless round-trip max error {worst:.2e} (tol {A7_TOL:e}); calibrated stance residual {residual:.2e} m/s² (limit {limit:.2e})"
        ),
    )
}

fn p_over(est: &[stable_contact::ContactEstimate], seg: &Segment, frac: f64) -> Vec<f64> {
    let len = seg.end - seg.start;
    let trim = ((1.0 - frac) / 2.0 * len as f64) as usize;
    let (lo, hi) = (seg.start + trim, seg.end - trim);
    // Estimate rows begin at the second sample.
    (lo.max(1)..hi).map(|i| est[i - 1].p_total).collect()
}

fn a8(dir: &Path) -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;

    let (trace, est_path, _) = round_trip(dir, "stable_walk", None)?;
    let est = read_estimates(&est_path).map_err(|e| e.to_string())?;
    let meta = read_sidecar(&trace).map_err(|e| e.to_string())?.ok_or("missing sidecar")?;
    let (mut stance_min, mut swing_max) = (f64::INFINITY, 0.0f64);
    for seg in &meta.segments {
        let p = p_over(&est, seg, 0.5);
        match seg.kind {
            PhaseKind::Stance if seg.step > 0 => stance_min = p.iter().copied().fold(stance_min, f64::min),
            PhaseKind::Swing => swing_max = p.iter().copied().fold(swing_max, f64::max),
            _ => {}
        }
    }
    ok &= stance_min > A8_MIN_STANCE_P && swing_max < A8_MAX_SWING_P;
    notes.push(format!("stable_walk mid-stance min {stance_min:.4}, mid-swing max {swing_max:.2e}"));

    let (trace, est_path, _) = round_trip(dir, "slip_walk", None)?;
    let est = read_estimates(&est_path).map_err(|e| e.to_string())?;
    let meta = read_sidecar(&trace).map_err(|e| e.to_string())?.ok_or("missing sidecar")?;
    let stance_median = |step: usize| -> Option<f64> {
        meta.segments
            .iter()
            .find(|s| s.step == step && s.kind.is_support())
            .map(|s| median(p_over(&est, s, 1.0)))
    };
    let stable = stance_median(1).ok_or("no stable step")?;
    for step in [2, 3] {
        let slip = stance_median(step).ok_or("no slip step")?;
        ok &= stable - slip >= A8_MIN_MEDIAN_GAP;
        notes.push(format!("slip step {step} stance median {slip:.4} vs stable {stable:.4}"));
    }
    within(A8_BUDGET, start)?;
    check(ok, notes.join("; "))
}

fn a9(dir: &Path) -> Outcome {
    let start = Instant::now();
    let mut rows = 0usize;
    for name in scenario_names() {
        let (_, est_path, _) = round_trip(dir, &name, None)?;
        for (i, e) in read_estimates(&est_path).map_err(|e| e.to_string())?.iter().enumerate() {
            e.check_identities(A9_IDENTITY_TOL).map_err(|m| format!("{name} row {i}: {m}"))?;
            rows += 1;
        }
        cmd_bench(&config(), A6_N).map_err(|e| format!("{name} bench: {e}"))?;
    }
    within(A9_BUDGET, start)?;
    Ok(format!(
        "{} scenarios, {rows} estimate rows within [0, 1] with product identities (tol {A9_IDENTITY_TOL:e})",
        scenario_names().len()
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("A1 kde oracle", Box::new(a1)),
        ("A2 cdf sanity", Box::new(a2)),
        ("A3 slip discrimination", Box::new(|| a3(dir.path()))),
        ("A4 terrain invariance", Box::new(|| a4(dir.path()))),
        ("A5 stationary/slip response", Box::new(a5)),
        ("A6 throughput", Box::new(a6)),
        ("A7 preprocess round trip", Box::new(a7)),
        ("A8 gait pattern", Box::new(|| a8(dir.path()))),
        ("A9 end-to-end smoke", Box::new(|| a9(dir.path()))),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("{name}: PASS ({secs:.2} s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{name}: FAIL ({secs:.2} s) {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
