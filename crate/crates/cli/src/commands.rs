use std::path::{Path, PathBuf};

use serde::Serialize;
use stable_contact::contactmodel::{label_trace, ForceSample, GroundTruthLabel, SchmittParams};
use stable_contact::eval::{baseline_slip_misses, throughput_bench, BenchResult, EvalReport, MIN_BENCH_SAMPLES};
use stable_contact::synthgait::{scenario_names, TraceMeta, LABEL_CONVENTION};
use stable_contact::{
    compare, estimate_series, generate, scenario_by_name, ContactEstimate, EstimatorConfig, FootId, GaitScenario,
    ImuSample, Preprocessor,
};

use crate::config::RunConfig;
use crate::error::{io_error, CliError};
use crate::io::{
    read_estimates, read_meta, read_trace, sidecar_path, write_estimates, write_meta, write_trace, TraceFile, TraceRow,
    ANGVEL_COLUMNS, FORCE_COLUMNS, LABEL_COLUMNS, VELOCITY_COLUMNS,
};

/// A built-in scenario name, or a path to a TOML scenario definition.
pub fn resolve_scenario(name_or_file: &str) -> Result<GaitScenario, CliError> {
    if let Some(s) = scenario_by_name(name_or_file) {
        return Ok(s);
    }
    let path = Path::new(name_or_file);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        return toml::from_str(&text).map_err(|e| io_error(path, e));
    }
    Err(CliError::Usage(format!(
        "unknown scenario {name_or_file:?}; built-in scenarios: {}",
        scenario_names().join(", ")
    )))
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub trace: PathBuf,
    pub meta: PathBuf,
    pub rows: usize,
}

/// Writes the trace CSV and its `.meta.json` sidecar.
pub fn cmd_generate(scenario: &str, seed: Option<u64>, out: &Path) -> Result<Generated, CliError> {
    let mut s = resolve_scenario(scenario)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let trace = generate(&s)?;
    let file = TraceFile::from_trace(&trace);
    write_trace(out, &file)?;
    let meta = sidecar_path(out);
    write_meta(&meta, &trace.meta)?;
    Ok(Generated {
        trace: out.to_path_buf(),
        meta,
        rows: trace.len(),
    })
}

#[derive(Debug, Clone)]
pub struct Estimated {
    pub rows: Vec<ContactEstimate>,
    pub preprocessed: bool,
    pub warnings: Vec<String>,
}

fn estimate_foot(
    foot: FootId,
    rows: &[&TraceRow],
    config: &RunConfig,
    estimator: &EstimatorConfig,
    preprocess: bool,
) -> Result<Vec<ContactEstimate>, CliError> {
    let raw: Vec<ImuSample> = rows.iter().map(|r| r.imu).collect();
    let samples = if preprocess {
        let n = config.preprocess.calibration_samples;
        if raw.len() < n {
            return Err(CliError::Data(format!(
                "foot {foot}: {} samples, fewer than preprocess.calibration_samples = {n}",
                raw.len()
            )));
        }
        let mut pre = Preprocessor::calibrate(config.filter()?, &raw[..n], &estimator.noise)
            .map_err(|e| {
                CliError::Data(format!(
                    "foot {foot}: calibration failed: {e} (set preprocess.bypass = true if the trace is already free of gravity and bias)"
                ))
            })?;
        raw.iter()
            .map(|s| pre.process(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Data(format!("foot {foot}: {e}")))?
    } else {
        raw
    };
    estimate_series(estimator, &samples).map_err(|e| CliError::Data(format!("foot {foot}: {e}")))
}

/// Runs preprocessing (unless bypassed) and the estimator per foot, in parallel
/// across feet. Output is sorted by foot, then time.
pub fn cmd_estimate(input: &Path, config: &RunConfig, out: &Path) -> Result<Estimated, CliError> {
    let estimator = config.estimator_config()?;
    let warnings = config.warnings();
    let trace = read_trace(input)?;
    let bypass = match config.preprocess.bypass {
        Some(b) => b,
        None => read_meta(&sidecar_path(input))?.is_some_and(|m| m.precompensated),
    };
    let groups = trace.by_foot();
    let results: Vec<Result<Vec<ContactEstimate>, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = groups
            .iter()
            .map(|(foot, rows)| scope.spawn(|| estimate_foot(*foot, rows, config, &estimator, !bypass)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CliError::Data("estimator thread panicked".into()))))
            .collect()
    });
    let mut rows = Vec::with_capacity(trace.rows.len());
    for r in results {
        rows.extend(r?);
    }
    write_estimates(out, &rows)?;
    Ok(Estimated {
        rows,
        preprocessed: !bypass,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SlipMisses {
    pub missed: usize,
    pub total: usize,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalFile {
    pub feet: Vec<FootId>,
    pub method: EvalReport,
    pub baseline: Option<EvalReport>,
    pub baseline_unavailable: Option<String>,
    pub baseline_params: SchmittParams,
    /// Loaded slipping instants the baseline still calls stable contact.
    pub baseline_slip_misses: Option<SlipMisses>,
    pub label_convention: String,
    pub label_source: String,
    pub warmup_excluded: usize,
}

fn labels_for(trace: &TraceFile, foot: FootId, rows: &[&TraceRow], config: &RunConfig) -> Result<Vec<GroundTruthLabel>, CliError> {
    if trace.has_labels {
        return Ok(rows
            .iter()
            .map(|r| {
                let (stable, in_contact) = r.label.expect("label columns present");
                GroundTruthLabel {
                    t: r.imu.t,
                    foot,
                    stable,
                    in_contact,
                }
            })
            .collect());
    }
    if !(trace.has_force && trace.has_velocity && trace.has_angvel) {
        return Err(CliError::Data(format!(
            "trace needs columns {} or all of {}, {}, {} to derive labels",
            LABEL_COLUMNS.join(", "),
            FORCE_COLUMNS.join(", "),
            VELOCITY_COLUMNS.join(", "),
            ANGVEL_COLUMNS.join(", ")
        )));
    }
    let forces = rows
        .iter()
        .map(|r| ForceSample::new(r.imu.t, r.force.expect("force columns present"), foot))
        .collect::<Result<Vec<_>, _>>()?;
    let vel: Vec<[f64; 3]> = rows.iter().map(|r| r.vel.expect("velocity columns present")).collect();
    let ang: Vec<[f64; 3]> = rows.iter().map(|r| r.angvel.expect("angvel columns present")).collect();
    Ok(label_trace(&forces, &vel, &ang, &config.labeler_params())?)
}

fn histogram_path(report: &Path) -> PathBuf {
    report.with_extension("histogram.csv")
}

fn write_histogram(path: &Path, method: &EvalReport, baseline: Option<&EvalReport>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(["bin", "lo", "hi", "method", "baseline"]).map_err(|e| io_error(path, e))?;
    let bins = method.histogram.len();
    for (i, count) in method.histogram.iter().enumerate() {
        let b = baseline.map_or(String::new(), |b| b.histogram[i].to_string());
        w.write_record([
            i.to_string(),
            (i as f64 / bins as f64).to_string(),
            ((i + 1) as f64 / bins as f64).to_string(),
            count.to_string(),
            b,
        ])
        .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Scores estimates against the trace's labels and the Schmitt baseline on its
/// normal force. Writes a JSON report and a histogram CSV next to it.
pub fn cmd_eval(trace_path: &Path, estimates_path: &Path, config: &RunConfig, report: &Path) -> Result<EvalFile, CliError> {
    let trace = read_trace(trace_path)?;
    let estimates = read_estimates(estimates_path)?;
    let schmitt = config.schmitt()?;
    let opts = config.compare_options();

    let groups = trace.by_foot();
    if let Some(e) = estimates.iter().find(|e| !groups.iter().any(|(f, _)| *f == e.foot)) {
        return Err(CliError::Data(format!(
            "alignment failure: estimates for foot {} which is absent from the trace",
            e.foot
        )));
    }

    let (mut pred, mut truth, mut bpred) = (Vec::new(), Vec::new(), Vec::new());
    let (mut missed, mut total, mut warmup) = (0, 0, 0);
    let mut feet = Vec::new();
    for (foot, rows) in &groups {
        let labels = labels_for(&trace, *foot, rows, config)?;
        let fz: Option<Vec<f64>> = trace
            .has_force
            .then(|| rows.iter().map(|r| r.force.expect("force columns present")[2]).collect());
        let est: Vec<ContactEstimate> = estimates.iter().filter(|e| e.foot == *foot).copied().collect();
        let cmp = compare(&labels, fz.as_deref(), &est, &schmitt, &opts)
            .map_err(|e| CliError::Data(format!("foot {foot}: {e}")))?;
        if let Some(fz) = &fz {
            let (m, t) = baseline_slip_misses(&cmp, &labels, fz, &schmitt);
            missed += m;
            total += t;
        }
        pred.extend_from_slice(&cmp.method_pred);
        truth.extend_from_slice(&cmp.truth);
        bpred.extend_from_slice(&cmp.baseline_pred);
        warmup += cmp.warmup_excluded;
        feet.push(*foot);
    }

    let method = EvalReport::score(&pred, &truth, opts.threshold)?;
    let baseline = if trace.has_force {
        Some(EvalReport::score(&bpred, &truth, opts.threshold)?)
    } else {
        None
    };
    let file = EvalFile {
        feet,
        baseline_unavailable: baseline
            .is_none()
            .then(|| format!("trace has no {} columns", FORCE_COLUMNS.join("/"))),
        baseline_slip_misses: baseline.as_ref().map(|_| SlipMisses {
            missed,
            total,
            rate: (total > 0).then(|| missed as f64 / total as f64),
        }),
        method,
        baseline,
        baseline_params: schmitt,
        label_convention: LABEL_CONVENTION.to_string(),
        label_source: if trace.has_labels {
            "label columns".into()
        } else {
            "derived from force and velocity columns".into()
        },
        warmup_excluded: warmup,
    };
    let text = serde_json::to_string_pretty(&file).map_err(|e| io_error(report, e))?;
    std::fs::write(report, text + "\n").map_err(|e| io_error(report, e))?;
    write_histogram(&histogram_path(report), &file.method, file.baseline.as_ref())?;
    Ok(file)
}

pub fn cmd_bench(config: &RunConfig, n: usize) -> Result<BenchResult, CliError> {
    if n < MIN_BENCH_SAMPLES {
        return Err(CliError::Usage(format!("--n must be at least {MIN_BENCH_SAMPLES}, got {n}")));
    }
    Ok(throughput_bench(&config.estimator_config()?, n)?)
}

pub fn bench_line(r: &BenchResult) -> String {
    format!(
        "throughput_hz={:.0} n={} window_size={} elapsed_s={:.6} machine=\"{}\"",
        r.throughput_hz, r.n, r.window_size, r.elapsed_s, r.machine
    )
}

pub fn read_sidecar(trace: &Path) -> Result<Option<TraceMeta>, CliError> {
    read_meta(&sidecar_path(trace))
}
