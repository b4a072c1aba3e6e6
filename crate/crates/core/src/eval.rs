//! Scoring of contact probabilities against ground-truth labels, the force
//! threshold baseline, and a throughput benchmark.
//!
//! Labels are 0/1 and compared to probabilities directly. Swing instants
//! (`F_z` at or below the contact threshold) carry label 0.

use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::contactmodel::{schmitt_contact, GroundTruthLabel, SchmittParams};
use crate::error::{invalid, Error, Result};
use crate::estimator::{EstimatorConfig, FootEstimator};
use crate::synthgait::{GaitTrace, GaussianSource, LABEL_CONVENTION};
use crate::types::{ContactEstimate, FootId, ImuSample};

pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const MIN_BENCH_SAMPLES: usize = 100_000;

fn check_pair(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.is_empty() {
        return Err(Error::Empty("predictions"));
    }
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: pred.len(),
            got: truth.len(),
        });
    }
    Ok(())
}

/// Root mean square of `pred - truth`.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(pred, truth)?;
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sum / pred.len() as f64).sqrt())
}

/// Counts of `|pred - truth|` in `bins` uniform bins over [0, 1]. 1.0 goes to the last bin.
pub fn error_histogram(pred: &[f64], truth: &[f64], bins: usize) -> Result<Vec<u64>> {
    check_pair(pred, truth)?;
    if bins < 2 {
        return Err(invalid("bins", format!("need at least 2, got {bins}")));
    }
    let mut counts = vec![0u64; bins];
    for (p, t) in pred.iter().zip(truth) {
        let e = (p - t).abs().clamp(0.0, 1.0);
        let idx = ((e * bins as f64) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(counts)
}

/// Outcome counts with "stable" as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// A prediction counts as positive when `pred >= threshold`.
pub fn confusion(pred: &[f64], truth: &[f64], threshold: f64) -> Result<Confusion> {
    check_pair(pred, truth)?;
    if !threshold.is_finite() {
        return Err(invalid("threshold", "must be finite"));
    }
    let mut c = Confusion::default();
    for (p, t) in pred.iter().zip(truth) {
        match (*p >= threshold, *t >= 0.5) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rmse: f64,
    pub histogram: Vec<u64>,
    pub confusion: Confusion,
    pub threshold: f64,
    pub n: usize,
    pub throughput_hz: Option<f64>,
}

impl EvalReport {
    pub fn score(pred: &[f64], truth: &[f64], threshold: f64) -> Result<Self> {
        Ok(Self {
            rmse: rmse(pred, truth)?,
            histogram: error_histogram(pred, truth, DEFAULT_BINS)?,
            confusion: confusion(pred, truth, threshold)?,
            threshold,
            n: pred.len(),
            throughput_hz: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub threshold: f64,
    /// Score estimates produced before the window was full.
    pub include_warmup: bool,
    /// Baseline contact state before the first sample.
    pub baseline_initial: bool,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            include_warmup: false,
            baseline_initial: false,
        }
    }
}

/// Method and baseline scored on the same label indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub method: EvalReport,
    pub baseline: Option<EvalReport>,
    /// Why the baseline is absent, when it is.
    pub baseline_unavailable: Option<String>,
    /// Indices into the label sequence that were scored.
    #[serde(skip)]
    pub scored: Vec<usize>,
    /// Per scored index: `p_total`.
    #[serde(skip)]
    pub method_pred: Vec<f64>,
    /// Per scored index: the 0/1 stable label.
    #[serde(skip)]
    pub truth: Vec<f64>,
    /// Per scored index: the baseline's 0/1 output.
    #[serde(skip)]
    pub baseline_pred: Vec<f64>,
    pub label_convention: String,
    pub warmup_excluded: usize,
}

/// Maps each estimate to the label with the same timestamp.
///
/// Estimates start at the second sample, so a full series has exactly one row
/// fewer than the labels.
pub fn align(labels: &[GroundTruthLabel], estimates: &[ContactEstimate]) -> Result<Vec<usize>> {
    if labels.is_empty() {
        return Err(Error::Empty("labels"));
    }
    if estimates.len() + 1 != labels.len() {
        return Err(Error::Alignment(format!(
            "{} estimates for {} labeled samples; expected {}",
            estimates.len(),
            labels.len(),
            labels.len() - 1
        )));
    }
    let mut idx = Vec::with_capacity(estimates.len());
    let mut j = 0;
    for (row, e) in estimates.iter().enumerate() {
        while j < labels.len() && labels[j].t < e.t {
            j += 1;
        }
        if j == labels.len() || labels[j].t != e.t {
            return Err(Error::Alignment(format!("estimate row {row} at t = {} has no label", e.t)));
        }
        if labels[j].foot != e.foot {
            return Err(Error::Alignment(format!(
                "estimate row {row} is for foot {} but the label is for {}",
                e.foot, labels[j].foot
            )));
        }
        idx.push(j);
        j += 1;
    }
    Ok(idx)
}

/// Scores `p_total` and the Schmitt baseline on `F_z` against the stable labels.
/// Without `fz` only the method is scored.
pub fn compare(
    labels: &[GroundTruthLabel],
    fz: Option<&[f64]>,
    estimates: &[ContactEstimate],
    baseline: &SchmittParams,
    opts: &CompareOptions,
) -> Result<Comparison> {
    let idx = align(labels, estimates)?;
    let keep: Vec<(usize, f64)> = idx
        .iter()
        .zip(estimates)
        .filter(|(_, e)| opts.include_warmup || e.warm)
        .map(|(&i, e)| (i, e.p_total))
        .collect();
    if keep.is_empty() {
        return Err(Error::Empty("scored estimates after warm-up exclusion"));
    }
    let scored: Vec<usize> = keep.iter().map(|k| k.0).collect();
    let pred: Vec<f64> = keep.iter().map(|k| k.1).collect();
    let truth: Vec<f64> = scored.iter().map(|&i| f64::from(u8::from(labels[i].stable))).collect();
    let method = EvalReport::score(&pred, &truth, opts.threshold)?;

    let (baseline_report, baseline_pred, unavailable) = match fz {
        Some(fz) => {
            if fz.len() != labels.len() {
                return Err(Error::LengthMismatch {
                    expected: labels.len(),
                    got: fz.len(),
                });
            }
            let contact = schmitt_contact(fz, baseline, opts.baseline_initial)?;
            let bpred: Vec<f64> = scored.iter().map(|&i| f64::from(u8::from(contact[i]))).collect();
            (Some(EvalReport::score(&bpred, &truth, opts.threshold)?), bpred, None)
        }
        None => (None, Vec::new(), Some("no normal force channel in the trace".to_string())),
    };

    Ok(Comparison {
        method,
        baseline: baseline_report,
        baseline_unavailable: unavailable,
        warmup_excluded: estimates.len() - scored.len(),
        scored,
        method_pred: pred,
        truth,
        baseline_pred,
        label_convention: LABEL_CONVENTION.to_string(),
    })
}

pub fn compare_trace(
    trace: &GaitTrace,
    estimates: &[ContactEstimate],
    baseline: &SchmittParams,
    opts: &CompareOptions,
) -> Result<Comparison> {
    let fz = trace.fz();
    compare(&trace.labels, Some(&fz), estimates, baseline, opts)
}

/// Counts `(missed, total)` over scored instants that are in contact, labeled
/// unstable and loaded above the baseline's high threshold; missed ones are
/// those where the baseline still reports contact.
pub fn baseline_slip_misses(
    cmp: &Comparison,
    labels: &[GroundTruthLabel],
    fz: &[f64],
    baseline: &SchmittParams,
) -> (usize, usize) {
    let (mut total, mut missed) = (0usize, 0usize);
    for (&i, &b) in cmp.scored.iter().zip(&cmp.baseline_pred) {
        let l = &labels[i];
        if l.in_contact && !l.stable && fz[i] > baseline.high {
            total += 1;
            if b >= 0.5 {
                missed += 1;
            }
        }
    }
    (missed, total)
}

/// `missed / total` from [`baseline_slip_misses`]; `None` when there is nothing to count.
pub fn baseline_slip_miss_rate(
    cmp: &Comparison,
    labels: &[GroundTruthLabel],
    fz: &[f64],
    baseline: &SchmittParams,
) -> Option<f64> {
    let (missed, total) = baseline_slip_misses(cmp, labels, fz, baseline);
    (total > 0).then(|| missed as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub throughput_hz: f64,
    pub n: usize,
    pub window_size: usize,
    pub elapsed_s: f64,
    pub machine: String,
}

/// Operating system, architecture, core count and, where available, the CPU model.
pub fn machine_descriptor() -> String {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let model = std::fs::read_to_string("/proc/cpuinfo").ok().and_then(|s| {
        s.lines()
            .find(|l| l.starts_with("model name"))
            .and_then(|l| l.split(':').nth(1))
            .map(|m| m.trim().to_string())
    });
    let mut d = format!("{}-{}, {cores} cores", std::env::consts::OS, std::env::consts::ARCH);
    if let Some(m) = model {
        d.push_str(", ");
        d.push_str(&m);
    }
    d
}

/// Single-thread steady-state step rate on pre-generated stationary noise.
///
/// The window is filled before the clock starts; the timed loop feeds `n` further samples.
pub fn throughput_bench(config: &EstimatorConfig, n: usize) -> Result<BenchResult> {
    if n < MIN_BENCH_SAMPLES {
        return Err(invalid("n", format!("need at least {MIN_BENCH_SAMPLES} samples, got {n}")));
    }
    let sigma = config.noise.sigma();
    let mut gauss = GaussianSource::new(0x5eed);
    let dt = 1.0 / config.sample_rate_hz;
    let total = n + config.window_size;
    let samples: Vec<ImuSample> = (0..total)
        .map(|i| {
            let v = std::array::from_fn(|k| sigma[k] * gauss.next());
            ImuSample::from_axes(i as f64 * dt, v, FootId::R)
        })
        .collect::<Result<_>>()?;

    let mut est = FootEstimator::new(*config)?;
    for s in &samples[..config.window_size] {
        est.step(s)?;
    }
    let mut sink = 0.0;
    let start = Instant::now();
    for s in &samples[config.window_size..] {
        if let Some(e) = est.step(black_box(s))? {
            sink += e.p_total;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    black_box(sink);
    Ok(BenchResult {
        throughput_hz: n as f64 / elapsed.max(f64::MIN_POSITIVE),
        n,
        window_size: config.window_size,
        elapsed_s: elapsed,
        machine: machine_descriptor(),
    })
}
