//! CSV trace and estimate files.
//!
//! Trace columns: `t, foot, ax, ay, az, wx, wy, wz` are required; the groups
//! `fx, fy, fz` (N), `vx, vy, vz` (m/s), `wvx, wvy, wvz` (rad/s, true angular
//! velocity) and `label_stable, label_contact` (0/1) are optional, each all or
//! nothing. Floats are written in shortest round-trip form.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use stable_contact::synthgait::TraceMeta;
use stable_contact::{ContactEstimate, FootId, GaitTrace, ImuSample};

use crate::error::{io_error, CliError};

pub const REQUIRED_COLUMNS: [&str; 8] = ["t", "foot", "ax", "ay", "az", "wx", "wy", "wz"];
pub const FORCE_COLUMNS: [&str; 3] = ["fx", "fy", "fz"];
pub const VELOCITY_COLUMNS: [&str; 3] = ["vx", "vy", "vz"];
pub const ANGVEL_COLUMNS: [&str; 3] = ["wvx", "wvy", "wvz"];
pub const LABEL_COLUMNS: [&str; 2] = ["label_stable", "label_contact"];
pub const ESTIMATE_COLUMNS: [&str; 12] = [
    "t", "foot", "p_ax", "p_ay", "p_az", "p_wx", "p_wy", "p_wz", "p_tan", "p_rot", "p_total", "warm",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub imu: ImuSample,
    pub force: Option<[f64; 3]>,
    pub vel: Option<[f64; 3]>,
    pub angvel: Option<[f64; 3]>,
    /// `(stable, in_contact)`.
    pub label: Option<(bool, bool)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceFile {
    pub rows: Vec<TraceRow>,
    pub has_force: bool,
    pub has_velocity: bool,
    pub has_angvel: bool,
    pub has_labels: bool,
}

impl TraceFile {
    pub fn from_trace(trace: &GaitTrace) -> Self {
        let rows = (0..trace.len())
            .map(|i| TraceRow {
                imu: trace.imu[i],
                force: Some(trace.forces[i].f),
                vel: Some(trace.true_vel[i]),
                angvel: Some(trace.true_angvel[i]),
                label: Some((trace.labels[i].stable, trace.labels[i].in_contact)),
            })
            .collect();
        Self {
            rows,
            has_force: true,
            has_velocity: true,
            has_angvel: true,
            has_labels: true,
        }
    }

    /// Rows grouped by foot in foot order, each group in file order.
    pub fn by_foot(&self) -> Vec<(FootId, Vec<&TraceRow>)> {
        let mut groups: std::collections::BTreeMap<FootId, Vec<&TraceRow>> = Default::default();
        for r in &self.rows {
            groups.entry(r.imu.foot).or_default().push(r);
        }
        groups.into_iter().collect()
    }
}

fn fmt_f64(x: f64) -> String {
    x.to_string()
}

fn fmt_bool(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    io_error(path, e)
}

pub fn write_trace(path: &Path, trace: &TraceFile) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header: Vec<&str> = REQUIRED_COLUMNS.to_vec();
    let groups: [(bool, &[&str]); 4] = [
        (trace.has_force, &FORCE_COLUMNS),
        (trace.has_velocity, &VELOCITY_COLUMNS),
        (trace.has_angvel, &ANGVEL_COLUMNS),
        (trace.has_labels, &LABEL_COLUMNS),
    ];
    for (present, cols) in groups {
        if present {
            header.extend_from_slice(cols);
        }
    }
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for r in &trace.rows {
        let mut rec: Vec<String> = vec![fmt_f64(r.imu.t), r.imu.foot.to_string()];
        rec.extend(r.imu.axes().iter().map(|x| fmt_f64(*x)));
        for (present, v) in [(trace.has_force, r.force), (trace.has_velocity, r.vel), (trace.has_angvel, r.angvel)] {
            if present {
                let v = v.ok_or_else(|| CliError::Data("trace row lacks a declared column group".into()))?;
                rec.extend(v.iter().map(|x| fmt_f64(*x)));
            }
        }
        if trace.has_labels {
            let (s, c) = r.label.ok_or_else(|| CliError::Data("trace row lacks labels".into()))?;
            rec.push(fmt_bool(s).into());
            rec.push(fmt_bool(c).into());
        }
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Column positions by name, with diagnostics naming what is missing.
struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord) -> Self {
        Self {
            index: headers.iter().enumerate().map(|(i, h)| (h.trim().to_string(), i)).collect(),
        }
    }

    fn require(&self, path: &Path, names: &[&str]) -> Result<Vec<usize>, CliError> {
        names
            .iter()
            .map(|n| {
                self.index
                    .get(*n)
                    .copied()
                    .ok_or_else(|| CliError::Data(format!("{}: missing required column `{n}`", path.display())))
            })
            .collect()
    }

    /// All of `names`, none of them, or an error naming the absent ones.
    fn group(&self, path: &Path, names: &[&str]) -> Result<Option<Vec<usize>>, CliError> {
        let found: Vec<Option<usize>> = names.iter().map(|n| self.index.get(*n).copied()).collect();
        if found.iter().all(Option::is_none) {
            return Ok(None);
        }
        let missing: Vec<&str> = names
            .iter()
            .zip(&found)
            .filter(|(_, f)| f.is_none())
            .map(|(n, _)| *n)
            .collect();
        if !missing.is_empty() {
            return Err(CliError::Data(format!(
                "{}: column group {} is incomplete, missing `{}`",
                path.display(),
                names.join("/"),
                missing.join("`, `")
            )));
        }
        Ok(Some(found.into_iter().flatten().collect()))
    }
}

struct Record<'a> {
    path: &'a Path,
    line: u64,
    rec: &'a csv::StringRecord,
}

impl Record<'_> {
    fn err(&self, msg: impl std::fmt::Display) -> CliError {
        CliError::Data(format!("{}:{}: {msg}", self.path.display(), self.line))
    }

    fn field(&self, idx: usize, name: &str) -> Result<&str, CliError> {
        self.rec
            .get(idx)
            .map(str::trim)
            .ok_or_else(|| self.err(format!("missing value for `{name}`")))
    }

    fn f64(&self, idx: usize, name: &str) -> Result<f64, CliError> {
        let s = self.field(idx, name)?;
        let v: f64 = s.parse().map_err(|_| self.err(format!("`{name}` = {s:?} is not a number")))?;
        if !v.is_finite() {
            return Err(self.err(format!("`{name}` = {s:?} is not finite")));
        }
        Ok(v)
    }

    fn triple(&self, idx: &[usize], names: &[&str]) -> Result<[f64; 3], CliError> {
        Ok([
            self.f64(idx[0], names[0])?,
            self.f64(idx[1], names[1])?,
            self.f64(idx[2], names[2])?,
        ])
    }

    fn flag(&self, idx: usize, name: &str) -> Result<bool, CliError> {
        match self.field(idx, name)? {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            s => Err(self.err(format!("`{name}` = {s:?} is not 0 or 1"))),
        }
    }

    fn foot(&self, idx: usize) -> Result<FootId, CliError> {
        let s = self.field(idx, "foot")?;
        s.parse().map_err(|e| self.err(e))
    }
}

fn reader(path: &Path) -> Result<csv::Reader<File>, CliError> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

pub fn read_trace(path: &Path) -> Result<TraceFile, CliError> {
    let mut rdr = reader(path)?;
    let cols = Columns::new(&rdr.headers().map_err(|e| csv_error(path, e))?.clone());
    let req = cols.require(path, &REQUIRED_COLUMNS)?;
    let force = cols.group(path, &FORCE_COLUMNS)?;
    let vel = cols.group(path, &VELOCITY_COLUMNS)?;
    let angvel = cols.group(path, &ANGVEL_COLUMNS)?;
    let labels = cols.group(path, &LABEL_COLUMNS)?;

    let mut out = TraceFile {
        rows: Vec::new(),
        has_force: force.is_some(),
        has_velocity: vel.is_some(),
        has_angvel: angvel.is_some(),
        has_labels: labels.is_some(),
    };
    let mut last_t: HashMap<FootId, f64> = HashMap::new();
    for result in rdr.records() {
        let rec = result.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let r = Record { path, line, rec: &rec };
        let t = r.f64(req[0], "t")?;
        let foot = r.foot(req[1])?;
        let mut axes = [0.0; 6];
        for (k, a) in axes.iter_mut().enumerate() {
            *a = r.f64(req[2 + k], REQUIRED_COLUMNS[2 + k])?;
        }
        let imu = ImuSample::from_axes(t, axes, foot).map_err(|e| r.err(e))?;
        if let Some(prev) = last_t.insert(foot, t) {
            if t <= prev {
                return Err(r.err(format!("t = {t} does not increase after {prev} for foot {foot}")));
            }
        }
        out.rows.push(TraceRow {
            imu,
            force: force.as_ref().map(|i| r.triple(i, &FORCE_COLUMNS)).transpose()?,
            vel: vel.as_ref().map(|i| r.triple(i, &VELOCITY_COLUMNS)).transpose()?,
            angvel: angvel.as_ref().map(|i| r.triple(i, &ANGVEL_COLUMNS)).transpose()?,
            label: labels
                .as_ref()
                .map(|i| Ok::<_, CliError>((r.flag(i[0], LABEL_COLUMNS[0])?, r.flag(i[1], LABEL_COLUMNS[1])?)))
                .transpose()?,
        });
    }
    if out.rows.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    FootId::check_single_family(out.rows.iter().map(|r| r.imu.foot)).map_err(|e| io_error(path, e))?;
    Ok(out)
}

pub fn write_estimates(path: &Path, rows: &[ContactEstimate]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(ESTIMATE_COLUMNS).map_err(|e| csv_error(path, e))?;
    for e in rows {
        let mut rec: Vec<String> = vec![fmt_f64(e.t), e.foot.to_string()];
        rec.extend(e.axis_probs.iter().map(|p| fmt_f64(*p)));
        rec.push(fmt_f64(e.p_tangential));
        rec.push(fmt_f64(e.p_rotational));
        rec.push(fmt_f64(e.p_total));
        rec.push(fmt_bool(e.warm).into());
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Rows are taken as written; the product columns are read, not recomputed.
pub fn read_estimates(path: &Path) -> Result<Vec<ContactEstimate>, CliError> {
    let mut rdr = reader(path)?;
    let cols = Columns::new(&rdr.headers().map_err(|e| csv_error(path, e))?.clone());
    let idx = cols.require(path, &ESTIMATE_COLUMNS)?;
    let names = ESTIMATE_COLUMNS;
    let mut out = Vec::new();
    for result in rdr.records() {
        let rec = result.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let r = Record { path, line, rec: &rec };
        let mut axis_probs = [0.0; 6];
        for (k, p) in axis_probs.iter_mut().enumerate() {
            *p = r.f64(idx[2 + k], names[2 + k])?;
        }
        out.push(ContactEstimate {
            t: r.f64(idx[0], "t")?,
            foot: r.foot(idx[1])?,
            axis_probs,
            p_tangential: r.f64(idx[8], "p_tan")?,
            p_rotational: r.f64(idx[9], "p_rot")?,
            p_total: r.f64(idx[10], "p_total")?,
            warm: r.flag(idx[11], "warm")?,
        });
    }
    Ok(out)
}

/// `run.csv` → `run.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn write_meta(path: &Path, meta: &TraceMeta) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(meta).map_err(|e| io_error(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

/// `Ok(None)` when no sidecar exists.
pub fn read_meta(path: &Path) -> Result<Option<TraceMeta>, CliError> {
    match std::fs::read_to_string(path) {
        Ok(text) => serde_json::from_str(&text).map(Some).map_err(|e| io_error(path, e)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(io_error(path, e)),
    }
}
