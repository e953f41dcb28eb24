//! Parameter grids of independent steady-state solves.
//!
//! A sweep varies up to two parameters on linear grids. Every grid point is
//! derived, solved and analysed on its own; failures are stored with the
//! point rather than aborting the run. Records are kept in grid order (first
//! axis slowest) whatever the number of workers, so exports are
//! byte-identical between runs.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::AnalyticCorrelations;
use crate::fock::FockSpace;
use crate::observables::{CorrelationResult, ModeStatistics};
use crate::params::{DerivedParams, ParamsError, PhysicalParams};
use crate::steadystate;
use crate::Mode;

pub const MAX_AXES: usize = 2;
pub const DEFAULT_CUTOFF: usize = 4;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("no defined `{observable}` values for mode {mode}")]
    AllUndefined { observable: Observable, mode: Mode },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

/// A parameter a sweep axis may vary. Values are in rad/s.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    /// Δ₀.
    Detuning,
    /// Ω.
    AngularVelocity,
    /// J.
    Backscattering,
    /// ξ, overriding the value implied by the input power.
    Xi,
    /// χ, overriding the value implied by the Kerr index.
    Chi,
}

impl Parameter {
    pub fn name(self) -> &'static str {
        match self {
            Parameter::Detuning => "detuning",
            Parameter::AngularVelocity => "angular_velocity",
            Parameter::Backscattering => "backscattering",
            Parameter::Xi => "xi",
            Parameter::Chi => "chi",
        }
    }
}

impl std::fmt::Display for Parameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Parameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "detuning" | "delta0" => Ok(Parameter::Detuning),
            "angular_velocity" | "omega" => Ok(Parameter::AngularVelocity),
            "backscattering" | "J" => Ok(Parameter::Backscattering),
            "xi" => Ok(Parameter::Xi),
            "chi" => Ok(Parameter::Chi),
            other => Err(format!("unknown sweep parameter `{other}`")),
        }
    }
}

/// Linear grid `min, …, max` with `count` points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub parameter: Parameter,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(parameter: Parameter, min: f64, max: f64, count: usize) -> Self {
        Axis {
            parameter,
            min,
            max,
            count,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Which solution routes to evaluate at each point.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Oracle {
    Numeric,
    Analytic,
    #[default]
    Both,
}

impl Oracle {
    fn numeric(self) -> bool {
        self != Oracle::Analytic
    }

    fn analytic(self) -> bool {
        self != Oracle::Numeric
    }
}

/// Fixed replacements for derived rates, applied before the axis values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
}

fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: String,
    pub base: PhysicalParams,
    #[serde(default)]
    pub overrides: Overrides,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub oracle: Oracle,
    /// Photon cutoff per mode for the numeric solve.
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    /// Export `P_k` and the matching Poisson values alongside the scalars.
    #[serde(default)]
    pub histograms: bool,
}

impl SweepSpec {
    pub fn new(name: &str, base: PhysicalParams, axes: Vec<Axis>) -> Self {
        SweepSpec {
            name: name.to_string(),
            base,
            overrides: Overrides::default(),
            axes,
            oracle: Oracle::Both,
            cutoff: DEFAULT_CUTOFF,
            histograms: false,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let mut errs = Vec::new();
        if self.axes.is_empty() {
            errs.push("at least one axis is required".to_string());
        }
        if self.axes.len() > MAX_AXES {
            errs.push(format!("at most {MAX_AXES} axes allowed (got {})", self.axes.len()));
        }
        for (k, axis) in self.axes.iter().enumerate() {
            if axis.count < 2 {
                errs.push(format!("axis {k} ({}) needs at least 2 points", axis.parameter));
            }
            if !(axis.min.is_finite() && axis.max.is_finite()) {
                errs.push(format!("axis {k} ({}) bounds must be finite", axis.parameter));
            }
            if self.axes[..k].iter().any(|a| a.parameter == axis.parameter) {
                errs.push(format!("axis {k} repeats parameter {}", axis.parameter));
            }
        }
        if self.cutoff < 3 {
            errs.push(format!("cutoff must be at least 3 (got {})", self.cutoff));
        }
        for (name, v) in [("xi", self.overrides.xi), ("chi", self.overrides.chi)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    errs.push(format!("override {name} must be finite and >= 0 (got {v})"));
                }
            }
        }
        if let Err(ParamsError::Invalid(mut v)) = self.base.validate() {
            errs.append(&mut v);
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(SweepError::Invalid(errs))
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis coordinates of grid point `k` (first axis slowest).
    pub fn coordinates(&self, mut k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            *slot = axis.value(k % axis.count);
            k /= axis.count;
        }
        out
    }

    /// Physical and derived parameters at the given coordinates.
    pub fn point(&self, coords: &[f64]) -> Result<(PhysicalParams, DerivedParams), ParamsError> {
        let mut p = self.base.clone();
        for (axis, &v) in self.axes.iter().zip(coords) {
            match axis.parameter {
                Parameter::Detuning => p.detuning = v,
                Parameter::AngularVelocity => p.angular_velocity = v,
                Parameter::Backscattering => p.backscattering = v,
                Parameter::Xi | Parameter::Chi => {}
            }
        }
        let mut d = p.derive()?;
        if let Some(xi) = self.overrides.xi {
            d.xi = xi;
        }
        if let Some(chi) = self.overrides.chi {
            d.chi = chi;
        }
        for (axis, &v) in self.axes.iter().zip(coords) {
            match axis.parameter {
                Parameter::Xi => d.xi = v,
                Parameter::Chi => d.chi = v,
                _ => {}
            }
        }
        Ok((p, d))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub coords: Vec<f64>,
    pub detuning: f64,
    pub angular_velocity: f64,
    pub params_hash: Option<String>,
    pub numeric: Option<CorrelationResult>,
    pub analytic: Option<AnalyticCorrelations>,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub records: Vec<SweepRecord>,
}

fn solve_point(spec: &SweepSpec, space: FockSpace, k: usize) -> SweepRecord {
    let coords = spec.coordinates(k);
    let mut record = SweepRecord {
        coords: coords.clone(),
        detuning: spec.base.detuning,
        angular_velocity: spec.base.angular_velocity,
        params_hash: None,
        numeric: None,
        analytic: None,
        failures: Vec::new(),
    };
    let (p, d) = match spec.point(&coords) {
        Ok(v) => v,
        Err(e) => {
            record.failures.push(format!("params: {e}"));
            return record;
        }
    };
    record.detuning = p.detuning;
    record.angular_velocity = p.angular_velocity;
    record.params_hash = Some(d.hash());
    if spec.oracle.numeric() {
        match steadystate::steady_state(&d, space) {
            Ok(rho) => record.numeric = Some(CorrelationResult::compute(&rho, &d)),
            Err(e) => record.failures.push(format!("numeric: {e}")),
        }
    }
    if spec.oracle.analytic() {
        match AnalyticCorrelations::compute(&d) {
            Ok(a) => record.analytic = Some(a),
            Err(e) => record.failures.push(format!("analytic: {e}")),
        }
    }
    record
}

/// Solve every grid point of `spec` on a pool of `workers` threads.
pub fn run(spec: &SweepSpec, workers: usize) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let space = FockSpace::symmetric(spec.cutoff).map_err(|e| SweepError::Invalid(vec![e.to_string()]))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let records = pool.install(|| {
        (0..spec.len())
            .into_par_iter()
            .map(|k| solve_point(spec, space, k))
            .collect()
    });
    Ok(SweepResult {
        spec: spec.clone(),
        records,
    })
}

/// Quantity a sweep can be searched over.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    MeanPhoton,
    Excitation,
    G2,
    G3,
    G2Analytic,
    G3Analytic,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::MeanPhoton => "N",
            Observable::Excitation => "S",
            Observable::G2 => "g2",
            Observable::G3 => "g3",
            Observable::G2Analytic => "g2_analytic",
            Observable::G3Analytic => "g3_analytic",
        }
    }
}

impl std::fmt::Display for Observable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl SweepRecord {
    pub fn stats(&self, mode: Mode) -> Option<&ModeStatistics> {
        self.numeric.as_ref().map(|n| n.mode(mode))
    }

    pub fn value(&self, observable: Observable, mode: Mode) -> Option<f64> {
        match observable {
            Observable::MeanPhoton => self.stats(mode).map(|s| s.mean_photon),
            Observable::Excitation => self.stats(mode).and_then(|s| s.excitation),
            Observable::G2 => self.stats(mode).and_then(|s| s.g2),
            Observable::G3 => self.stats(mode).and_then(|s| s.g3),
            Observable::G2Analytic => self.analytic.as_ref().and_then(|a| a.g2(mode)),
            Observable::G3Analytic => self.analytic.as_ref().and_then(|a| a.g3(mode)),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Min,
    Max,
}

/// Index and value of the extreme defined record. Equal values resolve to
/// the smaller Δ₀, then the smaller Ω.
pub fn find_extremum(
    result: &SweepResult,
    observable: Observable,
    mode: Mode,
    kind: Extremum,
) -> Result<(usize, f64), SweepError> {
    let mut best: Option<(usize, f64)> = None;
    for (k, rec) in result.records.iter().enumerate() {
        let Some(v) = rec.value(observable, mode).filter(|v| v.is_finite()) else {
            continue;
        };
        let replace = match best {
            None => true,
            Some((b, bv)) => {
                let better = match kind {
                    Extremum::Min => v < bv,
                    Extremum::Max => v > bv,
                };
                let other = &result.records[b];
                better
                    || (v == bv
                        && (rec.detuning, rec.angular_velocity)
                            < (other.detuning, other.angular_velocity))
            }
        };
        if replace {
            best = Some((k, v));
        }
    }
    best.ok_or(SweepError::AllUndefined { observable, mode })
}

/// One exported cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn number(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Number)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Number(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Number(v) => serde_json::Value::from(*v),
            Cell::Text(s) => serde_json::Value::from(s.as_str()),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// Flat column/row view of a sweep, as written to disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of column `name`, `None` where empty.
    pub fn numbers(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column(name)?;
        Some(self.rows.iter().map(|r| r[k].as_number()).collect())
    }
}

const TEXT_COLUMNS: &[&str] = &["params_hash", "regime_cw", "regime_ccw", "flags"];

impl SweepResult {
    pub fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self.spec.axes.iter().map(|a| a.parameter.name().to_string()).collect();
        cols.push("params_hash".into());
        for m in Mode::BOTH {
            for q in ["N", "S", "g2", "g3", "regime"] {
                cols.push(format!("{q}_{m}"));
            }
        }
        for q in ["g2_analytic", "g3_analytic"] {
            for m in Mode::BOTH {
                cols.push(format!("{q}_{m}"));
            }
        }
        cols.push("flags".into());
        if self.spec.histograms {
            for m in Mode::BOTH {
                for k in 0..=self.spec.cutoff {
                    cols.push(format!("P{k}_{m}"));
                }
                for k in 0..=self.spec.cutoff {
                    cols.push(format!("poisson{k}_{m}"));
                }
            }
        }
        cols
    }

    fn row(&self, rec: &SweepRecord) -> Vec<Cell> {
        let mut row: Vec<Cell> = rec.coords.iter().map(|&v| Cell::Number(v)).collect();
        row.push(rec.params_hash.clone().map_or(Cell::Empty, Cell::Text));
        for m in Mode::BOTH {
            let s = rec.stats(m);
            row.push(Cell::number(s.map(|s| s.mean_photon)));
            row.push(Cell::number(s.and_then(|s| s.excitation)));
            row.push(Cell::number(s.and_then(|s| s.g2)));
            row.push(Cell::number(s.and_then(|s| s.g3)));
            row.push(
                s.and_then(|s| s.regime)
                    .map_or(Cell::Empty, |r| Cell::Text(r.label().to_string())),
            );
        }
        for obs in [Observable::G2Analytic, Observable::G3Analytic] {
            for m in Mode::BOTH {
                row.push(Cell::number(rec.value(obs, m)));
            }
        }
        row.push(if rec.failures.is_empty() {
            Cell::Empty
        } else {
            Cell::Text(rec.failures.join(" | "))
        });
        if self.spec.histograms {
            let len = self.spec.cutoff + 1;
            for m in Mode::BOTH {
                let s = rec.stats(m);
                for k in 0..len {
                    row.push(Cell::number(s.map(|s| s.distribution[k])));
                }
                for k in 0..len {
                    row.push(Cell::number(s.map(|s| s.poisson[k])));
                }
            }
        }
        row
    }

    pub fn table(&self) -> Table {
        Table {
            name: self.spec.name.clone(),
            columns: self.columns(),
            rows: self.records.iter().map(|r| self.row(r)).collect(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SweepError + '_ {
    move |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl ToString) -> SweepError {
    SweepError::Format {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

pub fn table_to_csv(table: &Table) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::to_csv))?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn table_to_json(table: &Table) -> String {
    let records: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = serde_json::Map::new();
            for (c, v) in table.columns.iter().zip(row) {
                obj.insert(c.clone(), v.to_json());
            }
            serde_json::Value::Object(obj)
        })
        .collect();
    let doc = serde_json::json!({
        "name": table.name,
        "columns": table.columns,
        "records": records,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("plain values");
    s.push('\n');
    s
}

/// Write `result` to `path`.
pub fn export(result: &SweepResult, format: Format, path: &Path) -> Result<(), SweepError> {
    let table = result.table();
    let bytes = match format {
        Format::Csv => table_to_csv(&table).map_err(|e| format_err(path, e))?,
        Format::Json => table_to_json(&table).into_bytes(),
    };
    fs::write(path, bytes).map_err(io_err(path))
}

fn parse_cell(column: &str, raw: &str) -> Result<Cell, String> {
    if raw.is_empty() {
        Ok(Cell::Empty)
    } else if TEXT_COLUMNS.contains(&column) {
        Ok(Cell::Text(raw.to_string()))
    } else {
        raw.parse::<f64>()
            .map(Cell::Number)
            .map_err(|e| format!("column {column}: `{raw}`: {e}"))
    }
}

/// Read a file written by [`export`].
pub fn import(path: &Path) -> Result<Table, SweepError> {
    let format = Format::from_path(path).ok_or_else(|| format_err(path, "expected a .csv or .json file"))?;
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    match format {
        Format::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            let columns: Vec<String> = r
                .headers()
                .map_err(|e| format_err(path, e))?
                .iter()
                .map(str::to_string)
                .collect();
            let mut rows = Vec::new();
            for rec in r.records() {
                let rec = rec.map_err(|e| format_err(path, e))?;
                let row = columns
                    .iter()
                    .zip(rec.iter())
                    .map(|(c, v)| parse_cell(c, v))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| format_err(path, e))?;
                rows.push(row);
            }
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            Ok(Table { name, columns, rows })
        }
        Format::Json => {
            let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| format_err(path, e))?;
            let columns: Vec<String> = serde_json::from_value(doc["columns"].clone()).map_err(|e| format_err(path, e))?;
            let records = doc["records"]
                .as_array()
                .ok_or_else(|| format_err(path, "missing `records` array"))?;
            let mut rows = Vec::with_capacity(records.len());
            for rec in records {
                let row = columns
                    .iter()
                    .map(|c| match &rec[c.as_str()] {
                        serde_json::Value::Null => Ok(Cell::Empty),
                        serde_json::Value::String(s) => Ok(Cell::Text(s.clone())),
                        serde_json::Value::Number(n) => n
                            .as_f64()
                            .map(Cell::Number)
                            .ok_or_else(|| format_err(path, format!("column {c}: bad number"))),
                        other => Err(format_err(path, format!("column {c}: unexpected {other}"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                rows.push(row);
            }
            let name = doc["name"].as_str().unwrap_or_default().to_string();
            Ok(Table { name, columns, rows })
        }
    }
}

/// Δ₀ whose static correlations best match the target pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub detuning: f64,
    pub g2: f64,
    pub g3: f64,
    /// Larger of the two relative deviations from the target.
    pub mismatch: f64,
}

/// Scan Δ₀ over `[min, max]` for the point whose driven-mode `(g², g³)`
/// has the smallest worst-case relative deviation from `target`, then refine
/// twice on finer grids around the best point.
pub fn calibrate_detuning(
    base: &PhysicalParams,
    target: (f64, f64),
    range: (f64, f64),
    cutoff: usize,
    workers: usize,
) -> Result<Calibration, SweepError> {
    let mode = base.drive_direction;
    let mut lo = range.0;
    let mut hi = range.1;
    let mut count = 241;
    let mut best: Option<Calibration> = None;
    for _ in 0..3 {
        let mut spec = SweepSpec::new("calibration", base.clone(), vec![Axis::new(Parameter::Detuning, lo, hi, count)]);
        spec.oracle = Oracle::Numeric;
        spec.cutoff = cutoff;
        let result = run(&spec, workers)?;
        let step = (hi - lo) / (count - 1) as f64;
        for rec in &result.records {
            let (Some(g2), Some(g3)) = (rec.value(Observable::G2, mode), rec.value(Observable::G3, mode)) else {
                continue;
            };
            let mismatch = (g2 / target.0 - 1.0).abs().max((g3 / target.1 - 1.0).abs());
            if best.as_ref().is_none_or(|b| mismatch < b.mismatch) {
                best = Some(Calibration {
                    detuning: rec.detuning,
                    g2,
                    g3,
                    mismatch,
                });
            }
        }
        let Some(b) = &best else {
            return Err(SweepError::AllUndefined {
                observable: Observable::G2,
                mode,
            });
        };
        lo = b.detuning - step;
        hi = b.detuning + step;
        count = 41;
    }
    Ok(best.expect("set in the loop"))
}
