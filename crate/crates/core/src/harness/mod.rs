//! Experiment registry, configuration and result emission.
//!
//! A run is described by one JSON document:
//!
//! ```json
//! {
//!   "experiment_id": "mm-loghess",
//!   "seed": 42,
//!   "parameters": { "rho": 1.0 },
//!   "grids": { "t_grid": { "start": 0.1, "stop": 5, "count": 5, "scale": "log" } }
//! }
//! ```
//!
//! Every field except `experiment_id` is optional. Parameters are validated
//! against a typed struct per experiment and unknown keys are rejected.
//! Outputs are a CSV (or JSON) table of rows, a metadata JSON file carrying
//! the hash of the effective configuration, and one plot-data CSV per tail
//! curve.

mod experiments;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tail::TailCurve;

pub use experiments::REGISTRY;

/// Spacing of a grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// `count` points from `start` to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl GridSpec {
    pub const fn linear(start: f64, stop: f64, count: usize) -> Self {
        GridSpec { start, stop, count, scale: Scale::Linear }
    }

    pub const fn log(start: f64, stop: f64, count: usize) -> Self {
        GridSpec { start, stop, count, scale: Scale::Log }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let bad = |why: &str| Err(Error::Config(format!("{name}: {why}")));
        if !self.start.is_finite() || !self.stop.is_finite() {
            return bad("endpoints must be finite");
        }
        if self.count == 0 || self.count > 1_000_000 {
            return bad("count must be between 1 and 10⁶");
        }
        if self.count > 1 && !(self.stop > self.start) {
            return bad("stop must exceed start");
        }
        if self.scale == Scale::Log && !(self.start > 0.0) {
            return bad("log grids need start > 0");
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        crate::tail::grid(self.start, self.stop, self.count, self.scale == Scale::Log)
    }

    /// Points rounded to integers, deduplicated.
    pub fn integers(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.points().iter().map(|p| p.round().max(0.0) as u64).collect();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<GridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    #[serde(default = "empty_object")]
    pub parameters: Value,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub grids: Grids,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl ExperimentConfig {
    pub fn new(experiment_id: impl Into<String>) -> Self {
        ExperimentConfig {
            experiment_id: experiment_id.into(),
            parameters: empty_object(),
            seed: None,
            output_dir: None,
            grids: Grids::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Null,
}

impl Cell {
    /// Non-finite values become text so that JSON round-trips exactly.
    pub fn num(v: f64) -> Cell {
        if v.is_finite() {
            Cell::Num(v)
        } else {
            Cell::Text(v.to_string())
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Null => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Null, Cell::num)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Exploratory,
}

/// Column-named rows with a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment_id: String,
    pub statement: String,
    pub config_hash: String,
    pub effective_config: Value,
    pub version: String,
    pub wall_time_s: f64,
    pub fitted: BTreeMap<String, f64>,
    pub verdict: Verdict,
    /// Index and contents of the first violating row when the verdict is `fail`.
    pub first_violation: Option<(usize, Vec<Cell>)>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub table: Table,
    pub metadata: Metadata,
    /// Named tail curves, each emitted as a plot-data file.
    pub curves: Vec<(String, TailCurve)>,
}

impl ExperimentResult {
    pub fn verdict(&self) -> Verdict {
        self.metadata.verdict
    }
}

/// What an experiment body returns.
pub(crate) struct Outcome {
    rows: Vec<Vec<Cell>>,
    /// Per-row pass flag; `None` for purely descriptive rows.
    ok: Vec<Option<bool>>,
    fitted: BTreeMap<String, f64>,
    curves: Vec<(String, TailCurve)>,
    notes: Vec<String>,
    exploratory: bool,
    /// Failure not attached to a row.
    global_fail: Option<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            rows: Vec::new(),
            ok: Vec::new(),
            fitted: BTreeMap::new(),
            curves: Vec::new(),
            notes: Vec::new(),
            exploratory: false,
            global_fail: None,
        }
    }

    fn row(&mut self, cells: Vec<Cell>, ok: Option<bool>) {
        self.rows.push(cells);
        self.ok.push(ok);
    }

    fn fit(&mut self, name: impl Into<String>, v: f64) {
        self.fitted.insert(name.into(), v);
    }

    fn fail(&mut self, why: impl Into<String>) {
        self.global_fail.get_or_insert(why.into());
    }
}

/// Resolved inputs handed to an experiment body.
pub(crate) struct Ctx {
    pub seed: u64,
    pub t_grid: Option<GridSpec>,
    pub x_grid: Option<GridSpec>,
    pub n_grid: Option<GridSpec>,
}

impl Ctx {
    fn t(&self) -> Vec<f64> {
        self.t_grid.expect("resolved").points()
    }
    fn x(&self) -> Vec<f64> {
        self.x_grid.expect("resolved").points()
    }
    fn n(&self) -> Vec<u64> {
        self.n_grid.expect("resolved").integers()
    }
}

/// A registered experiment.
pub struct Experiment {
    pub id: &'static str,
    /// The result the experiment checks, in words.
    pub statement: &'static str,
    pub stochastic: bool,
    pub columns: &'static [&'static str],
    pub(crate) default_grids: DefaultGrids,
    pub(crate) prepare: fn(&Value) -> Result<(Value, Runner)>,
}

#[derive(Clone, Copy)]
pub(crate) struct DefaultGrids {
    pub t: Option<GridSpec>,
    pub x: Option<GridSpec>,
    pub n: Option<GridSpec>,
}

pub(crate) type Runner = Box<dyn FnOnce(&Ctx) -> Result<Outcome>>;

/// Parses typed parameters, rejecting unknown keys, and returns them
/// together with their fully defaulted JSON form.
pub(crate) fn parse_params<P: DeserializeOwned + Serialize>(v: &Value) -> Result<(P, Value)> {
    let p: P = serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("parameters: {e}")))?;
    let resolved = serde_json::to_value(&p)?;
    Ok((p, resolved))
}

pub fn lookup(id: &str) -> Result<&'static Experiment> {
    REGISTRY
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::Config(format!("unknown experiment `{id}` (see `semilab list`)")))
}

pub const DEFAULT_SEED: u64 = 42;

fn resolve_grid(name: &str, given: Option<GridSpec>, default: Option<GridSpec>) -> Result<Option<GridSpec>> {
    match (given, default) {
        (Some(_), None) => Err(Error::Config(format!("{name} is not used by this experiment"))),
        (g, d) => {
            let g = g.or(d);
            if let Some(spec) = &g {
                spec.validate(name)?;
            }
            Ok(g)
        }
    }
}

/// Validates `config` and runs the experiment. Nothing is written.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let exp = lookup(&config.experiment_id)?;
    if !config.parameters.is_object() {
        return Err(Error::Config("parameters must be a JSON object".into()));
    }
    let ctx = Ctx {
        seed: config.seed.unwrap_or(DEFAULT_SEED),
        t_grid: resolve_grid("t_grid", config.grids.t_grid, exp.default_grids.t)?,
        x_grid: resolve_grid("x_grid", config.grids.x_grid, exp.default_grids.x)?,
        n_grid: resolve_grid("n_grid", config.grids.n_grid, exp.default_grids.n)?,
    };
    let (params, runner) = (exp.prepare)(&config.parameters)?;
    let grids = Grids { t_grid: ctx.t_grid, x_grid: ctx.x_grid, n_grid: ctx.n_grid };
    let mut effective = serde_json::json!({
        "experiment_id": exp.id,
        "parameters": params,
        "grids": grids,
    });
    if exp.stochastic {
        effective["seed"] = ctx.seed.into();
    }
    let config_hash = hex(&Sha256::digest(serde_json::to_vec(&effective)?));

    let start = Instant::now();
    let out = runner(&ctx)?;
    let wall = start.elapsed().as_secs_f64();

    for r in &out.rows {
        if r.len() != exp.columns.len() {
            return Err(Error::Config(format!("{}: row width {} does not match columns", exp.id, r.len())));
        }
    }
    let first_bad = out.ok.iter().position(|o| *o == Some(false));
    let verdict = if first_bad.is_some() || out.global_fail.is_some() {
        Verdict::Fail
    } else if out.exploratory {
        Verdict::Exploratory
    } else {
        Verdict::Pass
    };
    let mut notes = out.notes;
    if let Some(why) = out.global_fail {
        notes.push(why);
    }
    let metadata = Metadata {
        experiment_id: exp.id.to_string(),
        statement: exp.statement.to_string(),
        config_hash,
        effective_config: effective,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: wall,
        fitted: out.fitted,
        verdict,
        first_violation: first_bad.map(|i| (i, out.rows[i].clone())),
        notes,
    };
    Ok(ExperimentResult {
        table: Table { columns: exp.columns.iter().map(|c| c.to_string()).collect(), rows: out.rows },
        metadata,
        curves: out.curves,
    })
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Table as CSV bytes (header row, RFC 4180 quoting).
pub fn table_csv(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for r in &table.rows {
        w.write_record(r.iter().map(Cell::render))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Plot data: `t, tail, bound`.
pub fn curve_csv(curve: &TailCurve) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "tail", "bound"])?;
    for i in 0..curve.len() {
        w.write_record([curve.t[i], curve.tail[i], curve.bound[i]].map(|v| Cell::num(v).render()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes `<id>.csv` or `<id>.json`, `<id>.meta.json` and
/// `<id>.plot.<name>.csv` into `dir`; returns the paths written.
pub fn emit(result: &ExperimentResult, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let id = &result.metadata.experiment_id;
    let mut written = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        written.push(path);
        Ok(())
    };
    match format {
        Format::Csv => put(format!("{id}.csv"), table_csv(&result.table)?)?,
        Format::Json => put(format!("{id}.json"), serde_json::to_vec_pretty(&result.table)?)?,
    }
    put(format!("{id}.meta.json"), serde_json::to_vec_pretty(&result.metadata)?)?;
    for (name, curve) in &result.curves {
        put(format!("{id}.plot.{name}.csv"), curve_csv(curve)?)?;
    }
    Ok(written)
}

/// Reads a table written with [`Format::Json`].
pub fn read_table_json(path: &Path) -> Result<Table> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_ids_are_unique_and_complete() {
        let mut ids: Vec<&str> = REGISTRY.iter().map(|e| e.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 19);
        assert!(REGISTRY.iter().all(|e| !e.statement.is_empty() && !e.columns.is_empty()));
    }

    #[test]
    fn bad_grid_is_rejected() {
        let mut c = ExperimentConfig::new("mm-psi");
        c.grids.n_grid = Some(GridSpec::linear(10.0, 1.0, 5));
        assert!(matches!(run(&c), Err(Error::Config(_))));
        let mut c = ExperimentConfig::new("mm-psi");
        c.grids.x_grid = Some(GridSpec::linear(0.0, 1.0, 5));
        assert!(matches!(run(&c), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_parameter_is_rejected() {
        let c = ExperimentConfig::from_json(r#"{"experiment_id":"mm-psi","parameters":{"bogus":1}}"#).unwrap();
        assert!(matches!(run(&c), Err(Error::Config(_))));
    }

    #[test]
    fn cells_render() {
        assert_eq!(Cell::num(0.1).render(), "0.1");
        assert_eq!(Cell::num(1.0).render(), "1.0");
        assert_eq!(Cell::num(f64::INFINITY), Cell::Text("inf".into()));
        assert_eq!(Cell::Int(-3).render(), "-3");
    }
}
