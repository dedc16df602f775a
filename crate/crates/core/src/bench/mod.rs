//! Experiment harness: parameter sweeps written as CSV, and the small
//! two-shipper fixture solved under three acceptance regimes.

mod fixture;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::choice::{alpha_for_target_rho, alpha_sweep_values, beta_sweep_values, RhoTable};
use crate::error::{Error, Result};
use crate::instance::{self, generate, GeneratorParams, Instance};
use crate::milp::{build, Solution, Status};
use crate::par::{self, Exec};
use crate::solver::{solve, SolveOptions};

pub use fixture::{
    fixture_instance, fixture_rho, run_fixture_example, write_fixture_csv, FixtureReport, FixtureRow, Regime,
};

/// Version tag written in the first line of every sweep CSV.
pub const CSV_VERSION: &str = "# biloc sweep csv v1";

pub const CSV_COLUMNS: [&str; 13] = [
    "kind",
    "point",
    "replication",
    "seed",
    "status",
    "objective",
    "revenue",
    "cost",
    "fixed_cost",
    "nodes",
    "seconds",
    "trivial",
    "gap",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Alpha,
    Beta,
    Ratio,
    Size,
}

impl std::fmt::Display for SweepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepKind::Alpha => "alpha",
            SweepKind::Beta => "beta",
            SweepKind::Ratio => "ratio",
            SweepKind::Size => "size",
        })
    }
}

impl std::str::FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepKind::Alpha),
            "beta" => Ok(SweepKind::Beta),
            "ratio" => Ok(SweepKind::Ratio),
            "size" => Ok(SweepKind::Size),
            _ => Err(Error::Parameter(format!("unknown sweep kind `{s}`"))),
        }
    }
}

/// One point of a size sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizePoint {
    pub facilities: usize,
    pub customers: usize,
    pub prices: usize,
}

impl std::fmt::Display for SizePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "I{}-J{}-P{}", self.facilities, self.customers, self.prices)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: SweepKind,
    /// Values of α, β or the capacity ratio.
    #[serde(default)]
    pub grid: Vec<f64>,
    /// Points of a size sweep.
    #[serde(default)]
    pub sizes: Vec<SizePoint>,
    /// Generator parameters; replication `r` uses seed `params.seed + r`.
    #[serde(default)]
    pub params: GeneratorParams,
    /// Fixed instance, used instead of `params` for α, β and ratio sweeps.
    #[serde(default)]
    pub instance: Option<PathBuf>,
    #[serde(default = "one")]
    pub replications: usize,
    /// Per-solve time limit in seconds.
    #[serde(default)]
    pub time_limit: Option<f64>,
    /// Write wall times; off gives byte-identical files across runs.
    #[serde(default = "yes")]
    pub timing: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl SweepSpec {
    pub fn new(kind: SweepKind, grid: Vec<f64>) -> Self {
        SweepSpec {
            kind,
            grid,
            sizes: Vec::new(),
            params: GeneratorParams::default(),
            instance: None,
            replications: 1,
            time_limit: None,
            timing: true,
            output: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        instance::parse_json(&text)
    }

    pub fn check(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Parameter("replications must be at least 1".into()));
        }
        match self.kind {
            SweepKind::Size if self.sizes.is_empty() => Err(Error::Parameter("size sweep needs `sizes`".into())),
            SweepKind::Size if self.instance.is_some() => {
                Err(Error::Parameter("size sweep generates its instances; drop `instance`".into()))
            }
            SweepKind::Size => Ok(()),
            _ if self.grid.is_empty() => Err(Error::Parameter(format!("{} sweep needs a non-empty `grid`", self.kind))),
            _ if self.grid.iter().any(|v| !v.is_finite()) => Err(Error::Parameter("grid values must be finite".into())),
            _ => Ok(()),
        }
    }

    fn points(&self) -> usize {
        match self.kind {
            SweepKind::Size => self.sizes.len(),
            _ => self.grid.len(),
        }
    }

    fn label(&self, point: usize) -> String {
        match self.kind {
            SweepKind::Size => self.sizes[point].to_string(),
            _ => self.grid[point].to_string(),
        }
    }
}

/// Eleven α values from the one giving ρ = 0.005 at price 15 (with
/// L = 4.5, opt-out 3, β = 1) up to zero.
pub fn default_alpha_grid() -> Vec<f64> {
    let first = alpha_for_target_rho(0.005, 15.0, 4.5, 3.0, 1.0).expect("valid target");
    alpha_sweep_values(first, 11).expect("valid grid")
}

/// β = 2^l for l = -5..=3.
pub fn default_beta_grid() -> Vec<f64> {
    beta_sweep_values(-5, 3)
}

/// Ratios 0.5 to 5 in steps of 0.5.
pub fn default_ratio_grid() -> Vec<f64> {
    (1..=10).map(|i| 0.5 * i as f64).collect()
}

/// Desk-scale size grid.
pub fn desk_size_grid() -> Vec<SizePoint> {
    [(2, 12, 3), (2, 12, 4), (2, 12, 5), (3, 12, 5), (4, 12, 5), (4, 24, 5), (3, 48, 5), (4, 48, 3), (4, 48, 5)]
        .into_iter()
        .map(|(facilities, customers, prices)| SizePoint { facilities, customers, prices })
        .collect()
}

/// Full-scale size grid (80 to 140 customers); far beyond desk budgets.
pub fn full_size_grid() -> Vec<SizePoint> {
    [
        (4, 80, 3),
        (4, 80, 4),
        (4, 80, 5),
        (5, 80, 5),
        (6, 80, 5),
        (5, 100, 5),
        (5, 120, 5),
        (4, 140, 5),
        (5, 140, 5),
        (6, 140, 5),
        (7, 140, 5),
    ]
    .into_iter()
    .map(|(facilities, customers, prices)| SizePoint { facilities, customers, prices })
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub kind: SweepKind,
    pub point: String,
    pub replication: usize,
    pub seed: u64,
    /// Solver status, or `error: ...` when the point failed.
    pub status: String,
    pub objective: Option<f64>,
    pub revenue: Option<f64>,
    pub cost: Option<f64>,
    pub fixed_cost: Option<f64>,
    pub nodes: Option<u64>,
    pub seconds: Option<f64>,
    pub trivial: bool,
    /// Only for time-limited solves.
    pub gap: Option<f64>,
}

impl SweepRow {
    fn from_solution(spec: &SweepSpec, point: usize, replication: usize, seed: u64, sol: &Solution) -> Self {
        SweepRow {
            kind: spec.kind,
            point: spec.label(point),
            replication,
            seed,
            status: sol.status.to_string(),
            objective: Some(sol.objective),
            revenue: Some(sol.report.revenue),
            cost: Some(sol.report.assignment_cost),
            fixed_cost: Some(sol.report.fixed_cost),
            nodes: Some(sol.nodes),
            seconds: spec.timing.then_some(sol.seconds),
            trivial: sol.status == Status::Trivial,
            gap: (sol.status == Status::TimeLimit).then_some(sol.gap),
        }
    }

    fn error(spec: &SweepSpec, point: usize, replication: usize, seed: u64, err: &Error) -> Self {
        SweepRow {
            kind: spec.kind,
            point: spec.label(point),
            replication,
            seed,
            status: format!("error: {err}"),
            objective: None,
            revenue: None,
            cost: None,
            fixed_cost: None,
            nodes: None,
            seconds: None,
            trivial: false,
            gap: None,
        }
    }

    fn record(&self) -> Vec<String> {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(ToString::to_string).unwrap_or_default()
        }
        vec![
            self.kind.to_string(),
            self.point.clone(),
            self.replication.to_string(),
            self.seed.to_string(),
            self.status.clone(),
            opt(&self.objective),
            opt(&self.revenue),
            opt(&self.cost),
            opt(&self.fixed_cost),
            opt(&self.nodes),
            opt(&self.seconds),
            self.trivial.to_string(),
            opt(&self.gap),
        ]
    }
}

/// Solves `inst` under closed-form logit probabilities with one worker.
pub fn solve_instance(inst: &Instance, time_limit: Option<Duration>) -> Result<Solution> {
    solve_with_rho(inst, &RhoTable::closed_form(inst)?, time_limit)
}

/// Solves `inst` under the given probabilities with one worker.
pub fn solve_with_rho(inst: &Instance, rho: &RhoTable, time_limit: Option<Duration>) -> Result<Solution> {
    let model = build(inst, rho)?;
    let opts = SolveOptions { time_limit, ..SolveOptions::default() };
    let mut sol = solve(&model, &opts)?;
    sol.attach_offers(inst, rho)?;
    Ok(sol)
}

fn point_instance(spec: &SweepSpec, base: Option<&Instance>, point: usize, seed: u64) -> Result<Instance> {
    let make = || generate(&GeneratorParams { seed, ..spec.params.clone() });
    let mut inst = match (spec.kind, base) {
        (SweepKind::Size, _) => {
            let s = spec.sizes[point];
            generate(&GeneratorParams {
                facilities: s.facilities,
                customers: s.customers,
                prices: s.prices,
                seed,
                ..spec.params.clone()
            })?
        }
        (_, Some(b)) => b.clone(),
        (_, None) => make()?,
    };
    match spec.kind {
        SweepKind::Alpha => inst.choice_model.alpha = spec.grid[point],
        SweepKind::Beta => {
            if !(spec.grid[point] > 0.0) {
                return Err(Error::Parameter(format!("beta must be positive, got {}", spec.grid[point])));
            }
            inst.choice_model.beta = spec.grid[point];
        }
        SweepKind::Ratio => inst = inst.scale_to_ratio(spec.grid[point])?,
        SweepKind::Size => {}
    }
    Ok(inst)
}

/// Runs every (point, replication) of `spec`. Points run in parallel, each
/// solve on one worker. A failing point becomes an error row.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.check()?;
    let base = match &spec.instance {
        Some(path) => Some(instance::load(path)?),
        None => None,
    };
    let time_limit = spec.time_limit.map(Duration::from_secs_f64);
    let jobs: Vec<(usize, usize)> =
        (0..spec.points()).flat_map(|p| (0..spec.replications).map(move |r| (p, r))).collect();
    Ok(par::map_slice(Exec::Parallel, &jobs, |&(point, replication)| {
        let seed = match &base {
            Some(b) => b.meta.seed.unwrap_or(spec.params.seed),
            None => spec.params.seed + replication as u64,
        };
        let started = Instant::now();
        let result = point_instance(spec, base.as_ref(), point, seed).and_then(|inst| solve_instance(&inst, time_limit));
        match result {
            Ok(mut sol) => {
                sol.seconds = started.elapsed().as_secs_f64();
                SweepRow::from_solution(spec, point, replication, seed, &sol)
            }
            Err(e) => SweepRow::error(spec, point, replication, seed, &e),
        }
    }))
}

/// Writes rows as CSV with the version comment first.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_VERSION}").map_err(|e| Error::io("<sweep csv>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush().map_err(|e| Error::io("<sweep csv>", e))?;
    Ok(())
}

/// Runs the sweep and writes it to `path` (or `spec.output`).
pub fn run_sweep_to_file(spec: &SweepSpec, path: Option<&Path>) -> Result<Vec<SweepRow>> {
    let rows = run_sweep(spec)?;
    let path = path
        .map(Path::to_path_buf)
        .or_else(|| spec.output.clone())
        .ok_or_else(|| Error::Parameter("no output path".into()))?;
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_sweep_csv(&rows, std::io::BufWriter::new(file))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GeneratorParams {
        GeneratorParams {
            facilities: 2,
            customers: 6,
            shippers: 2,
            categories: 2,
            services: 2,
            prices: 3,
            ..GeneratorParams::default()
        }
    }

    fn csv_of(rows: &[SweepRow]) -> String {
        let mut buf = Vec::new();
        write_sweep_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(SweepSpec::new(SweepKind::Alpha, vec![]).check().is_err());
        let mut s = SweepSpec::new(SweepKind::Alpha, vec![-0.1]);
        s.replications = 0;
        assert!(s.check().is_err());
        assert!(SweepSpec::new(SweepKind::Size, vec![]).check().is_err());
        assert!(SweepSpec::new(SweepKind::Beta, vec![1.0]).check().is_ok());
    }

    #[test]
    fn spec_json_defaults() {
        let s: SweepSpec = serde_json::from_str(r#"{"kind":"ratio","grid":[0.5,1]}"#).unwrap();
        assert_eq!(s.replications, 1);
        assert!(s.timing);
        assert_eq!(s.params, GeneratorParams::default());
        assert!(serde_json::from_str::<SweepSpec>(r#"{"kind":"ratio","grid":[1],"bogus":1}"#).is_err());
    }

    #[test]
    fn header_and_row_count() {
        let mut spec = SweepSpec::new(SweepKind::Alpha, vec![-0.3, -0.1, 0.0]);
        spec.params = tiny();
        spec.replications = 2;
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 6);
        let text = csv_of(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_VERSION));
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.count(), 6);
    }

    #[test]
    fn csv_is_deterministic_without_timing() {
        let mut spec = SweepSpec::new(SweepKind::Ratio, vec![0.5, 1.0, 2.0]);
        spec.params = tiny();
        spec.timing = false;
        let a = csv_of(&run_sweep(&spec).unwrap());
        let b = csv_of(&run_sweep(&spec).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn trivial_rows_have_zero_objective() {
        let mut spec = SweepSpec::new(SweepKind::Alpha, default_alpha_grid());
        spec.params = tiny();
        let rows = run_sweep(&spec).unwrap();
        assert!(rows.iter().any(|r| r.trivial));
        for r in rows.iter().filter(|r| r.trivial) {
            assert_eq!(r.objective, Some(0.0));
        }
    }

    #[test]
    fn failing_points_become_error_rows() {
        let mut spec = SweepSpec::new(SweepKind::Beta, vec![1.0, -1.0, 2.0]);
        spec.params = tiny();
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[1].status.starts_with("error"));
        assert!(rows[0].objective.is_some() && rows[2].objective.is_some());
    }

    #[test]
    fn alpha_sweep_is_nondecreasing() {
        let mut spec = SweepSpec::new(SweepKind::Alpha, default_alpha_grid());
        spec.params = tiny();
        let obj: Vec<f64> = run_sweep(&spec).unwrap().iter().map(|r| r.objective.unwrap()).collect();
        assert!(obj.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0)), "{obj:?}");
    }

    #[test]
    fn ratio_sweep_is_nondecreasing() {
        let mut spec = SweepSpec::new(SweepKind::Ratio, default_ratio_grid());
        spec.params = tiny();
        let obj: Vec<f64> = run_sweep(&spec).unwrap().iter().map(|r| r.objective.unwrap()).collect();
        assert!(obj.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0)), "{obj:?}");
    }

    #[test]
    fn size_sweep_labels_points() {
        let mut spec = SweepSpec::new(SweepKind::Size, vec![]);
        spec.sizes = vec![SizePoint { facilities: 2, customers: 4, prices: 2 }];
        spec.params = GeneratorParams { ratio: 1.0, ..tiny() };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows[0].point, "I2-J4-P2");
        assert_eq!(rows[0].seed, spec.params.seed);
    }

    #[test]
    fn grids() {
        assert_eq!(default_beta_grid().len(), 9);
        assert_eq!(default_ratio_grid().first(), Some(&0.5));
        assert_eq!(default_ratio_grid().last(), Some(&5.0));
        let a = default_alpha_grid();
        assert_eq!(a.len(), 11);
        assert_eq!(*a.last().unwrap(), 0.0);
        assert_eq!(full_size_grid().len(), 11);
    }
}
