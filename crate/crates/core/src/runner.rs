//! Configuration and execution of one command-line run.
//!
//! Settings come from defaults, then an optional `key=value` file, then
//! flags; every source goes through [`RunConfig::apply_kv`], so the file
//! accepts exactly the flag names without their leading dashes.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::{build, find_return, replay_expected, ScenarioParams, SCENARIO_NAMES};
use crate::error::{Error, Result};
use crate::finsler::{estimator_agreement, invariant_norm_check, norm_axiom_check, Estimator};
use crate::geometry::StepLadder;
use crate::group::{AlgebraVector, GroupElement};
use crate::hausdorff::{induced_metric, invariance_check, QuotientPoint};
use crate::paths::{intrinsic_distance, path_length, QuotientPath};
use crate::scenario::Scenario;
use crate::table::{emit_table, format_vector, Cell, Format, Table};

/// Process exit status of a run.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operation {
    Distance,
    FinslerNorm,
    FinslerSweep,
    Intrinsic,
    Length,
    Checks,
}

impl FromStr for Operation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "distance" => Operation::Distance,
            "finsler-norm" => Operation::FinslerNorm,
            "finsler-sweep" => Operation::FinslerSweep,
            "intrinsic" => Operation::Intrinsic,
            "length" => Operation::Length,
            "checks" => Operation::Checks,
            other => return Err(Error::Config(format!("unknown operation {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub operation: Option<Operation>,
    /// Directions in a sweep.
    pub steps: usize,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub grid_n: Option<usize>,
    pub cap_radius: Option<f64>,
    pub ladder_t0: Option<f64>,
    pub ladder_ratio: Option<f64>,
    pub ladder_depth: Option<usize>,
    pub from: Option<Vec<f64>>,
    pub to: Option<Vec<f64>>,
    pub v: Option<Vec<f64>>,
    /// Parameter interval of the orbit measured by `length`.
    pub t_start: f64,
    pub t_end: f64,
    pub refinements: u32,
    pub knots: usize,
    pub max_evals: usize,
    /// Random samples per property in `checks`.
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            operation: None,
            steps: 16,
            a: None,
            b: None,
            grid_n: None,
            cap_radius: None,
            ladder_t0: None,
            ladder_ratio: None,
            ladder_depth: None,
            from: None,
            to: None,
            v: None,
            t_start: 0.0,
            t_end: 1.0,
            refinements: 6,
            knots: 3,
            max_evals: 200_000,
            trials: 20,
            seed: 0,
            out: None,
            format: Format::Csv,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_vector(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|c| {
            let x: f64 = parse(key, c)?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(Error::Config(format!("non-finite component in {key}")))
            }
        })
        .collect()
}

impl RunConfig {
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let k = key.as_str();
        match k {
            "scenario" => self.scenario = Some(value.trim().to_string()),
            "op" | "operation" => self.operation = Some(value.trim().parse()?),
            "steps" => self.steps = parse(k, value)?,
            "a" => self.a = Some(parse(k, value)?),
            "b" => self.b = Some(parse(k, value)?),
            "grid-n" => self.grid_n = Some(parse(k, value)?),
            "cap-radius" => self.cap_radius = Some(parse(k, value)?),
            "ladder-t0" => self.ladder_t0 = Some(parse(k, value)?),
            "ladder-ratio" => self.ladder_ratio = Some(parse(k, value)?),
            "ladder-depth" => self.ladder_depth = Some(parse(k, value)?),
            "from" => self.from = Some(parse_vector(k, value)?),
            "to" => self.to = Some(parse_vector(k, value)?),
            "v" => self.v = Some(parse_vector(k, value)?),
            "t-start" => self.t_start = parse(k, value)?,
            "t-end" => self.t_end = parse(k, value)?,
            "refinements" => self.refinements = parse(k, value)?,
            "knots" => self.knots = parse(k, value)?,
            "max-evals" => self.max_evals = parse(k, value)?,
            "trials" => self.trials = parse(k, value)?,
            "seed" => self.seed = parse(k, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "format" => self.format = value.trim().parse()?,
            other => return Err(Error::Config(format!("unknown setting {other:?}"))),
        }
        Ok(())
    }

    /// Apply a flat `key=value` file; blank lines and `#` comments are
    /// skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("reading {}: {e}", path.display())))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
            self.apply_kv(k, v)?;
        }
        Ok(())
    }

    fn params(&self) -> ScenarioParams {
        let d = ScenarioParams::default();
        ScenarioParams {
            a: self.a.unwrap_or(d.a),
            b: self.b.unwrap_or(d.b),
            grid_n: self.grid_n,
            cap_radius: self.cap_radius.unwrap_or(d.cap_radius),
            rn_points: d.rn_points,
        }
    }
}

/// Everything a run needs, checked before any computation starts.
struct Prepared {
    scenario: Scenario,
    operation: Operation,
    ladder: StepLadder,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let name = cfg
        .scenario
        .as_deref()
        .ok_or_else(|| Error::Config(format!("no scenario given; choose one of {}", SCENARIO_NAMES.join(", "))))?;
    let operation = cfg.operation.ok_or_else(|| Error::Config("no operation given".into()))?;
    let scenario = build(name, &cfg.params())?;
    let base = scenario.ladder;
    let ladder = StepLadder {
        t0: cfg.ladder_t0.unwrap_or(base.t0),
        ratio: cfg.ladder_ratio.unwrap_or(base.ratio),
        depth: cfg.ladder_depth.unwrap_or(base.depth),
        ..base
    };
    ladder.validate()?;
    if cfg.steps == 0 {
        return Err(Error::Config("steps must be positive".into()));
    }
    let check_dim = |key: &str, v: &Option<Vec<f64>>, dim: usize| match v {
        Some(v) if v.len() != dim => Err(Error::Config(format!(
            "{key} has {} components, scenario {name} expects {dim}",
            v.len()
        ))),
        _ => Ok(()),
    };
    let pdim = scenario.group.param_dim();
    check_dim("from", &cfg.from, pdim)?;
    check_dim("to", &cfg.to, pdim)?;
    check_dim("v", &cfg.v, scenario.algebra_dim())?;
    for g in [&cfg.from, &cfg.to].into_iter().flatten() {
        scenario.group.element(g.clone())?;
    }
    if operation == Operation::Length && !(cfg.t_end > cfg.t_start) {
        return Err(Error::Config("length needs t-end > t-start".into()));
    }
    Ok(Prepared {
        scenario,
        operation,
        ladder,
    })
}

/// Result of a run: the emitted table and whether every tolerance held.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub table: Table,
    pub passed: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_PASS
        } else {
            EXIT_TOLERANCE
        }
    }
}

/// Why a run stopped before producing its table.
#[derive(Debug)]
pub enum RunError {
    Config(Error),
    Failed(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Failed(_) => EXIT_TOLERANCE,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error: {e}"),
            RunError::Failed(e) => write!(f, "run failed: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

/// Validate, execute, and write the table to `cfg.out` when set.
pub fn run(cfg: &RunConfig) -> std::result::Result<RunOutcome, RunError> {
    let prepared = prepare(cfg).map_err(RunError::Config)?;
    let outcome = execute(cfg, &prepared).map_err(RunError::Failed)?;
    if let Some(path) = &cfg.out {
        emit_table(&outcome.table, cfg.format, path).map_err(RunError::Failed)?;
    }
    Ok(outcome)
}

fn execute(cfg: &RunConfig, p: &Prepared) -> Result<RunOutcome> {
    match p.operation {
        Operation::Distance => distance(cfg, p),
        Operation::FinslerNorm => {
            let v = match &cfg.v {
                Some(v) => AlgebraVector::new(v.clone()),
                None => p.scenario.sweep_direction(0.0),
            };
            finsler_rows(p, &[v])
        }
        Operation::FinslerSweep => {
            let dirs: Vec<AlgebraVector> = (0..cfg.steps)
                .map(|i| p.scenario.sweep_direction(2.0 * PI * i as f64 / cfg.steps as f64))
                .collect();
            finsler_rows(p, &dirs)
        }
        Operation::Intrinsic => intrinsic(cfg, p),
        Operation::Length => length(cfg, p),
        Operation::Checks => checks(cfg, p),
    }
}

fn endpoint(s: &Scenario, v: &Option<Vec<f64>>) -> Result<GroupElement> {
    match v {
        Some(c) => s.group.element(c.clone()),
        None => Ok(s.group.identity()),
    }
}

fn distance(cfg: &RunConfig, p: &Prepared) -> Result<RunOutcome> {
    let s = &p.scenario;
    let (g1, g2) = (endpoint(s, &cfg.from)?, endpoint(s, &cfg.to)?);
    let d = induced_metric(s, &QuotientPoint::new(g1.clone()), &QuotientPoint::new(g2.clone()))?;
    let mut table = Table::new(["scenario", "from", "to", "distance", "fill_radius", "sampling_bound"]);
    table.push(vec![
        s.name.as_str().into(),
        format_vector(&g1.params).into(),
        format_vector(&g2.params).into(),
        d.into(),
        s.sample.fill_radius.into(),
        (2.0 * s.sample.fill_radius).into(),
    ])?;
    Ok(RunOutcome { table, passed: true })
}

fn finsler_rows(p: &Prepared, dirs: &[AlgebraVector]) -> Result<RunOutcome> {
    let mut table = Table::new([
        "direction",
        "limit_value",
        "limit_err",
        "sup_killing",
        "sup_continuous",
        "closed_form",
        "max_pairwise_gap",
    ]);
    let mut passed = true;
    for v in dirs {
        let a = estimator_agreement(&p.scenario, v, &p.ladder)?;
        passed &= a.passed();
        table.push(vec![
            format_vector(&v.components).into(),
            a.limit.value.into(),
            a.limit.error_estimate.into(),
            a.sup_killing.value.into(),
            a.sup_continuous.value.into(),
            a.closed_form.into(),
            a.max_pairwise_gap.into(),
        ])?;
    }
    Ok(RunOutcome { table, passed })
}

fn intrinsic(cfg: &RunConfig, p: &Prepared) -> Result<RunOutcome> {
    let s = &p.scenario;
    let (g1, g2) = (endpoint(s, &cfg.from)?, endpoint(s, &cfg.to)?);
    let (q1, q2) = (QuotientPoint::new(g1.clone()), QuotientPoint::new(g2.clone()));
    let mut table = Table::new(["from", "to", "intrinsic", "direct", "gap", "evaluations", "converged"]);
    let (value, direct, evals, converged) = match intrinsic_distance(s, &q1, &q2, cfg.knots, cfg.max_evals) {
        Ok(r) => (r.value, r.direct, Cell::from(r.evaluations), true),
        Err(Error::IterationBudgetExceeded { best }) => (best, induced_metric(s, &q1, &q2)?, Cell::Null, false),
        Err(e) => return Err(e),
    };
    table.push(vec![
        format_vector(&g1.params).into(),
        format_vector(&g2.params).into(),
        value.into(),
        direct.into(),
        (value - direct).into(),
        evals,
        converged.into(),
    ])?;
    Ok(RunOutcome {
        table,
        passed: converged && value >= direct - 1e-9,
    })
}

fn length(cfg: &RunConfig, p: &Prepared) -> Result<RunOutcome> {
    let s = &p.scenario;
    let v = match &cfg.v {
        Some(v) => AlgebraVector::new(v.clone()),
        None => s.sweep_direction(0.0),
    };
    let path = QuotientPath::orbit(&s.group, &v, cfg.t_start, cfg.t_end, 1)?;
    let len = path_length(s, &path, cfg.refinements)?;
    let mut table = Table::new(["refinement", "segments", "length", "cauchy_gap"]);
    let mut passed = true;
    for (k, sum) in len.sums.iter().enumerate() {
        let gap = if k == 0 { None } else { Some(sum - len.sums[k - 1]) };
        // refinement can only lengthen the polygon
        passed &= gap.is_none_or(|g| g >= -1e-12);
        table.push(vec![k.into(), (1usize << k).into(), (*sum).into(), gap.map(f64::abs).into()])?;
    }
    Ok(RunOutcome { table, passed })
}

struct CheckTable {
    table: Table,
    passed: bool,
}

impl CheckTable {
    fn new() -> Self {
        Self {
            table: Table::new(["check", "observed", "expected", "tolerance", "passed"]),
            passed: true,
        }
    }

    /// `|observed - expected| <= tolerance`.
    fn close(&mut self, name: &str, observed: f64, expected: f64, tolerance: f64) -> Result<()> {
        let ok = (observed - expected).abs() <= tolerance;
        self.passed &= ok;
        self.table
            .push(vec![name.into(), observed.into(), expected.into(), tolerance.into(), ok.into()])
    }

    /// `observed <= limit`, for quantities with no target value.
    fn at_most(&mut self, name: &str, observed: f64, limit: f64) -> Result<()> {
        let ok = observed <= limit;
        self.passed &= ok;
        self.table
            .push(vec![name.into(), observed.into(), Cell::Null, limit.into(), ok.into()])
    }
}

fn checks(cfg: &RunConfig, p: &Prepared) -> Result<RunOutcome> {
    let s = &p.scenario;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = CheckTable::new();

    for r in replay_expected(s)? {
        t.close(&format!("expected: {}", r.row.label), r.observed, r.row.value, r.row.tolerance)?;
    }
    if let crate::group::GroupModel::LineFlow { .. } = s.group {
        // first return time; NaN (and a failed row) when none exists
        let found = find_return(s, 100.0, 200.0, 1e-3, 0.05)?.unwrap_or(f64::NAN);
        t.at_most("first return time in (100, 200)", found, 200.0)?;
    }

    let (mut tri, mut sym, mut ident, mut inv): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..cfg.trials {
        let [x, y, z, a] = [(); 4].map(|_| QuotientPoint::new(s.random_element(&mut rng)));
        let (dxy, dyz, dxz) = (induced_metric(s, &x, &y)?, induced_metric(s, &y, &z)?, induced_metric(s, &x, &z)?);
        tri = tri.max(dxz - dxy - dyz);
        sym = sym.max((dxy - induced_metric(s, &y, &x)?).abs());
        ident = ident.max(induced_metric(s, &x, &x)?);
        inv = inv.max(invariance_check(s, &a, &x, &y)?);
    }
    t.at_most("metric: triangle excess", tri, 1e-10)?;
    t.close("metric: symmetry", sym, 0.0, 1e-10)?;
    t.close("metric: d(x, x)", ident, 0.0, 1e-10)?;
    t.close("metric: G-invariance", inv, 0.0, 1e-10)?;

    let killing = norm_axiom_check(s, cfg.trials, Estimator::SupKilling, &p.ladder, &mut rng)?;
    t.close("norm (killing): F(0)", killing.zero_value, 0.0, 0.0)?;
    t.close("norm (killing): symmetry", killing.symmetry, 0.0, 1e-9)?;
    t.close("norm (killing): homogeneity", killing.homogeneity, 0.0, 1e-9)?;
    t.at_most("norm (killing): triangle excess", killing.triangle, 1e-9)?;
    let ladder = norm_axiom_check(s, cfg.trials, Estimator::SupContinuous, &p.ladder, &mut rng)?;
    t.close("norm (continuous): homogeneity", ladder.homogeneity, 0.0, 1e-4)?;
    t.at_most("norm (continuous): triangle excess", ladder.triangle, 1e-4)?;
    if s.closed_form.is_some() {
        let cf = norm_axiom_check(s, cfg.trials, Estimator::ClosedForm, &p.ladder, &mut rng)?;
        t.close("norm (closed form): residual", cf.max_residual(), 0.0, 1e-12)?;
    }

    let inv_norm = invariant_norm_check(s, cfg.trials.min(10), &p.ladder, &mut rng)?;
    t.close("finsler: G-invariance", inv_norm.max_residual, 0.0, 1e-8)?;

    // gap relative to its allowed bound, worst over random directions
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.trials {
        let a = estimator_agreement(s, &s.random_direction(&mut rng), &p.ladder)?;
        worst = worst.max(a.max_pairwise_gap / a.bound);
    }
    t.at_most("finsler: estimator gap / bound", worst, 1.0)?;

    Ok(RunOutcome {
        table: t.table,
        passed: t.passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pairs: &[(&str, &str)]) -> RunConfig {
        let mut c = RunConfig::default();
        for (k, v) in pairs {
            c.apply_kv(k, v).unwrap();
        }
        c
    }

    #[test]
    fn distance_in_rn() {
        let out = run(&cfg(&[("scenario", "rn-translation"), ("op", "distance"), ("from", "0,0"), ("to", "3,4")])).unwrap();
        assert!(out.passed);
        assert_eq!(out.table.rows[0][3], Cell::Real(5.0));
    }

    #[test]
    fn config_errors_exit_2() {
        for pairs in [
            vec![("scenario", "moebius"), ("op", "distance")],
            vec![("scenario", "rn-translation"), ("op", "distance"), ("to", "1,2,3")],
            vec![("scenario", "rn-translation")],
            vec![("scenario", "hyperbolic-two-points"), ("op", "distance"), ("to", "0,-1")],
            vec![("scenario", "torus-minus-square"), ("op", "distance"), ("grid-n", "30")],
            vec![("scenario", "rn-translation"), ("op", "distance"), ("ladder-ratio", "2")],
        ] {
            let err = run(&cfg(&pairs)).unwrap_err();
            assert_eq!(err.exit_code(), EXIT_CONFIG, "{pairs:?}: {err}");
        }
        let mut c = RunConfig::default();
        assert!(c.apply_kv("colour", "red").is_err());
        assert!(c.apply_kv("steps", "many").is_err());
        assert!(c.apply_kv("op", "integrate").is_err());
        assert!(c.apply_kv("v", "1,nan").is_err());
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "# comment\nscenario = hyperbolic-two-points\nsteps=8\n\na=2\n").unwrap();
        let mut c = RunConfig::default();
        c.apply_file(&path).unwrap();
        c.apply_kv("--steps", "4").unwrap();
        assert_eq!(c.scenario.as_deref(), Some("hyperbolic-two-points"));
        assert_eq!(c.steps, 4);
        assert_eq!(c.a, Some(2.0));
        fs::write(&path, "scenario\n").unwrap();
        assert!(RunConfig::default().apply_file(&path).is_err());
    }

    #[test]
    fn hyperbolic_sweep_rows() {
        let out = run(&cfg(&[("scenario", "hyperbolic-two-points"), ("op", "finsler-sweep"), ("steps", "32")])).unwrap();
        assert!(out.passed);
        assert_eq!(out.table.rows.len(), 32);
        for row in &out.table.rows {
            let Cell::Real(gap) = row[6] else { panic!() };
            assert!(gap <= 1e-3, "{row:?}");
        }
    }

    #[test]
    fn length_is_monotone() {
        let out = run(&cfg(&[
            ("scenario", "hyperbolic-two-points"),
            ("op", "length"),
            ("v", "0,1"),
            ("refinements", "5"),
        ]))
        .unwrap();
        assert!(out.passed);
        assert_eq!(out.table.rows.len(), 6);
    }

    #[test]
    fn intrinsic_budget_failure_exits_1() {
        let out = run(&cfg(&[
            ("scenario", "hyperbolic-two-points"),
            ("op", "intrinsic"),
            ("from", "0,1"),
            ("to", "2,3"),
            ("max-evals", "10"),
        ]))
        .unwrap();
        assert_eq!(out.exit_code(), EXIT_TOLERANCE);
        assert_eq!(out.table.rows[0][6], Cell::Bool(false));
    }

    #[test]
    fn irrational_flow_checks_pass() {
        let out = run(&cfg(&[("scenario", "irrational-flow"), ("op", "checks")])).unwrap();
        for row in &out.table.rows {
            assert_eq!(row[4], Cell::Bool(true), "{row:?}");
        }
        assert!(out.passed);
    }
}
