//! Run configuration: TOML schema, defaults, validation and sweep expansion.
//!
//! The schema is documented in `docs/config.md`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use vpp_core::geometry::{chi_sampler, Obstacle};
use vpp_core::linalg::krylov_method;
use vpp_core::mesh::Grid;
use vpp_core::vpp::{SchemeParams, SolverChoice, DEFAULT_ETA, DEFAULT_LAMBDA, DEFAULT_MU};
use vpp_core::VppError;

use crate::error::{CliError, Result};
use crate::registry::{forcing_source, initial_condition, FORCINGS, INITIAL_CONDITIONS};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    pub dt: f64,
    pub horizon: f64,
    pub lambda: f64,
    pub eta: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub prediction: String,
    pub prediction_rtol: f64,
    pub prediction_max_iter: usize,
    pub correction: String,
    pub correction_rtol: f64,
    pub correction_max_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub kind: String,
    pub seed: u64,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSpec {
    pub kind: String,
    pub value: [f64; 2],
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    NoSlip,
    TaylorGreen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleSpec {
    /// `None` when the run has no obstacle.
    pub disk: Option<DiskSpec>,
    pub sampler: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiskSpec {
    pub center: [f64; 2],
    pub radius: f64,
    pub velocity: [f64; 2],
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub csv: String,
    /// Field dump every this many steps; 0 disables dumps.
    pub field_every: usize,
    /// Keep velocity snapshots and write translation estimates.
    pub snapshots: bool,
    pub h_minus1: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Dt,
    Lambda,
    Eta,
    Mu,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Dt => "dt",
            SweepParameter::Lambda => "lambda",
            SweepParameter::Eta => "eta",
            SweepParameter::Mu => "mu",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub scheme: SchemeSpec,
    pub solver: SolverSpec,
    pub initial: InitialSpec,
    pub forcing: ForcingSpec,
    pub boundary: BoundaryKind,
    pub obstacle: ObstacleSpec,
    pub output: OutputSpec,
    pub sweep: Option<SweepSpec>,
}

/// A validated config plus the keys that were filled from defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub defaulted: Vec<&'static str>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: Option<RawGrid>,
    scheme: Option<RawScheme>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    initial: RawInitial,
    #[serde(default)]
    forcing: RawForcing,
    #[serde(default)]
    boundary: RawBoundary,
    #[serde(default)]
    obstacle: RawObstacle,
    #[serde(default)]
    output: RawOutput,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    nx: Option<usize>,
    ny: Option<usize>,
    lx: Option<f64>,
    ly: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    dt: Option<f64>,
    horizon: Option<f64>,
    lambda: Option<f64>,
    eta: Option<f64>,
    mu: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    prediction: Option<String>,
    prediction_rtol: Option<f64>,
    prediction_max_iter: Option<usize>,
    correction: Option<String>,
    correction_rtol: Option<f64>,
    correction_max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: Option<String>,
    seed: Option<u64>,
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForcing {
    kind: Option<String>,
    value: Option<[f64; 2]>,
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    kind: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObstacle {
    kind: Option<String>,
    center: Option<[f64; 2]>,
    radius: Option<f64>,
    velocity: Option<[f64; 2]>,
    omega: Option<f64>,
    sampler: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    csv: Option<String>,
    field_every: Option<usize>,
    snapshots: Option<bool>,
    h_minus1: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: String,
    values: Vec<f64>,
}

const EPSILON_KEYS: &[&str] = &["epsilon", "eps"];
const EPSILON_HINT: &str =
    "epsilon is not an input: it is always lambda * dt, set scheme.lambda instead";

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_error(text: &str, e: toml::de::Error) -> CliError {
    let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
    CliError::Parse {
        line,
        message: e.message().to_string(),
    }
}

fn find_epsilon(text: &str, table: &toml::Table) -> Option<usize> {
    let mut found = table.keys().any(|k| EPSILON_KEYS.contains(&k.as_str()));
    for v in table.values() {
        if let toml::Value::Table(t) = v {
            found |= t.keys().any(|k| EPSILON_KEYS.contains(&k.as_str()));
        }
    }
    if !found {
        return None;
    }
    let line = text
        .lines()
        .position(|l| {
            let key = l.trim_start().split(['=', ' ', '\t']).next().unwrap_or("");
            EPSILON_KEYS.contains(&key.trim_matches('"'))
        })
        .map_or(1, |i| i + 1);
    Some(line)
}

/// Records keys that fall back to their default.
struct Defaults(Vec<&'static str>);

impl Defaults {
    fn take<T>(&mut self, value: Option<T>, key: &'static str, default: T) -> T {
        value.unwrap_or_else(|| {
            self.0.push(key);
            default
        })
    }
}

fn require<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| CliError::invalid(key, "required"))
}

/// Parses and validates a config.
pub fn load_config(text: &str) -> Result<LoadedConfig> {
    let table: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    if let Some(line) = find_epsilon(text, &table) {
        return Err(CliError::Parse {
            line,
            message: EPSILON_HINT.into(),
        });
    }
    let raw: RawConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
    let mut d = Defaults(Vec::new());

    let g = require(raw.grid, "grid")?;
    let nx = require(g.nx, "grid.nx")?;
    let grid = GridSpec {
        nx,
        ny: d.take(g.ny, "grid.ny", nx),
        lx: d.take(g.lx, "grid.lx", 1.0),
        ly: d.take(g.ly, "grid.ly", 1.0),
    };

    let s = require(raw.scheme, "scheme")?;
    let scheme = SchemeSpec {
        dt: require(s.dt, "scheme.dt")?,
        horizon: require(s.horizon, "scheme.horizon")?,
        lambda: d.take(s.lambda, "scheme.lambda", DEFAULT_LAMBDA),
        eta: d.take(s.eta, "scheme.eta", DEFAULT_ETA),
        mu: d.take(s.mu, "scheme.mu", DEFAULT_MU),
    };

    let sv = raw.solver;
    let solver = SolverSpec {
        prediction: d.take(sv.prediction, "solver.prediction", "bicgstab".into()),
        prediction_rtol: d.take(sv.prediction_rtol, "solver.prediction_rtol", 1e-8),
        prediction_max_iter: d.take(sv.prediction_max_iter, "solver.prediction_max_iter", 5000),
        correction: d.take(sv.correction, "solver.correction", "cg".into()),
        correction_rtol: d.take(sv.correction_rtol, "solver.correction_rtol", 1e-10),
        correction_max_iter: d.take(sv.correction_max_iter, "solver.correction_max_iter", 20000),
    };

    let initial = InitialSpec {
        kind: d.take(raw.initial.kind, "initial.kind", "zero".into()),
        seed: d.take(raw.initial.seed, "initial.seed", 0),
        path: raw.initial.path,
    };
    let forcing = ForcingSpec {
        kind: d.take(raw.forcing.kind, "forcing.kind", "zero".into()),
        value: d.take(raw.forcing.value, "forcing.value", [0.0, 0.0]),
        path: raw.forcing.path,
    };
    let boundary = match d
        .take(raw.boundary.kind, "boundary.kind", "no-slip".into())
        .as_str()
    {
        "no-slip" => BoundaryKind::NoSlip,
        "taylor-green" => BoundaryKind::TaylorGreen,
        other => {
            return Err(CliError::invalid(
                "boundary.kind",
                format!("unknown `{other}` (available: no-slip, taylor-green)"),
            ))
        }
    };

    let o = raw.obstacle;
    let kind = d.take(o.kind, "obstacle.kind", "none".into());
    let disk = match kind.as_str() {
        "none" => {
            if o.center.is_some() || o.radius.is_some() {
                return Err(CliError::invalid(
                    "obstacle.kind",
                    "disk geometry given but kind is `none`",
                ));
            }
            None
        }
        "disk" => Some(DiskSpec {
            center: require(o.center, "obstacle.center")?,
            radius: require(o.radius, "obstacle.radius")?,
            velocity: d.take(o.velocity, "obstacle.velocity", [0.0, 0.0]),
            omega: d.take(o.omega, "obstacle.omega", 0.0),
        }),
        other => {
            return Err(CliError::invalid(
                "obstacle.kind",
                format!("unknown `{other}` (available: none, disk)"),
            ))
        }
    };
    let obstacle = ObstacleSpec {
        disk,
        sampler: d.take(o.sampler, "obstacle.sampler", "binary".into()),
    };

    let output = OutputSpec {
        csv: d.take(raw.output.csv, "output.csv", "diagnostics.csv".into()),
        field_every: d.take(raw.output.field_every, "output.field_every", 0),
        snapshots: d.take(raw.output.snapshots, "output.snapshots", false),
        h_minus1: d.take(raw.output.h_minus1, "output.h_minus1", false),
    };

    let sweep = match raw.sweep {
        None => None,
        Some(sw) => {
            let parameter = match sw.parameter.as_str() {
                "dt" => SweepParameter::Dt,
                "lambda" => SweepParameter::Lambda,
                "eta" => SweepParameter::Eta,
                "mu" => SweepParameter::Mu,
                p if EPSILON_KEYS.contains(&p) => {
                    return Err(CliError::invalid("sweep.parameter", EPSILON_HINT))
                }
                other => {
                    return Err(CliError::invalid(
                        "sweep.parameter",
                        format!("unknown `{other}` (available: dt, lambda, eta, mu)"),
                    ))
                }
            };
            Some(SweepSpec {
                parameter,
                values: sw.values,
            })
        }
    };

    let config = RunConfig {
        grid,
        scheme,
        solver,
        initial,
        forcing,
        boundary,
        obstacle,
        output,
        sweep,
    };
    config.validate()?;
    Ok(LoadedConfig {
        config,
        defaulted: d.0,
    })
}

fn scheme_error(e: VppError) -> CliError {
    match e {
        VppError::InvalidParameter { field, reason } => {
            CliError::invalid(format!("scheme.{field}"), reason)
        }
        other => CliError::invalid("scheme", other.to_string()),
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        let g = &self.grid;
        Grid::new(g.nx, g.ny, g.lx, g.ly).map_err(|e| CliError::invalid("grid", e.to_string()))
    }

    /// Scheme parameters with `eps = lambda dt`.
    pub fn params(&self) -> Result<SchemeParams> {
        let s = &self.scheme;
        let mut p =
            SchemeParams::new(s.dt, s.lambda, s.eta, s.mu, s.horizon).map_err(scheme_error)?;
        let sv = &self.solver;
        p.prediction =
            SolverChoice::new(&sv.prediction, sv.prediction_rtol, sv.prediction_max_iter)
                .map_err(|e| CliError::invalid("solver.prediction", e.to_string()))?;
        p.correction =
            SolverChoice::new(&sv.correction, sv.correction_rtol, sv.correction_max_iter)
                .map_err(|e| CliError::invalid("solver.correction", e.to_string()))?;
        Ok(p)
    }

    pub fn obstacle(&self) -> Result<Obstacle> {
        let horizon = self.scheme.horizon;
        let Some(disk) = &self.obstacle.disk else {
            return Ok(Obstacle::none(horizon));
        };
        let sampler = chi_sampler(&self.obstacle.sampler)
            .map_err(|e| CliError::invalid("obstacle.sampler", e.to_string()))?;
        Ok(Obstacle::disk(disk.center, disk.radius, horizon)
            .with_translation(disk.velocity)
            .with_rotation(disk.omega)
            .with_sampler(sampler))
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.params()?;
        if !(self.scheme.eta.is_finite()) {
            return Err(CliError::invalid("scheme.eta", "must be finite"));
        }
        if self.scheme.dt > self.scheme.horizon {
            return Err(CliError::invalid("scheme.dt", "exceeds scheme.horizon"));
        }
        krylov_method(&self.solver.prediction)
            .map_err(|e| CliError::invalid("solver.prediction", e.to_string()))?;
        let ic = initial_condition(&self.initial.kind).ok_or_else(|| {
            CliError::invalid(
                "initial.kind",
                format!(
                    "unknown `{}` (available: {})",
                    self.initial.kind,
                    INITIAL_CONDITIONS.join(", ")
                ),
            )
        })?;
        ic.check(&self.initial)
            .map_err(|r| CliError::invalid("initial", r))?;
        let fs = forcing_source(&self.forcing.kind).ok_or_else(|| {
            CliError::invalid(
                "forcing.kind",
                format!(
                    "unknown `{}` (available: {})",
                    self.forcing.kind,
                    FORCINGS.join(", ")
                ),
            )
        })?;
        fs.check(&self.forcing)
            .map_err(|r| CliError::invalid("forcing", r))?;
        self.obstacle()?
            .validate(&grid)
            .map_err(|e| CliError::invalid("obstacle", e.to_string()))?;
        let csv = Path::new(&self.output.csv);
        if csv.components().count() != 1 || csv.file_name().is_none() {
            return Err(CliError::invalid(
                "output.csv",
                "must be a plain file name inside the output directory",
            ));
        }
        if let Some(sw) = &self.sweep {
            if sw.values.len() < 2 {
                return Err(CliError::invalid(
                    "sweep.values",
                    "need at least two values",
                ));
            }
            if sw.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(CliError::invalid(
                    "sweep.values",
                    "all values must be positive",
                ));
            }
            for c in self.expand_sweep() {
                c.validate()?;
            }
        }
        Ok(())
    }

    /// One config per sweep value, without a sweep section. A config without
    /// a sweep expands to itself.
    pub fn expand_sweep(&self) -> Vec<RunConfig> {
        let Some(sw) = &self.sweep else {
            return vec![self.clone()];
        };
        sw.values
            .iter()
            .map(|&x| {
                let mut c = self.clone();
                c.sweep = None;
                match sw.parameter {
                    SweepParameter::Dt => c.scheme.dt = x,
                    SweepParameter::Lambda => c.scheme.lambda = x,
                    SweepParameter::Eta => c.scheme.eta = x,
                    SweepParameter::Mu => c.scheme.mu = x,
                }
                c
            })
            .collect()
    }

    /// `eps = lambda dt`
    pub fn epsilon(&self) -> f64 {
        self.scheme.lambda * self.scheme.dt
    }

    /// Resolves relative input paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.initial.path, &mut self.forcing.path]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

fn float(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'n', 'i']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn pair(x: [f64; 2]) -> String {
    format!("[{}, {}]", float(x[0]), float(x[1]))
}

fn quoted(s: &str) -> String {
    format!("{s:?}")
}

impl LoadedConfig {
    /// The resolved config as TOML, with defaulted keys marked.
    pub fn echo(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let mut section = String::new();
        let mut entry = |out: &mut String, sec: &str, key: &str, val: String| {
            if sec != section {
                if !out.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{sec}]");
                section = sec.to_string();
            }
            let full = format!("{sec}.{key}");
            let mark = if self.defaulted.iter().any(|d| *d == full) {
                "  # default"
            } else {
                ""
            };
            let _ = writeln!(out, "{key} = {val}{mark}");
        };
        entry(&mut out, "grid", "nx", c.grid.nx.to_string());
        entry(&mut out, "grid", "ny", c.grid.ny.to_string());
        entry(&mut out, "grid", "lx", float(c.grid.lx));
        entry(&mut out, "grid", "ly", float(c.grid.ly));
        entry(&mut out, "scheme", "dt", float(c.scheme.dt));
        entry(&mut out, "scheme", "horizon", float(c.scheme.horizon));
        entry(&mut out, "scheme", "lambda", float(c.scheme.lambda));
        entry(&mut out, "scheme", "eta", float(c.scheme.eta));
        entry(&mut out, "scheme", "mu", float(c.scheme.mu));
        let sv = &c.solver;
        entry(&mut out, "solver", "prediction", quoted(&sv.prediction));
        entry(
            &mut out,
            "solver",
            "prediction_rtol",
            float(sv.prediction_rtol),
        );
        entry(
            &mut out,
            "solver",
            "prediction_max_iter",
            sv.prediction_max_iter.to_string(),
        );
        entry(&mut out, "solver", "correction", quoted(&sv.correction));
        entry(
            &mut out,
            "solver",
            "correction_rtol",
            float(sv.correction_rtol),
        );
        entry(
            &mut out,
            "solver",
            "correction_max_iter",
            sv.correction_max_iter.to_string(),
        );
        entry(&mut out, "initial", "kind", quoted(&c.initial.kind));
        entry(&mut out, "initial", "seed", c.initial.seed.to_string());
        if let Some(p) = &c.initial.path {
            entry(
                &mut out,
                "initial",
                "path",
                quoted(&p.display().to_string()),
            );
        }
        entry(&mut out, "forcing", "kind", quoted(&c.forcing.kind));
        entry(&mut out, "forcing", "value", pair(c.forcing.value));
        if let Some(p) = &c.forcing.path {
            entry(
                &mut out,
                "forcing",
                "path",
                quoted(&p.display().to_string()),
            );
        }
        let bk = match c.boundary {
            BoundaryKind::NoSlip => "no-slip",
            BoundaryKind::TaylorGreen => "taylor-green",
        };
        entry(&mut out, "boundary", "kind", quoted(bk));
        match &c.obstacle.disk {
            None => entry(&mut out, "obstacle", "kind", quoted("none")),
            Some(disk) => {
                entry(&mut out, "obstacle", "kind", quoted("disk"));
                entry(&mut out, "obstacle", "center", pair(disk.center));
                entry(&mut out, "obstacle", "radius", float(disk.radius));
                entry(&mut out, "obstacle", "velocity", pair(disk.velocity));
                entry(&mut out, "obstacle", "omega", float(disk.omega));
            }
        }
        entry(&mut out, "obstacle", "sampler", quoted(&c.obstacle.sampler));
        entry(&mut out, "output", "csv", quoted(&c.output.csv));
        entry(
            &mut out,
            "output",
            "field_every",
            c.output.field_every.to_string(),
        );
        entry(
            &mut out,
            "output",
            "snapshots",
            c.output.snapshots.to_string(),
        );
        entry(
            &mut out,
            "output",
            "h_minus1",
            c.output.h_minus1.to_string(),
        );
        if let Some(sw) = &c.sweep {
            entry(&mut out, "sweep", "parameter", quoted(sw.parameter.name()));
            let vals: Vec<String> = sw.values.iter().map(|v| float(*v)).collect();
            entry(
                &mut out,
                "sweep",
                "values",
                format!("[{}]", vals.join(", ")),
            );
        }
        let _ = writeln!(
            out,
            "\n# derived: epsilon = lambda * dt = {}",
            float(c.epsilon())
        );
        out
    }

    /// `section.key = value` for every defaulted key, in schema order.
    pub fn defaults_block(&self) -> String {
        let mut section = "";
        let mut out = String::new();
        let echo = self.echo();
        for line in echo.lines() {
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name;
            } else if let Some(entry) = line.strip_suffix("  # default") {
                let _ = writeln!(out, "{section}.{entry}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\nnx = 8\n\n[scheme]\ndt = 0.1\nhorizon = 1.0\n";

    #[test]
    fn minimal_config_takes_documented_defaults() {
        let l = load_config(MINIMAL).unwrap();
        let c = &l.config;
        assert_eq!(c.scheme.lambda, 1.0);
        assert_eq!(c.scheme.eta, 1e-6);
        assert_eq!(c.scheme.mu, 1e-2);
        assert_eq!(c.initial.kind, "zero");
        assert_eq!(c.forcing.kind, "zero");
        assert!(c.obstacle.disk.is_none());
        assert_eq!(c.grid.ny, 8);
        assert!(l.defaulted.contains(&"scheme.lambda"));
        assert!(!l.defaulted.contains(&"scheme.dt"));
        assert!(l.echo().contains("lambda = 1.0  # default"));
        let block = l.defaults_block();
        assert!(block.contains("scheme.lambda = 1.0\n"));
        assert!(block.contains("initial.kind = \"zero\"\n"));
        assert!(!block.contains("scheme.dt"));
        assert_eq!(block.lines().count(), l.defaulted.len());
    }

    #[test]
    fn echo_round_trips() {
        let text = format!("{MINIMAL}[obstacle]\nkind = \"disk\"\ncenter = [0.5, 0.5]\nradius = 0.2\nomega = 1.0\n[sweep]\nparameter = \"eta\"\nvalues = [1e-2, 1e-3]\n");
        let l = load_config(&text).unwrap();
        let again = load_config(&l.echo()).unwrap();
        assert_eq!(again.config, l.config);
        assert!(again.defaulted.is_empty());
    }

    #[test]
    fn epsilon_is_rejected_with_a_pointer_to_lambda() {
        let text = format!("{MINIMAL}epsilon = 0.1\n");
        match load_config(&text) {
            Err(CliError::Parse { line, message }) => {
                assert_eq!(line, 7);
                assert!(message.contains("lambda"));
            }
            other => panic!("{other:?}"),
        }
        let text = format!("{MINIMAL}[sweep]\nparameter = \"epsilon\"\nvalues = [1.0, 2.0]\n");
        assert!(matches!(load_config(&text), Err(CliError::Invalid { .. })));
    }

    #[test]
    fn parse_errors_carry_the_line() {
        let text = "[grid]\nnx = 8\n\n[scheme]\ndt = \"fast\"\nhorizon = 1.0\n";
        match load_config(text) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        match load_config("[grid]\nnx = 8\nbogus = 1\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match load_config("[grid\n") {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_names_the_field() {
        let cases = [
            ("[grid]\nnx = 8\n[scheme]\ndt = -0.1\nhorizon = 1.0\n", "scheme.dt"),
            ("[grid]\nnx = 8\n[scheme]\nhorizon = 1.0\n", "scheme.dt"),
            ("[grid]\nnx = 0\n[scheme]\ndt = 0.1\nhorizon = 1.0\n", "grid"),
            (
                "[grid]\nnx = 8\n[scheme]\ndt = 0.1\nhorizon = 1.0\n[initial]\nkind = \"swirl\"\n",
                "initial.kind",
            ),
            (
                "[grid]\nnx = 8\n[scheme]\ndt = 0.1\nhorizon = 1.0\n[output]\ncsv = \"../x.csv\"\n",
                "output.csv",
            ),
            (
                "[grid]\nnx = 8\n[scheme]\ndt = 0.1\nhorizon = 1.0\n[sweep]\nparameter = \"dt\"\nvalues = [0.1, -0.05]\n",
                "sweep.values",
            ),
        ];
        for (text, field) in cases {
            match load_config(text) {
                Err(CliError::Invalid { field: f, .. }) => assert_eq!(f, field, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn dt_sweep_expands_with_derived_epsilon() {
        let text = format!("{MINIMAL}lambda = 2.0\n[sweep]\nparameter = \"dt\"\nvalues = [0.1, 0.05, 0.025, 0.0125]\n");
        let c = load_config(&text).unwrap().config;
        let runs = c.expand_sweep();
        assert_eq!(runs.len(), 4);
        for (r, dt) in runs.iter().zip([0.1, 0.05, 0.025, 0.0125]) {
            assert!(r.sweep.is_none());
            assert_eq!(r.scheme.dt, dt);
            assert_eq!(r.epsilon(), 2.0 * dt);
            assert_eq!(r.params().unwrap().epsilon(), 2.0 * dt);
        }
    }
}
