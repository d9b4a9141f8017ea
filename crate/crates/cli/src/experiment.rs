//! Single runs and parameter sweeps, with their on-disk outputs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use vpp_core::diagnostics::{
    energy_ledger, nikolskii_translation, DiagnosticsRecord, LedgerCoefficients, TranslationForm,
};
use vpp_core::fit::fit_power_law;
use vpp_core::manufactured::TaylorGreen;
use vpp_core::mesh::Grid;
use vpp_core::problem::{NoSlip, Problem, WallVelocity};
use vpp_core::vpp::{run, FlowState, RunOptions, SchemeParams};
use vpp_core::VppError;

use crate::config::{BoundaryKind, RunConfig, SweepParameter};
use crate::error::{CliError, Result};
use crate::fields::format_vtk;
use crate::registry::{forcing_source, initial_condition};

/// Written to the output directory when a run stops early.
pub const PARTIAL_MARKER: &str = "PARTIAL";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const TRANSLATION_CSV: &str = "translation.csv";

pub const CSV_HEADER: &str =
    "n,t,kinetic_energy,div_norm,grad_norm,pressure_norm,pressure_grad_norm,\
increment_norm,pressure_increment_norm,correction_norm,correction_h_minus1,penalization_energy,\
slip_error,prediction_iterations,correction_iterations";

/// One CSV row. Floats use the shortest representation that reads back exactly.
pub fn csv_row(r: &DiagnosticsRecord) -> String {
    let h = r
        .correction_h_minus1
        .map(|x| format!("{x:e}"))
        .unwrap_or_default();
    format!(
        "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e},{},{}",
        r.n,
        r.t,
        r.kinetic_energy,
        r.div_norm,
        r.grad_norm,
        r.pressure_norm,
        r.pressure_grad_norm,
        r.increment_norm,
        r.pressure_increment_norm,
        r.correction_norm,
        h,
        r.penalization_energy,
        r.slip_error,
        r.prediction_iterations,
        r.correction_iterations
    )
}

/// Time-integrated quantities of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub steps: usize,
    pub final_kinetic_energy: f64,
    pub final_div_norm: f64,
    /// `(sum dt ||div v^n||^2)^{1/2}`
    pub div_l2t: f64,
    /// `sum dt slip_error`
    pub slip_l1t: f64,
    /// `sum dt int chi |v~ - v_s|^2`
    pub penalization_l1t: f64,
    /// `(sum dt ||v^n - v(t_n)||^2)^{1/2}` against the exact vortex, when known.
    pub velocity_error: Option<f64>,
    pub ledger_non_increasing: bool,
    pub max_prediction_iterations: usize,
    pub max_correction_iterations: usize,
}

struct Setup {
    grid: Grid,
    params: SchemeParams,
    problem: Problem,
    exact: Option<TaylorGreen>,
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let mu = cfg.scheme.mu;
    let forcing = forcing_source(&cfg.forcing.kind)
        .ok_or_else(|| CliError::invalid("forcing.kind", "unknown"))?
        .build(&cfg.forcing, &grid, mu)?;
    let walls: Arc<dyn WallVelocity> = match cfg.boundary {
        BoundaryKind::NoSlip => Arc::new(NoSlip),
        BoundaryKind::TaylorGreen => {
            let tg = TaylorGreen::new(mu);
            tg.sample_velocity(&grid, 0.0)
                .map_err(|e| CliError::invalid("boundary.kind", e.to_string()))?;
            Arc::new(tg)
        }
    };
    let problem = Problem::unforced(cfg.scheme.horizon)
        .with_forcing(forcing)
        .with_walls(walls)
        .with_obstacle(cfg.obstacle()?);
    let exact = (cfg.initial.kind == "taylor-green" && cfg.forcing.kind == "taylor-green")
        .then(|| TaylorGreen::new(mu));
    Ok(Setup {
        grid,
        params,
        problem,
        exact,
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let marker = dir.join(PARTIAL_MARKER);
    if marker.exists() {
        fs::remove_file(&marker).map_err(|e| CliError::io(&marker, e))?;
    }
    Ok(())
}

/// Best effort: the marker itself may fail to write when the disk is the problem.
fn mark_partial(dir: &Path, err: &CliError) {
    let _ = fs::write(
        dir.join(PARTIAL_MARKER),
        format!("incomplete output: {err}\n"),
    );
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Runs one configuration into `out`: the per-step CSV, optional field
/// dumps under `fields/`, and the translation table when snapshots are kept.
pub fn run_experiment(cfg: &RunConfig, out: &Path) -> Result<RunMetrics> {
    create_dir(out)?;
    run_in(cfg, out).inspect_err(|e| mark_partial(out, e))
}

fn run_in(cfg: &RunConfig, out: &Path) -> Result<RunMetrics> {
    let s = setup(cfg)?;
    let (v0, p0) = initial_condition(&cfg.initial.kind)
        .ok_or_else(|| CliError::invalid("initial.kind", "unknown"))?
        .build(&cfg.initial, &s.grid, cfg.scheme.mu)?;

    let csv_path = out.join(&cfg.output.csv);
    let file = File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
    let mut csv = BufWriter::new(file);
    writeln!(csv, "{CSV_HEADER}").map_err(|e| CliError::io(&csv_path, e))?;

    let fields_dir = out.join("fields");
    let every = cfg.output.field_every;
    let dump = |state: &FlowState| -> Result<()> {
        let path = fields_dir.join(format!("step-{:06}.vtk", state.n));
        let text = format_vtk(state, &s.problem.obstacle)?;
        write_file(&path, &text)
    };
    if every > 0 {
        fs::create_dir_all(&fields_dir).map_err(|e| CliError::io(&fields_dir, e))?;
        dump(&FlowState::initial(
            v0.clone().with_zero_normal_boundary(),
            p0.clone(),
        ))?;
    }

    let dt = s.params.dt;
    let mut io_failure: Option<CliError> = None;
    let mut err2 = 0.0;
    let mut exact_failure: Option<VppError> = None;
    let mut sink = |state: &FlowState, r: &DiagnosticsRecord| -> vpp_core::Result<()> {
        let written = writeln!(csv, "{}", csv_row(r)).map_err(|e| CliError::io(&csv_path, e));
        let written = written.and_then(|_| {
            if every > 0 && state.n.is_multiple_of(every) {
                dump(state)
            } else {
                Ok(())
            }
        });
        if let Err(e) = written {
            let msg = e.to_string();
            io_failure = Some(e);
            return Err(VppError::Sink(msg));
        }
        if let Some(tg) = &s.exact {
            match tg.sample_velocity(&s.grid, state.t) {
                Ok(ex) => err2 += dt * (&state.v - &ex).norm_l2().powi(2),
                Err(e) => exact_failure = Some(e),
            }
        }
        Ok(())
    };
    let options = RunOptions {
        correction_h_minus1: cfg.output.h_minus1,
        keep_snapshots: cfg.output.snapshots,
    };
    let outcome = run(v0, p0, &s.problem, &s.params, options, &mut [&mut sink]);
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) if e.is_sink_failure() => {
            return Err(io_failure.unwrap_or(CliError::Solver(e)));
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(e) = exact_failure {
        return Err(e.into());
    }
    csv.flush().map_err(|e| CliError::io(&csv_path, e))?;

    if let Some(series) = &outcome.snapshots {
        let path = out.join(TRANSLATION_CSV);
        let mut text = String::from("h,integral,quadratic\n");
        let mut h = dt;
        while h < series.horizon() {
            let a = nikolskii_translation(series, h, TranslationForm::Integral)?;
            let b = nikolskii_translation(series, h, TranslationForm::Quadratic)?;
            text.push_str(&format!("{h:e},{a:e},{b:e}\n"));
            h *= 2.0;
        }
        write_file(&path, &text)?;
    }

    let records = &outcome.records;
    let ledger = energy_ledger(
        records,
        outcome.initial,
        LedgerCoefficients {
            dt,
            epsilon: s.params.epsilon(),
            mu: s.params.mu,
            eta: s.params.eta,
        },
        1e-10,
    );
    let last = records.last();
    Ok(RunMetrics {
        steps: records.len(),
        final_kinetic_energy: last.map_or(0.5 * outcome.initial.velocity_sq, |r| r.kinetic_energy),
        final_div_norm: last.map_or(outcome.initial_divergence, |r| r.div_norm),
        div_l2t: records
            .iter()
            .map(|r| dt * r.div_norm.powi(2))
            .sum::<f64>()
            .sqrt(),
        slip_l1t: records.iter().map(|r| dt * r.slip_error).sum(),
        penalization_l1t: records.iter().map(|r| dt * r.penalization_energy).sum(),
        velocity_error: s.exact.map(|_| err2.sqrt()),
        ledger_non_increasing: ledger.non_increasing,
        max_prediction_iterations: records
            .iter()
            .map(|r| r.prediction_iterations)
            .max()
            .unwrap_or(0),
        max_correction_iterations: records
            .iter()
            .map(|r| r.correction_iterations)
            .max()
            .unwrap_or(0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    pub metric: &'static str,
    pub exponent: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub runs: Vec<RunMetrics>,
    pub fits: Vec<ExponentFit>,
}

pub fn run_dir(out: &Path, k: usize) -> PathBuf {
    out.join(format!("run-{k:03}"))
}

fn fit_metric(metric: &'static str, xs: &[f64], ys: &[Option<f64>]) -> ExponentFit {
    let ys: Option<Vec<f64>> = ys.iter().copied().collect();
    let fit = ys.and_then(|ys| fit_power_law(xs, &ys).ok());
    ExponentFit {
        metric,
        exponent: fit.map(|f| f.slope),
        residual: fit.map(|f| f.residual),
    }
}

/// Runs every sweep value concurrently into `out/run-NNN/` and writes
/// `out/summary.csv`. Runs share no state, so the results do not depend on
/// scheduling.
pub fn run_sweep(cfg: &RunConfig, out: &Path) -> Result<SweepSummary> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::invalid("sweep", "the sweep verb needs a [sweep] section"))?;
    create_dir(out)?;
    let configs = cfg.expand_sweep();
    let results: Vec<Result<RunMetrics>> = configs
        .par_iter()
        .enumerate()
        .map(|(k, c)| run_experiment(c, &run_dir(out, k)))
        .collect();
    let mut runs = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(m) => runs.push(m),
            Err(e) => {
                mark_partial(out, &e);
                return Err(e);
            }
        }
    }
    let xs = &sweep.values;
    let fits = vec![
        fit_metric(
            "divergence",
            xs,
            &runs.iter().map(|r| Some(r.div_l2t)).collect::<Vec<_>>(),
        ),
        fit_metric(
            "slip",
            xs,
            &runs.iter().map(|r| Some(r.slip_l1t)).collect::<Vec<_>>(),
        ),
        fit_metric(
            "penalization",
            xs,
            &runs
                .iter()
                .map(|r| Some(r.penalization_l1t))
                .collect::<Vec<_>>(),
        ),
        fit_metric(
            "error",
            xs,
            &runs.iter().map(|r| r.velocity_error).collect::<Vec<_>>(),
        ),
    ];
    let summary = SweepSummary {
        parameter: sweep.parameter,
        values: xs.clone(),
        runs,
        fits,
    };
    let path = out.join(SUMMARY_CSV);
    write_file(&path, &summary_csv(&summary, &configs)).inspect_err(|e| mark_partial(out, e))?;
    Ok(summary)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// One row per run; the fitted exponents (against the swept values) repeat on every row.
pub fn summary_csv(s: &SweepSummary, configs: &[RunConfig]) -> String {
    let mut text = String::from(
        "run,parameter,value,dt,lambda,epsilon,eta,mu,steps,final_kinetic_energy,final_div_norm,\
div_l2t,slip_l1t,penalization_l1t,velocity_error,ledger_non_increasing,max_prediction_iterations,\
max_correction_iterations",
    );
    for f in &s.fits {
        text.push_str(&format!(",{0}_exponent,{0}_fit_residual", f.metric));
    }
    text.push('\n');
    for (k, ((r, c), x)) in s.runs.iter().zip(configs).zip(&s.values).enumerate() {
        text.push_str(&format!(
            "{k},{},{x:e},{:e},{:e},{:e},{:e},{:e},{},{:e},{:e},{:e},{:e},{:e},{},{},{},{}",
            s.parameter.name(),
            c.scheme.dt,
            c.scheme.lambda,
            c.epsilon(),
            c.scheme.eta,
            c.scheme.mu,
            r.steps,
            r.final_kinetic_energy,
            r.final_div_norm,
            r.div_l2t,
            r.slip_l1t,
            r.penalization_l1t,
            opt(r.velocity_error),
            r.ledger_non_increasing,
            r.max_prediction_iterations,
            r.max_correction_iterations,
        ));
        for f in &s.fits {
            text.push_str(&format!(",{},{}", opt(f.exponent), opt(f.residual)));
        }
        text.push('\n');
    }
    text
}
