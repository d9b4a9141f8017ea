//! The vector penalty-projection stepper.
//!
//! Each step predicts `v~` from the momentum equation with the old pressure
//! gradient, corrects it with `v^` solving `(eps/dt) v^ - grad div v^ = grad div v~`,
//! sets `v = v~ + v^` and updates the pressure with `p -= div(v) / eps`.
//! The penalty `eps = lambda * dt` is always derived, never set directly.

use std::sync::Arc;

use crate::diagnostics::{
    slip_error, DiagnosticsRecord, FieldSeries, InitialNorms, InverseLaplacian,
};
use crate::error::{Result, VppError};
use crate::geometry::{sample_face_chi, sample_solid_velocity};
use crate::linalg::{
    assemble_correction, assemble_prediction, krylov_method, Face, FaceLayout, KrylovMethod,
    PredictionCoefficients, SolverConfig, SparseOperator,
};
use crate::mesh::{
    divergence, gradient, velocity_gradient_norm, CellField, Grid, PressureField, VelocityField,
};
use crate::problem::Problem;

pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_ETA: f64 = 1e-6;
pub const DEFAULT_MU: f64 = 1e-2;

/// A Krylov method and its stopping rule.
#[derive(Debug, Clone)]
pub struct SolverChoice {
    pub method: Arc<dyn KrylovMethod>,
    pub config: SolverConfig,
}

impl SolverChoice {
    pub fn new(method: &str, rtol: f64, max_iter: usize) -> Result<Self> {
        Ok(SolverChoice {
            method: krylov_method(method)?,
            config: SolverConfig::new(rtol, max_iter)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SchemeParams {
    pub dt: f64,
    /// `eps = lambda * dt`
    pub lambda: f64,
    /// Obstacle penalty.
    pub eta: f64,
    pub mu: f64,
    /// Final time `T`.
    pub horizon: f64,
    pub prediction: SolverChoice,
    pub correction: SolverChoice,
}

impl SchemeParams {
    /// Parameters with the default solvers (BiCGSTAB at 1e-8 for the
    /// prediction, CG at 1e-10 for the correction).
    pub fn new(dt: f64, lambda: f64, eta: f64, mu: f64, horizon: f64) -> Result<Self> {
        let p = SchemeParams {
            dt,
            lambda,
            eta,
            mu,
            horizon,
            prediction: SolverChoice::new("bicgstab", 1e-8, 5_000)?,
            correction: SolverChoice::new("cg", 1e-10, 20_000)?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(VppError::param(
                    field,
                    format!("must be positive and finite, got {x}"),
                ))
            }
        };
        positive("dt", self.dt)?;
        positive("lambda", self.lambda)?;
        positive("mu", self.mu)?;
        positive("T", self.horizon)?;
        if self.eta.is_nan() || self.eta <= 0.0 {
            return Err(VppError::param(
                "eta",
                format!("must be positive, got {}", self.eta),
            ));
        }
        if self.dt > self.horizon {
            return Err(VppError::param(
                "dt",
                format!(
                    "time step {} exceeds the final time {}",
                    self.dt, self.horizon
                ),
            ));
        }
        self.prediction.config.validate()?;
        self.correction.config.validate()
    }

    pub fn epsilon(&self) -> f64 {
        self.lambda * self.dt
    }

    /// `floor(T / dt)`, guarded against round-off in the quotient.
    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt * (1.0 + 1e-12)).floor() as usize
    }
}

/// State at the end of step `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub n: usize,
    pub t: f64,
    pub v: VelocityField,
    pub v_tilde: VelocityField,
    pub v_hat: VelocityField,
    pub p: PressureField,
}

impl FlowState {
    /// `v~^0 = v^0`, `v^^0 = 0`.
    pub fn initial(v0: VelocityField, p0: PressureField) -> Self {
        let grid = *v0.grid();
        FlowState {
            n: 0,
            t: 0.0,
            v_tilde: v0.clone(),
            v: v0,
            v_hat: VelocityField::zeros(grid),
            p: p0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.v.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    /// Record `||v^||_{H^-1}` each step (one extra Poisson solve).
    pub correction_h_minus1: bool,
    /// Keep velocity snapshots for translation estimates (grids up to 64x64).
    pub keep_snapshots: bool,
}

pub const MAX_SNAPSHOT_CELLS: usize = 64 * 64;

/// Stepper bound to a grid, parameters and problem; caches the correction operator.
#[derive(Debug)]
pub struct Stepper<'a> {
    grid: Grid,
    params: &'a SchemeParams,
    problem: &'a Problem,
    layout: FaceLayout,
    correction_op: SparseOperator,
    h_minus1: Option<InverseLaplacian>,
}

/// Result of the prediction stage.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub v_tilde: VelocityField,
    pub iterations: usize,
    /// `int chi |v~ - v_s|^2` with the face indicator used in the solve.
    pub penalization_energy: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(grid: &Grid, params: &'a SchemeParams, problem: &'a Problem) -> Result<Self> {
        params.validate()?;
        problem.obstacle.validate(grid)?;
        Ok(Stepper {
            grid: *grid,
            params,
            problem,
            layout: FaceLayout::new(*grid),
            correction_op: assemble_correction(grid, params.epsilon() / params.dt)?,
            h_minus1: None,
        })
    }

    pub fn with_h_minus1(mut self) -> Result<Self> {
        self.h_minus1 = Some(InverseLaplacian::new(&self.grid)?);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Solves the momentum equation for `v~^{n+1}` with `grad p^n` explicit,
    /// forcing, obstacle indicator and solid velocity at `t^{n+1}`.
    pub fn predict(&self, state: &FlowState) -> Result<Prediction> {
        let prm = self.params;
        let t_next = state.t + prm.dt;
        let chi = sample_face_chi(&self.problem.obstacle, t_next, &self.grid)?;
        let vs = sample_solid_velocity(&self.problem.obstacle, t_next, &self.grid)?;
        let walls = self.problem.walls.walls(&self.grid, t_next);
        let forcing = self.problem.forcing.sample(&self.grid, t_next);
        if !forcing.is_finite() {
            return Err(VppError::NonFinite("forcing"));
        }
        let coeffs = PredictionCoefficients {
            dt: prm.dt,
            mu: prm.mu,
            eta: prm.eta,
        };
        let system = assemble_prediction(&self.grid, coeffs, &state.v, &chi, &walls)?;
        let inv_eta = if prm.eta.is_finite() {
            1.0 / prm.eta
        } else {
            0.0
        };

        let mut rhs_field = state.v.scaled(1.0 / prm.dt);
        rhs_field.axpy(-1.0, &gradient(state.p.cells()));
        rhs_field.axpy(1.0, &forcing);
        let mut penal = chi.clone();
        for (c, s) in penal.u.iter_mut().zip(&vs.u) {
            *c *= inv_eta * s;
        }
        for (c, s) in penal.v.iter_mut().zip(&vs.v) {
            *c *= inv_eta * s;
        }
        rhs_field.axpy(1.0, &penal);
        let mut rhs = self.layout.gather(&rhs_field);
        for (r, o) in rhs.iter_mut().zip(&system.offset) {
            *r -= o;
        }

        let mut x = self.layout.gather(&state.v);
        let stats =
            prm.prediction
                .method
                .solve(&system.op, &rhs, &mut x, &prm.prediction.config)?;
        let v_tilde = self.layout.scatter(&x);

        let mut penalization_energy = 0.0;
        let area = self.grid.cell_area();
        for f in self.layout.faces() {
            let (chi_f, d) = match f {
                Face::U(i, j) => (chi.u_at(i, j), v_tilde.u_at(i, j) - vs.u_at(i, j)),
                Face::V(i, j) => (chi.v_at(i, j), v_tilde.v_at(i, j) - vs.v_at(i, j)),
            };
            penalization_energy += area * chi_f * d * d;
        }
        Ok(Prediction {
            v_tilde,
            iterations: stats.iterations,
            penalization_energy,
        })
    }

    /// Solves `(eps/dt) v^ - grad div v^ = grad div v~` with `v^ . n = 0` on the walls.
    pub fn correct(&self, v_tilde: &VelocityField) -> Result<(VelocityField, usize)> {
        let rhs = self.layout.gather(&gradient(&divergence(v_tilde)));
        let mut x = vec![0.0; rhs.len()];
        let c = &self.params.correction;
        let stats = c
            .method
            .solve(&self.correction_op, &rhs, &mut x, &c.config)?;
        Ok((self.layout.scatter(&x), stats.iterations))
    }

    /// Advances one step and measures it.
    pub fn step(&self, state: &FlowState) -> Result<(FlowState, DiagnosticsRecord)> {
        let n = state.n + 1;
        let prm = self.params;
        if state.t + prm.dt > prm.horizon * (1.0 + 1e-12) + 1e-12 {
            return Err(VppError::TimeOutOfRange {
                t: state.t + prm.dt,
                horizon: prm.horizon,
            }
            .at_step(n));
        }
        self.step_inner(state).map_err(|e| e.at_step(n))
    }

    fn step_inner(&self, state: &FlowState) -> Result<(FlowState, DiagnosticsRecord)> {
        let prm = self.params;
        let t = (state.n + 1) as f64 * prm.dt;
        let pred = self.predict(state)?;
        let (v_hat, correction_iterations) = self.correct(&pred.v_tilde)?;
        let v = &pred.v_tilde + &v_hat;
        if !v.is_finite() {
            return Err(VppError::NonFinite("velocity"));
        }
        let p = update_pressure(&state.p, &v, prm.epsilon());
        let walls = self.problem.walls.walls(&self.grid, t);
        let slip = if self.problem.obstacle.is_present() {
            slip_error(&v, &self.problem.obstacle, t)?.value
        } else {
            0.0
        };
        let correction_h_minus1 = match &self.h_minus1 {
            Some(inv) => Some(inv.velocity_norm(&v_hat)?),
            None => None,
        };
        let record = DiagnosticsRecord {
            n: state.n + 1,
            t,
            kinetic_energy: 0.5 * v.dot(&v),
            div_norm: divergence(&v).norm_l2(),
            grad_norm: velocity_gradient_norm(&pred.v_tilde, &walls),
            pressure_norm: p.norm_l2(),
            pressure_grad_norm: gradient(p.cells()).norm_l2(),
            increment_norm: (&pred.v_tilde - &state.v).norm_l2(),
            pressure_increment_norm: p.cells().minus(state.p.cells()).norm_l2(),
            correction_norm: v_hat.norm_l2(),
            correction_h_minus1,
            penalization_energy: pred.penalization_energy,
            slip_error: slip,
            prediction_iterations: pred.iterations,
            correction_iterations,
        };
        let next = FlowState {
            n: state.n + 1,
            t,
            v,
            v_tilde: pred.v_tilde,
            v_hat,
            p,
        };
        Ok((next, record))
    }
}

/// `p^{n+1} = p^n - div(v) / eps`, then the mean is removed.
pub fn update_pressure(p: &PressureField, v_new: &VelocityField, epsilon: f64) -> PressureField {
    let mut cells: CellField = p.cells().clone();
    cells.axpy(-1.0 / epsilon, &divergence(v_new));
    PressureField::from_cells(cells)
}

/// Receives every step as it completes.
pub trait RecordSink {
    fn record(&mut self, state: &FlowState, record: &DiagnosticsRecord) -> Result<()>;
}

impl<F: FnMut(&FlowState, &DiagnosticsRecord) -> Result<()>> RecordSink for F {
    fn record(&mut self, state: &FlowState, record: &DiagnosticsRecord) -> Result<()> {
        self(state, record)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: FlowState,
    pub records: Vec<DiagnosticsRecord>,
    pub initial: InitialNorms,
    /// `||div v^0||`; the initial velocity is accepted even when not solenoidal.
    pub initial_divergence: f64,
    /// Velocity snapshots `v^0 .. v^{N-1}` when requested.
    pub snapshots: Option<FieldSeries>,
}

/// Runs `floor(T/dt)` steps from `(v0, p0)`, streaming each record to `sinks`.
pub fn run(
    v0: VelocityField,
    p0: PressureField,
    problem: &Problem,
    params: &SchemeParams,
    options: RunOptions,
    sinks: &mut [&mut dyn RecordSink],
) -> Result<RunOutcome> {
    let grid = *v0.grid();
    if p0.grid() != &grid {
        return Err(VppError::InvalidGrid(
            "velocity and pressure grids differ".into(),
        ));
    }
    if !v0.is_finite() || !p0.cells().is_finite() {
        return Err(VppError::NonFinite("initial state"));
    }
    let v0 = v0.with_zero_normal_boundary();
    let mut stepper = Stepper::new(&grid, params, problem)?;
    if options.correction_h_minus1 {
        stepper = stepper.with_h_minus1()?;
    }
    let mut snapshots = if options.keep_snapshots {
        if grid.n_cells() > MAX_SNAPSHOT_CELLS {
            return Err(VppError::param(
                "snapshots",
                "snapshot retention is limited to 64x64 cells",
            ));
        }
        Some(FieldSeries::for_velocity(params.dt, &grid)?)
    } else {
        None
    };
    let initial = InitialNorms {
        velocity_sq: v0.dot(&v0),
        pressure_sq: p0.norm_l2().powi(2),
        pressure_grad_sq: gradient(p0.cells()).norm_l2().powi(2),
    };
    let initial_divergence = divergence(&v0).norm_l2();
    let mut state = FlowState::initial(v0, p0);
    let n_steps = params.n_steps();
    let mut records = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        if let Some(s) = snapshots.as_mut() {
            s.push_velocity(&state.v)?;
        }
        let (next, record) = stepper.step(&state)?;
        for sink in sinks.iter_mut() {
            sink.record(&next, &record).map_err(|e| e.at_step(next.n))?;
        }
        records.push(record);
        state = next;
    }
    Ok(RunOutcome {
        state,
        records,
        initial,
        initial_divergence,
        snapshots,
    })
}
