//! Time-dependent data of a flow problem: body force, wall velocity and obstacle.

use std::fmt::Debug;
use std::sync::Arc;

use crate::geometry::Obstacle;
use crate::mesh::{Grid, VelocityField, WallData};

/// Body force sampled on the faces at time `t`.
pub trait Forcing: Debug + Send + Sync {
    fn name(&self) -> &str;
    fn sample(&self, grid: &Grid, t: f64) -> VelocityField;
}

/// Tangential velocity prescribed on the domain walls at time `t`.
pub trait WallVelocity: Debug + Send + Sync {
    fn name(&self) -> &str;
    fn walls(&self, grid: &Grid, t: f64) -> WallData;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroForcing;

impl Forcing for ZeroForcing {
    fn name(&self) -> &str {
        "zero"
    }
    fn sample(&self, grid: &Grid, _t: f64) -> VelocityField {
        VelocityField::zeros(*grid)
    }
}

/// Spatially and temporally uniform force.
#[derive(Debug, Clone, Copy)]
pub struct ConstantForcing(pub [f64; 2]);

impl Forcing for ConstantForcing {
    fn name(&self) -> &str {
        "constant"
    }
    fn sample(&self, grid: &Grid, _t: f64) -> VelocityField {
        let [fx, fy] = self.0;
        VelocityField::from_fn(*grid, |_, _| fx, |_, _| fy)
    }
}

/// A fixed face field, used for forcing read from a file.
#[derive(Debug, Clone)]
pub struct FieldForcing(pub VelocityField);

impl Forcing for FieldForcing {
    fn name(&self) -> &str {
        "file"
    }
    fn sample(&self, _grid: &Grid, _t: f64) -> VelocityField {
        self.0.clone()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoSlip;

impl WallVelocity for NoSlip {
    fn name(&self) -> &str {
        "no-slip"
    }
    fn walls(&self, grid: &Grid, _t: f64) -> WallData {
        WallData::no_slip(grid)
    }
}

/// Everything the stepper needs besides the initial state and the parameters.
#[derive(Debug, Clone)]
pub struct Problem {
    pub forcing: Arc<dyn Forcing>,
    pub walls: Arc<dyn WallVelocity>,
    pub obstacle: Obstacle,
}

impl Problem {
    /// Unforced flow in a closed box without obstacle.
    pub fn unforced(horizon: f64) -> Self {
        Problem {
            forcing: Arc::new(ZeroForcing),
            walls: Arc::new(NoSlip),
            obstacle: Obstacle::none(horizon),
        }
    }

    pub fn with_forcing(mut self, forcing: Arc<dyn Forcing>) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn with_walls(mut self, walls: Arc<dyn WallVelocity>) -> Self {
        self.walls = walls;
        self
    }

    pub fn with_obstacle(mut self, obstacle: Obstacle) -> Self {
        self.obstacle = obstacle;
        self
    }
}
