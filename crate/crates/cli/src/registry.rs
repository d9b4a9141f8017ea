//! Initial conditions and forcings selectable by name from a config.

use std::path::Path;
use std::sync::Arc;

use vpp_core::manufactured::{random_solenoidal, TaylorGreen};
use vpp_core::mesh::{Grid, PressureField, VelocityField};
use vpp_core::problem::{ConstantForcing, FieldForcing, Forcing, ZeroForcing};

use crate::config::{ForcingSpec, InitialSpec};
use crate::error::{CliError, Result};
use crate::fields::read_face_file;

pub trait InitialCondition: Sync {
    fn name(&self) -> &'static str;
    /// Checks the keys this condition needs, without touching the file system.
    fn check(&self, spec: &InitialSpec) -> std::result::Result<(), String>;
    fn build(
        &self,
        spec: &InitialSpec,
        grid: &Grid,
        mu: f64,
    ) -> Result<(VelocityField, PressureField)>;
}

pub trait ForcingSource: Sync {
    fn name(&self) -> &'static str;
    fn check(&self, spec: &ForcingSpec) -> std::result::Result<(), String>;
    fn build(&self, spec: &ForcingSpec, grid: &Grid, mu: f64) -> Result<Arc<dyn Forcing>>;
}

fn no_path(path: &Option<std::path::PathBuf>) -> std::result::Result<(), String> {
    match path {
        Some(_) => Err("`path` is only used by kind = \"file\"".into()),
        None => Ok(()),
    }
}

struct ZeroInitial;

impl InitialCondition for ZeroInitial {
    fn name(&self) -> &'static str {
        "zero"
    }
    fn check(&self, spec: &InitialSpec) -> std::result::Result<(), String> {
        no_path(&spec.path)
    }
    fn build(
        &self,
        _: &InitialSpec,
        grid: &Grid,
        _mu: f64,
    ) -> Result<(VelocityField, PressureField)> {
        Ok((VelocityField::zeros(*grid), PressureField::zeros(*grid)))
    }
}

/// Velocity and pressure of the decaying vortex at `t = 0`.
struct TaylorGreenInitial;

impl InitialCondition for TaylorGreenInitial {
    fn name(&self) -> &'static str {
        "taylor-green"
    }
    fn check(&self, spec: &InitialSpec) -> std::result::Result<(), String> {
        no_path(&spec.path)
    }
    fn build(
        &self,
        _: &InitialSpec,
        grid: &Grid,
        mu: f64,
    ) -> Result<(VelocityField, PressureField)> {
        let tg = TaylorGreen::new(mu);
        let v = tg
            .sample_velocity(grid, 0.0)
            .map_err(|e| CliError::invalid("initial.kind", e.to_string()))?;
        Ok((v, tg.sample_pressure(grid, 0.0)?))
    }
}

/// Seeded random divergence-free velocity with unit maximum, zero pressure.
struct RandomInitial;

impl InitialCondition for RandomInitial {
    fn name(&self) -> &'static str {
        "random"
    }
    fn check(&self, spec: &InitialSpec) -> std::result::Result<(), String> {
        no_path(&spec.path)
    }
    fn build(
        &self,
        spec: &InitialSpec,
        grid: &Grid,
        _mu: f64,
    ) -> Result<(VelocityField, PressureField)> {
        Ok((
            random_solenoidal(grid, spec.seed),
            PressureField::zeros(*grid),
        ))
    }
}

struct FileInitial;

impl InitialCondition for FileInitial {
    fn name(&self) -> &'static str {
        "file"
    }
    fn check(&self, spec: &InitialSpec) -> std::result::Result<(), String> {
        match spec.path {
            Some(_) => Ok(()),
            None => Err("kind = \"file\" needs `path`".into()),
        }
    }
    fn build(
        &self,
        spec: &InitialSpec,
        grid: &Grid,
        _mu: f64,
    ) -> Result<(VelocityField, PressureField)> {
        let path = spec.path.as_deref().unwrap_or(Path::new(""));
        let f = read_face_file(path, grid, "initial.path")?;
        let p = f
            .pressure
            .map(PressureField::from_cells)
            .unwrap_or_else(|| PressureField::zeros(*grid));
        Ok((f.velocity, p))
    }
}

struct ZeroSource;

impl ForcingSource for ZeroSource {
    fn name(&self) -> &'static str {
        "zero"
    }
    fn check(&self, spec: &ForcingSpec) -> std::result::Result<(), String> {
        no_path(&spec.path)
    }
    fn build(&self, _: &ForcingSpec, _: &Grid, _: f64) -> Result<Arc<dyn Forcing>> {
        Ok(Arc::new(ZeroForcing))
    }
}

struct ConstantSource;

impl ForcingSource for ConstantSource {
    fn name(&self) -> &'static str {
        "constant"
    }
    fn check(&self, spec: &ForcingSpec) -> std::result::Result<(), String> {
        if !spec.value.iter().all(|v| v.is_finite()) {
            return Err("`value` must be finite".into());
        }
        no_path(&spec.path)
    }
    fn build(&self, spec: &ForcingSpec, _: &Grid, _: f64) -> Result<Arc<dyn Forcing>> {
        Ok(Arc::new(ConstantForcing(spec.value)))
    }
}

/// The force that makes the decaying vortex an exact solution.
struct TaylorGreenSource;

impl ForcingSource for TaylorGreenSource {
    fn name(&self) -> &'static str {
        "taylor-green"
    }
    fn check(&self, spec: &ForcingSpec) -> std::result::Result<(), String> {
        no_path(&spec.path)
    }
    fn build(&self, _: &ForcingSpec, grid: &Grid, mu: f64) -> Result<Arc<dyn Forcing>> {
        let tg = TaylorGreen::new(mu);
        tg.sample_forcing(grid, 0.0)
            .map_err(|e| CliError::invalid("forcing.kind", e.to_string()))?;
        Ok(Arc::new(tg))
    }
}

/// Steady face field read from a file.
struct FileSource;

impl ForcingSource for FileSource {
    fn name(&self) -> &'static str {
        "file"
    }
    fn check(&self, spec: &ForcingSpec) -> std::result::Result<(), String> {
        match spec.path {
            Some(_) => Ok(()),
            None => Err("kind = \"file\" needs `path`".into()),
        }
    }
    fn build(&self, spec: &ForcingSpec, grid: &Grid, _: f64) -> Result<Arc<dyn Forcing>> {
        let path = spec.path.as_deref().unwrap_or(Path::new(""));
        let f = read_face_file(path, grid, "forcing.path")?;
        Ok(Arc::new(FieldForcing(f.velocity)))
    }
}

static INITIAL_REGISTRY: &[&dyn InitialCondition] = &[
    &ZeroInitial,
    &TaylorGreenInitial,
    &RandomInitial,
    &FileInitial,
];
static FORCING_REGISTRY: &[&dyn ForcingSource] = &[
    &ZeroSource,
    &ConstantSource,
    &TaylorGreenSource,
    &FileSource,
];

pub const INITIAL_CONDITIONS: &[&str] = &["zero", "taylor-green", "random", "file"];
pub const FORCINGS: &[&str] = &["zero", "constant", "taylor-green", "file"];

pub fn initial_condition(name: &str) -> Option<&'static dyn InitialCondition> {
    INITIAL_REGISTRY.iter().copied().find(|c| c.name() == name)
}

pub fn forcing_source(name: &str) -> Option<&'static dyn ForcingSource> {
    FORCING_REGISTRY.iter().copied().find(|c| c.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_match_registrations() {
        let names: Vec<_> = INITIAL_REGISTRY.iter().map(|c| c.name()).collect();
        assert_eq!(names, INITIAL_CONDITIONS);
        let names: Vec<_> = FORCING_REGISTRY.iter().map(|c| c.name()).collect();
        assert_eq!(names, FORCINGS);
        assert!(initial_condition("vortex").is_none());
        assert!(forcing_source("taylor-green").is_some());
    }

    #[test]
    fn taylor_green_needs_the_unit_square() {
        let g = Grid::new(8, 8, 2.0, 1.0).unwrap();
        let spec = InitialSpec {
            kind: "taylor-green".into(),
            seed: 0,
            path: None,
        };
        let err = initial_condition("taylor-green")
            .unwrap()
            .build(&spec, &g, 0.1)
            .unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
