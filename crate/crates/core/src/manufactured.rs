//! Closed-form reference flows and synthetic fields for verification.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, VppError};
use crate::mesh::{CellField, Grid, NodeField, PressureField, VelocityField, WallData};
use crate::problem::{Forcing, WallVelocity};

/// Decaying Taylor–Green vortex on the unit square.
///
/// `u = sin(pi x) cos(pi y) e^{-2 pi^2 mu t}`, `v = -cos(pi x) sin(pi y) e^{-2 pi^2 mu t}`,
/// `p = (cos(2 pi x) + cos(2 pi y)) e^{-4 pi^2 mu t} / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorGreen {
    pub mu: f64,
}

impl TaylorGreen {
    pub fn new(mu: f64) -> Self {
        TaylorGreen { mu }
    }

    fn decay(&self, t: f64) -> f64 {
        (-2.0 * PI * PI * self.mu * t).exp()
    }

    pub fn velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let d = self.decay(t);
        let (sx, cx) = (PI * x).sin_cos();
        let (sy, cy) = (PI * y).sin_cos();
        (sx * cy * d, -cx * sy * d)
    }

    pub fn pressure(&self, x: f64, y: f64, t: f64) -> f64 {
        let d = self.decay(t);
        0.25 * ((2.0 * PI * x).cos() + (2.0 * PI * y).cos()) * d * d
    }

    pub fn time_derivative(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let (u, v) = self.velocity(x, y, t);
        let k = -2.0 * PI * PI * self.mu;
        (k * u, k * v)
    }

    /// `-mu * Laplacian(v)`
    pub fn viscous_term(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let (u, v) = self.velocity(x, y, t);
        let k = 2.0 * PI * PI * self.mu;
        (k * u, k * v)
    }

    /// `(v . grad) v`
    pub fn convective_term(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let d = self.decay(t);
        let (sx, cx) = (PI * x).sin_cos();
        let (sy, cy) = (PI * y).sin_cos();
        let (u, v) = (sx * cy * d, -cx * sy * d);
        let (ux, uy) = (PI * cx * cy * d, -PI * sx * sy * d);
        let (vx, vy) = (PI * sx * sy * d, -PI * cx * cy * d);
        (u * ux + v * uy, u * vx + v * vy)
    }

    pub fn pressure_gradient(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let d = self.decay(t);
        (
            -0.5 * PI * (2.0 * PI * x).sin() * d * d,
            -0.5 * PI * (2.0 * PI * y).sin() * d * d,
        )
    }

    /// Body force for which the vortex solves the momentum equation, summed term by term.
    pub fn forcing(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let terms = [
            self.time_derivative(x, y, t),
            self.viscous_term(x, y, t),
            self.convective_term(x, y, t),
            self.pressure_gradient(x, y, t),
        ];
        terms
            .iter()
            .fold((0.0, 0.0), |acc, tm| (acc.0 + tm.0, acc.1 + tm.1))
    }

    fn check_domain(grid: &Grid) -> Result<()> {
        if (grid.lx() - 1.0).abs() > 1e-12 || (grid.ly() - 1.0).abs() > 1e-12 {
            return Err(VppError::InvalidGrid(format!(
                "the Taylor-Green vortex needs the unit square, got {} x {}",
                grid.lx(),
                grid.ly()
            )));
        }
        Ok(())
    }

    pub fn sample_velocity(&self, grid: &Grid, t: f64) -> Result<VelocityField> {
        Self::check_domain(grid)?;
        Ok(VelocityField::from_fn(
            *grid,
            |x, y| self.velocity(x, y, t).0,
            |x, y| self.velocity(x, y, t).1,
        ))
    }

    pub fn sample_pressure(&self, grid: &Grid, t: f64) -> Result<PressureField> {
        Self::check_domain(grid)?;
        Ok(PressureField::from_cells(CellField::from_fn(
            *grid,
            |x, y| self.pressure(x, y, t),
        )))
    }

    pub fn sample_forcing(&self, grid: &Grid, t: f64) -> Result<VelocityField> {
        Self::check_domain(grid)?;
        Ok(VelocityField::from_fn(
            *grid,
            |x, y| self.forcing(x, y, t).0,
            |x, y| self.forcing(x, y, t).1,
        ))
    }
}

/// Velocity, pressure and forcing of the vortex at time `t`.
pub fn taylor_green(
    t: f64,
    grid: &Grid,
    mu: f64,
) -> Result<(VelocityField, PressureField, VelocityField)> {
    let tg = TaylorGreen::new(mu);
    Ok((
        tg.sample_velocity(grid, t)?,
        tg.sample_pressure(grid, t)?,
        tg.sample_forcing(grid, t)?,
    ))
}

impl Forcing for TaylorGreen {
    fn name(&self) -> &str {
        "taylor-green"
    }
    fn sample(&self, grid: &Grid, t: f64) -> VelocityField {
        VelocityField::from_fn(
            *grid,
            |x, y| self.forcing(x, y, t).0,
            |x, y| self.forcing(x, y, t).1,
        )
    }
}

/// The vortex's own tangential velocity on the walls.
impl WallVelocity for TaylorGreen {
    fn name(&self) -> &str {
        "taylor-green"
    }
    fn walls(&self, grid: &Grid, t: f64) -> WallData {
        WallData::from_fn(grid, |x, y| self.velocity(x, y, t))
    }
}

/// Velocity of a nodal stream function: `u = d psi/dy`, `v = -d psi/dx`.
///
/// Discretely divergence-free; the normal wall velocity vanishes when
/// `psi` is zero on the boundary nodes.
pub fn velocity_from_stream_function(psi: &NodeField) -> VelocityField {
    let g = *psi.grid();
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = VelocityField::zeros(g);
    for j in 0..g.ny() {
        for i in 0..=g.nx() {
            out.set_u(i, j, (psi.at(i, j + 1) - psi.at(i, j)) / hy);
        }
    }
    for j in 0..=g.ny() {
        for i in 0..g.nx() {
            out.set_v(i, j, -(psi.at(i + 1, j) - psi.at(i, j)) / hx);
        }
    }
    out
}

/// Random discretely divergence-free field with zero normal wall velocity,
/// scaled to unit maximum.
pub fn random_solenoidal(grid: &Grid, seed: u64) -> VelocityField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut psi = NodeField::zeros(*grid);
    for j in 1..grid.ny() {
        for i in 1..grid.nx() {
            psi.values[grid.node_index(i, j)] = rng.gen_range(-1.0..1.0);
        }
    }
    let v = velocity_from_stream_function(&psi);
    let m = v.max_abs();
    if m > 0.0 {
        v.scaled(1.0 / m)
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::divergence;

    #[test]
    fn rejects_non_unit_domain() {
        let g = Grid::new(8, 8, 2.0, 1.0).unwrap();
        assert!(taylor_green(0.0, &g, 0.1).is_err());
    }

    #[test]
    fn initial_divergence_is_discretization_error_only() {
        let g = Grid::unit_square(64).unwrap();
        let (v, _, _) = taylor_green(0.0, &g, 0.1).unwrap();
        assert!(divergence(&v).norm_l2() <= 1e-3);
    }

    #[test]
    fn initial_kinetic_energy() {
        let g = Grid::unit_square(64).unwrap();
        let (v, _, _) = taylor_green(0.0, &g, 0.1).unwrap();
        let ke = 0.5 * v.dot(&v);
        assert!((ke - 0.25).abs() < 1e-3, "{ke}");
    }

    #[test]
    fn inviscid_forcing_matches_finite_differences() {
        // at mu = 0 the force is (v.grad)v + grad p; compare with central differences
        let tg = TaylorGreen::new(0.0);
        let d = 1e-5;
        for &(x, y) in &[(0.13, 0.71), (0.5, 0.25), (0.9, 0.05), (0.33, 0.62)] {
            let (u, v) = tg.velocity(x, y, 0.0);
            let dx = |f: &dyn Fn(f64, f64) -> f64| (f(x + d, y) - f(x - d, y)) / (2.0 * d);
            let dy = |f: &dyn Fn(f64, f64) -> f64| (f(x, y + d) - f(x, y - d)) / (2.0 * d);
            let fu = |a: f64, b: f64| tg.velocity(a, b, 0.0).0;
            let fv = |a: f64, b: f64| tg.velocity(a, b, 0.0).1;
            let fp = |a: f64, b: f64| tg.pressure(a, b, 0.0);
            let expect = (
                u * dx(&fu) + v * dy(&fu) + dx(&fp),
                u * dx(&fv) + v * dy(&fv) + dy(&fp),
            );
            let got = tg.forcing(x, y, 0.0);
            assert!((got.0 - expect.0).abs() < 1e-3);
            assert!((got.1 - expect.1).abs() < 1e-3);
        }
    }

    #[test]
    fn viscous_and_time_terms_match_finite_differences() {
        let tg = TaylorGreen::new(0.3);
        let (x, y, t) = (0.21, 0.67, 0.4);
        let d = 1e-4;
        let lap = |c: usize| {
            let f = |a: f64, b: f64| {
                let v = tg.velocity(a, b, t);
                if c == 0 {
                    v.0
                } else {
                    v.1
                }
            };
            (f(x + d, y) + f(x - d, y) + f(x, y + d) + f(x, y - d) - 4.0 * f(x, y)) / (d * d)
        };
        let visc = tg.viscous_term(x, y, t);
        assert!((visc.0 + 0.3 * lap(0)).abs() < 1e-4);
        assert!((visc.1 + 0.3 * lap(1)).abs() < 1e-4);
        let dt = 1e-6;
        let a = tg.velocity(x, y, t + dt);
        let b = tg.velocity(x, y, t - dt);
        let td = tg.time_derivative(x, y, t);
        assert!((td.0 - (a.0 - b.0) / (2.0 * dt)).abs() < 1e-6);
    }

    #[test]
    fn stream_function_fields_are_solenoidal() {
        let g = Grid::new(9, 7, 1.0, 0.8).unwrap();
        let v = random_solenoidal(&g, 3);
        assert!(divergence(&v).max_abs() < 1e-12);
        assert_eq!(v.normal_boundary_max(), 0.0);
        assert!((v.max_abs() - 1.0).abs() < 1e-15);
    }
}
