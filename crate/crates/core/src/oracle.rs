//! Fully coupled reference step solved by dense LU, for small grids.
//!
//! Unknowns are the interior face velocities, the cell pressures and one
//! multiplier enforcing a zero pressure mean:
//!
//! ```text
//! [ A  G  0 ] [v]   [b]
//! [ D  0  1 ] [p] = [0]
//! [ 0  1' 0 ] [m]   [0]
//! ```
//!
//! `A` is the prediction operator of the stepper, `G` the gradient and `D`
//! the divergence.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, VppError};
use crate::geometry::{sample_face_chi, sample_solid_velocity};
use crate::linalg::{assemble_prediction, FaceLayout, PredictionCoefficients};
use crate::mesh::{divergence, gradient, CellField, PressureField, VelocityField};
use crate::problem::Problem;
use crate::vpp::SchemeParams;

pub const MAX_ORACLE_CELLS: usize = 32 * 32;

/// Implicit step from `(v_n, t_n)` with exact incompressibility.
pub fn coupled_step(
    v_n: &VelocityField,
    t_n: f64,
    problem: &Problem,
    params: &SchemeParams,
) -> Result<(VelocityField, PressureField)> {
    let grid = *v_n.grid();
    if grid.n_cells() > MAX_ORACLE_CELLS {
        return Err(VppError::InvalidGrid(format!(
            "dense oracle limited to {MAX_ORACLE_CELLS} cells, got {}",
            grid.n_cells()
        )));
    }
    let t = t_n + params.dt;
    let chi = sample_face_chi(&problem.obstacle, t, &grid)?;
    let vs = sample_solid_velocity(&problem.obstacle, t, &grid)?;
    let walls = problem.walls.walls(&grid, t);
    let forcing = problem.forcing.sample(&grid, t);
    let sys = assemble_prediction(
        &grid,
        PredictionCoefficients {
            dt: params.dt,
            mu: params.mu,
            eta: params.eta,
        },
        v_n,
        &chi,
        &walls,
    )?;

    let layout = FaceLayout::new(grid);
    let nf = layout.len();
    let nc = grid.n_cells();
    let n = nf + nc + 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for r in 0..nf {
        for (c, v) in sys.op.row(r) {
            m[(r, c)] = v;
        }
    }
    for c in 0..nc {
        let mut e = CellField::zeros(grid);
        e.values[c] = 1.0;
        for (r, g) in layout.gather(&gradient(&e)).into_iter().enumerate() {
            if g != 0.0 {
                m[(r, nf + c)] = g;
            }
        }
        m[(nf + c, n - 1)] = 1.0;
        m[(n - 1, nf + c)] = 1.0;
    }
    for c in 0..nf {
        let mut e = vec![0.0; nf];
        e[c] = 1.0;
        for (r, d) in divergence(&layout.scatter(&e))
            .values
            .into_iter()
            .enumerate()
        {
            if d != 0.0 {
                m[(nf + r, c)] = d;
            }
        }
    }

    let inv_eta = if params.eta.is_finite() {
        1.0 / params.eta
    } else {
        0.0
    };
    let mut rhs_field = v_n.scaled(1.0 / params.dt);
    rhs_field.axpy(1.0, &forcing);
    for (k, (c, s)) in chi.u.iter().zip(&vs.u).enumerate() {
        rhs_field.u[k] += inv_eta * c * s;
    }
    for (k, (c, s)) in chi.v.iter().zip(&vs.v).enumerate() {
        rhs_field.v[k] += inv_eta * c * s;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    for (r, (b, o)) in layout
        .gather(&rhs_field)
        .iter()
        .zip(&sys.offset)
        .enumerate()
    {
        rhs[r] = b - o;
    }

    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| VppError::Singular("coupled saddle-point matrix".into()))?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(VppError::Singular(
            "coupled solve produced non-finite values".into(),
        ));
    }
    let v = layout.scatter(&x.as_slice()[..nf]);
    let p = CellField::from_values(grid, x.as_slice()[nf..nf + nc].to_vec())?;
    Ok((v, PressureField::from_cells(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Grid;
    use crate::problem::{ConstantForcing, Forcing};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn params() -> SchemeParams {
        SchemeParams::new(0.01, 1.0, 1e-6, 1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_step() {
        let g = Grid::unit_square(6).unwrap();
        let (v, p) = coupled_step(
            &VelocityField::zeros(g),
            0.0,
            &Problem::unforced(1.0),
            &params(),
        )
        .unwrap();
        assert_eq!(v.max_abs(), 0.0);
        assert_eq!(p.cells().max_abs(), 0.0);
    }

    #[test]
    fn rejects_large_grids() {
        let g = Grid::unit_square(33).unwrap();
        assert!(coupled_step(
            &VelocityField::zeros(g),
            0.0,
            &Problem::unforced(1.0),
            &params()
        )
        .is_err());
    }

    fn mirror_symmetric(v: &VelocityField, tol: f64) -> bool {
        let g = *v.grid();
        let (nx, ny) = (g.nx(), g.ny());
        let mut ok = true;
        for j in 0..ny {
            for i in 0..=nx {
                ok &= (v.u_at(i, j) + v.u_at(nx - i, j)).abs() <= tol;
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                ok &= (v.v_at(i, j) - v.v_at(nx - 1 - i, j)).abs() <= tol;
            }
        }
        ok
    }

    #[test]
    fn constant_force_is_balanced_by_pressure() {
        let g = Grid::unit_square(8).unwrap();
        let problem = Problem::unforced(1.0).with_forcing(Arc::new(ConstantForcing([1.0, 0.0])));
        let (v, p) = coupled_step(&VelocityField::zeros(g), 0.0, &problem, &params()).unwrap();
        assert!(divergence(&v).max_abs() <= 1e-10);
        assert!(mirror_symmetric(&v, 1e-8));
        // the force is a gradient: p = x - 1/2
        let expect = CellField::from_fn(g, |x, _| x - 0.5);
        assert!(p.cells().minus(&expect).max_abs() < 1e-8);
    }

    #[derive(Debug)]
    struct SymmetricShear;
    impl Forcing for SymmetricShear {
        fn name(&self) -> &str {
            "test"
        }
        fn sample(&self, grid: &Grid, _t: f64) -> VelocityField {
            VelocityField::from_fn(*grid, |_, _| 0.0, |x, _| (PI * x).sin())
        }
    }

    #[test]
    fn mirror_symmetric_force_gives_symmetric_flow() {
        let g = Grid::unit_square(10).unwrap();
        let problem = Problem::unforced(1.0).with_forcing(Arc::new(SymmetricShear));
        let (v, _) = coupled_step(&VelocityField::zeros(g), 0.0, &problem, &params()).unwrap();
        assert!(v.max_abs() > 1e-3);
        assert!(divergence(&v).max_abs() <= 1e-10);
        assert!(mirror_symmetric(&v, 1e-8 * v.max_abs()));
    }
}
