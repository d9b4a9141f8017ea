//! Sparse assembly of the face and cell operators.
//!
//! Unknowns are the interior faces only: wall-normal faces are fixed to
//! zero by the boundary conditions. Tangential wall velocities enter
//! through mirrored ghost values and show up as a constant offset
//! alongside the matrix.

use super::sparse::{OperatorBuilder, SparseOperator};
use crate::error::{Result, VppError};
use crate::mesh::{CellField, Grid, VelocityField, WallData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    U(usize, usize),
    V(usize, usize),
}

/// Ordering of the interior-face unknowns: `u` faces row by row, then `v` faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceLayout {
    grid: Grid,
}

impl FaceLayout {
    pub fn new(grid: Grid) -> Self {
        FaceLayout { grid }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn n_u(&self) -> usize {
        (self.grid.nx() - 1) * self.grid.ny()
    }

    pub fn len(&self) -> usize {
        self.n_u() + self.grid.nx() * (self.grid.ny() - 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn u_dof(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= 1 && i < self.grid.nx() && j < self.grid.ny());
        j * (self.grid.nx() - 1) + (i - 1)
    }

    #[inline]
    pub fn v_dof(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.grid.nx() && j >= 1 && j < self.grid.ny());
        self.n_u() + (j - 1) * self.grid.nx() + i
    }

    pub fn faces(&self) -> impl Iterator<Item = Face> + '_ {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let us = (0..ny).flat_map(move |j| (1..nx).map(move |i| Face::U(i, j)));
        let vs = (1..ny).flat_map(move |j| (0..nx).map(move |i| Face::V(i, j)));
        us.chain(vs)
    }

    pub fn gather(&self, field: &VelocityField) -> Vec<f64> {
        self.faces()
            .map(|f| match f {
                Face::U(i, j) => field.u_at(i, j),
                Face::V(i, j) => field.v_at(i, j),
            })
            .collect()
    }

    /// Builds a field from interior values; wall-normal faces are zero.
    pub fn scatter(&self, x: &[f64]) -> VelocityField {
        let mut field = VelocityField::zeros(self.grid);
        for (f, &val) in self.faces().zip(x) {
            match f {
                Face::U(i, j) => field.set_u(i, j, val),
                Face::V(i, j) => field.set_v(i, j, val),
            }
        }
        field
    }

    /// Quadrature weight of each unknown (the face inner product).
    pub fn weights(&self) -> Vec<f64> {
        vec![self.grid.cell_area(); self.len()]
    }
}

/// Affine combination of unknowns.
#[derive(Debug, Clone, Default)]
struct Lin {
    terms: Vec<(usize, f64)>,
    constant: f64,
}

impl Lin {
    fn dof(k: usize) -> Self {
        Lin {
            terms: vec![(k, 1.0)],
            constant: 0.0,
        }
    }
    fn constant(c: f64) -> Self {
        Lin {
            terms: Vec::new(),
            constant: c,
        }
    }
    fn add(mut self, a: f64, other: &Lin) -> Self {
        self.terms
            .extend(other.terms.iter().map(|&(k, c)| (k, a * c)));
        self.constant += a * other.constant;
        self
    }
    fn diff(a: &Lin, b: &Lin, scale: f64) -> Self {
        Lin::default().add(scale, a).add(-scale, b)
    }
}

struct Stencil<'a> {
    layout: &'a FaceLayout,
    walls: &'a WallData,
}

impl Stencil<'_> {
    fn grid(&self) -> &Grid {
        self.layout.grid()
    }

    // u at column i, row j; rows outside the domain are mirrored ghosts.
    fn u(&self, i: isize, j: isize) -> Lin {
        let (nx, ny) = (self.grid().nx() as isize, self.grid().ny() as isize);
        debug_assert!((0..=nx).contains(&i));
        if i == 0 || i == nx {
            return Lin::default();
        }
        let iu = i as usize;
        if j < 0 {
            Lin::constant(2.0 * self.walls.bottom[iu])
                .add(-1.0, &Lin::dof(self.layout.u_dof(iu, 0)))
        } else if j >= ny {
            Lin::constant(2.0 * self.walls.top[iu])
                .add(-1.0, &Lin::dof(self.layout.u_dof(iu, (ny - 1) as usize)))
        } else {
            Lin::dof(self.layout.u_dof(iu, j as usize))
        }
    }

    fn v(&self, i: isize, j: isize) -> Lin {
        let (nx, ny) = (self.grid().nx() as isize, self.grid().ny() as isize);
        debug_assert!((0..=ny).contains(&j));
        if j == 0 || j == ny {
            return Lin::default();
        }
        let jv = j as usize;
        if i < 0 {
            Lin::constant(2.0 * self.walls.left[jv]).add(-1.0, &Lin::dof(self.layout.v_dof(0, jv)))
        } else if i >= nx {
            Lin::constant(2.0 * self.walls.right[jv])
                .add(-1.0, &Lin::dof(self.layout.v_dof((nx - 1) as usize, jv)))
        } else {
            Lin::dof(self.layout.v_dof(i as usize, jv))
        }
    }

    fn div(&self, i: isize, j: isize) -> Lin {
        let (hx, hy) = (self.grid().hx(), self.grid().hy());
        Lin::diff(&self.u(i + 1, j), &self.u(i, j), 1.0 / hx)
            .add(1.0 / hy, &self.v(i, j + 1))
            .add(-1.0 / hy, &self.v(i, j))
    }

    fn shear(&self, i: isize, j: isize) -> Lin {
        let (hx, hy) = (self.grid().hx(), self.grid().hy());
        Lin::diff(&self.u(i, j), &self.u(i, j - 1), 1.0 / hy)
            .add(1.0 / hx, &self.v(i, j))
            .add(-1.0 / hx, &self.v(i - 1, j))
    }

    /// `div(2 mu D(w))` at a face.
    fn strain_row(&self, face: Face, mu: f64) -> Lin {
        let (hx, hy) = (self.grid().hx(), self.grid().hy());
        match face {
            Face::U(i, j) => {
                let (i, j) = (i as isize, j as isize);
                let dudx = |ci: isize| Lin::diff(&self.u(ci + 1, j), &self.u(ci, j), 1.0 / hx);
                Lin::diff(&dudx(i), &dudx(i - 1), 2.0 * mu / hx).add(
                    1.0,
                    &Lin::diff(&self.shear(i, j + 1), &self.shear(i, j), mu / hy),
                )
            }
            Face::V(i, j) => {
                let (i, j) = (i as isize, j as isize);
                let dvdy = |cj: isize| Lin::diff(&self.v(i, cj + 1), &self.v(i, cj), 1.0 / hy);
                Lin::diff(&dvdy(j), &dvdy(j - 1), 2.0 * mu / hy).add(
                    1.0,
                    &Lin::diff(&self.shear(i + 1, j), &self.shear(i, j), mu / hx),
                )
            }
        }
    }

    /// `grad(div w)` at a face.
    fn grad_div_row(&self, face: Face) -> Lin {
        let (hx, hy) = (self.grid().hx(), self.grid().hy());
        match face {
            Face::U(i, j) => {
                let (i, j) = (i as isize, j as isize);
                Lin::diff(&self.div(i, j), &self.div(i - 1, j), 1.0 / hx)
            }
            Face::V(i, j) => {
                let (i, j) = (i as isize, j as isize);
                Lin::diff(&self.div(i, j), &self.div(i, j - 1), 1.0 / hy)
            }
        }
    }

    /// Component-wise Laplacian with homogeneous Dirichlet walls.
    fn laplacian_row(&self, face: Face) -> Lin {
        let (hx, hy) = (self.grid().hx(), self.grid().hy());
        let (ax, ay) = (1.0 / (hx * hx), 1.0 / (hy * hy));
        match face {
            Face::U(i, j) => {
                let (i, j) = (i as isize, j as isize);
                let c = self.u(i, j);
                self.u(i + 1, j)
                    .add(1.0, &self.u(i - 1, j))
                    .add(-2.0, &c)
                    .scaled(ax)
                    .add(ay, &self.u(i, j + 1))
                    .add(ay, &self.u(i, j - 1))
                    .add(-2.0 * ay, &c)
            }
            Face::V(i, j) => {
                let (i, j) = (i as isize, j as isize);
                let c = self.v(i, j);
                self.v(i, j + 1)
                    .add(1.0, &self.v(i, j - 1))
                    .add(-2.0, &c)
                    .scaled(ay)
                    .add(ax, &self.v(i + 1, j))
                    .add(ax, &self.v(i - 1, j))
                    .add(-2.0 * ax, &c)
            }
        }
    }

    /// Skew convection `B(adv, .)`; neighbours beyond the walls take the wall value.
    fn convection_row(&self, face: Face, adv: &VelocityField) -> Lin {
        let g = self.grid();
        let (hx, hy) = (g.hx(), g.hy());
        let (nx, ny) = (g.nx(), g.ny());
        let mut out = Lin::default();
        match face {
            Face::U(i, j) => {
                let fe = 0.5 * (adv.u_at(i, j) + adv.u_at(i + 1, j));
                let fw = 0.5 * (adv.u_at(i - 1, j) + adv.u_at(i, j));
                let fn_ = 0.5 * (adv.v_at(i - 1, j + 1) + adv.v_at(i, j + 1));
                let fs = 0.5 * (adv.v_at(i - 1, j) + adv.v_at(i, j));
                let (i_, j_) = (i as isize, j as isize);
                out = out
                    .add(fe / (2.0 * hx), &self.u(i_ + 1, j_))
                    .add(-fw / (2.0 * hx), &self.u(i_ - 1, j_));
                let north = if j + 1 < ny {
                    self.u(i_, j_ + 1)
                } else {
                    Lin::constant(self.walls.top[i])
                };
                let south = if j > 0 {
                    self.u(i_, j_ - 1)
                } else {
                    Lin::constant(self.walls.bottom[i])
                };
                out.add(fn_ / (2.0 * hy), &north)
                    .add(-fs / (2.0 * hy), &south)
            }
            Face::V(i, j) => {
                let fe = 0.5 * (adv.u_at(i + 1, j - 1) + adv.u_at(i + 1, j));
                let fw = 0.5 * (adv.u_at(i, j - 1) + adv.u_at(i, j));
                let fn_ = 0.5 * (adv.v_at(i, j) + adv.v_at(i, j + 1));
                let fs = 0.5 * (adv.v_at(i, j - 1) + adv.v_at(i, j));
                let (i_, j_) = (i as isize, j as isize);
                out = out
                    .add(fn_ / (2.0 * hy), &self.v(i_, j_ + 1))
                    .add(-fs / (2.0 * hy), &self.v(i_, j_ - 1));
                let east = if i + 1 < nx {
                    self.v(i_ + 1, j_)
                } else {
                    Lin::constant(self.walls.right[j])
                };
                let west = if i > 0 {
                    self.v(i_ - 1, j_)
                } else {
                    Lin::constant(self.walls.left[j])
                };
                out.add(fe / (2.0 * hx), &east).add(-fw / (2.0 * hx), &west)
            }
        }
    }
}

impl Lin {
    fn scaled(mut self, a: f64) -> Self {
        self.terms.iter_mut().for_each(|t| t.1 *= a);
        self.constant *= a;
        self
    }
}

/// Assembled affine face operator `w -> op w + offset`.
#[derive(Debug, Clone)]
pub struct FaceSystem {
    pub layout: FaceLayout,
    pub op: SparseOperator,
    /// Contribution of the prescribed wall velocities.
    pub offset: Vec<f64>,
}

/// Coefficients of the prediction operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionCoefficients {
    pub dt: f64,
    pub mu: f64,
    /// Obstacle penalty; `f64::INFINITY` disables the penalization term.
    pub eta: f64,
}

/// `(1/dt) I + B(adv, .) - div(2 mu D(.)) + (1/eta) chi I` on interior faces.
///
/// `face_chi` holds the indicator on each velocity control volume.
pub fn assemble_prediction(
    grid: &Grid,
    coeffs: PredictionCoefficients,
    adv: &VelocityField,
    face_chi: &VelocityField,
    walls: &WallData,
) -> Result<FaceSystem> {
    if !adv.is_finite() {
        return Err(VppError::NonFinite("advecting velocity"));
    }
    if !(coeffs.dt > 0.0 && coeffs.mu >= 0.0 && coeffs.eta > 0.0) {
        return Err(VppError::param(
            "prediction",
            "need dt > 0, mu >= 0 and eta > 0",
        ));
    }
    let layout = FaceLayout::new(*grid);
    let stencil = Stencil {
        layout: &layout,
        walls,
    };
    let inv_eta = if coeffs.eta.is_finite() {
        1.0 / coeffs.eta
    } else {
        0.0
    };
    let mut builder = OperatorBuilder::new(layout.len());
    let mut offset = Vec::with_capacity(layout.len());
    for (row, face) in layout.faces().enumerate() {
        let chi = match face {
            Face::U(i, j) => face_chi.u_at(i, j),
            Face::V(i, j) => face_chi.v_at(i, j),
        };
        let lin = Lin::constant(0.0)
            .add(1.0, &stencil.convection_row(face, adv))
            .add(-1.0, &stencil.strain_row(face, coeffs.mu));
        let diag = 1.0 / coeffs.dt + inv_eta * chi;
        builder.push_row(lin.terms.into_iter().chain([(row, diag)]));
        offset.push(lin.constant);
    }
    Ok(FaceSystem {
        layout,
        op: builder.finish()?,
        offset,
    })
}

/// `(eps/dt) I - grad div` on interior faces (wall-normal component zero).
pub fn assemble_correction(grid: &Grid, eps_over_dt: f64) -> Result<SparseOperator> {
    if !(eps_over_dt > 0.0 && eps_over_dt.is_finite()) {
        return Err(VppError::param("epsilon", "must be positive"));
    }
    let layout = FaceLayout::new(*grid);
    let walls = WallData::no_slip(grid);
    let stencil = Stencil {
        layout: &layout,
        walls: &walls,
    };
    let mut builder = OperatorBuilder::new(layout.len());
    for (row, face) in layout.faces().enumerate() {
        let lin = stencil.grad_div_row(face);
        builder.push_row(
            lin.terms
                .into_iter()
                .map(|(c, v)| (c, -v))
                .chain([(row, eps_over_dt)]),
        );
    }
    builder.finish()
}

/// `div(2 mu D(.))` as an affine face system.
pub fn assemble_strain_divergence(grid: &Grid, mu: f64, walls: &WallData) -> Result<FaceSystem> {
    let layout = FaceLayout::new(*grid);
    let stencil = Stencil {
        layout: &layout,
        walls,
    };
    let mut builder = OperatorBuilder::new(layout.len());
    let mut offset = Vec::with_capacity(layout.len());
    for face in layout.faces() {
        let lin = stencil.strain_row(face, mu);
        builder.push_row(lin.terms);
        offset.push(lin.constant);
    }
    Ok(FaceSystem {
        layout,
        op: builder.finish()?,
        offset,
    })
}

/// `-Laplacian` on interior faces, component-wise, homogeneous Dirichlet walls.
pub fn assemble_face_neg_laplacian(grid: &Grid) -> Result<SparseOperator> {
    let layout = FaceLayout::new(*grid);
    let walls = WallData::no_slip(grid);
    let stencil = Stencil {
        layout: &layout,
        walls: &walls,
    };
    let mut builder = OperatorBuilder::new(layout.len());
    for face in layout.faces() {
        builder.push_row(
            stencil
                .laplacian_row(face)
                .terms
                .into_iter()
                .map(|(c, v)| (c, -v)),
        );
    }
    builder.finish()
}

/// `-Laplacian` on cells, homogeneous Dirichlet walls (mirrored ghosts).
pub fn assemble_cell_neg_laplacian(grid: &Grid) -> Result<SparseOperator> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (ax, ay) = (1.0 / grid.hx().powi(2), 1.0 / grid.hy().powi(2));
    let mut builder = OperatorBuilder::new(grid.n_cells());
    for j in 0..ny {
        for i in 0..nx {
            let me = grid.cell_index(i, j);
            let mut row = vec![(me, 2.0 * ax + 2.0 * ay)];
            let mut nb = |inside: bool, idx: usize, a: f64| {
                if inside {
                    row.push((idx, -a));
                } else {
                    // ghost = -phi_P
                    row.push((me, a));
                }
            };
            nb(i > 0, if i > 0 { grid.cell_index(i - 1, j) } else { 0 }, ax);
            nb(
                i + 1 < nx,
                if i + 1 < nx {
                    grid.cell_index(i + 1, j)
                } else {
                    0
                },
                ax,
            );
            nb(j > 0, if j > 0 { grid.cell_index(i, j - 1) } else { 0 }, ay);
            nb(
                j + 1 < ny,
                if j + 1 < ny {
                    grid.cell_index(i, j + 1)
                } else {
                    0
                },
                ay,
            );
            builder.push_row(row);
        }
    }
    builder.finish()
}

/// Face values of a cell field's gradient, as an interior-face vector.
pub fn gather_gradient(layout: &FaceLayout, p: &CellField) -> Vec<f64> {
    layout.gather(&crate::mesh::gradient(p))
}
