//! Uniform staggered (MAC) grid over a rectangle, the discrete fields that
//! live on it and the finite-difference operators acting on them.
//!
//! Layout:
//! * horizontal velocity `u` on vertical faces at `(i*hx, (j+1/2)*hy)`,
//!   `i in 0..=nx`, `j in 0..ny`;
//! * vertical velocity `v` on horizontal faces at `((i+1/2)*hx, j*hy)`,
//!   `i in 0..nx`, `j in 0..=ny`;
//! * scalars (pressure, divergence, obstacle indicator) at cell centres;
//! * vorticity and shear at nodes `(i*hx, j*hy)`.
//!
//! Faces with `i == 0 || i == nx` (for `u`) and `j == 0 || j == ny` (for
//! `v`) carry the normal velocity on the walls. Tangential wall values are
//! imposed through mirrored ghost values, `ghost = 2*g - interior`.

use std::ops::{Add, AddAssign, Mul, Sub};

use crate::error::{Result, VppError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(VppError::InvalidGrid(format!(
                "need at least 2x2 cells, got {nx}x{ny}"
            )));
        }
        if !(lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0) {
            return Err(VppError::InvalidGrid(format!(
                "extents must be positive, got {lx}x{ly}"
            )));
        }
        Ok(Grid { nx, ny, lx, ly })
    }

    /// `n x n` cells on the unit square.
    pub fn unit_square(n: usize) -> Result<Self> {
        Grid::new(n, n, 1.0, 1.0)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }
    pub fn cell_diagonal(&self) -> f64 {
        self.hx().hypot(self.hy())
    }

    pub fn n_u(&self) -> usize {
        (self.nx + 1) * self.ny
    }
    pub fn n_v(&self) -> usize {
        self.nx * (self.ny + 1)
    }
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }
    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    #[inline]
    pub fn u_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && j < self.ny);
        j * (self.nx + 1) + i
    }
    #[inline]
    pub fn v_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j <= self.ny);
        j * self.nx + i
    }
    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }
    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && j <= self.ny);
        j * (self.nx + 1) + i
    }

    pub fn u_position(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.hx(), (j as f64 + 0.5) * self.hy())
    }
    pub fn v_position(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.hx(), j as f64 * self.hy())
    }
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        ((i as f64 + 0.5) * self.hx(), (j as f64 + 0.5) * self.hy())
    }
    pub fn node_position(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.hx(), j as f64 * self.hy())
    }

    /// Quadrature weight of a `u` face: half a cell on the walls.
    pub fn u_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.nx {
            0.5 * self.cell_area()
        } else {
            self.cell_area()
        }
    }
    pub fn v_weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.ny {
            0.5 * self.cell_area()
        } else {
            self.cell_area()
        }
    }
    pub fn node_weight(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.nx { 0.5 } else { 1.0 };
        let wy = if j == 0 || j == self.ny { 0.5 } else { 1.0 };
        wx * wy * self.cell_area()
    }
}

/// Face-centred vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    grid: Grid,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl VelocityField {
    pub fn zeros(grid: Grid) -> Self {
        VelocityField {
            grid,
            u: vec![0.0; grid.n_u()],
            v: vec![0.0; grid.n_v()],
        }
    }

    /// Samples `fu` at every `u` face and `fv` at every `v` face.
    pub fn from_fn(grid: Grid, fu: impl Fn(f64, f64) -> f64, fv: impl Fn(f64, f64) -> f64) -> Self {
        let mut field = VelocityField::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                let (x, y) = grid.u_position(i, j);
                field.u[grid.u_index(i, j)] = fu(x, y);
            }
        }
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.v_position(i, j);
                field.v[grid.v_index(i, j)] = fv(x, y);
            }
        }
        field
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[self.grid.u_index(i, j)]
    }
    #[inline]
    pub fn v_at(&self, i: usize, j: usize) -> f64 {
        self.v[self.grid.v_index(i, j)]
    }
    #[inline]
    pub fn set_u(&mut self, i: usize, j: usize, val: f64) {
        let k = self.grid.u_index(i, j);
        self.u[k] = val;
    }
    #[inline]
    pub fn set_v(&mut self, i: usize, j: usize, val: f64) {
        let k = self.grid.v_index(i, j);
        self.v[k] = val;
    }

    /// Zeroes the wall-normal faces (`v . n = 0` on the boundary).
    pub fn zero_normal_boundary(&mut self) {
        let g = self.grid;
        for j in 0..g.ny {
            self.set_u(0, j, 0.0);
            self.set_u(g.nx, j, 0.0);
        }
        for i in 0..g.nx {
            self.set_v(i, 0, 0.0);
            self.set_v(i, g.ny, 0.0);
        }
    }

    pub fn with_zero_normal_boundary(mut self) -> Self {
        self.zero_normal_boundary();
        self
    }

    pub fn normal_boundary_max(&self) -> f64 {
        let g = self.grid;
        let mut m = 0.0f64;
        for j in 0..g.ny {
            m = m.max(self.u_at(0, j).abs()).max(self.u_at(g.nx, j).abs());
        }
        for i in 0..g.nx {
            m = m.max(self.v_at(i, 0).abs()).max(self.v_at(i, g.ny).abs());
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(self.v.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Weighted face inner product (trapezoidal weights on wall faces).
    pub fn dot(&self, other: &VelocityField) -> f64 {
        let g = self.grid;
        let mut s = 0.0;
        for j in 0..g.ny {
            for i in 0..=g.nx {
                let k = g.u_index(i, j);
                s += g.u_weight(i) * self.u[k] * other.u[k];
            }
        }
        for j in 0..=g.ny {
            let w = g.v_weight(j);
            for i in 0..g.nx {
                let k = g.v_index(i, j);
                s += w * self.v[k] * other.v[k];
            }
        }
        s
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, a: f64) -> Self {
        self * a
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &VelocityField) {
        for (s, xv) in self.u.iter_mut().zip(&x.u) {
            *s += a * xv;
        }
        for (s, xv) in self.v.iter_mut().zip(&x.v) {
            *s += a * xv;
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        VelocityField {
            grid: self.grid,
            u: self.u.iter().map(|&x| f(x)).collect(),
            v: self.v.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Velocity interpolated to the centre of cell `(i, j)`.
    pub fn cell_value(&self, i: usize, j: usize) -> (f64, f64) {
        (
            0.5 * (self.u_at(i, j) + self.u_at(i + 1, j)),
            0.5 * (self.v_at(i, j) + self.v_at(i, j + 1)),
        )
    }
}

impl Add for &VelocityField {
    type Output = VelocityField;
    fn add(self, rhs: &VelocityField) -> VelocityField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &VelocityField {
    type Output = VelocityField;
    fn sub(self, rhs: &VelocityField) -> VelocityField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &VelocityField {
    type Output = VelocityField;
    fn mul(self, a: f64) -> VelocityField {
        self.map(|x| a * x)
    }
}

impl AddAssign<&VelocityField> for VelocityField {
    fn add_assign(&mut self, rhs: &VelocityField) {
        self.axpy(1.0, rhs);
    }
}

/// Cell-centred scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    grid: Grid,
    pub values: Vec<f64>,
}

impl CellField {
    pub fn zeros(grid: Grid) -> Self {
        CellField {
            grid,
            values: vec![0.0; grid.n_cells()],
        }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut out = CellField::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.cell_center(i, j);
                out.values[grid.cell_index(i, j)] = f(x, y);
            }
        }
        out
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(VppError::InvalidGrid(format!(
                "cell field has {} values, grid needs {}",
                values.len(),
                grid.n_cells()
            )));
        }
        Ok(CellField { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.cell_index(i, j)]
    }

    pub fn dot(&self, other: &CellField) -> f64 {
        self.grid.cell_area()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Domain average.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, a: f64) -> Self {
        CellField {
            grid: self.grid,
            values: self.values.iter().map(|x| a * x).collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &CellField) {
        for (s, xv) in self.values.iter_mut().zip(&x.values) {
            *s += a * xv;
        }
    }

    pub fn minus(&self, other: &CellField) -> CellField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }
}

/// Cell-centred pressure, kept at zero mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField(CellField);

impl PressureField {
    pub fn zeros(grid: Grid) -> Self {
        PressureField(CellField::zeros(grid))
    }

    /// Projects `cells` onto the mean-zero subspace.
    pub fn from_cells(mut cells: CellField) -> Self {
        let m = cells.mean();
        for x in cells.values.iter_mut() {
            *x -= m;
        }
        PressureField(cells)
    }

    pub fn cells(&self) -> &CellField {
        &self.0
    }

    pub fn into_cells(self) -> CellField {
        self.0
    }

    pub fn grid(&self) -> &Grid {
        self.0.grid()
    }

    pub fn norm_l2(&self) -> f64 {
        self.0.norm_l2()
    }
}

/// Node-centred scalar field (vorticity, shear).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeField {
    grid: Grid,
    pub values: Vec<f64>,
}

impl NodeField {
    pub fn zeros(grid: Grid) -> Self {
        NodeField {
            grid,
            values: vec![0.0; grid.n_nodes()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.node_index(i, j)]
    }

    pub fn norm_l2(&self) -> f64 {
        let g = self.grid;
        let mut s = 0.0;
        for j in 0..=g.ny {
            for i in 0..=g.nx {
                s += g.node_weight(i, j) * self.at(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn max_abs_interior(&self) -> f64 {
        let g = self.grid;
        let mut m = 0.0f64;
        for j in 1..g.ny {
            for i in 1..g.nx {
                m = m.max(self.at(i, j).abs());
            }
        }
        m
    }
}

/// Tangential velocity prescribed on the four walls.
///
/// `bottom`/`top` hold `u` at the wall points `x = i*hx`, `i in 0..=nx`;
/// `left`/`right` hold `v` at `y = j*hy`, `j in 0..=ny`.
#[derive(Debug, Clone, PartialEq)]
pub struct WallData {
    pub bottom: Vec<f64>,
    pub top: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl WallData {
    pub fn no_slip(grid: &Grid) -> Self {
        WallData {
            bottom: vec![0.0; grid.nx + 1],
            top: vec![0.0; grid.nx + 1],
            left: vec![0.0; grid.ny + 1],
            right: vec![0.0; grid.ny + 1],
        }
    }

    /// Samples a tangential wall velocity `g(x, y) -> (u, v)`.
    pub fn from_fn(grid: &Grid, mut g: impl FnMut(f64, f64) -> (f64, f64)) -> Self {
        let (hx, hy) = (grid.hx(), grid.hy());
        let bottom = (0..=grid.nx).map(|i| g(i as f64 * hx, 0.0).0).collect();
        let top = (0..=grid.nx).map(|i| g(i as f64 * hx, grid.ly).0).collect();
        let left = (0..=grid.ny).map(|j| g(0.0, j as f64 * hy).1).collect();
        let right = (0..=grid.ny).map(|j| g(grid.lx, j as f64 * hy).1).collect();
        WallData {
            bottom,
            top,
            left,
            right,
        }
    }

    pub fn is_no_slip(&self) -> bool {
        self.bottom
            .iter()
            .chain(&self.top)
            .chain(&self.left)
            .chain(&self.right)
            .all(|&x| x == 0.0)
    }
}

/// Cell divergence: net outward face flux divided by the cell area.
pub fn divergence(vel: &VelocityField) -> CellField {
    let g = *vel.grid();
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = CellField::zeros(g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            out.values[g.cell_index(i, j)] = (vel.u_at(i + 1, j) - vel.u_at(i, j)) / hx
                + (vel.v_at(i, j + 1) - vel.v_at(i, j)) / hy;
        }
    }
    out
}

/// Face gradient of a cell field; wall-normal faces are left at zero.
pub fn gradient(p: &CellField) -> VelocityField {
    let g = *p.grid();
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = VelocityField::zeros(g);
    for j in 0..g.ny {
        for i in 1..g.nx {
            out.set_u(i, j, (p.at(i, j) - p.at(i - 1, j)) / hx);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            out.set_v(i, j, (p.at(i, j) - p.at(i, j - 1)) / hy);
        }
    }
    out
}

/// Vorticity `dv/dx - du/dy` at interior nodes; wall nodes are zero.
pub fn curl(vel: &VelocityField) -> NodeField {
    let g = *vel.grid();
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = NodeField::zeros(g);
    for j in 1..g.ny {
        for i in 1..g.nx {
            out.values[g.node_index(i, j)] = (vel.v_at(i, j) - vel.v_at(i - 1, j)) / hx
                - (vel.u_at(i, j) - vel.u_at(i, j - 1)) / hy;
        }
    }
    out
}

// Mirrored `u` value across the bottom/top walls.
fn u_ext(vel: &VelocityField, walls: &WallData, i: usize, j: isize) -> f64 {
    let g = vel.grid();
    if j < 0 {
        2.0 * walls.bottom[i] - vel.u_at(i, 0)
    } else if j as usize >= g.ny {
        2.0 * walls.top[i] - vel.u_at(i, g.ny - 1)
    } else {
        vel.u_at(i, j as usize)
    }
}

fn v_ext(vel: &VelocityField, walls: &WallData, i: isize, j: usize) -> f64 {
    let g = vel.grid();
    if i < 0 {
        2.0 * walls.left[j] - vel.v_at(0, j)
    } else if i as usize >= g.nx {
        2.0 * walls.right[j] - vel.v_at(g.nx - 1, j)
    } else {
        vel.v_at(i as usize, j)
    }
}

/// Shear rate `du/dy + dv/dx` at every node, using mirrored ghost values
/// for the tangential components.
pub fn shear_rate(vel: &VelocityField, walls: &WallData) -> NodeField {
    let g = *vel.grid();
    let (hx, hy) = (g.hx(), g.hy());
    let mut out = NodeField::zeros(g);
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            let dudy =
                (u_ext(vel, walls, i, j as isize) - u_ext(vel, walls, i, j as isize - 1)) / hy;
            let dvdx =
                (v_ext(vel, walls, i as isize, j) - v_ext(vel, walls, i as isize - 1, j)) / hx;
            out.values[g.node_index(i, j)] = dudy + dvdx;
        }
    }
    out
}

/// Discrete `div(2 mu D(vel))` on interior faces (wall-normal faces of the
/// result are zero). Tangential wall velocities enter through `walls`.
pub fn strain_divergence_with_walls(
    vel: &VelocityField,
    mu: f64,
    walls: &WallData,
) -> VelocityField {
    let g = *vel.grid();
    let (hx, hy) = (g.hx(), g.hy());
    let shear = shear_rate(vel, walls);
    let dudx = |i: usize, j: usize| (vel.u_at(i + 1, j) - vel.u_at(i, j)) / hx;
    let dvdy = |i: usize, j: usize| (vel.v_at(i, j + 1) - vel.v_at(i, j)) / hy;
    let mut out = VelocityField::zeros(g);
    for j in 0..g.ny {
        for i in 1..g.nx {
            let normal = 2.0 * mu * (dudx(i, j) - dudx(i - 1, j)) / hx;
            let tangential = mu * (shear.at(i, j + 1) - shear.at(i, j)) / hy;
            out.set_u(i, j, normal + tangential);
        }
    }
    for j in 1..g.ny {
        for i in 0..g.nx {
            let normal = 2.0 * mu * (dvdy(i, j) - dvdy(i, j - 1)) / hy;
            let tangential = mu * (shear.at(i + 1, j) - shear.at(i, j)) / hx;
            out.set_v(i, j, normal + tangential);
        }
    }
    out
}

/// Discrete `div(2 mu D(vel))` with no-slip walls.
pub fn strain_divergence(vel: &VelocityField, mu: f64) -> VelocityField {
    strain_divergence_with_walls(vel, mu, &WallData::no_slip(vel.grid()))
}

/// Skew-symmetric convection `B(adv, w) = (adv . grad) w + 1/2 div(adv) w`.
///
/// Each momentum control volume sums `(adv . n) |face| w_neighbour / 2`
/// over its four faces, so `<B(adv, w), z> = -<B(adv, z), w>` for fields
/// vanishing on the walls. Neighbours outside the domain take the wall
/// value from `walls`.
pub fn convection_with_walls(
    adv: &VelocityField,
    w: &VelocityField,
    walls: &WallData,
) -> VelocityField {
    let g = *adv.grid();
    let (hx, hy) = (g.hx(), g.hy());
    let (nx, ny) = (g.nx, g.ny);
    let mut out = VelocityField::zeros(g);
    for j in 0..ny {
        for i in 1..nx {
            let fe = 0.5 * (adv.u_at(i, j) + adv.u_at(i + 1, j));
            let fw = 0.5 * (adv.u_at(i - 1, j) + adv.u_at(i, j));
            let fn_ = 0.5 * (adv.v_at(i - 1, j + 1) + adv.v_at(i, j + 1));
            let fs = 0.5 * (adv.v_at(i - 1, j) + adv.v_at(i, j));
            let wn = if j + 1 < ny {
                w.u_at(i, j + 1)
            } else {
                walls.top[i]
            };
            let ws = if j > 0 {
                w.u_at(i, j - 1)
            } else {
                walls.bottom[i]
            };
            let val = (fe * w.u_at(i + 1, j) - fw * w.u_at(i - 1, j)) / (2.0 * hx)
                + (fn_ * wn - fs * ws) / (2.0 * hy);
            out.set_u(i, j, val);
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let fe = 0.5 * (adv.u_at(i + 1, j - 1) + adv.u_at(i + 1, j));
            let fw = 0.5 * (adv.u_at(i, j - 1) + adv.u_at(i, j));
            let fn_ = 0.5 * (adv.v_at(i, j) + adv.v_at(i, j + 1));
            let fs = 0.5 * (adv.v_at(i, j - 1) + adv.v_at(i, j));
            let we = if i + 1 < nx {
                w.v_at(i + 1, j)
            } else {
                walls.right[j]
            };
            let ww = if i > 0 {
                w.v_at(i - 1, j)
            } else {
                walls.left[j]
            };
            let val = (fe * we - fw * ww) / (2.0 * hx)
                + (fn_ * w.v_at(i, j + 1) - fs * w.v_at(i, j - 1)) / (2.0 * hy);
            out.set_v(i, j, val);
        }
    }
    out
}

pub fn convection(adv: &VelocityField, w: &VelocityField) -> VelocityField {
    convection_with_walls(adv, w, &WallData::no_slip(adv.grid()))
}

/// Trilinear form `b(u, v, w) = <B(u, v), w>`.
pub fn trilinear(u: &VelocityField, v: &VelocityField, w: &VelocityField) -> f64 {
    convection(u, v).dot(w)
}

/// `||grad vel||_{L2}`: cell terms `du/dx`, `dv/dy` plus node terms
/// `du/dy`, `dv/dx` (mirrored across the walls).
pub fn velocity_gradient_norm(vel: &VelocityField, walls: &WallData) -> f64 {
    let g = *vel.grid();
    let (hx, hy) = (g.hx(), g.hy());
    let mut s = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let dudx = (vel.u_at(i + 1, j) - vel.u_at(i, j)) / hx;
            let dvdy = (vel.v_at(i, j + 1) - vel.v_at(i, j)) / hy;
            s += g.cell_area() * (dudx * dudx + dvdy * dvdy);
        }
    }
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            let dudy =
                (u_ext(vel, walls, i, j as isize) - u_ext(vel, walls, i, j as isize - 1)) / hy;
            let dvdx =
                (v_ext(vel, walls, i as isize, j) - v_ext(vel, walls, i as isize - 1, j)) / hx;
            s += g.node_weight(i, j) * (dudy * dudy + dvdx * dvdx);
        }
    }
    s.sqrt()
}
