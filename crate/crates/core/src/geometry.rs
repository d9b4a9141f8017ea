//! Rigid obstacle on a prescribed trajectory: indicator sampling, solid
//! velocity and the cell band straddling the obstacle boundary.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Result, VppError};
use crate::mesh::{CellField, Grid, VelocityField};

/// A solid region frozen at one instant.
///
/// New obstacle shapes implement this; the samplers only go through it.
pub trait Region: Debug + Send + Sync {
    fn contains(&self, x: f64, y: f64) -> bool;
    /// Exact area of the intersection with `[x0, x1] x [y0, y1]`.
    fn covered_area(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64;
    /// Unsigned distance from `(x, y)` to the region boundary.
    fn boundary_distance(&self, x: f64, y: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Region for Disk {
    fn contains(&self, x: f64, y: f64) -> bool {
        (x - self.center[0]).hypot(y - self.center[1]) <= self.radius
    }

    fn covered_area(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        disk_rect_area(self.center, self.radius, x0, x1, y0, y1)
    }

    fn boundary_distance(&self, x: f64, y: f64) -> f64 {
        ((x - self.center[0]).hypot(y - self.center[1]) - self.radius).abs()
    }
}

/// Area of `disk ∩ [x0,x1]x[y0,y1]`, integrated piecewise in closed form.
fn disk_rect_area(c: [f64; 2], r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let a = x0.max(c[0] - r);
    let b = x1.min(c[0] + r);
    if a >= b || y0 >= y1 {
        return 0.0;
    }
    let mut breaks = vec![a, b];
    for y in [y0, y1] {
        let d = y - c[1];
        if d.abs() < r {
            let s = ((r - d.abs()) * (r + d.abs())).sqrt();
            for x in [c[0] - s, c[0] + s] {
                if x > a && x < b {
                    breaks.push(x);
                }
            }
        }
    }
    breaks.sort_by(|p, q| p.total_cmp(q));

    let half_chord = |x: f64| {
        let d = (x - c[0]).abs();
        ((r - d) * (r + d)).max(0.0).sqrt()
    };
    // antiderivative of half_chord; atan2 keeps the two terms consistent near x = c +- r
    let prim = |x: f64| {
        let u = (x - c[0]).clamp(-r, r);
        let s = half_chord(x);
        0.5 * (u * s + r * r * u.atan2(s))
    };

    let mut area = 0.0;
    for w in breaks.windows(2) {
        let (p, q) = (w[0], w[1]);
        if q <= p {
            continue;
        }
        let m = 0.5 * (p + q);
        let s = half_chord(m);
        let top_is_wall = y1 <= c[1] + s;
        let bot_is_wall = y0 >= c[1] - s;
        let top = if top_is_wall { y1 } else { c[1] + s };
        let bot = if bot_is_wall { y0 } else { c[1] - s };
        if top <= bot {
            continue;
        }
        let chord_integral = prim(q) - prim(p);
        let top_int = if top_is_wall {
            y1 * (q - p)
        } else {
            c[1] * (q - p) + chord_integral
        };
        let bot_int = if bot_is_wall {
            y0 * (q - p)
        } else {
            c[1] * (q - p) - chord_integral
        };
        area += top_int - bot_int;
    }
    area.max(0.0)
}

/// Discretization of the indicator function on cells and faces.
pub trait ChiSampler: Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn cell_value(&self, region: &dyn Region, grid: &Grid, i: usize, j: usize) -> f64;
    /// Indicator value for the control volume `[x0,x1]x[y0,y1]` centred at `(xc, yc)`.
    fn volume_value(&self, region: &dyn Region, xc: f64, yc: f64, box_: [f64; 4]) -> f64;
}

/// 1 when the sample point lies in the solid, 0 otherwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct BinarySampler;

impl ChiSampler for BinarySampler {
    fn name(&self) -> &'static str {
        "binary"
    }
    fn cell_value(&self, region: &dyn Region, grid: &Grid, i: usize, j: usize) -> f64 {
        let (x, y) = grid.cell_center(i, j);
        if region.contains(x, y) {
            1.0
        } else {
            0.0
        }
    }
    fn volume_value(&self, region: &dyn Region, xc: f64, yc: f64, _box: [f64; 4]) -> f64 {
        if region.contains(xc, yc) {
            1.0
        } else {
            0.0
        }
    }
}

/// Exact covered area fraction of each control volume.
#[derive(Debug, Clone, Copy, Default)]
pub struct FractionSampler;

impl ChiSampler for FractionSampler {
    fn name(&self) -> &'static str {
        "fraction"
    }
    fn cell_value(&self, region: &dyn Region, grid: &Grid, i: usize, j: usize) -> f64 {
        let (x, y) = grid.cell_center(i, j);
        let (hx, hy) = (grid.hx(), grid.hy());
        self.volume_value(
            region,
            x,
            y,
            [x - 0.5 * hx, x + 0.5 * hx, y - 0.5 * hy, y + 0.5 * hy],
        )
    }
    fn volume_value(&self, region: &dyn Region, _xc: f64, _yc: f64, b: [f64; 4]) -> f64 {
        let area = (b[1] - b[0]) * (b[3] - b[2]);
        (region.covered_area(b[0], b[1], b[2], b[3]) / area).clamp(0.0, 1.0)
    }
}

pub const CHI_SAMPLERS: &[&str] = &["binary", "fraction"];

/// Looks up an indicator sampler by name.
pub fn chi_sampler(name: &str) -> Result<Arc<dyn ChiSampler>> {
    match name {
        "binary" => Ok(Arc::new(BinarySampler)),
        "fraction" => Ok(Arc::new(FractionSampler)),
        other => Err(VppError::UnknownStrategy {
            kind: "indicator sampler",
            name: other.to_string(),
            available: CHI_SAMPLERS.join(", "),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    None,
    Disk { radius: f64 },
}

/// Rigid body: `c(t) = c0 + translation * t`, spinning at `omega` about `c(t)`.
#[derive(Debug, Clone)]
pub struct Obstacle {
    pub shape: Shape,
    pub center0: [f64; 2],
    pub translation: [f64; 2],
    pub omega: f64,
    /// Final time of the prescribed trajectory.
    pub horizon: f64,
    sampler: Arc<dyn ChiSampler>,
}

impl Obstacle {
    pub fn none(horizon: f64) -> Self {
        Obstacle {
            shape: Shape::None,
            center0: [0.0, 0.0],
            translation: [0.0, 0.0],
            omega: 0.0,
            horizon,
            sampler: Arc::new(BinarySampler),
        }
    }

    pub fn disk(center0: [f64; 2], radius: f64, horizon: f64) -> Self {
        Obstacle {
            shape: Shape::Disk { radius },
            center0,
            translation: [0.0, 0.0],
            omega: 0.0,
            horizon,
            sampler: Arc::new(BinarySampler),
        }
    }

    pub fn with_translation(mut self, velocity: [f64; 2]) -> Self {
        self.translation = velocity;
        self
    }

    pub fn with_rotation(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_sampler(mut self, sampler: Arc<dyn ChiSampler>) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn sampler(&self) -> &dyn ChiSampler {
        self.sampler.as_ref()
    }

    pub fn is_present(&self) -> bool {
        !matches!(self.shape, Shape::None)
    }

    pub fn center(&self, t: f64) -> [f64; 2] {
        [
            self.center0[0] + self.translation[0] * t,
            self.center0[1] + self.translation[1] * t,
        ]
    }

    pub fn max_speed(&self) -> f64 {
        self.translation[0].hypot(self.translation[1])
    }

    pub fn region(&self, t: f64) -> Option<Disk> {
        match self.shape {
            Shape::None => None,
            Shape::Disk { radius } => Some(Disk {
                center: self.center(t),
                radius,
            }),
        }
    }

    /// Smallest distance between the body and the domain walls over `[0, horizon]`.
    pub fn clearance(&self, grid: &Grid) -> f64 {
        let Shape::Disk { radius } = self.shape else {
            return f64::INFINITY;
        };
        // the wall distances are affine in t, so the minimum sits at an end point
        [0.0, self.horizon]
            .iter()
            .map(|&t| {
                let c = self.center(t);
                let d = c[0].min(grid.lx() - c[0]).min(c[1]).min(grid.ly() - c[1]);
                d - radius
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(VppError::param(
                "obstacle.horizon",
                "must be finite and non-negative",
            ));
        }
        if !self.omega.is_finite() || !self.translation.iter().all(|x| x.is_finite()) {
            return Err(VppError::param("obstacle.motion", "must be finite"));
        }
        if let Shape::Disk { radius } = self.shape {
            if !(radius.is_finite() && radius > 0.0) {
                return Err(VppError::param("obstacle.radius", "must be positive"));
            }
            let clearance = self.clearance(grid);
            if clearance <= 0.0 {
                return Err(VppError::param(
                    "obstacle",
                    format!("body touches the domain boundary (clearance {clearance:.3e})"),
                ));
            }
        }
        Ok(())
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.horizon * (1.0 + 1e-12) + 1e-12) {
            return Err(VppError::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// Rigid-body velocity at `(x, y)`, time `t`.
    pub fn solid_velocity_at(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        let c = self.center(t);
        (
            self.translation[0] - self.omega * (y - c[1]),
            self.translation[1] + self.omega * (x - c[0]),
        )
    }
}

/// Cell indicator of the body at time `t`.
pub fn sample_chi(obstacle: &Obstacle, t: f64, grid: &Grid) -> Result<CellField> {
    obstacle.check_time(t)?;
    let mut out = CellField::zeros(*grid);
    if let Some(disk) = obstacle.region(t) {
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                out.values[grid.cell_index(i, j)] =
                    obstacle.sampler().cell_value(&disk, grid, i, j);
            }
        }
    }
    Ok(out)
}

/// Indicator on the velocity control volumes (one face-centred box per face).
pub fn sample_face_chi(obstacle: &Obstacle, t: f64, grid: &Grid) -> Result<VelocityField> {
    obstacle.check_time(t)?;
    let mut out = VelocityField::zeros(*grid);
    let Some(disk) = obstacle.region(t) else {
        return Ok(out);
    };
    let (hx, hy) = (grid.hx(), grid.hy());
    let sampler = obstacle.sampler();
    for j in 0..grid.ny() {
        for i in 0..=grid.nx() {
            let (x, y) = grid.u_position(i, j);
            let b = [x - 0.5 * hx, x + 0.5 * hx, y - 0.5 * hy, y + 0.5 * hy];
            out.set_u(i, j, sampler.volume_value(&disk, x, y, b));
        }
    }
    for j in 0..=grid.ny() {
        for i in 0..grid.nx() {
            let (x, y) = grid.v_position(i, j);
            let b = [x - 0.5 * hx, x + 0.5 * hx, y - 0.5 * hy, y + 0.5 * hy];
            out.set_v(i, j, sampler.volume_value(&disk, x, y, b));
        }
    }
    Ok(out)
}

/// Solid velocity sampled on every face.
pub fn sample_solid_velocity(obstacle: &Obstacle, t: f64, grid: &Grid) -> Result<VelocityField> {
    obstacle.check_time(t)?;
    if !obstacle.is_present() {
        return Ok(VelocityField::zeros(*grid));
    }
    Ok(VelocityField::from_fn(
        *grid,
        |x, y| obstacle.solid_velocity_at(t, x, y).0,
        |x, y| obstacle.solid_velocity_at(t, x, y).1,
    ))
}

/// Cells whose centre lies within one cell diagonal of the body boundary.
pub fn boundary_band(obstacle: &Obstacle, t: f64, grid: &Grid) -> Result<Vec<(usize, usize)>> {
    obstacle.check_time(t)?;
    let Some(disk) = obstacle.region(t) else {
        return Ok(Vec::new());
    };
    let diag = grid.cell_diagonal();
    let mut band = Vec::new();
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let (x, y) = grid.cell_center(i, j);
            if disk.boundary_distance(x, y) <= diag {
                band.push((i, j));
            }
        }
    }
    Ok(band)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::divergence;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Grid {
        Grid::unit_square(n).unwrap()
    }

    #[test]
    fn no_shape_gives_empty_samples() {
        let g = unit(8);
        let o = Obstacle::none(1.0);
        assert_eq!(sample_chi(&o, 0.5, &g).unwrap().max_abs(), 0.0);
        assert!(boundary_band(&o, 0.5, &g).unwrap().is_empty());
        assert_eq!(sample_solid_velocity(&o, 0.2, &g).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn times_outside_horizon_are_rejected() {
        let g = unit(8);
        let o = Obstacle::disk([0.5, 0.5], 0.1, 1.0);
        assert!(matches!(
            sample_chi(&o, 1.5, &g),
            Err(VppError::TimeOutOfRange { .. })
        ));
        assert!(sample_solid_velocity(&o, -0.1, &g).is_err());
        assert!(boundary_band(&o, 2.0, &g).is_err());
    }

    #[test]
    fn tiny_disk_marks_exactly_its_cell() {
        let g = unit(9);
        let h = g.hx();
        let o = Obstacle::disk([0.5, 0.5], 0.5 * h, 1.0);
        let chi = sample_chi(&o, 0.0, &g).unwrap();
        let ones: Vec<_> = (0..9)
            .flat_map(|j| (0..9).map(move |i| (i, j)))
            .filter(|&(i, j)| chi.at(i, j) == 1.0)
            .collect();
        assert_eq!(ones, vec![(4, 4)]);
    }

    #[test]
    fn disk_area_within_perimeter_band() {
        let g = unit(64);
        let r = 0.2;
        let h = g.hx();
        let o = Obstacle::disk([0.5, 0.5], r, 1.0);
        let area: f64 = sample_chi(&o, 0.0, &g).unwrap().values.iter().sum::<f64>() * h * h;
        assert!((area - PI * r * r).abs() <= 4.0 * PI * r * h);
        let frac = o.clone().with_sampler(Arc::new(FractionSampler));
        let chi = sample_chi(&frac, 0.0, &g).unwrap();
        assert!(chi.values.iter().all(|&c| (0.0..=1.0).contains(&c)));
        let area: f64 = chi.values.iter().sum::<f64>() * h * h;
        assert!(
            (area - PI * r * r).abs() < 1e-12,
            "{area} vs {}",
            PI * r * r
        );
    }

    #[test]
    fn rectangle_overlap_matches_quadrature() {
        let d = Disk {
            center: [0.31, 0.47],
            radius: 0.23,
        };
        let boxes = [
            [0.2, 0.45, 0.3, 0.5],
            [0.0, 1.0, 0.0, 1.0],
            [0.5, 0.6, 0.6, 0.75],
            [0.08, 0.1, 0.4, 0.5],
            [0.9, 1.0, 0.9, 1.0],
        ];
        for b in boxes {
            // midpoint rule on a fine lattice
            let n = 2000;
            let (dx, dy) = ((b[1] - b[0]) / n as f64, (b[3] - b[2]) / n as f64);
            let mut count = 0usize;
            for a in 0..n {
                for c in 0..n {
                    if d.contains(b[0] + (a as f64 + 0.5) * dx, b[2] + (c as f64 + 0.5) * dy) {
                        count += 1;
                    }
                }
            }
            let approx = count as f64 * dx * dy;
            let exact = d.covered_area(b[0], b[1], b[2], b[3]);
            let box_area = (b[1] - b[0]) * (b[3] - b[2]);
            assert!(
                (approx - exact).abs() < 2e-3 * box_area,
                "{b:?}: {approx} vs {exact}"
            );
        }
    }

    #[test]
    fn translation_and_rotation_velocities() {
        let g = unit(16);
        let o = Obstacle::disk([0.5, 0.5], 0.1, 1.0).with_translation([1.0, 0.0]);
        let vs = sample_solid_velocity(&o, 0.1, &g).unwrap();
        assert!(vs.u.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        assert!(vs.v.iter().all(|&x| x == 0.0));

        let rot = Obstacle::disk([0.5, 0.5], 0.1, 1.0).with_rotation(1.0);
        let vs = sample_solid_velocity(&rot, 0.3, &g).unwrap();
        assert!(divergence(&vs).max_abs() < 1e-12);
    }

    #[test]
    fn combined_motion_matches_analytic_formula() {
        let g = unit(16);
        let o = Obstacle::disk([0.3, 0.4], 0.1, 1.0)
            .with_translation([0.2, -0.1])
            .with_rotation(2.0);
        let t = 0.5;
        let vs = sample_solid_velocity(&o, t, &g).unwrap();
        let (cx, cy) = (0.3 + 0.2 * t, 0.4 - 0.1 * t);
        for k in 0..10 {
            let (i, j) = ((k * 7) % 17, (k * 5) % 16);
            let (_, y) = g.u_position(i, j);
            assert!((vs.u_at(i, j) - (0.2 - 2.0 * (y - cy))).abs() < 1e-14);
            let (i, j) = ((k * 3) % 16, (k * 11) % 17);
            let (x, _) = g.v_position(i, j);
            assert!((vs.v_at(i, j) - (-0.1 + 2.0 * (x - cx))).abs() < 1e-14);
        }
    }

    #[test]
    fn band_counts_and_distances() {
        let g = unit(100);
        let h = g.hx();
        let r = 10.0 * h;
        let o = Obstacle::disk([0.5, 0.5], r, 1.0);
        let band = boundary_band(&o, 0.0, &g).unwrap();
        let circ = 2.0 * PI * r / h;
        assert!(band.len() as f64 >= 0.5 * circ && band.len() as f64 <= 4.0 * circ);
        for &(i, j) in &band {
            let (x, y) = g.cell_center(i, j);
            assert!(((x - 0.5).hypot(y - 0.5) - r).abs() <= h * 2f64.sqrt() + 1e-15);
        }
    }

    #[test]
    fn trajectory_is_lipschitz_and_clearance_checked() {
        let g = unit(16);
        let o = Obstacle::disk([0.3, 0.5], 0.1, 1.0).with_translation([0.3, 0.0]);
        for k in 0..20 {
            let t = k as f64 * 0.05;
            let d = 0.01 * (k + 1) as f64;
            let (a, b) = (o.center(t), o.center(t + d));
            assert!((a[0] - b[0]).hypot(a[1] - b[1]) <= o.max_speed() * d + 1e-15);
        }
        assert!(o.validate(&g).is_ok());
        let bad = Obstacle::disk([0.3, 0.5], 0.1, 1.0).with_translation([1.0, 0.0]);
        assert!(bad.validate(&g).is_err());
    }

    #[test]
    fn sampler_registry() {
        assert_eq!(chi_sampler("binary").unwrap().name(), "binary");
        assert_eq!(chi_sampler("fraction").unwrap().name(), "fraction");
        assert!(matches!(
            chi_sampler("smooth"),
            Err(VppError::UnknownStrategy { .. })
        ));
    }
}
