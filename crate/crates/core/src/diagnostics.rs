//! Measured quantities: per-step records, negative Sobolev norms, the
//! energy ledger, time-translation integrals of step functions, and the
//! slip of the flow on the obstacle boundary.

use crate::error::{Result, VppError};
use crate::geometry::{boundary_band, Obstacle};
use crate::linalg::{
    assemble_cell_neg_laplacian, assemble_face_neg_laplacian, solve, ConjugateGradient, FaceLayout,
    SolverConfig, SparseOperator,
};
use crate::mesh::{CellField, Grid, VelocityField};

/// Everything measured at the end of step `n` (time `t = n dt`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub n: usize,
    pub t: f64,
    /// `||v^n||^2 / 2`
    pub kinetic_energy: f64,
    pub div_norm: f64,
    /// `||grad v~^n||`
    pub grad_norm: f64,
    pub pressure_norm: f64,
    pub pressure_grad_norm: f64,
    /// `||v~^n - v^{n-1}||`
    pub increment_norm: f64,
    /// `||p^n - p^{n-1}||`
    pub pressure_increment_norm: f64,
    /// `||v^^n||`
    pub correction_norm: f64,
    /// `||v^^n||_{H^-1}`, when requested.
    pub correction_h_minus1: Option<f64>,
    /// `int chi |v~^n - v_s|^2`
    pub penalization_energy: f64,
    /// Band approximation of the boundary integral of `|v^n - v_s|^2`.
    pub slip_error: f64,
    pub prediction_iterations: usize,
    pub correction_iterations: usize,
}

impl DiagnosticsRecord {
    pub fn is_valid(&self) -> bool {
        let vals = [
            self.t,
            self.kinetic_energy,
            self.div_norm,
            self.grad_norm,
            self.pressure_norm,
            self.pressure_grad_norm,
            self.increment_norm,
            self.pressure_increment_norm,
            self.correction_norm,
            self.correction_h_minus1.unwrap_or(0.0),
            self.penalization_energy,
            self.slip_error,
        ];
        vals.iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// `(sum f^2 area)^{1/2}` over cells.
pub fn l2_norm_cells(f: &CellField) -> f64 {
    f.norm_l2()
}

/// Face quadrature norm with trapezoidal weights on the wall faces.
pub fn l2_norm_velocity(f: &VelocityField) -> f64 {
    f.norm_l2()
}

/// Inverse of the homogeneous Dirichlet Laplacian, for `H^-1` norms.
#[derive(Debug, Clone)]
pub struct InverseLaplacian {
    grid: Grid,
    cells: SparseOperator,
    faces: SparseOperator,
    layout: FaceLayout,
    cfg: SolverConfig,
}

impl InverseLaplacian {
    pub fn new(grid: &Grid) -> Result<Self> {
        Ok(InverseLaplacian {
            grid: *grid,
            cells: assemble_cell_neg_laplacian(grid)?,
            faces: assemble_face_neg_laplacian(grid)?,
            layout: FaceLayout::new(*grid),
            cfg: SolverConfig::new(1e-10, 20_000)?,
        })
    }

    /// `||f||_{-1}^2 = <f, phi>` with `-Laplacian phi = f`.
    pub fn cell_norm(&self, f: &CellField) -> Result<f64> {
        if !f.is_finite() {
            return Err(VppError::NonFinite("H^-1 argument"));
        }
        let (phi, _) = solve(&self.cells, &f.values, &ConjugateGradient, &self.cfg)?;
        let s: f64 = f.values.iter().zip(&phi).map(|(a, b)| a * b).sum();
        Ok((s.max(0.0) * self.grid.cell_area()).sqrt())
    }

    /// Component-wise version on the interior faces; wall-normal faces are ignored.
    pub fn velocity_norm(&self, f: &VelocityField) -> Result<f64> {
        if !f.is_finite() {
            return Err(VppError::NonFinite("H^-1 argument"));
        }
        let rhs = self.layout.gather(f);
        let (phi, _) = solve(&self.faces, &rhs, &ConjugateGradient, &self.cfg)?;
        let s: f64 = rhs.iter().zip(&phi).map(|(a, b)| a * b).sum();
        Ok((s.max(0.0) * self.grid.cell_area()).sqrt())
    }
}

pub fn h_minus1_norm_cells(f: &CellField) -> Result<f64> {
    InverseLaplacian::new(f.grid())?.cell_norm(f)
}

pub fn h_minus1_norm_velocity(f: &VelocityField) -> Result<f64> {
    InverseLaplacian::new(f.grid())?.velocity_norm(f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipError {
    pub value: f64,
    pub band_cells: usize,
}

impl SlipError {
    /// No cell fell in the band (no obstacle, or a body too small for the grid).
    pub fn is_empty(&self) -> bool {
        self.band_cells == 0
    }
}

/// Approximates the boundary integral of `|v - v_s|^2` over the body outline
/// by a sum over the band cells, each weighted by cell area over band width.
pub fn slip_error(v: &VelocityField, obstacle: &Obstacle, t: f64) -> Result<SlipError> {
    let grid = *v.grid();
    let band = boundary_band(obstacle, t, &grid)?;
    let width = 2.0 * grid.cell_diagonal();
    let w = grid.cell_area() / width;
    let mut value = 0.0;
    for &(i, j) in &band {
        let (x, y) = grid.cell_center(i, j);
        let (vu, vv) = v.cell_value(i, j);
        let (su, sv) = obstacle.solid_velocity_at(t, x, y);
        value += w * ((vu - su).powi(2) + (vv - sv).powi(2));
    }
    Ok(SlipError {
        value,
        band_cells: band.len(),
    })
}

/// Squared norms of the initial state entering the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InitialNorms {
    pub velocity_sq: f64,
    pub pressure_sq: f64,
    pub pressure_grad_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerCoefficients {
    pub dt: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerReport {
    /// Ledger value after each step, starting with the initial state.
    pub values: Vec<f64>,
    pub max: f64,
    /// Largest step-to-step increase relative to the running value.
    pub max_relative_increase: f64,
    pub non_increasing: bool,
    pub kinetic_non_increasing: bool,
    pub max_relative_kinetic_increase: f64,
    pub terms_finite_nonnegative: bool,
}

/// Accumulates
/// `||v^n||^2 + dt eps ||p^n||^2 + dt^2 ||grad p^n||^2 + sum ||v~^{k+1} - v^k||^2
///  + mu sum dt ||grad v~^{k+1}||^2 + eps sum dt ||p^{k+1} - p^k||^2
///  + (2/eta) sum dt int chi |v~^{k+1} - v_s|^2`.
///
/// Monotonicity flags use a relative tolerance `tol`.
pub fn energy_ledger(
    records: &[DiagnosticsRecord],
    initial: InitialNorms,
    c: LedgerCoefficients,
    tol: f64,
) -> LedgerReport {
    let LedgerCoefficients {
        dt,
        epsilon,
        mu,
        eta,
    } = c;
    let inv_eta = if eta.is_finite() { 1.0 / eta } else { 0.0 };
    let mut values = Vec::with_capacity(records.len() + 1);
    values.push(
        initial.velocity_sq
            + dt * epsilon * initial.pressure_sq
            + dt * dt * initial.pressure_grad_sq,
    );
    let mut acc = 0.0;
    let mut finite = true;
    for r in records {
        let dissipated = [
            r.increment_norm.powi(2),
            mu * dt * r.grad_norm.powi(2),
            epsilon * dt * r.pressure_increment_norm.powi(2),
            2.0 * inv_eta * dt * r.penalization_energy,
        ];
        let stored = [
            2.0 * r.kinetic_energy,
            dt * epsilon * r.pressure_norm.powi(2),
            dt * dt * r.pressure_grad_norm.powi(2),
        ];
        finite &= dissipated
            .iter()
            .chain(&stored)
            .all(|x| x.is_finite() && *x >= 0.0);
        acc += dissipated.iter().sum::<f64>();
        values.push(stored.iter().sum::<f64>() + acc);
    }
    let rel_increase = |seq: &[f64]| {
        seq.windows(2)
            .map(|w| (w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE))
            .fold(0.0f64, f64::max)
    };
    let max_relative_increase = rel_increase(&values);
    let mut kinetic = vec![0.5 * initial.velocity_sq];
    kinetic.extend(records.iter().map(|r| r.kinetic_energy));
    let max_relative_kinetic_increase = rel_increase(&kinetic);
    LedgerReport {
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        non_increasing: max_relative_increase <= tol,
        kinetic_non_increasing: max_relative_kinetic_increase <= tol,
        max_relative_increase,
        max_relative_kinetic_increase,
        terms_finite_nonnegative: finite,
        values,
    }
}

/// Snapshots `u^0, ..., u^{N-1}` read as the step function equal to `u^k`
/// on `[k dt, (k+1) dt)`, over `[0, N dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries {
    dt: f64,
    weights: Vec<f64>,
    snapshots: Vec<Vec<f64>>,
}

impl FieldSeries {
    /// `weights` are the quadrature weights of the spatial norm.
    pub fn new(dt: f64, weights: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(VppError::param("dt", "must be positive"));
        }
        Ok(FieldSeries {
            dt,
            weights,
            snapshots: Vec::new(),
        })
    }

    /// Series of scalars with the absolute value as norm.
    pub fn scalar(dt: f64, values: &[f64]) -> Result<Self> {
        let mut s = FieldSeries::new(dt, vec![1.0])?;
        for &v in values {
            s.push(vec![v])?;
        }
        Ok(s)
    }

    /// Face fields with the face quadrature weights.
    pub fn for_velocity(dt: f64, grid: &Grid) -> Result<Self> {
        let mut w = Vec::with_capacity(grid.n_u() + grid.n_v());
        for _j in 0..grid.ny() {
            for i in 0..=grid.nx() {
                w.push(grid.u_weight(i));
            }
        }
        for j in 0..=grid.ny() {
            for _i in 0..grid.nx() {
                w.push(grid.v_weight(j));
            }
        }
        FieldSeries::new(dt, w)
    }

    pub fn push(&mut self, snapshot: Vec<f64>) -> Result<()> {
        if snapshot.len() != self.weights.len() {
            return Err(VppError::param(
                "snapshot",
                format!(
                    "length {} does not match {}",
                    snapshot.len(),
                    self.weights.len()
                ),
            ));
        }
        self.snapshots.push(snapshot);
        Ok(())
    }

    pub fn push_velocity(&mut self, v: &VelocityField) -> Result<()> {
        self.push(v.u.iter().chain(&v.v).copied().collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.snapshots.len() as f64 * self.dt
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.weights)
            .map(|(a, w)| w * a * a)
            .sum::<f64>()
            .sqrt()
    }

    fn distance(&self, a: usize, b: usize) -> f64 {
        let (x, y) = (&self.snapshots[a], &self.snapshots[b]);
        x.iter()
            .zip(y)
            .zip(&self.weights)
            .map(|((p, q), w)| w * (p - q) * (p - q))
            .sum::<f64>()
            .sqrt()
    }

    /// `sum_k ||u^{k+1} - u^k||^2`
    pub fn increment_energy(&self) -> f64 {
        (1..self.len())
            .map(|k| self.distance(k, k - 1).powi(2))
            .sum()
    }

    /// `max_k ||u^k||^2`
    pub fn max_norm_sq(&self) -> f64 {
        self.snapshots
            .iter()
            .map(|s| self.norm(s).powi(2))
            .fold(0.0, f64::max)
    }

    pub fn scale(&mut self, a: f64) {
        for s in &mut self.snapshots {
            s.iter_mut().for_each(|x| *x *= a);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranslationForm {
    /// `int_0^{T-h} ||u(t+h) - u(t)|| dt`
    Integral,
    /// `(int_0^{T-h} ||u(t+h) - u(t)||^2 dt)^{1/2}`
    Quadratic,
}

/// Exact time-translation integral of the step function, evaluated piece by
/// piece between the breakpoints `k dt` and `k dt - h`.
pub fn nikolskii_translation(series: &FieldSeries, h: f64, form: TranslationForm) -> Result<f64> {
    let t_end = series.horizon();
    if !(h > 0.0 && h < t_end) {
        return Err(VppError::param(
            "h",
            format!("offset must lie in (0, {t_end}), got {h}"),
        ));
    }
    let dt = series.dt;
    let n = series.len();
    let upper = t_end - h;
    let mut breaks = vec![0.0, upper];
    for k in 1..=n {
        let a = k as f64 * dt;
        for b in [a, a - h] {
            if b > 0.0 && b < upper {
                breaks.push(b);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let index = |t: f64| ((t / dt).floor() as usize).min(n - 1);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let m = 0.5 * (w[0] + w[1]);
        let (a, b) = (index(m), index(m + h));
        if a == b {
            continue;
        }
        let d = series.distance(a, b);
        total += match form {
            TranslationForm::Integral => len * d,
            TranslationForm::Quadratic => len * d * d,
        };
    }
    Ok(match form {
        TranslationForm::Integral => total,
        TranslationForm::Quadratic => total.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Obstacle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn l2_norms() {
        let g = Grid::unit_square(16).unwrap();
        assert_eq!(l2_norm_cells(&CellField::zeros(g)), 0.0);
        let one = CellField::from_fn(g, |_, _| 1.0);
        assert!((l2_norm_cells(&one) - 1.0).abs() < 1e-14);
        let g = Grid::unit_square(128).unwrap();
        let s = CellField::from_fn(g, |x, y| (PI * x).sin() * (PI * y).sin());
        assert!((l2_norm_cells(&s) - 0.5).abs() < 1e-3);
    }

    #[test]
    fn h_minus1_of_laplacian_eigenfunction() {
        let g = Grid::unit_square(128).unwrap();
        let s = CellField::from_fn(g, |x, y| (PI * x).sin() * (PI * y).sin());
        let expected = 0.5 / (2.0f64.sqrt() * PI);
        let got = h_minus1_norm_cells(&s).unwrap();
        assert!(
            (got - expected).abs() < 0.01 * expected,
            "{got} vs {expected}"
        );
        assert_eq!(h_minus1_norm_cells(&CellField::zeros(g)).unwrap(), 0.0);
    }

    #[test]
    fn h_minus1_of_vector_eigenfunction() {
        let g = Grid::unit_square(64).unwrap();
        let f = VelocityField::from_fn(g, |x, y| (PI * x).sin() * (PI * y).sin(), |_, _| 0.0);
        let expected = f.norm_l2() / (2.0f64.sqrt() * PI);
        let got = h_minus1_norm_velocity(&f).unwrap();
        assert!((got - expected).abs() < 0.01 * expected);
    }

    #[test]
    fn h_minus1_is_homogeneous() {
        let g = Grid::unit_square(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = CellField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0));
        let inv = InverseLaplacian::new(&g).unwrap();
        let a = inv.cell_norm(&f).unwrap();
        for c in [-3.0, 0.5, 7.0] {
            let b = inv.cell_norm(&f.scaled(c)).unwrap();
            assert!((b - c.abs() * a).abs() <= 1e-10 * b.max(1e-300) * 10.0);
        }
    }

    #[test]
    fn poincare_embedding() {
        // C_P = 1/sqrt(lambda_min) of the discrete operator
        let g = Grid::unit_square(12).unwrap();
        let a = assemble_cell_neg_laplacian(&g).unwrap().to_dense();
        let lmin = a.symmetric_eigenvalues().min();
        let cp = 1.0 / lmin.sqrt();
        let inv = InverseLaplacian::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let f = CellField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0));
            assert!(inv.cell_norm(&f).unwrap() <= cp * f.norm_l2() * (1.0 + 1e-8));
        }
    }

    #[test]
    fn two_snapshot_translation() {
        let s = FieldSeries::scalar(1.0, &[0.0, 1.0]).unwrap();
        let v = nikolskii_translation(&s, 0.5, TranslationForm::Integral).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        let q = nikolskii_translation(&s, 0.5, TranslationForm::Quadratic).unwrap();
        assert!((q - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn translation_of_constant_series_vanishes() {
        let s = FieldSeries::scalar(0.1, &[2.0; 10]).unwrap();
        for h in [0.01, 0.1, 0.35, 0.9] {
            assert_eq!(
                nikolskii_translation(&s, h, TranslationForm::Integral).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn translation_rejects_offset_beyond_horizon() {
        let s = FieldSeries::scalar(0.5, &[0.0, 1.0]).unwrap();
        assert!(nikolskii_translation(&s, 1.0, TranslationForm::Integral).is_err());
        assert!(nikolskii_translation(&s, 0.0, TranslationForm::Integral).is_err());
    }

    #[test]
    fn translation_matches_fine_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vals: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dt = 0.3;
        let s = FieldSeries::scalar(dt, &vals).unwrap();
        let f = |t: f64| vals[((t / dt).floor() as usize).min(6)];
        for h in [0.07, 0.3, 0.45, 1.1] {
            let upper = 7.0 * dt - h;
            let m = 400_000;
            let q: f64 = (0..m)
                .map(|k| {
                    let t = (k as f64 + 0.5) * upper / m as f64;
                    (f(t + h) - f(t)).abs()
                })
                .sum::<f64>()
                * upper
                / m as f64;
            let exact = nikolskii_translation(&s, h, TranslationForm::Integral).unwrap();
            assert!((q - exact).abs() < 1e-4, "h={h}: {q} vs {exact}");
        }
    }

    #[test]
    fn slip_error_of_unit_offset_is_circumference() {
        let g = Grid::unit_square(128).unwrap();
        let o = Obstacle::disk([0.5, 0.5], 0.2, 1.0);
        let v = VelocityField::from_fn(g, |_, _| 1.0, |_, _| 0.0);
        let s = slip_error(&v, &o, 0.0).unwrap();
        let c = 2.0 * PI * 0.2;
        assert!((s.value - c).abs() < 0.15 * c, "{}", s.value);
        let none = Obstacle::none(1.0);
        let s = slip_error(&v, &none, 0.0).unwrap();
        assert!(s.is_empty() && s.value == 0.0);
    }

    #[test]
    fn slip_error_vanishes_for_rigid_motion() {
        let g = Grid::unit_square(32).unwrap();
        let o = Obstacle::disk([0.5, 0.5], 0.2, 1.0).with_rotation(1.0);
        let v = VelocityField::from_fn(
            g,
            |x, y| o.solid_velocity_at(0.0, x, y).0,
            |x, y| o.solid_velocity_at(0.0, x, y).1,
        );
        assert!(slip_error(&v, &o, 0.0).unwrap().value < 1e-28);
    }

    #[test]
    fn zero_run_ledger_is_zero() {
        let recs = vec![DiagnosticsRecord::default(); 5];
        let rep = energy_ledger(
            &recs,
            InitialNorms::default(),
            LedgerCoefficients {
                dt: 0.1,
                epsilon: 0.1,
                mu: 0.01,
                eta: 1e-6,
            },
            1e-10,
        );
        assert!(rep.values.iter().all(|&v| v == 0.0));
        assert!(rep.non_increasing && rep.kinetic_non_increasing && rep.terms_finite_nonnegative);
    }
}
