//! The acceptance suite: each criterion runs a small experiment and
//! reports pass/fail with the measured numbers.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{
    energy_ledger, nikolskii_translation, FieldSeries, LedgerCoefficients, TranslationForm,
};
use crate::error::Result;
use crate::fit::fit_power_law;
use crate::geometry::{chi_sampler, Obstacle};
use crate::linalg::{assemble_correction, FaceLayout};
use crate::manufactured::{random_solenoidal, taylor_green, TaylorGreen};
use crate::mesh::{
    convection, curl, divergence, gradient, CellField, Grid, PressureField, VelocityField,
};
use crate::oracle::coupled_step;
use crate::problem::Problem;
use crate::vpp::{
    run, FlowState, RunOptions, SchemeParams, SolverChoice, Stepper, DEFAULT_ETA, DEFAULT_MU,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: &'static str,
    pub passed: bool,
    pub summary: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    run: fn() -> Result<(bool, String)>,
}

impl Criterion {
    /// Runs the experiment; an error counts as a failure.
    pub fn evaluate(&self) -> CriterionReport {
        let start = Instant::now();
        let (passed, summary) = match (self.run)() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        CriterionReport {
            id: self.id,
            passed,
            summary,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} {} ({:.1}s) {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.summary
        )
    }
}

pub const CRITERIA: &[Criterion] = &[
    Criterion {
        id: "A1",
        title: "divergence scales with the penalty",
        run: divergence_scaling,
    },
    Criterion {
        id: "A2",
        title: "unforced kinetic energy never grows",
        run: energy_stability,
    },
    Criterion {
        id: "A3",
        title: "Taylor-Green convergence in time",
        run: manufactured_convergence,
    },
    Criterion {
        id: "A4",
        title: "small-penalty limit matches the coupled step",
        run: splitting_limit,
    },
    Criterion {
        id: "A5",
        title: "slip and penalization scaling with eta",
        run: slip_scaling,
    },
    Criterion {
        id: "A6",
        title: "rigid motion inside the body",
        run: interior_rigid_motion,
    },
    Criterion {
        id: "A7",
        title: "translation estimator bounds",
        run: translation_estimator,
    },
    Criterion {
        id: "A8",
        title: "operator algebra",
        run: operator_algebra,
    },
];

pub fn criterion(id: &str) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id.eq_ignore_ascii_case(id))
}

fn sci(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| format!("{x:.3e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

const REFINED_STEPS: [f64; 4] = [1.0 / 40.0, 1.0 / 80.0, 1.0 / 160.0, 1.0 / 320.0];

/// Closed box, no obstacle, Taylor-Green initial velocity, zero initial pressure.
fn vortex_decay(dt: f64, horizon: f64) -> Result<crate::vpp::RunOutcome> {
    let mu = 0.05;
    let g = Grid::unit_square(32)?;
    let prm = SchemeParams::new(dt, 1.0, DEFAULT_ETA, mu, horizon)?;
    let (v0, _, _) = taylor_green(0.0, &g, mu)?;
    run(
        v0,
        PressureField::zeros(g),
        &Problem::unforced(horizon),
        &prm,
        RunOptions::default(),
        &mut [],
    )
}

fn divergence_scaling() -> Result<(bool, String)> {
    let mut eps = Vec::new();
    let mut q = Vec::new();
    for dt in REFINED_STEPS {
        let out = vortex_decay(dt, 0.5)?;
        eps.push(dt);
        q.push(
            out.records
                .iter()
                .map(|r| dt * r.div_norm.powi(2))
                .sum::<f64>()
                .sqrt(),
        );
    }
    let fit = fit_power_law(&eps, &q)?;
    let ok = (0.4..=0.65).contains(&fit.slope);
    Ok((
        ok,
        format!(
            "slope {:.3} (window [0.4, 0.65], fit residual {:.1e}); time-integrated div norms {}",
            fit.slope,
            fit.residual,
            sci(&q)
        ),
    ))
}

fn energy_stability() -> Result<(bool, String)> {
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut ledger_monotone = true;
    for dt in REFINED_STEPS {
        let out = vortex_decay(dt, 1.0)?;
        let report = energy_ledger(
            &out.records,
            out.initial,
            LedgerCoefficients {
                dt,
                epsilon: dt,
                mu: 0.05,
                eta: DEFAULT_ETA,
            },
            1e-10,
        );
        ok &= report.kinetic_non_increasing
            && report.terms_finite_nonnegative
            && report.values.iter().all(|v| v.is_finite());
        worst = worst.max(report.max_relative_kinetic_increase);
        ledger_monotone &= report.max_relative_increase <= 1e-8;
    }
    Ok((
        ok,
        format!(
            "largest relative kinetic-energy increase {worst:.2e} (limit 1e-10); ledger terms finite; ledger non-increasing: {ledger_monotone}"
        ),
    ))
}

fn manufactured_convergence() -> Result<(bool, String)> {
    let mu = 0.1;
    let horizon = 0.25;
    let g = Grid::unit_square(64)?;
    let tg = TaylorGreen::new(mu);
    let problem = Problem::unforced(horizon)
        .with_forcing(Arc::new(tg))
        .with_walls(Arc::new(tg));
    let mut errors = Vec::new();
    for dt in REFINED_STEPS {
        let prm = SchemeParams::new(dt, 1.0, DEFAULT_ETA, mu, horizon)?;
        let (v0, p0, _) = taylor_green(0.0, &g, mu)?;
        let mut err2 = 0.0;
        let mut sink = |s: &FlowState, _: &crate::diagnostics::DiagnosticsRecord| -> Result<()> {
            let exact = tg.sample_velocity(&g, s.t)?;
            err2 += dt * (&s.v - &exact).norm_l2().powi(2);
            Ok(())
        };
        run(
            v0,
            p0,
            &problem,
            &prm,
            RunOptions::default(),
            &mut [&mut sink],
        )?;
        errors.push(err2.sqrt());
    }
    let fit = fit_power_law(&REFINED_STEPS, &errors)?;
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    Ok((
        decreasing && fit.slope >= 0.8,
        format!(
            "order {:.3} (minimum 0.8, fit residual {:.1e}); errors {}",
            fit.slope,
            fit.residual,
            sci(&errors)
        ),
    ))
}

fn splitting_limit() -> Result<(bool, String)> {
    let g = Grid::unit_square(8)?;
    let dt = 0.01;
    let v0 = random_solenoidal(&g, 2024);
    let problem = Problem::unforced(dt);
    let base = SchemeParams::new(dt, 1.0, DEFAULT_ETA, DEFAULT_MU, dt)?;
    let (vc, _) = coupled_step(&v0, 0.0, &problem, &base)?;
    let mut rel = Vec::new();
    for eps in [1e-4, 1e-6, 1e-8, 1e-10] {
        let mut prm = base.clone();
        prm.lambda = eps / dt;
        // tight solves so that only the splitting is measured
        prm.prediction = SolverChoice::new("bicgstab", 1e-14, 10_000)?;
        prm.correction = SolverChoice::new("cg", 1e-14, 100_000)?;
        let stepper = Stepper::new(&g, &prm, &problem)?;
        let (s1, _) = stepper.step(&FlowState::initial(v0.clone(), PressureField::zeros(g)))?;
        rel.push((&s1.v - &vc).norm_l2() / vc.norm_l2());
    }
    let decreasing = rel.windows(2).all(|w| w[1] < w[0]);
    let last = rel[rel.len() - 1];
    Ok((
        decreasing && last <= 1e-5,
        format!(
            "relative differences at eps = 1e-4..1e-10: {} (strictly decreasing: {decreasing}; limit 1e-5 at 1e-10)",
            sci(&rel)
        ),
    ))
}

const DISK_HORIZON: f64 = 0.25;

fn rotating_disk(eta: f64, sampler: &str) -> Result<(Problem, SchemeParams)> {
    let obstacle = Obstacle::disk([0.5, 0.5], 0.15, DISK_HORIZON)
        .with_rotation(1.0)
        .with_sampler(chi_sampler(sampler)?);
    let prm = SchemeParams::new(1.0 / 128.0, 1.0, eta, DEFAULT_MU, DISK_HORIZON)?;
    Ok((Problem::unforced(DISK_HORIZON).with_obstacle(obstacle), prm))
}

fn accumulated_slip(eta: f64, sampler: &str) -> Result<(f64, f64)> {
    let g = Grid::unit_square(64)?;
    let (problem, prm) = rotating_disk(eta, sampler)?;
    let out = run(
        VelocityField::zeros(g),
        PressureField::zeros(g),
        &problem,
        &prm,
        RunOptions::default(),
        &mut [],
    )?;
    let slip = out.records.iter().map(|r| prm.dt * r.slip_error).sum();
    let pen = out
        .records
        .iter()
        .map(|r| prm.dt * r.penalization_energy)
        .sum();
    Ok((slip, pen))
}

fn slip_scaling() -> Result<(bool, String)> {
    let etas = [1e-2, 1e-3, 1e-4, 1e-5];
    let mut summary = String::new();
    let mut ok = true;
    for (k, sampler) in ["binary", "fraction"].into_iter().enumerate() {
        let mut slip = Vec::new();
        let mut pen = Vec::new();
        for eta in etas {
            let (s, p) = accumulated_slip(eta, sampler)?;
            slip.push(s);
            pen.push(p);
        }
        let fs = fit_power_law(&etas, &slip)?;
        let fp = fit_power_law(&etas, &pen)?;
        // the default (binary) indicator decides; the area-fraction one is reported alongside
        if k == 0 {
            ok = (0.35..=0.75).contains(&fs.slope) && (0.8..=1.2).contains(&fp.slope);
        }
        let _ = write!(
            summary,
            "{}{sampler}: slip slope {:.3} [0.35, 0.75], penalization slope {:.3} [0.8, 1.2], slip {}",
            if k == 0 { "" } else { "; " },
            fs.slope,
            fp.slope,
            sci(&slip)
        );
    }
    Ok((ok, summary))
}

fn interior_rigid_motion() -> Result<(bool, String)> {
    let g = Grid::unit_square(64)?;
    let (problem, prm) = rotating_disk(1e-8, "binary")?;
    let obstacle = problem.obstacle.clone();
    let radius = 0.15;
    let vs_max = radius * 1.0;
    let interior_error = |s: &FlowState| {
        let c = obstacle.center(s.t);
        let mut m = 0.0f64;
        for j in 0..g.ny() {
            for i in 0..g.nx() {
                let (x, y) = g.cell_center(i, j);
                if radius - (x - c[0]).hypot(y - c[1]) > 2.0 * g.hx() {
                    let (u, v) = s.v.cell_value(i, j);
                    let (a, b) = obstacle.solid_velocity_at(s.t, x, y);
                    m = m.max((u - a).hypot(v - b));
                }
            }
        }
        m
    };
    let mut transient = 0.0f64;
    let mut sink = |s: &FlowState, _: &crate::diagnostics::DiagnosticsRecord| -> Result<()> {
        transient = transient.max(interior_error(s));
        Ok(())
    };
    let out = run(
        VelocityField::zeros(g),
        PressureField::zeros(g),
        &problem,
        &prm,
        RunOptions::default(),
        &mut [&mut sink],
    )?;
    let last = interior_error(&out.state) / vs_max;
    Ok((
        last <= 1e-3,
        format!(
            "max |v - v_s| / max |v_s| inside at T: {last:.3e} (limit 1e-3); largest over all steps {:.3e}",
            transient / vs_max
        ),
    ))
}

fn translation_estimator() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let horizon = 1.0;
    let n = 64;
    let dt = horizon / n as f64;
    let dim = 16;
    let bound_c = 2.0 * horizon.sqrt().max(2.0);
    let hs: Vec<f64> = (0..25)
        .map(|k| (dt / 4.0) * ((horizon / 2.0) / (dt / 4.0)).powf(k as f64 / 24.0))
        .collect();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut series = FieldSeries::new(dt, vec![1.0; dim])?;
        let mut u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..n {
            series.push(u.clone())?;
            u.iter_mut().for_each(|x| *x += rng.gen_range(-1.0..1.0));
        }
        let cm = series.increment_energy().max(series.max_norm_sq());
        series.scale(1.0 / cm.sqrt());
        for &h in &hs {
            let v = nikolskii_translation(&series, h, TranslationForm::Integral)?;
            worst = worst.max(v / (bound_c * h.sqrt()));
        }
    }
    let two = FieldSeries::scalar(1.0, &[0.0, 1.0])?;
    let hand = nikolskii_translation(&two, 0.5, TranslationForm::Integral)?;
    let exact = (hand - 0.5).abs() <= 1e-14;
    Ok((
        worst <= 1.0 && exact,
        format!(
            "largest integral / (2 max(T^1/2, 2) h^1/2) = {worst:.3} over h in [dt/4, T/2]; two-snapshot value {hand} (expected 0.5)"
        ),
    ))
}

fn random_grid(rng: &mut ChaCha8Rng) -> Result<Grid> {
    Grid::new(
        rng.gen_range(4..=12),
        rng.gen_range(4..=12),
        rng.gen_range(0.5..2.0),
        rng.gen_range(0.5..2.0),
    )
}

fn random_velocity(g: Grid, rng: &mut ChaCha8Rng) -> VelocityField {
    let mut f = VelocityField::zeros(g);
    f.u.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    f.v.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    f
}

fn operator_algebra() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trials = 100;
    let (mut adj, mut cg, mut skew, mut sym) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut positive = true;
    for _ in 0..trials {
        let g = random_grid(&mut rng)?;
        let p = CellField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0));
        let w = random_velocity(g, &mut rng).with_zero_normal_boundary();
        let gp = gradient(&p);
        adj = adj.max((gp.dot(&w) + p.dot(&divergence(&w))).abs() / (gp.norm_l2() * w.norm_l2()));

        let scale = gp.max_abs() / g.hx().min(g.hy());
        cg = cg.max(curl(&gp).max_abs_interior() / scale);

        let u = random_velocity(g, &mut rng).with_zero_normal_boundary();
        let v = random_velocity(g, &mut rng).with_zero_normal_boundary();
        let b = convection(&u, &v);
        skew = skew.max(b.dot(&v).abs() / (b.norm_l2() * v.norm_l2()));

        let a = assemble_correction(&g, rng.gen_range(1e-3..10.0))?;
        let layout = FaceLayout::new(g);
        let x: Vec<f64> = (0..layout.len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let y: Vec<f64> = (0..layout.len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let (ax, ay) = (a.apply(&x), a.apply(&y));
        let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(s, t)| s * t).sum::<f64>();
        let nrm = |p: &[f64]| dot(p, p).sqrt();
        sym = sym.max((dot(&ax, &y) - dot(&x, &ay)).abs() / (nrm(&ax) * nrm(&y)));
        positive &= dot(&ax, &x) > 0.0;
    }
    let ok = adj <= 1e-12 && cg <= 1e-12 && skew <= 1e-10 && sym <= 1e-12 && positive;
    Ok((
        ok,
        format!(
            "{trials} instances each: adjointness {adj:.1e} (1e-12), curl grad {cg:.1e} (1e-12), skew {skew:.1e} (1e-10), correction symmetry {sym:.1e} (1e-12), positive definite: {positive}"
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lookup() {
        assert_eq!(CRITERIA.len(), 8);
        assert_eq!(criterion("a4").unwrap().id, "A4");
        assert!(criterion("A9").is_none());
    }

    #[test]
    fn quick_criteria_pass() {
        for id in ["A7", "A8"] {
            let r = criterion(id).unwrap().evaluate();
            assert!(r.passed, "{}", r.line());
        }
    }
}
