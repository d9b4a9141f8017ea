//! Discrete energy balance of one step and of whole runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vpp_core::diagnostics::{energy_ledger, LedgerCoefficients};
use vpp_core::geometry::Obstacle;
use vpp_core::manufactured::random_solenoidal;
use vpp_core::mesh::{gradient, strain_divergence, CellField, Grid, PressureField};
use vpp_core::problem::Problem;
use vpp_core::vpp::{run, FlowState, RunOptions, SchemeParams, SolverChoice, Stepper};

fn random_pressure(g: Grid, seed: u64) -> PressureField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PressureField::from_cells(CellField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0)))
}

#[test]
fn one_step_balances_exactly() {
    let g = Grid::new(12, 10, 1.0, 0.9).unwrap();
    let problem = Problem::unforced(1.0);
    for (dt, lambda, mu) in [(0.01, 1.0, 0.01), (0.05, 0.1, 0.2), (0.002, 10.0, 1.0)] {
        let mut prm = SchemeParams::new(dt, lambda, 1e-6, mu, 1.0).unwrap();
        prm.prediction = SolverChoice::new("bicgstab", 1e-13, 10_000).unwrap();
        prm.correction = SolverChoice::new("cg", 1e-13, 100_000).unwrap();
        let eps = prm.epsilon();
        let v0 = random_solenoidal(&g, 5);
        let p0 = random_pressure(g, 6);
        let st = Stepper::new(&g, &prm, &problem).unwrap();
        let s0 = FlowState::initial(v0.clone(), p0.clone());
        let (s1, _) = st.step(&s0).unwrap();

        let sq = |f: &vpp_core::mesh::VelocityField| f.dot(f);
        let psq = |p: &CellField| p.dot(p);
        let dp = s1.p.cells().minus(p0.cells());
        let dissipation = -2.0 * dt * strain_divergence(&s1.v_tilde, mu).dot(&s1.v_tilde);
        let lhs = sq(&s1.v)
            + dt * eps * psq(s1.p.cells())
            + dt * dt * sq(&gradient(s1.p.cells()))
            + sq(&(&s1.v_tilde - &v0))
            + dissipation
            + dt * eps * psq(&dp);
        let rhs = sq(&v0) + dt * eps * psq(p0.cells()) + dt * dt * sq(&gradient(p0.cells()));
        assert!(dissipation > 0.0);
        assert!((lhs - rhs).abs() <= 1e-9 * rhs, "dt {dt}: {lhs} vs {rhs}");
    }
}

#[test]
fn ledger_decays_around_resting_obstacle() {
    let g = Grid::unit_square(24).unwrap();
    let obstacle = Obstacle::disk([0.4, 0.5], 0.15, 0.2);
    let problem = Problem::unforced(0.2).with_obstacle(obstacle);
    let prm = SchemeParams::new(0.01, 1.0, 1e-4, 0.01, 0.2).unwrap();
    let v0 = random_solenoidal(&g, 9);
    let out = run(
        v0,
        PressureField::zeros(g),
        &problem,
        &prm,
        RunOptions::default(),
        &mut [],
    )
    .unwrap();
    assert_eq!(out.records.len(), 20);
    let rep = energy_ledger(
        &out.records,
        out.initial,
        LedgerCoefficients {
            dt: prm.dt,
            epsilon: prm.epsilon(),
            mu: prm.mu,
            eta: prm.eta,
        },
        1e-10,
    );
    assert!(rep.terms_finite_nonnegative);
    assert!(out.records.iter().all(|r| r.is_valid()));
    assert!(rep.values.iter().all(|v| v.is_finite()));
    assert!(rep.non_increasing, "{:e}", rep.max_relative_increase);
    assert!(out.records.iter().any(|r| r.penalization_energy > 0.0));
}
