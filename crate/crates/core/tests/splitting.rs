//! One VPP step against the coupled reference step.

use vpp_core::linalg::{assemble_prediction, FaceLayout, PredictionCoefficients};
use vpp_core::manufactured::random_solenoidal;
use vpp_core::mesh::{gradient, Grid, PressureField, VelocityField, WallData};
use vpp_core::oracle::coupled_step;
use vpp_core::problem::Problem;
use vpp_core::vpp::{FlowState, SchemeParams, SolverChoice, Stepper};

fn tight(dt: f64, eps: f64, mu: f64) -> SchemeParams {
    let mut p = SchemeParams::new(dt, eps / dt, 1e-6, mu, dt).unwrap();
    p.prediction = SolverChoice::new("bicgstab", 1e-14, 10_000).unwrap();
    p.correction = SolverChoice::new("cg", 1e-14, 100_000).unwrap();
    p
}

#[test]
fn difference_to_coupled_step_shrinks_then_levels_off() {
    let g = Grid::unit_square(8).unwrap();
    let v0 = random_solenoidal(&g, 11);
    let problem = Problem::unforced(0.01);
    let (vc, pc) = coupled_step(&v0, 0.0, &problem, &tight(0.01, 0.01, 1e-2)).unwrap();
    assert!(vpp_core::mesh::divergence(&vc).max_abs() < 1e-10);
    assert!(pc.cells().mean().abs() < 1e-12);

    let mut diffs = Vec::new();
    for k in 4..=10 {
        let prm = tight(0.01, 10f64.powi(-k), 1e-2);
        let st = Stepper::new(&g, &prm, &problem).unwrap();
        let (s1, _) = st
            .step(&FlowState::initial(v0.clone(), PressureField::zeros(g)))
            .unwrap();
        diffs.push((&s1.v - &vc).norm_l2() / vc.norm_l2());
    }
    for w in diffs.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9), "{diffs:?}");
    }
    // the limit is the ε-independent splitting error, not zero
    let spread = (diffs[2] - diffs[6]).abs() / diffs[6];
    assert!(spread < 1e-4, "{diffs:?}");
}

#[test]
fn step_satisfies_the_coupled_equations_up_to_the_splitting_term() {
    // A v + G p1 - b = -(dt A - I) G (p1 - p0) holds for every eps
    let g = Grid::new(9, 7, 1.0, 0.8).unwrap();
    let v0 = random_solenoidal(&g, 3);
    let p0 = PressureField::from_cells(vpp_core::mesh::CellField::from_fn(g, |x, y| {
        x * y - 0.2 * x
    }));
    let problem = Problem::unforced(0.02);
    for eps in [1e-1, 1e-3, 1e-6] {
        let prm = tight(0.02, eps, 0.05);
        let st = Stepper::new(&g, &prm, &problem).unwrap();
        let (s1, _) = st
            .step(&FlowState::initial(v0.clone(), p0.clone()))
            .unwrap();

        let zero = VelocityField::zeros(g);
        let sys = assemble_prediction(
            &g,
            PredictionCoefficients {
                dt: prm.dt,
                mu: prm.mu,
                eta: prm.eta,
            },
            &v0,
            &zero,
            &WallData::no_slip(&g),
        )
        .unwrap();
        let layout = FaceLayout::new(g);
        let apply = |w: &VelocityField| sys.op.apply(&layout.gather(w));
        let b = layout.gather(&v0.scaled(1.0 / prm.dt));
        let gp1 = layout.gather(&gradient(s1.p.cells()));
        let lhs: Vec<f64> = apply(&s1.v)
            .iter()
            .zip(&gp1)
            .zip(&b)
            .map(|((a, g), b)| a + g - b)
            .collect();
        let gphi = gradient(&s1.p.cells().minus(p0.cells()));
        let rhs: Vec<f64> = apply(&gphi)
            .iter()
            .zip(layout.gather(&gphi))
            .map(|(a, g)| -(prm.dt * a - g))
            .collect();
        let scale = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
        let err = lhs
            .iter()
            .zip(&rhs)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-6 * scale, "eps {eps}: {err} vs {scale}");
    }
}
