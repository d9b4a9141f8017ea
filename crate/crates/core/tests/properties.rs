use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vpp_core::diagnostics::{
    h_minus1_norm_velocity, nikolskii_translation, slip_error, FieldSeries, TranslationForm,
};
use vpp_core::geometry::{boundary_band, chi_sampler, sample_chi, sample_face_chi, Obstacle};
use vpp_core::linalg::{
    assemble_correction, assemble_prediction, krylov_method, FaceLayout, PredictionCoefficients,
    SolverConfig,
};
use vpp_core::manufactured::random_solenoidal;
use vpp_core::mesh::{convection, divergence, gradient, CellField, Grid, VelocityField, WallData};
use vpp_core::vpp::SchemeParams;

fn grid() -> impl Strategy<Value = Grid> {
    (2usize..14, 2usize..14, 0.5f64..2.0, 0.5f64..2.0)
        .prop_map(|(nx, ny, lx, ly)| Grid::new(nx, ny, lx, ly).unwrap())
}

fn random_velocity(g: Grid, seed: u64) -> VelocityField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = VelocityField::zeros(g);
    v.u.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    v.v.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    v.with_zero_normal_boundary()
}

fn random_cells(g: Grid, seed: u64) -> CellField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CellField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gradient_is_minus_adjoint_of_divergence(g in grid(), seed in any::<u64>()) {
        let p = random_cells(g, seed);
        let w = random_velocity(g, seed ^ 1);
        let lhs = gradient(&p).dot(&w);
        let rhs = -p.dot(&divergence(&w));
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
    }

    #[test]
    fn convection_is_skew(g in grid(), seed in any::<u64>()) {
        let a = random_velocity(g, seed);
        let w = random_velocity(g, seed ^ 2);
        let z = random_velocity(g, seed ^ 3);
        let bw = convection(&a, &w).dot(&z);
        let bz = convection(&a, &z).dot(&w);
        prop_assert!((bw + bz).abs() <= 1e-11 * (1.0 + bw.abs()));
        prop_assert!(convection(&a, &w).dot(&w).abs() <= 1e-11 * (1.0 + w.dot(&w)));
    }

    #[test]
    fn prediction_is_coercive(
        g in grid(),
        seed in any::<u64>(),
        dt in 1e-4f64..1.0,
        mu in 1e-4f64..1.0,
    ) {
        let layout = FaceLayout::new(g);
        let adv = random_velocity(g, seed);
        let sys = assemble_prediction(
            &g,
            PredictionCoefficients { dt, mu, eta: 1e-6 },
            &adv,
            &VelocityField::zeros(g),
            &WallData::no_slip(&g),
        ).unwrap();
        let x = layout.gather(&random_velocity(g, seed ^ 4));
        let ax = sys.op.apply(&x);
        let w = layout.weights();
        let xax: f64 = x.iter().zip(&ax).zip(&w).map(|((a, b), c)| a * b * c).sum();
        let xx: f64 = x.iter().zip(&w).map(|(a, c)| a * a * c).sum();
        prop_assert!(xax >= xx / dt * (1.0 - 1e-9));
    }

    #[test]
    fn correction_iterations_do_not_grow_as_dt_halves(
        n in 4usize..20,
        lambda in 0.05f64..5.0,
        dt in 1e-3f64..0.1,
        seed in any::<u64>(),
    ) {
        let g = Grid::unit_square(n).unwrap();
        let layout = FaceLayout::new(g);
        let rhs = layout.gather(&gradient(&divergence(&random_velocity(g, seed))));
        let cg = krylov_method("cg").unwrap();
        let cfg = SolverConfig::new(1e-10, 10_000).unwrap();
        let mut counts = Vec::new();
        for k in 0..3 {
            let prm = SchemeParams::new(dt / 2f64.powi(k), lambda, 1e-6, 0.01, 1.0).unwrap();
            let op = assemble_correction(&g, prm.epsilon() / prm.dt).unwrap();
            let mut x = vec![0.0; rhs.len()];
            counts.push(cg.solve(&op, &rhs, &mut x, &cfg).unwrap().iterations);
        }
        for w in counts.windows(2) {
            prop_assert!(w[1] <= w[0] + 2, "{:?}", counts);
        }
    }

    #[test]
    fn translation_scales_with_the_field(
        seed in any::<u64>(),
        len in 4usize..40,
        a in 0.1f64..10.0,
        hk in 0.01f64..0.9,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dt = 1.0 / len as f64;
        let values: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = FieldSeries::scalar(dt, &values).unwrap();
        let mut scaled = s.clone();
        scaled.scale(a);
        let h = hk * s.horizon();
        let i1 = nikolskii_translation(&s, h, TranslationForm::Integral).unwrap();
        let i2 = nikolskii_translation(&scaled, h, TranslationForm::Integral).unwrap();
        prop_assert!((i2 - a * i1).abs() <= 1e-10 * (1.0 + i2));
        let q1 = nikolskii_translation(&s, h, TranslationForm::Quadratic).unwrap();
        let q2 = nikolskii_translation(&scaled, h, TranslationForm::Quadratic).unwrap();
        prop_assert!((q2 - a * q1).abs() <= 1e-10 * (1.0 + q2));
        let flat = FieldSeries::scalar(dt, &vec![values[0]; len]).unwrap();
        prop_assert!(nikolskii_translation(&flat, h, TranslationForm::Integral).unwrap() == 0.0);
    }

    #[test]
    fn h_minus1_norm_is_homogeneous(n in 3usize..16, seed in any::<u64>(), a in -5.0f64..5.0) {
        let g = Grid::unit_square(n).unwrap();
        let v = random_velocity(g, seed);
        let base = h_minus1_norm_velocity(&v).unwrap();
        let scaled = h_minus1_norm_velocity(&v.scaled(a)).unwrap();
        prop_assert!((scaled - a.abs() * base).abs() <= 1e-8 * (1.0 + base));
        // loose Poincare bound
        prop_assert!(base <= v.norm_l2());
    }

    #[test]
    fn slip_error_ignores_far_field(seed in any::<u64>(), cx in 0.35f64..0.65, r in 0.1f64..0.2) {
        let g = Grid::unit_square(24).unwrap();
        let obstacle = Obstacle::disk([cx, 0.5], r, 1.0).with_rotation(1.0);
        let band = boundary_band(&obstacle, 0.0, &g).unwrap();
        let in_band = |i: usize, j: usize| band.contains(&(i, j));
        let v = random_solenoidal(&g, seed);
        let mut w = v.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        for j in 0..g.ny() {
            for i in 1..g.nx() {
                if !in_band(i - 1, j) && !in_band(i, j) {
                    w.set_u(i, j, rng.gen_range(-1.0..1.0));
                }
            }
        }
        for j in 1..g.ny() {
            for i in 0..g.nx() {
                if !in_band(i, j - 1) && !in_band(i, j) {
                    w.set_v(i, j, rng.gen_range(-1.0..1.0));
                }
            }
        }
        let a = slip_error(&v, &obstacle, 0.0).unwrap();
        let b = slip_error(&w, &obstacle, 0.0).unwrap();
        prop_assert!(!a.is_empty());
        prop_assert_eq!(a.value, b.value);
    }

    #[test]
    fn indicators_stay_in_unit_interval(
        n in 4usize..30,
        cx in 0.3f64..0.7,
        cy in 0.3f64..0.7,
        r in 0.05f64..0.2,
        fraction in any::<bool>(),
    ) {
        let g = Grid::unit_square(n).unwrap();
        let name = if fraction { "fraction" } else { "binary" };
        let obstacle = Obstacle::disk([cx, cy], r, 1.0).with_sampler(chi_sampler(name).unwrap());
        let chi = sample_chi(&obstacle, 0.0, &g).unwrap();
        prop_assert!(chi.values.iter().all(|c| (0.0..=1.0).contains(c)));
        if !fraction {
            prop_assert!(chi.values.iter().all(|c| *c == 0.0 || *c == 1.0));
        }
        let face = sample_face_chi(&obstacle, 0.0, &g).unwrap();
        prop_assert!(face.u.iter().chain(&face.v).all(|c| (0.0..=1.0).contains(c)));
    }

    #[test]
    fn step_count_is_floor_of_horizon(k in 1usize..2000, frac in 0.0f64..0.999, dt in 1e-4f64..0.1) {
        let horizon = (k as f64 + frac) * dt;
        let prm = SchemeParams::new(dt, 1.0, 1e-6, 0.01, horizon).unwrap();
        prop_assert_eq!(prm.n_steps(), k);
    }
}
