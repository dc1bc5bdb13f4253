use std::f64::consts::PI;
use std::sync::Arc;

use biharmonic_core::domain::{build_grid, GridField};
use biharmonic_core::Domain;
use biharmonic_core::fd::{sign_probe, ClampedPlate, DiscreteGreen, ProbeMode, SolveMode};
use biharmonic_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn rayleigh_quotients_positive() {
    for d in [
        Domain::rectangle(1.0, 1.0).unwrap(),
        Domain::ellipse(1.0, 0.5).unwrap(),
    ] {
        let plate = ClampedPlate::for_domain(&d, 0.1).unwrap();
        let m = plate.grid().unknowns();
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let au = plate.apply(&u);
            let q: f64 = u.iter().zip(&au).map(|(a, b)| a * b).sum();
            assert!(q > 0.0, "seed {seed}: {q}");
        }
    }
}

#[test]
fn discrete_green_symmetric() {
    for d in [
        Domain::rectangle(1.0, 1.0).unwrap(),
        Domain::ellipse(1.0, 0.5).unwrap(),
    ] {
        let plate = ClampedPlate::for_domain(&d, 1.0 / 20.0).unwrap();
        let g = DiscreteGreen::dense(&plate).unwrap();
        let m = g.unknowns();
        let mut max = 0.0f64;
        let mut asym = 0.0f64;
        for x in 0..m {
            for y in 0..m {
                max = max.max(g.entry(x, y).abs());
                asym = asym.max((g.entry(x, y) - g.entry(y, x)).abs());
            }
        }
        assert!(asym <= 1e-9 * max, "{asym} vs {max}");
    }
}

fn manufactured_error(n: usize) -> f64 {
    let d = Domain::rectangle(1.0, 1.0).unwrap();
    let h = 1.0 / n as f64;
    let plate = ClampedPlate::for_domain(&d, h).unwrap();
    let grid = plate.grid().clone();
    let s = |t: f64| (PI * t).sin().powi(2);
    let s2 = |t: f64| 2.0 * PI * PI * (2.0 * PI * t).cos();
    let s4 = |t: f64| -8.0 * PI.powi(4) * (2.0 * PI * t).cos();
    let rhs = GridField::from_fn(grid.clone(), |[x, y]| {
        s4(x) * s(y) + 2.0 * s2(x) * s2(y) + s(x) * s4(y)
    });
    let u = plate.solve(&rhs, SolveMode::Direct).unwrap();
    (0..grid.unknowns())
        .map(|k| {
            let [x, y] = grid.unknown_coords(k);
            (u.values[k] - s(x) * s(y)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn manufactured_solution_second_order() {
    let e: Vec<f64> = [16, 32, 64].iter().map(|&n| manufactured_error(n)).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.2, "{e:?}");
    }
}

#[test]
fn conjugate_gradients_agree_with_direct() {
    let d = Domain::ellipse(1.0, 0.5).unwrap();
    let plate = ClampedPlate::for_domain(&d, 0.05).unwrap();
    let rhs = GridField::from_fn(plate.grid().clone(), |_| 1.0);
    let a = plate.solve(&rhs, SolveMode::Direct).unwrap();
    let b = plate
        .solve(
            &rhs,
            SolveMode::ConjugateGradient {
                tol: 1e-12,
                max_iter: 20_000,
            },
        )
        .unwrap();
    let sup = a.sup_abs();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-7 * sup);
    }
}

fn staircase_centre_error(h: f64) -> f64 {
    let d = Domain::unit_ball(2).unwrap();
    let plate = ClampedPlate::for_domain(&d, h).unwrap();
    assert!(plate.is_approximate());
    let grid = plate.grid().clone();
    let rhs = GridField::from_fn(grid.clone(), |_| 1.0);
    let u = plate.solve(&rhs, SolveMode::Direct).unwrap();
    (0..grid.unknowns())
        .filter_map(|k| {
            let [x, y] = grid.unknown_coords(k);
            let r2 = x * x + y * y;
            (r2 < 0.25).then(|| (u.values[k] / ((1.0 - r2).powi(2) / 64.0) - 1.0).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn staircase_disk_converges_to_exact_plate_at_first_order() {
    let coarse = staircase_centre_error(0.025);
    let fine = staircase_centre_error(0.0125);
    assert!(coarse < 0.1, "{coarse}");
    let ratio = coarse / fine;
    assert!(ratio > 1.6 && ratio < 2.5, "{coarse} {fine}");
}

#[test]
fn sign_probe_is_deterministic_and_flags_kernel() {
    let d = Domain::rectangle(1.0, 1.0).unwrap();
    let mode = ProbeMode::Subsample {
        columns: 20,
        seed: 3,
    };
    let a = sign_probe(&d, 1.0 / 24.0, mode).unwrap();
    let b = sign_probe(&d, 1.0 / 24.0, mode).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(a.kernel, "fd");
    let disk = sign_probe(&Domain::unit_ball(2).unwrap(), 0.1, ProbeMode::Dense).unwrap();
    assert_eq!(disk.kernel, "boggio");
    assert_eq!(disk.negative_fraction, 0.0);
}

#[test]
fn dense_probe_beyond_budget_is_a_resource_error() {
    let d = Domain::rectangle(1.0, 1.0).unwrap();
    match sign_probe(&d, 1.0 / 80.0, ProbeMode::Dense) {
        Err(Error::MemoryBudget { .. }) => {}
        other => panic!("expected memory budget error, got {other:?}"),
    }
}

#[test]
fn green_column_solves_point_load() {
    let d = Domain::rectangle(1.0, 1.0).unwrap();
    let grid = Arc::new(build_grid(&d, 1.0 / 16.0).unwrap());
    let plate = ClampedPlate::assemble(grid.clone()).unwrap();
    let y = grid.unknowns() / 2;
    let col = plate.green_column(y).unwrap();
    let back = plate.apply(&col.values);
    let h2 = grid.h * grid.h;
    for (k, v) in back.iter().enumerate() {
        let want = if k == y { 1.0 / h2 } else { 0.0 };
        assert!((v - want).abs() < 1e-8 / h2);
    }
}
