use std::f64::consts::PI;

use biharmonic_core::fd::stencil_at;
use biharmonic_core::spectral::{eigenpair, first_bessel_zero, radial_eigenpair, EigenProfile};
use biharmonic_core::Domain;

#[test]
fn seeds_agree_on_eigenpair() {
    for d in [Domain::rectangle(1.0, 1.0).unwrap(), Domain::ellipse(1.0, 0.5).unwrap()] {
        let runs: Vec<_> = (0..10).map(|s| eigenpair(&d, 1.0 / 16.0, s).unwrap()).collect();
        let base = &runs[0];
        let EigenProfile::Grid(g0) = &base.profile else { panic!("grid profile expected") };
        for e in &runs[1..] {
            assert!((e.lambda - base.lambda).abs() < 1e-9);
            let EigenProfile::Grid(g) = &e.profile else { panic!() };
            let dot: f64 = g.values.iter().zip(&g0.values).map(|(a, b)| a * b).sum();
            let n0: f64 = g0.values.iter().map(|a| a * a).sum::<f64>().sqrt();
            let n1: f64 = g.values.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(dot / (n0 * n1) >= 1.0 - 1e-9);
        }
        assert!(g0.values.iter().all(|&v| v > 0.0));
    }
}

#[test]
fn comparison_constant_holds_on_samples() {
    for (d, h) in [
        (Domain::rectangle(1.0, 1.0).unwrap(), 1.0 / 32.0),
        (Domain::ellipse(1.0, 0.5).unwrap(), 1.0 / 32.0),
        (Domain::unit_ball(2).unwrap(), 0.0),
        (Domain::unit_ball(3).unwrap(), 1.0 / 128.0),
    ] {
        let e = eigenpair(&d, h, 1).unwrap();
        let c = e.comparison_constant().unwrap();
        assert!(c > 0.0 && c < 1.0);
        for (phi, delta) in e.samples().unwrap() {
            assert!(c * delta <= phi && phi <= delta / c);
        }
    }
}

#[test]
fn square_eigenvalue_second_order() {
    let d = Domain::rectangle(1.0, 1.0).unwrap();
    let l: Vec<f64> = [16.0, 32.0, 64.0]
        .iter()
        .map(|&n| eigenpair(&d, 1.0 / n, 0).unwrap().lambda)
        .collect();
    let exact = 2.0 * PI * PI;
    assert!((l[2] / exact - 1.0).abs() < 5e-3);
    let order = ((l[1] - l[0]) / (l[2] - l[1])).log2();
    assert!((order - 2.0).abs() < 0.1, "{l:?}");
}

#[test]
fn ball_eigenvalues_are_squared_bessel_zeros() {
    let j0 = first_bessel_zero(0.0);
    assert!((j0 - 2.404_825_557_695_773).abs() < 1e-12);
    let disk = eigenpair(&Domain::unit_ball(2).unwrap(), 0.0, 0).unwrap();
    assert!((disk.lambda - j0 * j0).abs() < 1e-10);
    // j_{1/2,1} = π
    let ball = eigenpair(&Domain::unit_ball(3).unwrap(), 1.0 / 256.0, 0).unwrap();
    assert!((ball.lambda / (PI * PI) - 1.0).abs() < 1e-4);
}

#[test]
fn radial_disk_eigenvalue_second_order() {
    let j = first_bessel_zero(0.0);
    let e: Vec<f64> = [32.0, 64.0]
        .iter()
        .map(|&m| radial_eigenpair::<f64>(2, 1.0 / m).unwrap().lambda / (j * j) - 1.0)
        .collect();
    assert!(e[1].abs() < 1e-4, "{e:?}");
    assert!(((e[0] / e[1]).log2() - 2.0).abs() < 0.1, "{e:?}");
}

fn load_mismatch(n: usize) -> f64 {
    let d = Domain::rectangle(1.0, 1.0).unwrap();
    let h = 1.0 / n as f64;
    let e = eigenpair(&d, h, 0).unwrap();
    let EigenProfile::Grid(g) = &e.profile else { panic!() };
    let w = e.weight_data().unwrap();
    let grid = &g.grid;
    let a = |i: isize, j: isize| grid.unknown_at(i, j).map_or(0.0, |k| w.a[k]);
    let mut worst = 0.0f64;
    for k in 0..grid.unknowns() {
        if grid.unknown_delta(k) < 0.25 {
            continue;
        }
        let (i, j) = grid.unknown_ij(k);
        let direct = stencil_at(a, i as isize, j as isize, h);
        worst = worst.max((direct - w.f[k]).abs() / w.sup_f);
    }
    worst
}

#[test]
fn load_identity_matches_fourth_differences() {
    let e: Vec<f64> = [16, 32, 64].iter().map(|&n| load_mismatch(n)).collect();
    for w in e.windows(2) {
        assert!(w[0] / w[1] > 3.0, "{e:?}");
    }
    assert!(e[2] < 1e-2, "{e:?}");
}

#[test]
fn ball_load_is_positive_at_centre_and_bounded() {
    let e = eigenpair(&Domain::unit_ball(2).unwrap(), 0.0, 0).unwrap();
    let s = e.summary().unwrap();
    assert!(s.sup_f.is_finite() && s.sup_f > 0.0);
    assert!(s.c_fi > 0.5 && s.c_fi < 1.0);
}
