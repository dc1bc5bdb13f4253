use biharmonic_core::boggio::{BoggioKernel, GreenKernel, LoadQuadrature, RadialGreen};
use biharmonic_core::Boggio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ball_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if x.iter().map(|c| c * c).sum::<f64>() < 1.0 {
            return x;
        }
    }
}

#[test]
fn symmetric_and_positive_on_random_pairs() {
    for n in [2, 3, 5] {
        let k = Boggio::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..10_000 {
            let x = ball_point(&mut rng, n);
            let y = ball_point(&mut rng, n);
            let a = k.green(&x, &y).unwrap();
            let b = k.green(&y, &x).unwrap();
            assert!(a > 0.0, "n = {n}: G({x:?}, {y:?}) = {a}");
            assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        }
    }
}

#[test]
fn vanishes_like_delta_squared() {
    for n in [2, 3, 4, 5] {
        let k = Boggio::new(n).unwrap();
        let mut y = vec![0.0; n];
        y[0] = -0.3;
        y[1] = 0.2;
        let ratios: Vec<f64> = (1..=6)
            .map(|e| {
                let d = 10f64.powi(-e);
                let mut x = vec![0.0; n];
                x[1] = 1.0 - d;
                k.green(&x, &y).unwrap() / (d * d)
            })
            .collect();
        let steps: Vec<f64> = ratios.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for w in steps.windows(2) {
            assert!(w[1] < 0.2 * w[0], "n = {n}: {ratios:?}");
        }
        assert!(ratios[5] > 0.0 && ratios[5].is_finite());
    }
}

#[test]
fn constant_load_matches_clamped_disk_solution() {
    let k = Boggio::new(2).unwrap();
    let q = LoadQuadrature::default();
    for i in 0..50 {
        let r = 0.98 * i as f64 / 49.0;
        let x = [r * 0.6, r * 0.8];
        let got = k.constant_load_potential(&x, &q).unwrap();
        let want = (1.0 - r * r).powi(2) / 64.0;
        assert!((got / want - 1.0).abs() < 1e-6, "r = {r}: {got} vs {want}");
    }
}

fn worst_load_error(panels: usize, points: usize) -> f64 {
    let k = Boggio::new(2).unwrap();
    let q = LoadQuadrature {
        radial_panels: panels,
        radial_points: points,
        angular_order: 16,
    };
    (0..20)
        .map(|i| {
            let r = (i as f64 + 0.5) / 20.0;
            let got = k.constant_load_potential(&[r, 0.0], &q).unwrap();
            (got / ((1.0 - r * r).powi(2) / 64.0) - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn load_error_decays_at_gauss_order() {
    // two-point Gauss-Legendre is fourth order
    let e: Vec<f64> = [4, 8, 16].iter().map(|&p| worst_load_error(p, 2)).collect();
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 3.5 && order < 4.5, "{e:?}");
    }
}

#[test]
fn sphere_average_of_kernel_in_closed_form() {
    for n in [2, 3, 5] {
        let k = Boggio::new(n).unwrap();
        let rg = RadialGreen::<f64>::new(n).unwrap();
        for (r, s) in [(0.1, 0.7), (0.6, 0.62), (0.9, 0.3)] {
            let a = k.radial_kernel(r, s, 24).unwrap();
            let b = rg.value(r, s);
            assert!((a / b - 1.0).abs() < 1e-8, "n = {n}, ({r}, {s}): {a} vs {b}");
        }
    }
}

#[test]
fn single_precision_kernel_agrees() {
    let k32 = BoggioKernel::<f32>::new(3).unwrap();
    let k64 = Boggio::new(3).unwrap();
    let (x, y) = ([0.2f32, -0.1, 0.4], [-0.5f32, 0.3, 0.1]);
    let a = k32.green(&x, &y).unwrap() as f64;
    let b = k64
        .green(&x.map(f64::from), &y.map(f64::from))
        .unwrap();
    assert!((a / b - 1.0).abs() < 1e-4);
}

#[test]
fn kernel_table_has_one_row_per_pair() {
    let k = Boggio::new(2).unwrap();
    let pairs = vec![(vec![0.1, 0.2], vec![-0.3, 0.0]), (vec![0.0, 0.5], vec![0.5, 0.0])];
    let mut out = Vec::new();
    k.write_kernel_table(&mut out, &pairs).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("x1,x2,y1,y2,G"));
}
