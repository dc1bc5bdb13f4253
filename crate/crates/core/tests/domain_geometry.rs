use biharmonic_core::domain::{build_grid, DomainSpec};
use biharmonic_core::Domain;
use proptest::prelude::*;

fn domains() -> Vec<Domain> {
    vec![
        DomainSpec::unit_ball(2).unwrap(),
        DomainSpec::unit_ball(3).unwrap(),
        DomainSpec::ellipse(1.0, 0.5).unwrap(),
        DomainSpec::ellipse(1.0, 0.95).unwrap(),
        DomainSpec::rectangle(1.0, 1.0).unwrap(),
        DomainSpec::rectangle(2.0, 0.5).unwrap(),
    ]
}

/// Maps a point of `[0, 1]^n` into the domain's bounding box.
fn in_box(d: &Domain, t: &[f64]) -> Vec<f64> {
    use biharmonic_core::domain::DomainKind::*;
    match d.kind {
        UnitBall { n } => t[..n].iter().map(|&s| 2.0 * s - 1.0).collect(),
        Ellipse { a, b } => vec![a * (2.0 * t[0] - 1.0), b * (2.0 * t[1] - 1.0)],
        Rectangle { width, height } => vec![width * t[0], height * t[1]],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn delta_positive_inside_and_one_lipschitz(
        which in 0usize..6,
        p in prop::collection::vec(0.0f64..1.0, 3),
        q in prop::collection::vec(0.0f64..1.0, 3),
        steps in 2usize..12,
    ) {
        let d = &domains()[which];
        let (x, y) = (in_box(d, &p), in_box(d, &q));
        prop_assume!(d.contains(&x) && d.contains(&y));
        let mut prev: Option<(Vec<f64>, f64)> = None;
        // the domains are convex, so the segment stays inside
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + t * (b - a)).collect();
            let dz = d.distance_to_boundary(&z).unwrap();
            prop_assert!(dz >= 0.0);
            if let Some((zp, dp)) = &prev {
                let len = zp.iter().zip(&z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                prop_assert!((dz - dp).abs() <= len + 1e-12, "{} vs {}", (dz - dp).abs(), len);
            }
            prev = Some((z, dz));
        }
        let inner: Vec<f64> = x.iter().map(|c| 0.999 * c).collect();
        if matches!(d.kind, biharmonic_core::domain::DomainKind::UnitBall { .. } | biharmonic_core::domain::DomainKind::Ellipse { .. }) {
            prop_assert!(d.distance_to_boundary(&inner).unwrap() > 0.0);
        }
    }

    #[test]
    fn refinement_keeps_deep_interior_nodes(which in 2usize..6, k in 3u32..6) {
        let d = &domains()[which];
        let h = 1.0 / f64::from(1u32 << k);
        let coarse = build_grid(d, h).unwrap();
        let fine = build_grid(d, h / 2.0).unwrap();
        for u in 0..coarse.unknowns() {
            if coarse.unknown_delta(u) <= h {
                continue;
            }
            let x = coarse.unknown_coords(u);
            let i = ((x[0] - fine.origin[0]) / fine.h).round() as isize;
            let j = ((x[1] - fine.origin[1]) / fine.h).round() as isize;
            prop_assert!(fine.unknown_at(i, j).is_some(), "node at {:?} lost", x);
        }
    }
}

#[test]
fn outside_points_are_rejected() {
    for d in domains() {
        let far = vec![5.0; d.dimension()];
        assert!(d.distance_to_boundary(&far).is_err());
    }
}

#[test]
fn single_precision_distances() {
    let d = DomainSpec::<f32>::ellipse(1.0, 0.5).unwrap();
    let got = d.distance_to_boundary(&[0.0, 0.0]).unwrap();
    assert!((got - 0.5).abs() < 1e-6);
}
