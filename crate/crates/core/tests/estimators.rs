use std::f64::consts::PI;

use hilbert_core::body::{AffineMap, ConvexBody};
use hilbert_core::density::VolumeKind;
use hilbert_core::estimators::{
    approximate_polytope, asvol_estimate, default_entropy_ladder, default_entropy_window, epsilon_ladder,
    flag_approx_estimate, flag_number, radius_ladder, shrink_ratio, verify_entropy_identity,
};
use hilbert_core::fit::richardson_limit;
use hilbert_core::polytope::simplex_flag_count;
use hilbert_core::volume::{growth_curve, BallSpec, Budget, Clip};
use hilbert_core::{Matrix, Polytope, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(c: &[f64]) -> Vector {
    Vector::from_vec(c.to_vec())
}

fn asvol(body: &ConvexBody, kind: VolumeKind) -> hilbert_core::estimators::AsvolEstimate {
    asvol_estimate(body, kind, &radius_ladder(0.5, 9.0), Budget::default_for(2)).unwrap()
}

#[test]
fn asvol_is_affinely_invariant() {
    let tri = ConvexBody::polytope(Polytope::regular_simplex(2));
    let map = AffineMap::new(Matrix::from_row_slice(2, 2, &[3.0, 1.0, 0.5, 0.7]), v(&[2.0, -1.0])).unwrap();
    let image = ConvexBody::affine_image(&tri, map).unwrap();
    let (a, b) = (asvol(&tri, VolumeKind::Busemann).value, asvol(&image, VolumeKind::Busemann).value);
    assert!((a / b - 1.0).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn metric_and_asymptotic_balls_give_the_same_asvol() {
    for body in [
        ConvexBody::polytope(Polytope::regular_simplex(2)),
        ConvexBody::polytope(Polytope::cube(2, 1.0)),
        ConvexBody::polytope(Polytope::regular_polygon(6, 1.0, 0.0)),
    ] {
        let e = asvol(&body, VolumeKind::HolmesThompson);
        let tol = 0.01 * e.value + e.uncertainty + e.metric_uncertainty;
        assert!((e.value - e.metric_value).abs() <= tol, "{} vs {}", e.value, e.metric_value);
    }
}

#[test]
fn simplices_minimize_asvol() {
    let tri = asvol(&ConvexBody::polytope(Polytope::regular_simplex(2)), VolumeKind::Busemann).value;
    assert!((tri - PI).abs() < 0.01 * PI);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in 3..9 {
        let pts: Vec<Vector> = (0..n)
            .map(|_| {
                let a = rng.gen_range(0.0..2.0 * PI);
                v(&[a.cos(), a.sin()]) * rng.gen_range(0.5..1.0)
            })
            .collect();
        let Ok(p) = Polytope::from_points(&pts, 2) else { continue };
        let a = asvol(&ConvexBody::polytope(p.clone()), VolumeKind::Busemann).value;
        assert!(a >= tri * 0.95);
        if p.vertices().len() > 3 {
            assert!(a > tri * 1.05, "{} vertices: {a}", p.vertices().len());
        }
    }
}

#[test]
fn asvol_does_not_depend_on_the_picker() {
    // sums over flag simplices with randomly placed face points match the barycentric ones
    let square = Polytope::cube(2, 1.0);
    let body = ConvexBody::polytope(square.clone());
    let o = body.certificate().center.clone();
    let ladder = radius_ladder(0.5, 9.0);
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let points: Vec<Vector> = (0..square.lattice().faces().len())
        .map(|id| {
            if id == square.lattice().top() {
                return o.clone();
            }
            let verts = &square.lattice().face(id).vertices;
            let w: Vec<f64> = verts.iter().map(|_| rng.gen_range(0.2..1.0)).collect();
            let s: f64 = w.iter().sum();
            verts.iter().zip(&w).fold(Vector::zeros(2), |a, (i, wi)| a + &square.vertices()[*i] * (wi / s))
        })
        .collect();
    // each piece tends to Asvol(triangle) / 3! = π/6, whichever interior points are used
    let limits = |pieces: Vec<hilbert_core::FlagSimplex>| -> Vec<f64> {
        pieces
            .into_iter()
            .map(|s| {
                let spec = BallSpec::asymptotic(&body, o.clone(), 0.0).with_clip(Clip::FlagSimplex(s));
                let curve = growth_curve(&spec, VolumeKind::Busemann, &ladder, Budget::default_for(2)).unwrap();
                let (r, y): (Vec<f64>, Vec<f64>) = curve.iter().map(|(r, e)| (*r, e.value / (r * r))).unzip();
                richardson_limit(&r, &y, Some((4.5, 9.0))).unwrap().0
            })
            .collect()
    };
    for pieces in [square.barycentric_decomposition(), square.flag_decomposition(|_, id| points[id].clone()).unwrap()] {
        for a in limits(pieces) {
            assert!((a / (PI / 6.0) - 1.0).abs() < 1e-3, "{a}");
        }
    }
}

#[test]
fn disk_flag_numbers_follow_the_sagitta() {
    let disk = ConvexBody::unit_ball(2);
    let eps = epsilon_ladder(4, 12);
    let counts: Vec<u64> = eps.iter().map(|&e| flag_number(&disk, e).unwrap()).collect();
    for (&e, &c) in eps.iter().zip(&counts) {
        let n = c / 2;
        assert!(1.0 - (PI / n as f64).cos() <= e);
        assert!(1.0 - (PI / (n - 1) as f64).cos() > e);
    }
    for w in counts.windows(2) {
        let ratio = w[1] as f64 / w[0] as f64;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.1, "{ratio}");
    }
}

#[test]
fn simplices_approximate_themselves() {
    for d in 2..=3 {
        let s = ConvexBody::polytope(Polytope::regular_simplex(d));
        assert_eq!(flag_number(&s, 1e-9).unwrap(), simplex_flag_count(d));
        let fit = flag_approx_estimate(&s, &epsilon_ladder(4, 10)).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }
    let pent = ConvexBody::polytope(Polytope::regular_polygon(5, 1.0, 0.0));
    assert_eq!(flag_approx_estimate(&pent, &epsilon_ladder(4, 14)).unwrap().slope.abs() < 1e-12, true);
}

#[test]
fn approximation_of_an_ellipsoid_is_certified() {
    let ell = ConvexBody::ellipsoid(v(&[0.1, 0.0, -0.2]), v(&[1.0, 0.8, 0.6])).unwrap();
    let p = approximate_polytope(&ell, 1e-2).unwrap();
    let gap = hilbert_core::body::hausdorff_distance(&ell, &ConvexBody::polytope(p), 20_000).unwrap();
    assert!(gap <= 1e-2);
}

#[test]
fn identity_for_triangle_and_ellipse() {
    let ladder = default_entropy_ladder();
    let window = default_entropy_window();
    let b = Budget::default_for(2);
    let tri = verify_entropy_identity(
        &ConvexBody::polytope(Polytope::regular_simplex(2)),
        VolumeKind::Busemann,
        &ladder,
        window,
        &epsilon_ladder(4, 14),
        b,
    )
    .unwrap();
    assert!(tri.entropy.slope.abs() < 0.05 && tri.flag_approximability.slope.abs() < 0.05);
    assert!(tri.ratio.is_none());
    let ell = ConvexBody::ellipsoid(v(&[0.0, 0.0]), v(&[2.0, 1.0])).unwrap();
    let rep =
        verify_entropy_identity(&ell, VolumeKind::HolmesThompson, &ladder, window, &epsilon_ladder(4, 14), b).unwrap();
    let r = rep.ratio.unwrap();
    assert!((r - 1.0).abs() < 0.1, "{r}");
    assert!(rep.entropy_bound_holds && rep.flag_bound_holds);
}

#[test]
fn shrink_ratio_limit() {
    for d in 2..=4 {
        let r = shrink_ratio(d, 1e-5, 1);
        assert!((r / (2 * d + 1) as f64 - 1.0).abs() < 0.01, "{r}");
    }
}
