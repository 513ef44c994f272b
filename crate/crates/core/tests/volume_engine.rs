use hilbert_core::body::ConvexBody;
use hilbert_core::density::VolumeKind;
use hilbert_core::estimators::{entropy_estimate, radius_ladder};
use hilbert_core::volume::{growth_curve, monte_carlo_volume, region_volume, BallSpec, Budget};
use hilbert_core::{Polytope, Vector};

fn v(c: &[f64]) -> Vector {
    Vector::from_vec(c.to_vec())
}

fn budget() -> Budget {
    Budget { directions: 512, radial: 64 }
}

fn fixtures() -> Vec<(&'static str, ConvexBody, Vector)> {
    vec![
        ("disk", ConvexBody::unit_ball(2), v(&[0.3, -0.2])),
        ("ellipse", ConvexBody::ellipsoid(v(&[0.0, 0.0]), v(&[2.0, 1.0])).unwrap(), v(&[0.5, 0.1])),
        ("pentagon", ConvexBody::polytope(Polytope::regular_polygon(5, 1.0, 0.0)), v(&[0.1, 0.2])),
        ("square", ConvexBody::polytope(Polytope::cube(2, 1.0)), v(&[-0.4, 0.3])),
    ]
}

#[test]
fn curves_are_monotone() {
    let ladder = radius_ladder(0.25, 6.0);
    for (name, body, p) in fixtures() {
        for kind in [VolumeKind::Busemann, VolumeKind::HolmesThompson] {
            let curve = growth_curve(&BallSpec::metric(&body, p.clone(), 0.0), kind, &ladder, budget()).unwrap();
            assert!(curve.windows(2).all(|w| w[0].1.value <= w[1].1.value), "{name}");
        }
    }
}

#[test]
fn quadrature_agrees_with_monte_carlo() {
    for (name, body, p) in fixtures() {
        for (kind, spec) in [
            (VolumeKind::Busemann, BallSpec::metric(&body, p.clone(), 1.5)),
            (VolumeKind::HolmesThompson, BallSpec::asymptotic(&body, p.clone(), 1.0)),
        ] {
            let q = region_volume(&spec, kind, budget()).unwrap();
            let mc = monte_carlo_volume(&spec, kind, 40_000, 3).unwrap();
            let se = (q.stderr.powi(2) + mc.stderr.powi(2)).sqrt();
            assert!((q.value - mc.value).abs() <= 3.0 * se, "{name}: {} vs {} +- {se}", q.value, mc.value);
        }
    }
}

#[test]
fn holmes_thompson_volume_grows_at_least_quadratically() {
    // Vol(B(x, R)) / R^2 stays above a common positive floor across bodies and centres
    let ladder = [1.0, 2.0, 4.0, 8.0];
    let mut floor = f64::INFINITY;
    for (_, body, p) in fixtures() {
        for centre in [body.certificate().center.clone(), p] {
            let curve =
                growth_curve(&BallSpec::metric(&body, centre, 0.0), VolumeKind::HolmesThompson, &ladder, budget())
                    .unwrap();
            for (r, e) in curve {
                floor = floor.min(e.value / (r * r));
            }
        }
    }
    assert!(floor > 0.5, "{floor}");
}

#[test]
fn entropy_does_not_depend_on_the_base_point() {
    let ladder = radius_ladder(0.5, 10.0);
    let b = Budget::default_for(2);
    for body in [ConvexBody::unit_ball(2), ConvexBody::ellipsoid(v(&[0.0, 0.0]), v(&[2.0, 1.0])).unwrap()] {
        let a = entropy_estimate(&body, None, VolumeKind::Busemann, &ladder, (6.0, 10.0), b).unwrap().slope;
        let c = entropy_estimate(&body, Some(&v(&[0.4, 0.3])), VolumeKind::Busemann, &ladder, (6.0, 10.0), b)
            .unwrap()
            .slope;
        assert!((a / c - 1.0).abs() < 0.02, "{a} vs {c}");
    }
}

#[test]
fn hyperbolic_three_space_entropy() {
    let ball = ConvexBody::unit_ball(3);
    let fit = entropy_estimate(
        &ball,
        None,
        VolumeKind::Busemann,
        &radius_ladder(0.5, 10.0),
        (6.0, 10.0),
        Budget { directions: 512, radial: 48 },
    )
    .unwrap();
    assert!((fit.slope - 2.0).abs() < 0.2, "{}", fit.slope);
}
