//! Geometric property checks: exp/log round trips, transport isometry,
//! constant geodesic speed, and the finite-difference identities for the
//! derivatives of the squared-distance function.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use riemann_accel::geometry::GeometryBounds;
use riemann_accel::manifold::{Manifold, Point, TangentVector};

fn all_manifolds() -> Vec<Manifold> {
    vec![Manifold::euclidean(6), Manifold::sphere(6), Manifold::spd(4), Manifold::hyperboloid(5)]
}

/// Tangent-norm cap used for random draws: 90% of the injectivity radius on
/// the sphere, a moderate radius elsewhere.
fn norm_cap(m: &Manifold) -> f64 {
    (0.9 * m.injectivity_radius()).min(2.0)
}

#[test]
fn round_trip_log_exp() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in all_manifolds() {
        for _ in 0..200 {
            let x = m.random_point(&mut rng);
            let v = m.random_tangent_with_norm(&x, norm_cap(&m) * rand::Rng::random::<f64>(&mut rng), &mut rng);
            let y = m.exp(&v);
            let back = m.log(&x, &y).unwrap();
            let err = back.sub(&v).norm();
            assert!(
                err <= 1e-7 * (1.0 + v.norm()),
                "round trip error {err} on {} for |v| = {}",
                m.name(),
                v.norm()
            );
        }
    }
}

#[test]
fn transport_isometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for m in all_manifolds() {
        for _ in 0..200 {
            let x = m.random_point(&mut rng);
            let y = loop {
                let y = m.random_point(&mut rng);
                if m.log(&x, &y).is_ok() {
                    break y;
                }
            };
            let u = m.random_tangent(&x, &mut rng);
            let v = m.random_tangent(&x, &mut rng);
            let before = m.inner(&u, &v).unwrap();
            let gu = m.transport(&u, &y).unwrap();
            let gv = m.transport(&v, &y).unwrap();
            let after = m.inner(&gu, &gv).unwrap();
            assert!(
                (before - after).abs() <= 1e-9 * (1.0 + before.abs()),
                "isometry violated on {}: {before} vs {after}",
                m.name()
            );
        }
    }
}

#[test]
fn transport_round_trip_inverts() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for m in all_manifolds() {
        for _ in 0..100 {
            let x = m.random_point(&mut rng);
            let y = loop {
                let y = m.random_point(&mut rng);
                if m.log(&x, &y).is_ok() {
                    break y;
                }
            };
            let v = m.random_tangent(&x, &mut rng);
            let there = m.transport(&v, &y).unwrap();
            let back = m.transport(&there, &x).unwrap();
            let err = back.sub(&v).norm();
            assert!(err <= 1e-8 * (1.0 + v.norm()), "transport round trip {err} on {}", m.name());
        }
    }
}

#[test]
fn geodesics_have_constant_speed() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for m in all_manifolds() {
        for _ in 0..50 {
            let x = m.random_point(&mut rng);
            let v = m.random_tangent_with_norm(&x, 0.8 * norm_cap(&m), &mut rng);
            let speed = v.norm();
            let mut ts = [0.0, 0.2, 0.45, 0.7, 1.0];
            ts.sort_by(f64::total_cmp);
            for w in ts.windows(2) {
                let a = m.exp(&v.scale(w[0]));
                let b = m.exp(&v.scale(w[1]));
                let d = m.distance(&a, &b);
                let expected = (w[1] - w[0]) * speed;
                assert!(
                    (d - expected).abs() <= 1e-7 * (1.0 + expected),
                    "speed not constant on {}: {d} vs {expected}",
                    m.name()
                );
            }
        }
    }
}

/// Geodesic and velocity field: `gamma(t) = exp_p(t v)` with the velocity
/// obtained by transporting `v` to `gamma(t)`.
fn geodesic_with_velocity(m: &Manifold, p: &Point, v: &TangentVector, t: f64) -> (Point, TangentVector) {
    let at = m.exp(&v.scale(t));
    let vel = m.transport(v, &at).unwrap();
    (at, vel)
}

#[test]
fn first_variation_of_squared_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let h = 1e-5;
    for m in all_manifolds() {
        for _ in 0..40 {
            let p = m.random_point(&mut rng);
            let x = {
                let w = m.random_tangent_with_norm(&p, 1.0 + 0.5 * rand::Rng::random::<f64>(&mut rng), &mut rng);
                m.exp(&w)
            };
            let v = m.random_tangent_with_norm(&p, 1.0, &mut rng);
            let t = 0.1 + 0.4 * rand::Rng::random::<f64>(&mut rng);

            let phi = |s: f64| 0.5 * m.distance(&m.exp(&v.scale(s)), &x).powi(2);
            let fd = (phi(t + h) - phi(t - h)) / (2.0 * h);
            let (at, vel) = geodesic_with_velocity(&m, &p, &v, t);
            let analytic = -m.inner(&m.log(&at, &x).unwrap(), &vel).unwrap();
            assert!(
                (fd - analytic).abs() <= 1e-4,
                "first variation off by {} on {}",
                (fd - analytic).abs(),
                m.name()
            );
        }
    }
}

#[test]
fn squared_distance_hessian_stays_in_distortion_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let h = 1e-5;
    for m in all_manifolds() {
        for _ in 0..40 {
            let p = m.random_point(&mut rng);
            let x = {
                let w = m.random_tangent_with_norm(&p, 1.0 + 0.5 * rand::Rng::random::<f64>(&mut rng), &mut rng);
                m.exp(&w)
            };
            let v = m.random_tangent_with_norm(&p, 1.0, &mut rng);
            let t = 0.1 + 0.4 * rand::Rng::random::<f64>(&mut rng);

            let gamma_t = m.exp(&v.scale(t));
            let observed = m
                .distance(&gamma_t, &x)
                .max(m.distance(&p, &x))
                .max(m.distance(&p, &gamma_t));
            let (k_min, k_max) = m.curvature_bounds();
            let bounds = GeometryBounds::new(k_min, k_max, observed.max(1e-3)).unwrap();
            let zeta = bounds.zeta();
            let delta = bounds.delta().unwrap();

            let phi = |s: f64| 0.5 * m.distance(&m.exp(&v.scale(s)), &x).powi(2);
            let second = (phi(t + h) - 2.0 * phi(t) + phi(t - h)) / (h * h);
            // |gamma'| = |v| = 1.
            assert!(
                second >= delta - 1e-3 && second <= zeta + 1e-3,
                "hessian {second} outside [{delta}, {zeta}] on {}",
                m.name()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Distance symmetry and the log-norm identity on seeded random pairs.
    #[test]
    fn distance_symmetric_and_matches_log_norm(seed in 0u64..1_000, which in 0usize..4) {
        let m = all_manifolds()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = m.random_point(&mut rng);
        let y = m.random_point(&mut rng);
        let d_xy = m.distance(&x, &y);
        let d_yx = m.distance(&y, &x);
        prop_assert!((d_xy - d_yx).abs() <= 1e-10 * (1.0 + d_xy));
        if let Ok(log) = m.log(&x, &y) {
            prop_assert!((log.norm() - d_xy).abs() <= 1e-8 * (1.0 + d_xy));
        }
    }

    /// The exponential map lands on the manifold (invariants hold).
    #[test]
    fn exp_lands_on_manifold(seed in 0u64..1_000, which in 0usize..4, scale in 0.0f64..2.0) {
        let m = all_manifolds()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = m.random_point(&mut rng);
        let v = m.random_tangent_with_norm(&x, scale.min(norm_cap(&m)).max(1e-3), &mut rng);
        let y = m.exp(&v);
        prop_assert!(m.check_point(y.coords()).is_ok());
    }
}
