//! The hidden-variable search against a from-scratch reimplementation of the
//! relaxed sum and plain random sampling.

use std::f64::consts::PI;

use leggett::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type V = [f64; 3];

fn dot(a: V, b: V) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn arr(v: &UnitVec3) -> V {
    [v.x(), v.y(), v.z()]
}

fn random_unit(rng: &mut impl Rng) -> V {
    let z: f64 = rng.random_range(-1.0..1.0);
    let p: f64 = rng.random_range(-PI..PI);
    let r = (1.0 - z * z).sqrt();
    [r * p.cos(), r * p.sin(), z]
}

/// Relaxed S written directly from the per-modulus interval sums.
fn oracle_relaxed(layout: &MeasurementLayout, u: V, v: V) -> f64 {
    let mut total = 0.0;
    for modulus in [
        [GroupId::Phi1, GroupId::Zero1],
        [GroupId::Phi2, GroupId::Zero2],
    ] {
        let (mut lo, mut hi) = (0.0, 0.0);
        for p in modulus.iter().flat_map(|&id| layout.group(id)) {
            let (ua, vb) = (dot(u, arr(&p.a)), dot(v, arr(&p.b)));
            lo += -1.0 + (ua + vb).abs();
            hi += 1.0 - (ua - vb).abs();
        }
        total += hi.max(-lo);
    }
    total
}

#[test]
fn search_beats_random_sampling() {
    let params = SearchParams::default();
    for (n, phi) in [(2, 0.25472), (2, 0.8), (3, 0.3), (4, 1.4)] {
        let layout = canonical_layout(n, phi).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..100_000 {
            let u = random_unit(&mut rng);
            // half the draws from the antiparallel family, where maxima sit
            let v = if rng.random_bool(0.5) {
                [-u[0], -u[1], -u[2]]
            } else {
                random_unit(&mut rng)
            };
            best = best.max(oracle_relaxed(&layout, u, v));
        }
        let r = relaxed_max_s(&layout, &params).unwrap();
        assert!(
            r.relaxed_max_s >= best - 1e-9,
            "N={n} phi={phi}: {} < {best}",
            r.relaxed_max_s
        );
        assert!(best <= r.bound + 1e-12);
        assert!(r.relaxed_max_s <= r.bound + 1e-6);
        let at = oracle_relaxed(&layout, arr(&r.argmax.u), arr(&r.argmax.v));
        assert!((at - r.relaxed_max_s).abs() < 1e-12);
    }
}

#[test]
fn optimum_gap_against_known_ridge() {
    // u = -v = z lies on the maximizing ridge at the ratio optimum
    let phi = optimal_angle::<f64>(2, Criterion::Ratio).unwrap().phi_star;
    let layout = canonical_layout(2, phi).unwrap();
    let ridge = oracle_relaxed(&layout, [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]);
    let r = relaxed_max_s(&layout, &SearchParams::default()).unwrap();
    assert!(
        r.relaxed_max_s >= ridge - 1e-4,
        "{} vs {ridge}",
        r.relaxed_max_s
    );
    assert!(quantum_s(2, phi, 1.0).unwrap() - r.relaxed_max_s >= 0.12);
}

fn unit() -> impl Strategy<Value = UnitVec3> {
    (-1.0..1.0f64, -PI..PI).prop_map(|(z, p)| UnitVec3::from_spherical(z.acos(), p))
}

proptest! {
    #[test]
    fn relaxed_sum_never_exceeds_bound(
        n in 2usize..7,
        phi in 0.0..PI,
        u in unit(),
        v in unit(),
    ) {
        let layout = canonical_layout(n, phi).unwrap();
        let s = relaxed_s(&layout, &Subensemble { u, v });
        prop_assert!((s - oracle_relaxed(&layout, arr(&u), arr(&v))).abs() < 1e-12);
        prop_assert!(s <= bound(n, phi).unwrap() + 1e-9);
    }

    #[test]
    fn intervals_contain_uncorrelated_product(u in unit(), v in unit(), a in unit(), b in unit()) {
        let iv = correlation_interval(&Subensemble { u, v }, &a, &b);
        let product = u.dot(&a) * v.dot(&b);
        prop_assert!(iv.lo <= iv.hi + 1e-12);
        prop_assert!(iv.contains(product) || (iv.lo - product).abs() < 1e-12 || (iv.hi - product).abs() < 1e-12);
    }
}
