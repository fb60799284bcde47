use capfrac::ballops::{ball_apply, BallOperatorParams};
use capfrac::field::zonal_fn;
use capfrac::geometry::{
    chord_distance, chord_distance_plane, height_to_u, stereo_forward, stereo_inverse, u_to_height,
};
use capfrac::special::{gamma, riesz_constant, sphere_area};
use capfrac::{Decay, PlanePoint32, PlanePoint64, Side, SpherePoint64};
use proptest::prelude::*;

fn unit(v: &[f64]) -> Vec<f64> {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / s).collect()
}

#[test]
fn single_precision_gaussian_fixed_point() {
    let p = BallOperatorParams::<f32>::whole(0.5, 2, Side::Right).unwrap();
    let g = zonal_fn(2, Decay::Gaussian { rate: 1.0f32 }, |u: f32| (-u).exp());
    for r in [0.3f32, 1.0, 1.7] {
        let xi = PlanePoint32::new(r, &[0.0, 1.0]).unwrap();
        let v = ball_apply(&p, &g, &xi).unwrap();
        let want = (-r * r).exp();
        assert!((v - want).abs() < 1e-4, "r = {r}: {v} vs {want}");
    }
}

#[test]
fn single_precision_special_functions() {
    assert!((gamma(0.5f32).unwrap() - std::f32::consts::PI.sqrt()).abs() < 1e-6);
    let s = sphere_area::<f32>(3);
    assert!((s - 4.0 * std::f32::consts::PI).abs() < 1e-5, "{s}");
    let c64 = riesz_constant(3, 1.0f64).unwrap();
    let c32 = riesz_constant(3, 1.0f32).unwrap();
    assert!((c64 - c32 as f64).abs() < 1e-6 * c64);
}

proptest! {
    #[test]
    fn stereographic_round_trip(r in 0.0f64..50.0, a in 0.0f64..6.0) {
        let xi = PlanePoint64::new(r, &[a.cos(), a.sin()]).unwrap();
        let back = stereo_forward(&stereo_inverse(&xi));
        prop_assert!((back.radius - r).abs() < 1e-9 * (1.0 + r));
        let x = stereo_inverse(&xi);
        prop_assert!((x.u().unwrap() - r * r).abs() < 1e-9 * (1.0 + r * r));
    }

    #[test]
    fn height_and_u_are_inverse(h in -0.999f64..0.999) {
        let u = height_to_u(h).unwrap();
        prop_assert!((u_to_height(u) - h).abs() < 1e-12);
    }

    #[test]
    fn chord_matches_plane_distance(
        r1 in 0.0f64..5.0, r2 in 0.0f64..5.0,
        d1 in prop::collection::vec(-1.0f64..1.0, 3), d2 in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        prop_assume!(d1.iter().any(|x| x.abs() > 0.1) && d2.iter().any(|x| x.abs() > 0.1));
        let xi = PlanePoint64::new(r1, &unit(&d1)).unwrap();
        let eta = PlanePoint64::new(r2, &unit(&d2)).unwrap();
        let on_sphere = chord_distance(&stereo_inverse(&xi), &stereo_inverse(&eta));
        let planar = chord_distance_plane(&xi, &eta);
        prop_assert!((on_sphere - planar).abs() < 1e-10 * (1.0 + planar));
    }

    #[test]
    fn reflection_preserves_chords(h1 in -0.99f64..0.99, h2 in -0.99f64..0.99) {
        let x = SpherePoint64::from_height(h1, &[0.6, 0.8]).unwrap();
        let y = SpherePoint64::from_height(h2, &[0.0, 1.0]).unwrap();
        let d = chord_distance(&x, &y);
        let dr = chord_distance(&x.reflected(), &y.reflected());
        prop_assert!((d - dr).abs() < 1e-12);
    }
}
