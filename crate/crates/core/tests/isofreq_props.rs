mod common;

use bloch1d::isofreq::{convexity_certificate, dK_dk, first_zone_edge, iso_branches, Engine, IsoSlope};
use bloch1d::profile::{presets, MaterialProfile};
use common::cfg;
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(common::config(20))]

    #[test]
    fn first_branch_is_convex_below_the_first_cutoff(p in common::admissible(), fraction in 0.05..0.95f64) {
        let omega = fraction * first_zone_edge(&p, &cfg()).unwrap();
        let cert = convexity_certificate(&p, omega, &cfg()).unwrap();
        prop_assert!(cert.lemma, "Δ_k² or Δ_k²k² not positive at ω = {omega}");
        prop_assert!(cert.min_h > 0.0, "min h = {}", cert.min_h);
        prop_assert!(cert.bracket.satisfied, "{:?}", cert.bracket);
    }
}

#[test]
fn edges_have_vertical_tangents() {
    let p = presets::graded_cubic();
    let exact = Engine::Exact(cfg());
    let branches = iso_branches(&p, 8.0, None, &cfg()).unwrap();
    let mut checked = 0;
    for b in &branches {
        for e in b.edges.iter().filter(|e| !e.zws && e.k > 0.0) {
            let d = exact.k_derivatives(&p, 64.0, e.k * e.k).unwrap();
            let dk_dbig_k = (1.0 - d.delta * d.delta).max(0.0).sqrt() / d.d_dk(e.k).abs();
            assert!(dk_dbig_k < 1e-6, "edge at k = {}: {dk_dbig_k}", e.k);
            assert!(matches!(dK_dk(&p, 8.0, e.k, &cfg()).unwrap(), IsoSlope::Edge { .. }));
            checked += 1;
        }
    }
    assert!(checked >= 3);
}

#[test]
fn kink_at_origin_only_on_a_non_degenerate_zone_edge() {
    let p = presets::graded_cubic();
    let cutoff = first_zone_edge(&p, &cfg()).unwrap();
    match dK_dk(&p, cutoff, 0.0, &cfg()).unwrap() {
        IsoSlope::Kink { m: 1, slope } => assert!(slope.abs() > 1e-3),
        other => panic!("expected a kink, got {other:?}"),
    }
    assert!(matches!(dK_dk(&p, 0.7 * cutoff, 0.0, &cfg()).unwrap(), IsoSlope::Flat { .. }));

    // A homogeneous medium closes every gap, so its zone edge is a zero-width stopband.
    let h = MaterialProfile::homogeneous(1.0, 1.0, 1.0).unwrap();
    assert!(matches!(dK_dk(&h, PI, 0.0, &cfg()).unwrap(), IsoSlope::FlatZws { m: 1, .. }));
}

#[test]
fn branch_points_satisfy_the_dispersion_relation() {
    let p = presets::soft_bilayer();
    let exact = Engine::Exact(cfg());
    for omega in [2.0, 6.0, 9.0] {
        for b in iso_branches(&p, omega, None, &cfg()).unwrap() {
            for &(k, big_k) in &b.points {
                let d = exact.delta(&p, omega * omega, k * k).unwrap();
                assert!((d - big_k.cos()).abs() < 1e-9, "ω = {omega}, k = {k}");
            }
        }
    }
}
