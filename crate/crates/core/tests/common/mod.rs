//! Shared proptest strategies.
#![allow(dead_code)]

use bloch1d::matricant::QuadratureConfig;
use bloch1d::profile::{CoefficientFn, MaterialProfile, Segment};
use proptest::prelude::*;

pub fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

/// Polynomial in global y whose values stay in roughly [0.2, 3.8] on [0, 1].
fn coefficient() -> impl Strategy<Value = CoefficientFn> {
    (1.0..3.0f64, prop::collection::vec(-0.4..0.4f64, 0..=2)).prop_map(|(c0, rest)| {
        let mut c = vec![c0];
        c.extend(rest);
        CoefficientFn::Polynomial(c)
    })
}

/// Random piecewise-polynomial profile with one to three segments.
pub fn piecewise_polynomial() -> impl Strategy<Value = MaterialProfile> {
    (prop::collection::vec(0.1..0.9f64, 0..=2), prop::collection::vec((coefficient(), coefficient(), coefficient()), 3))
        .prop_map(|(mut cuts, coefs)| {
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < 0.05);
            cuts.insert(0, 0.0);
            cuts.push(1.0);
            let segments = cuts
                .windows(2)
                .zip(coefs)
                .map(|(w, (rho, mu1, mu2))| Segment::new(w[0], w[1], rho, mu1, mu2))
                .collect();
            MaterialProfile::unit(segments).expect("positive coefficients")
        })
}

/// Random two-layer profile with moderate contrast.
pub fn bilayer() -> impl Strategy<Value = MaterialProfile> {
    ((0.5..3.0f64, 0.5..3.0f64, 0.5..3.0f64), (0.5..3.0f64, 0.5..3.0f64, 0.5..3.0f64), 0.2..0.8f64)
        .prop_map(|(a, b, d)| MaterialProfile::bilayer(a, b, d).expect("positive layers"))
}

/// Either kind of profile.
pub fn admissible() -> impl Strategy<Value = MaterialProfile> {
    prop_oneof![piecewise_polynomial(), bilayer()]
}

/// Proptest settings without regression files, which have no natural home in `tests/`.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}
