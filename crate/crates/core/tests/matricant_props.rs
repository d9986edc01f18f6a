mod common;

use bloch1d::matricant::{bilayer_monodromy, layers_of, monodromy, monodromy_similarity, propagate, EPS_DET, EPS_SYM};
use bloch1d::profile::{CoefficientFn, MaterialProfile, Segment};
use bloch1d::Complex64 as C64;
use common::cfg;
use proptest::prelude::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Profile even about y = ½: each coefficient is a + b(y − ½)².
fn symmetric() -> impl Strategy<Value = MaterialProfile> {
    prop::collection::vec((1.0..3.0f64, -1.5..1.5f64), 3).prop_map(|v| {
        let even = |(a, b): (f64, f64)| CoefficientFn::Polynomial(vec![a + 0.25 * b, -b, b]);
        MaterialProfile::unit(vec![Segment::new(0.0, 1.0, even(v[0]), even(v[1]), even(v[2]))]).unwrap()
    })
}

proptest! {
    #![proptest_config(common::config(100))]

    /// Floating-point cancellation in det grows with the squared entry size, so the
    /// tolerance is scaled by it for strongly evanescent points.
    #[test]
    fn unimodular_and_structured(p in common::piecewise_polynomial(), w2 in -25.0..25.0f64, k2 in -25.0..25.0f64) {
        let m = propagate(&p, 0.0, 1.0, c(w2), c(k2), &cfg()).unwrap();
        let size = m.matrix.max_abs().max(1.0);
        prop_assert!(m.det_residual() <= EPS_DET * size * size, "{} at size {size}", m.det_residual());
        prop_assert!(m.structure_residual() <= EPS_SYM * size);
    }

    #[test]
    fn symmetric_profiles_have_equal_diagonal(p in symmetric(), w2 in 0.0..25.0f64, k2 in 0.0..25.0f64) {
        let m = propagate(&p, 0.0, 1.0, c(w2), c(k2), &cfg()).unwrap().matrix;
        prop_assert!((m.m1 - m.m4).norm() <= EPS_SYM * m.max_abs().max(1.0));
    }

    #[test]
    fn composition(p in common::piecewise_polynomial(), s in 0.05..0.95f64, w2 in 0.0..25.0f64, k2 in 0.0..25.0f64) {
        let whole = propagate(&p, 0.0, 1.0, c(w2), c(k2), &cfg()).unwrap().matrix;
        let head = propagate(&p, 0.0, s, c(w2), c(k2), &cfg()).unwrap().matrix;
        let tail = propagate(&p, s, 1.0, c(w2), c(k2), &cfg()).unwrap().matrix;
        prop_assert!((whole - tail * head).max_abs() <= 1e-9 * whole.max_abs().max(1.0));
    }

    #[test]
    fn closed_form_bilayer(p in common::bilayer(), w in 0.1..6.0f64, k in 0.0..4.0f64) {
        let l = layers_of(&p).unwrap();
        let exact = bilayer_monodromy(l[0], l[1], c(w), c(k)).unwrap().matrix;
        let numeric = propagate(&p, 0.0, 1.0, c(w * w), c(k * k), &cfg()).unwrap().matrix;
        prop_assert!((exact - numeric).max_abs() <= 1e-9 * exact.max_abs().max(1.0));
    }

    #[test]
    fn trace_is_independent_of_base_point(p in common::piecewise_polynomial(), y0 in 0.0..1.0f64, w in 0.0..6.0f64, k in 0.0..3.0f64) {
        let (w2, k2) = (c(w * w), c(k * k));
        let base = propagate(&p, 0.0, 1.0, w2, k2, &cfg()).unwrap().matrix;
        let shifted = monodromy(&p, y0, w2, k2, &cfg()).unwrap().matrix;
        let similar = monodromy_similarity(&p, y0, w2, k2, &cfg()).unwrap().matrix;
        prop_assert!((shifted.trace() - base.trace()).norm() <= 1e-9);
        prop_assert!((shifted - similar).max_abs() <= 1e-8 * shifted.max_abs().max(1.0));
    }
}
