mod common;

use bloch1d::asymptotics::{bound_growth_upper, edge_wavenumber_bracket};
use bloch1d::isofreq::{convexity_certificate, first_zone_edge};
use bloch1d::profile::presets;
use bloch1d::Complex64 as C64;
use common::cfg;
use proptest::prelude::*;

proptest! {
    #![proptest_config(common::config(64))]

    #[test]
    fn growth_bound_in_the_complex_plane(
        p in common::admissible(),
        w2 in (-40.0..40.0f64, -40.0..40.0f64),
        k2 in (-40.0..40.0f64, -40.0..40.0f64),
    ) {
        let r = bound_growth_upper(&p, C64::new(w2.0, w2.1), C64::new(k2.0, k2.1), &cfg()).unwrap();
        prop_assert!(r.satisfied, "{r:?}");
    }

    #[test]
    fn growth_bound_on_the_negative_frequency_axis(p in common::admissible(), w2 in -200.0..0.0f64) {
        let r = bound_growth_upper(&p, C64::new(w2, 0.0), C64::new(0.0, 0.0), &cfg()).unwrap();
        prop_assert!(r.satisfied, "{r:?}");
    }
}

proptest! {
    #![proptest_config(common::config(20))]

    #[test]
    fn zone_edge_wavenumber_stays_in_its_bracket(fraction in 0.02..0.98f64) {
        let p = presets::graded_cubic();
        let omega = fraction * first_zone_edge(&p, &cfg()).unwrap();
        let cert = convexity_certificate(&p, omega, &cfg()).unwrap();
        let (lo, hi) = edge_wavenumber_bracket(&p);
        prop_assert!(cert.k10 >= omega * lo * (1.0 - 1e-9) && cert.k10 <= omega * hi * (1.0 + 1e-9));
        prop_assert!(cert.bracket.satisfied);
    }
}
