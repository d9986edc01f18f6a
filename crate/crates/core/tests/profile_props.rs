mod common;

use bloch1d::profile::{
    parse_profile, reduce_monoclinic, Average, CoefficientFn, MonoclinicInput, MonoclinicSegment, SAMPLE_RESOLUTION,
};
use bloch1d::Error;
use proptest::prelude::*;

proptest! {
    #![proptest_config(common::config(64))]

    #[test]
    fn validated_coefficients_are_positive(p in common::admissible()) {
        for i in 0..SAMPLE_RESOLUTION {
            let m = p.sample(i as f64 / SAMPLE_RESOLUTION as f64).unwrap();
            prop_assert!(m.rho > 0.0 && m.mu1 > 0.0 && m.mu2 > 0.0);
        }
    }

    #[test]
    fn compliance_and_stiffness_averages_obey_cauchy_schwarz(p in common::admissible()) {
        prop_assert!(p.average(Average::InvMu1) * p.average(Average::Mu1) >= 1.0 - 1e-12);
    }

    #[test]
    fn uncoupled_monoclinic_keeps_c55(c44 in 0.5..3.0f64, c55 in 0.5..3.0f64, slope in -0.3..0.3f64, rho in 0.5..3.0f64) {
        let input = MonoclinicInput {
            segments: vec![MonoclinicSegment {
                from: 0.0,
                to: 1.0,
                c44: CoefficientFn::Constant(c44),
                c45: CoefficientFn::Constant(0.0),
                c55: CoefficientFn::Polynomial(vec![c55, slope]),
                rho: CoefficientFn::Constant(rho),
            }],
            period: 1.0,
        };
        let p = reduce_monoclinic(&input).unwrap();
        for i in 0..=20 {
            let y = (i as f64 / 20.0).min(0.999_999);
            prop_assert_eq!(p.sample(y).unwrap().mu2, c55 + slope * y);
        }
    }
}

#[test]
fn negative_stiffness_names_the_field() {
    let text = r#"
[[segments]]
from = 0.0
to = 0.4
rho = { kind = "constant", data = 1.0 }
mu1 = { kind = "constant", data = 1.0 }
mu2 = { kind = "constant", data = 1.0 }

[[segments]]
from = 0.4
to = 1.0
rho = { kind = "constant", data = 1.0 }
mu1 = { kind = "constant", data = 1.0 }
mu2 = { kind = "polynomial", data = [1.0, -3.0] }
"#;
    match parse_profile(text) {
        Err(Error::InvalidProfile { field, .. }) => assert_eq!(field, "segments[1].mu2"),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn period_rescaling_preserves_averages() {
    let text = r#"
period = 2.0

[[segments]]
from = 0.0
to = 1.0
rho = { kind = "constant", data = 1.0 }
mu1 = { kind = "constant", data = 2.0 }
mu2 = { kind = "constant", data = 3.0 }

[[segments]]
from = 1.0
to = 2.0
rho = { kind = "constant", data = 3.0 }
mu1 = { kind = "constant", data = 4.0 }
mu2 = { kind = "constant", data = 1.0 }
"#;
    let p = parse_profile(text).unwrap();
    assert_eq!(p.period_scale(), 2.0);
    assert!((p.average(Average::Rho) - 2.0).abs() < 1e-14);
    assert!((p.average(Average::InvMu1) - 0.375).abs() < 1e-14);
}
