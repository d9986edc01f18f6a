//! Reference profiles used by the examples, tests and CLI.

use super::{CoefficientFn, MaterialProfile, Segment};
use CoefficientFn::{Constant, Polynomial};

/// `ρ = 2 + y`, `μ₁ = μ₂ = ¼(1+3y)²(2+y)` on one smooth segment.
pub fn graded_cubic() -> MaterialProfile {
    // ¼(1 + 6y + 9y²)(2 + y) = ¼(2 + 13y + 24y² + 9y³)
    let mu = Polynomial(vec![0.5, 3.25, 6.0, 2.25]);
    MaterialProfile::unit(vec![Segment::new(0.0, 1.0, Polynomial(vec![2.0, 1.0]), mu.clone(), mu)])
        .expect("graded profile is valid")
}

/// Strongly contrasting bilayer: `(ρ, μ₁, μ₂) = (1, 1, 1)` then `(2, 12, 12)`.
pub fn contrast_bilayer() -> MaterialProfile {
    MaterialProfile::bilayer((1.0, 1.0, 1.0), (2.0, 12.0, 12.0), 0.5).expect("valid bilayer")
}

/// Weakly contrasting bilayer: `(0.2, 1, 0.35)` then `(0.19, 0.95, 0.4)`.
pub fn soft_bilayer() -> MaterialProfile {
    MaterialProfile::bilayer((0.2, 1.0, 0.35), (0.19, 0.95, 0.4), 0.5).expect("valid bilayer")
}

/// Bilayer with equal normal impedance `√(ρμ₁) = 1` in both layers.
pub fn uniform_impedance() -> MaterialProfile {
    MaterialProfile::bilayer((1.0, 1.0, 1.0), (2.0, 0.5, 1.5), 0.5).expect("valid bilayer")
}

/// Bilayer with `μ₂/ρ = 1` everywhere; it has a zero-width gap at `ω = 4π, k = 0`.
pub fn uniform_speed() -> MaterialProfile {
    MaterialProfile::bilayer((1.0, 1.0, 1.0), (1.0, 4.0, 1.0), 0.5).expect("valid bilayer")
}

/// Looks up a preset by its CLI name.
pub fn by_name(name: &str) -> Option<MaterialProfile> {
    Some(match name {
        "graded" => graded_cubic(),
        "contrast-bilayer" => contrast_bilayer(),
        "soft-bilayer" => soft_bilayer(),
        "uniform-impedance" => uniform_impedance(),
        "uniform-speed" => uniform_speed(),
        "homogeneous" => MaterialProfile::unit(vec![Segment::new(
            0.0,
            1.0,
            Constant(1.0),
            Constant(1.0),
            Constant(1.0),
        )])
        .expect("valid"),
        _ => return None,
    })
}

pub const NAMES: [&str; 6] =
    ["graded", "contrast-bilayer", "soft-bilayer", "uniform-impedance", "uniform-speed", "homogeneous"];
