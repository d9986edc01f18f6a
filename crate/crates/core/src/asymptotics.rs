//! Zero-order WKB form of Δ and the growth and first-eigenvalue bounds.

use crate::error::{Error, Result};
use crate::lyapunov::delta;
use crate::matricant::QuadratureConfig;
use crate::profile::{Average, Expr, Material, MaterialProfile};
use crate::quad::integrate;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Relative impedance change treated as a discontinuity.
pub const JUMP_TOL: f64 = 1e-9;
/// Normalised slack below which a bound counts as violated.
pub const SLACK_TOL: f64 = -1e-9;

fn impedance(m: Material, omega2: f64, k2: f64) -> f64 {
    (m.rho * m.mu1).sqrt() * (1.0 - m.mu2 * k2 / (m.rho * omega2)).sqrt()
}

/// Impedance jumps `(y, Z(y⁻)/Z(y⁺))` over one period, the period edge included.
pub fn impedance_jumps(profile: &MaterialProfile, omega: f64, k: f64) -> Vec<(f64, f64)> {
    let (w2, k2) = (omega * omega, k * k);
    let mut out = Vec::new();
    for (i, seg) in profile.segments().iter().enumerate() {
        let left = if i == 0 { profile.sample_left(1.0) } else { profile.sample_left(seg.from) };
        let right = seg.eval(seg.from);
        let ratio = impedance(left, w2, k2) / impedance(right, w2, k2);
        if (ratio - 1.0).abs() > JUMP_TOL {
            out.push((seg.from, ratio));
        }
    }
    out
}

/// `½([Z]^{1/2} + [Z]^{−1/2})·cos(ω∫μ₁⁻¹Z)` in the supersonic regime.
pub fn wkb_delta(profile: &MaterialProfile, omega: f64, k: f64) -> Result<f64> {
    let (w2, k2) = (omega * omega, k * k);
    let threshold = k2 * profile.extremum(Expr::Mu2OverRho).1;
    if !(w2 > threshold) {
        return Err(Error::NotSupersonic { omega2: w2, threshold });
    }
    let jumps = impedance_jumps(profile, omega, k);
    if jumps.len() > 1 {
        return Err(Error::MultipleJumps(jumps.len()));
    }
    let jump = jumps.first().map_or(1.0, |j| j.1);
    let phase: f64 = profile
        .segments()
        .iter()
        .map(|s| {
            integrate(
                |y| {
                    let m = s.eval(y);
                    ((m.rho * w2 - m.mu2 * k2) / m.mu1).sqrt()
                },
                s.from,
                s.to,
                1e-13,
            )
        })
        .sum();
    Ok(0.5 * (jump.sqrt() + jump.sqrt().recip()) * phase.cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// `|Δ| ≤ cosh√(μ₁min⁻¹(μ₂max|k²| + ρmax|ω²|))`
    GrowthUpper,
    /// `Δ ≥ cosh√(μ₁max⁻¹(μ₂min k² − ρmax ω²))`
    GrowthLower,
    /// `ω₁² ≥ k² min(μ₂/ρ)`
    FirstEigenLower,
    /// `ω₁² ≤ (⟨μ₁⟩K² + ⟨μ₂⟩k²)/⟨ρ⟩`
    FirstEigenUpper,
    /// `k min√(μ₂/ρ) ≤ ω₁(0,k) ≤ k√(⟨μ₂⟩/⟨ρ⟩)`
    CutoffCentre,
    /// `ω₁(0,k) < ω₁(π,k) ≤ √((⟨μ₁⟩π² + ⟨μ₂⟩k²)/⟨ρ⟩)`
    CutoffEdge,
    /// `ω√(⟨ρ⟩/⟨μ₂⟩) ≤ k₁,₀(ω) ≤ ω max√(ρ/μ₂)`
    EdgeWavenumber,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::GrowthUpper => "growth-upper",
            BoundKind::GrowthLower => "growth-lower",
            BoundKind::FirstEigenLower => "first-eigen-lower",
            BoundKind::FirstEigenUpper => "first-eigen-upper",
            BoundKind::CutoffCentre => "cutoff-centre",
            BoundKind::CutoffEdge => "cutoff-edge",
            BoundKind::EdgeWavenumber => "edge-wavenumber",
        }
    }
}

/// One checked inequality `lower ≤ actual ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub which: BoundKind,
    pub omega2: C64,
    pub k2: C64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub actual: f64,
    /// Smallest distance to a violated side, relative to `max(1, |bound|)`.
    pub slack: f64,
    pub satisfied: bool,
}

impl BoundReport {
    fn new(which: BoundKind, omega2: C64, k2: C64, lower: Option<f64>, upper: Option<f64>, actual: f64) -> Self {
        let lo = lower.map_or(f64::INFINITY, |l| (actual - l) / l.abs().max(1.0));
        let hi = upper.map_or(f64::INFINITY, |u| (u - actual) / u.abs().max(1.0));
        let slack = lo.min(hi);
        BoundReport { which, omega2, k2, lower, upper, actual, slack, satisfied: slack >= SLACK_TOL }
    }
}

/// Growth bound on `|Δ|` for complex arguments.
pub fn bound_growth_upper(profile: &MaterialProfile, omega2: C64, k2: C64, cfg: &QuadratureConfig) -> Result<BoundReport> {
    let actual = delta(profile, omega2, k2, cfg)?.delta.norm();
    let arg = (profile.extremum(Expr::Mu2).1 * k2.norm() + profile.extremum(Expr::Rho).1 * omega2.norm())
        / profile.extremum(Expr::Mu1).0;
    Ok(BoundReport::new(BoundKind::GrowthUpper, omega2, k2, None, Some(arg.sqrt().cosh()), actual))
}

/// Lower growth bound on Δ in the region `k² ≥ ρmax ω²/μ₂min`.
pub fn bound_growth_lower(profile: &MaterialProfile, omega2: f64, k2: f64, cfg: &QuadratureConfig) -> Result<BoundReport> {
    let (rho_max, mu2_min, mu1_max) =
        (profile.extremum(Expr::Rho).1, profile.extremum(Expr::Mu2).0, profile.extremum(Expr::Mu1).1);
    let threshold = rho_max * omega2 / mu2_min;
    if k2 < threshold {
        return Err(Error::PreconditionOutOfRegion { k2, threshold });
    }
    let (w2, kk) = (C64::new(omega2, 0.0), C64::new(k2, 0.0));
    let actual = delta(profile, w2, kk, cfg)?.delta.re;
    let bound = ((mu2_min * k2 - rho_max * omega2) / mu1_max).max(0.0).sqrt().cosh();
    Ok(BoundReport::new(BoundKind::GrowthLower, w2, kk, Some(bound), None, actual))
}

/// Bounds on the first eigenvalue `ω₁²(K, k)`, with `K` folded into `[−π, π]`.
pub fn first_eig_bounds(profile: &MaterialProfile, big_k: f64, k: f64, omega1: f64) -> [BoundReport; 2] {
    let folded = big_k - 2.0 * PI * (big_k / (2.0 * PI)).round();
    let (rho, mu1, mu2) = (profile.average(Average::Rho), profile.average(Average::Mu1), profile.average(Average::Mu2));
    let w2 = omega1 * omega1;
    let (a, b) = (C64::new(w2, 0.0), C64::new(k * k, 0.0));
    let lower = k * k * profile.extremum(Expr::Mu2OverRho).0;
    let upper = (mu1 * folded * folded + mu2 * k * k) / rho;
    [
        BoundReport::new(BoundKind::FirstEigenLower, a, b, Some(lower), None, w2),
        BoundReport::new(BoundKind::FirstEigenUpper, a, b, None, Some(upper), w2),
    ]
}

/// Bounds on the first cutoffs `ω₁(0,k)` and `ω₁(π,k)`.
pub fn cutoff_bounds(profile: &MaterialProfile, k: f64, centre: f64, edge: f64) -> [BoundReport; 2] {
    let (rho, mu1, mu2) = (profile.average(Average::Rho), profile.average(Average::Mu1), profile.average(Average::Mu2));
    let kk = C64::new(k * k, 0.0);
    let c = BoundReport::new(
        BoundKind::CutoffCentre,
        C64::new(centre * centre, 0.0),
        kk,
        Some(k.abs() * profile.extremum(Expr::Mu2OverRho).0.sqrt()),
        Some(k.abs() * (mu2 / rho).sqrt()),
        centre,
    );
    let mut e = BoundReport::new(
        BoundKind::CutoffEdge,
        C64::new(edge * edge, 0.0),
        kk,
        Some(centre),
        Some(((mu1 * PI * PI + mu2 * k * k) / rho).sqrt()),
        edge,
    );
    // The lower side is strict.
    e.satisfied &= edge > centre;
    [c, e]
}

/// Bracket of the first isofrequency edge `k₁,₀(ω)`.
pub fn edge_wavenumber_bracket(profile: &MaterialProfile) -> (f64, f64) {
    (
        (profile.average(Average::Rho) / profile.average(Average::Mu2)).sqrt(),
        profile.extremum(Expr::RhoOverMu2).1.sqrt(),
    )
}

pub fn edge_wavenumber_bound(profile: &MaterialProfile, omega: f64, k10: f64) -> BoundReport {
    let (lo, hi) = edge_wavenumber_bracket(profile);
    BoundReport::new(
        BoundKind::EdgeWavenumber,
        C64::new(omega * omega, 0.0),
        C64::new(k10 * k10, 0.0),
        Some(omega * lo),
        Some(omega * hi),
        k10,
    )
}
