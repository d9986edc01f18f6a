//! Real isofrequency branches K_j(k) at fixed ω, their slopes and the
//! convexity certificate of the closed first branch.

use crate::asymptotics::{edge_wavenumber_bound, edge_wavenumber_bracket, BoundReport};
use crate::error::{Error, Result};
use crate::lyapunov::{chain_first, chain_second, first_derivatives_from, hessian_from, zws_residual, EPS_CUT};
use crate::matricant::{truncated_series_monodromy, PeriodPropagator, QuadratureConfig};
use crate::profile::{Average, Expr, MaterialProfile};
use crate::roots::brent;
use crate::scan::{extremal_pieces, monotone_pieces, root_in_piece, Cut, MonotonePieces, TANGENCY_TOL};
use crate::spectrum::{OmegaScan, PHASE_STEP, TOL_ZWS};
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_2, PI};

/// Samples per branch taken uniformly in each of the two parametrisations.
pub const BRANCH_SAMPLES: usize = 48;
/// Interior grid size of the convexity certificate.
pub const CERTIFICATE_GRID: usize = 200;

/// How Δ and its derivatives are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    /// Adaptive product integration with integral derivatives.
    Exact(QuadratureConfig),
    /// Per-layer exponentials replaced by their Taylor polynomials with this many
    /// terms; derivatives by central differences.
    Truncated(usize),
}

/// Δ with its first two `k²`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KDerivatives {
    pub delta: f64,
    pub d_dk2: f64,
    pub d2_dk2k2: f64,
}

impl KDerivatives {
    pub fn d_dk(&self, k: f64) -> f64 {
        chain_first(k, self.d_dk2)
    }

    pub fn d2_dk2(&self, k: f64) -> f64 {
        chain_second(k, self.d_dk2, self.d2_dk2k2)
    }

    /// `Δ(∂Δ/∂k)² + (1 − Δ²)∂²Δ/∂k²`; positive where `K(k)` bends downwards.
    pub fn curvature_numerator(&self, k: f64) -> f64 {
        let dk = self.d_dk(k);
        self.delta * dk * dk + (1.0 - self.delta * self.delta) * self.d2_dk2(k)
    }
}

fn central(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<(f64, f64)> {
    let (fm, f0, fp) = (f(x - h)?, f(x)?, f(x + h)?);
    Ok(((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)))
}

impl Engine {
    pub fn check(&self, profile: &MaterialProfile) -> Result<()> {
        match self {
            Engine::Exact(cfg) => cfg.validate(),
            Engine::Truncated(terms) => {
                if *terms == 0 {
                    return Err(Error::InvalidArgument("at least one series term is needed".into()));
                }
                if !profile.is_piecewise_constant() {
                    return Err(Error::NotPiecewiseConstant);
                }
                Ok(())
            }
        }
    }

    pub fn delta(&self, profile: &MaterialProfile, omega2: f64, k2: f64) -> Result<f64> {
        match self {
            Engine::Exact(cfg) => crate::lyapunov::delta_real(profile, omega2, k2, cfg),
            Engine::Truncated(terms) => {
                let m = truncated_series_monodromy(profile, C64::new(omega2, 0.0), C64::new(k2, 0.0), *terms)?;
                Ok(0.5 * m.trace().re)
            }
        }
    }

    /// `(∂Δ/∂ω², ∂Δ/∂k²)`.
    pub fn first(&self, profile: &MaterialProfile, omega2: f64, k2: f64) -> Result<(f64, f64)> {
        match self {
            Engine::Exact(cfg) => {
                let b = first_derivatives_from(&PeriodPropagator::real(profile, omega2, k2, cfg)?);
                Ok((b.d_dw2, b.d_dk2))
            }
            Engine::Truncated(_) => {
                let hw = 1e-5 * omega2.abs().max(1.0);
                let hk = 1e-5 * k2.abs().max(1.0);
                let dw = central(|x| self.delta(profile, x, k2), omega2, hw)?.0;
                let dk = central(|x| self.delta(profile, omega2, x), k2, hk)?.0;
                Ok((dw, dk))
            }
        }
    }

    pub fn k_derivatives(&self, profile: &MaterialProfile, omega2: f64, k2: f64) -> Result<KDerivatives> {
        match self {
            Engine::Exact(cfg) => {
                let prop = PeriodPropagator::real(profile, omega2, k2, cfg)?;
                Ok(KDerivatives {
                    delta: 0.5 * prop.monodromy_matrix().trace().re,
                    d_dk2: first_derivatives_from(&prop).d_dk2,
                    d2_dk2k2: hessian_from(&prop).kk,
                })
            }
            Engine::Truncated(_) => {
                let f = |x| self.delta(profile, omega2, x);
                let scale = k2.abs().max(1.0);
                let d_dk2 = central(f, k2, 1e-5 * scale)?.0;
                let d2_dk2k2 = central(f, k2, 1e-3 * scale)?.1;
                Ok(KDerivatives { delta: f(k2)?, d_dk2, d2_dk2k2 })
            }
        }
    }
}

/// Δ along `k = k_hi·sin θ` at fixed ω; the substitution evens out the phase
/// advance, which is fastest near the turning wavenumber.
struct ThetaCut<'a> {
    profile: &'a MaterialProfile,
    omega2: f64,
    k_hi: f64,
    engine: &'a Engine,
}

impl ThetaCut<'_> {
    fn k(&self, theta: f64) -> f64 {
        self.k_hi * theta.sin()
    }
}

impl Cut for ThetaCut<'_> {
    fn delta(&self, theta: f64) -> Result<f64> {
        let k = self.k(theta);
        self.engine.delta(self.profile, self.omega2, k * k)
    }

    fn slope(&self, theta: f64) -> Result<f64> {
        let k = self.k(theta);
        let (_, d_dk2) = self.engine.first(self.profile, self.omega2, k * k)?;
        Ok(chain_first(k, d_dk2) * self.k_hi * theta.cos())
    }
}

/// `ω₁(π, 0)`, the first zone-edge cutoff at normal incidence.
pub fn first_zone_edge(profile: &MaterialProfile, cfg: &QuadratureConfig) -> Result<f64> {
    let bound = PI * (profile.average(Average::Mu1) / profile.average(Average::Rho)).sqrt();
    let mut omega_max = 1.5 * bound + 1.0;
    for _ in 0..6 {
        let scan = OmegaScan::new(profile, 0.0, omega_max, cfg)?;
        if let Some(p) = scan.roots(-1.0)?.first() {
            return Ok(p.omega);
        }
        omega_max *= 2.0;
    }
    Err(Error::ScanIncomplete(format!("no zone-edge cutoff below ω = {omega_max}")))
}

/// A point where a branch meets `K = πm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoEdge {
    pub k: f64,
    pub m: u32,
    /// The branch continues into a neighbour without a gap.
    pub zws: bool,
}

/// One real isofrequency branch on `k ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoBranch {
    /// Starting at 1, in order of increasing k.
    pub index: usize,
    pub omega: f64,
    /// `(k, K)` with K in `[0, π]`, increasing in k.
    pub points: Vec<(f64, f64)>,
    pub edges: Vec<IsoEdge>,
    /// The only branch, below the first zone-edge cutoff; it extends evenly to `k < 0`.
    pub closed: bool,
}

impl IsoBranch {
    pub fn k_range(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }
}

/// Largest wavenumber with real K at frequency ω.
fn turning_wavenumber(profile: &MaterialProfile, omega: f64) -> f64 {
    omega * profile.extremum(Expr::RhoOverMu2).1.sqrt() * 1.001
}

struct IsoScan<'a> {
    cut: ThetaCut<'a>,
    pieces: MonotonePieces,
}

impl<'a> IsoScan<'a> {
    fn new(profile: &'a MaterialProfile, omega: f64, k_max: Option<f64>, engine: &'a Engine) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidArgument(format!("ω must be positive, got {omega}")));
        }
        engine.check(profile)?;
        let k_hi = turning_wavenumber(profile, omega);
        let theta_hi = match k_max {
            Some(k) if k <= 0.0 => return Err(Error::InvalidArgument(format!("k_max must be positive, got {k}"))),
            Some(k) if k < k_hi => (k / k_hi).asin(),
            _ => FRAC_PI_2,
        };
        let cut = ThetaCut { profile, omega2: omega * omega, k_hi, engine };
        let phase = omega * profile.extremum(Expr::RhoOverMu1).1.sqrt();
        let step = PHASE_STEP / phase.max(1.0);
        let pieces = match engine {
            Engine::Exact(_) => monotone_pieces(&cut, 0.0, theta_hi, step)?,
            // A truncated series has critical values inside (−1, 1); split at the
            // sampled extrema on a finer grid instead.
            Engine::Truncated(_) => extremal_pieces(&cut, 0.0, theta_hi, 0.25 * step)?,
        };
        Ok(IsoScan { cut, pieces })
    }

    fn meets_band(&self, i: usize) -> bool {
        let (va, vb) = (self.pieces.values[i], self.pieces.values[i + 1]);
        va.min(vb).max(-1.0) < va.max(vb).min(1.0)
    }

    /// Runs of consecutive pieces joined through critical values inside the band.
    fn runs(&self) -> Vec<(usize, usize)> {
        let p = &self.pieces;
        let mut out: Vec<(usize, usize)> = Vec::new();
        for i in (0..p.len()).filter(|&i| self.meets_band(i)) {
            match out.last_mut() {
                Some(run) if run.1 == i && p.values[i].abs() < 1.0 - TANGENCY_TOL => run.1 = i + 1,
                _ => out.push((i, i + 1)),
            }
        }
        out
    }

    fn branches(&self, omega: f64) -> Result<Vec<IsoBranch>> {
        let mut out = Vec::new();
        for (first, end) in self.runs() {
            let index = out.len() + 1;
            let mut points = Vec::new();
            let mut edges = Vec::new();
            for i in first..end {
                let [(ta, ea), (tb, eb)] = self.pass_ends(i)?;
                if i == first {
                    edges.extend(ea);
                }
                if i + 1 == end {
                    edges.extend(eb);
                }
                let mut part = self.sample_piece(i, (ta, ea), (tb, eb))?;
                if points.last().is_some_and(|last: &(f64, f64)| part.first().is_some_and(|p| p.0 <= last.0)) {
                    part.remove(0);
                }
                points.extend(part);
            }
            out.push(IsoBranch { index, omega, points, edges, closed: false });
        }
        Ok(out)
    }

    /// The `|Δ| ≤ 1` part of piece `i`, in θ, with any band edges at its ends.
    fn pass_ends(&self, i: usize) -> Result<[(f64, Option<IsoEdge>); 2]> {
        let p = &self.pieces;
        let mut ends = [(0.0, None), (0.0, None)];
        for (slot, j) in [(0, i), (1, i + 1)] {
            let (t, v) = (p.bounds[j], p.values[j]);
            let interior = j > 0 && j < p.len();
            let near = (v.abs() - 1.0).abs() <= TANGENCY_TOL;
            ends[slot] = if v.abs() <= 1.0 && !near {
                (t, None)
            } else {
                let target = v.signum();
                let theta = if near { t } else { root_in_piece(&self.cut, p, i, target)?.unwrap_or(t) };
                let m = u32::from(target < 0.0);
                let zws = near && interior;
                (theta, Some(IsoEdge { k: self.cut.k(theta), m, zws }))
            };
        }
        Ok(ends)
    }

    /// Union of samples uniform in θ and uniform in K over the pass part of piece `i`.
    fn sample_piece(&self, i: usize, a: (f64, Option<IsoEdge>), b: (f64, Option<IsoEdge>)) -> Result<Vec<(f64, f64)>> {
        let big_k = |v: f64| v.clamp(-1.0, 1.0).acos();
        let ((ta, ea), (tb, eb)) = (a, b);
        let (ka, kb) = (big_k(self.cut.delta(ta)?), big_k(self.cut.delta(tb)?));
        let edge_k = |e: Option<IsoEdge>| e.map(|e| PI * e.m as f64);
        let mut thetas = vec![(ta, edge_k(ea)), (tb, edge_k(eb))];
        for s in 1..BRANCH_SAMPLES {
            let f = s as f64 / BRANCH_SAMPLES as f64;
            thetas.push((ta + (tb - ta) * f, None));
            let target = ka + (kb - ka) * f;
            if let Some(t) = root_in_piece(&self.cut, &self.pieces, i, target.cos())? {
                thetas.push((t, Some(target)));
            }
        }
        thetas.sort_by(|a, b| a.0.total_cmp(&b.0));
        thetas.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-14 * b.0.abs().max(1.0));
        thetas
            .into_iter()
            .map(|(t, known)| {
                let kk = match known {
                    Some(v) => v,
                    None => big_k(self.cut.delta(t)?),
                };
                Ok((self.cut.k(t), kk))
            })
            .collect()
    }
}

/// Real isofrequency branches computed with a chosen engine.
pub fn iso_branches_with(
    profile: &MaterialProfile,
    omega: f64,
    k_max: Option<f64>,
    engine: &Engine,
    cfg: &QuadratureConfig,
) -> Result<Vec<IsoBranch>> {
    let scan = IsoScan::new(profile, omega, k_max, engine)?;
    let mut out = scan.branches(omega)?;
    if out.len() == 1 && out[0].points[0].0 == 0.0 && out[0].points[0].1 < PI {
        out[0].closed = omega < first_zone_edge(profile, cfg)?;
    }
    Ok(out)
}

/// All real branches at frequency ω with `k ≤ k_max` (default: every branch).
pub fn iso_branches(
    profile: &MaterialProfile,
    omega: f64,
    k_max: Option<f64>,
    cfg: &QuadratureConfig,
) -> Result<Vec<IsoBranch>> {
    iso_branches_with(profile, omega, k_max, &Engine::Exact(*cfg), cfg)
}

/// The first branch computed from Taylor-truncated layer exponentials.
///
/// `closed` refers to the exact zone-edge cutoff, computed with `cfg`.
pub fn truncated_series_isofreq(
    profile: &MaterialProfile,
    omega: f64,
    terms: usize,
    cfg: &QuadratureConfig,
) -> Result<IsoBranch> {
    iso_branches_with(profile, omega, None, &Engine::Truncated(terms), cfg)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::ScanIncomplete(format!("no real branch at ω = {omega}")))
}

/// `dK/dk` on a real branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IsoSlope {
    /// `−(∂Δ/∂k)/sin K`.
    Interior(f64),
    /// Vertical tangent at `K = πm`, with `d²k/dK² = (−1)^{m+1}/(∂Δ/∂k)`.
    Edge { m: u32, d2k_dbig_k2: f64 },
    /// Zero-width stopband at `k ≠ 0`: one-sided slopes of the branch ending at
    /// the point and of the one starting there.
    Zws { m: u32, incoming: f64, outgoing: f64 },
    /// `k = 0` inside the zone: horizontal tangent with this curvature.
    Flat { second: f64 },
    /// `k = 0` at `K = πm`: the one-sided slope for `k > 0`; the even extension has a kink.
    Kink { m: u32, slope: f64 },
    /// `k = 0` at a zero-width stopband: horizontal tangent with this curvature.
    FlatZws { m: u32, second: f64 },
}

impl IsoSlope {
    /// The slope on `k > 0`, or `None` for a vertical tangent.
    pub fn first(self) -> Option<f64> {
        match self {
            IsoSlope::Interior(v) | IsoSlope::Kink { slope: v, .. } => Some(v),
            IsoSlope::Zws { outgoing, .. } => Some(outgoing),
            IsoSlope::Flat { .. } | IsoSlope::FlatZws { .. } => Some(0.0),
            IsoSlope::Edge { .. } => None,
        }
    }
}

fn parity(m: u32) -> f64 {
    if m.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[allow(non_snake_case)]
pub fn dK_dk(profile: &MaterialProfile, omega: f64, k: f64, cfg: &QuadratureConfig) -> Result<IsoSlope> {
    if !(omega > 0.0) || k < 0.0 {
        return Err(Error::InvalidArgument(format!("need ω > 0 and k ≥ 0, got ω = {omega}, k = {k}")));
    }
    let prop = PeriodPropagator::real(profile, omega * omega, k * k, cfg)?;
    let mono = prop.monodromy_matrix();
    let delta = 0.5 * mono.trace().re;
    let d_dk2 = first_derivatives_from(&prop).d_dk2;
    if delta.abs() > 1.0 + EPS_CUT {
        return Err(Error::NotInPassband { delta });
    }
    if delta.abs() < 1.0 - EPS_CUT {
        let sin = delta.acos().sin();
        return Ok(if k == 0.0 {
            IsoSlope::Flat { second: -2.0 * d_dk2 / sin }
        } else {
            IsoSlope::Interior(-chain_first(k, d_dk2) / sin)
        });
    }
    let m = u32::from(delta < 0.0);
    let sign = parity(m);
    let zws = zws_residual(&mono, sign) <= TOL_ZWS;
    match (k == 0.0, zws) {
        (true, false) => Ok(IsoSlope::Kink { m, slope: sign * (-2.0 * sign * d_dk2).max(0.0).sqrt() }),
        (true, true) => {
            let kk = hessian_from(&prop).kk;
            Ok(IsoSlope::FlatZws { m, second: 2.0 * sign * (-sign * kk).max(0.0).sqrt() })
        }
        (false, false) => Ok(IsoSlope::Edge { m, d2k_dbig_k2: -sign / chain_first(k, d_dk2) }),
        (false, true) => {
            let magnitude = (-sign * chain_second(k, d_dk2, hessian_from(&prop).kk)).max(0.0).sqrt();
            Ok(IsoSlope::Zws { m, incoming: -sign * magnitude, outgoing: sign * magnitude })
        }
    }
}

/// Evidence that the closed first branch bends downwards everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityCertificate {
    pub omega: f64,
    /// `ω₁(π, 0)`.
    pub cutoff: f64,
    pub k10: f64,
    pub ks: Vec<f64>,
    pub h: Vec<f64>,
    pub min_h: f64,
    /// `∂Δ/∂k² > 0` and `∂²Δ/∂(k²)² > 0` on `[0, k₁,₀]`.
    pub lemma: bool,
    pub bracket: BoundReport,
    pub passed: bool,
}

pub fn convexity_certificate(profile: &MaterialProfile, omega: f64, cfg: &QuadratureConfig) -> Result<ConvexityCertificate> {
    convexity_certificate_with(profile, omega, &Engine::Exact(*cfg), cfg)
}

/// The certificate for any engine; the precondition `ω < ω₁(π, 0)` is always
/// checked against the exact cutoff, computed with `cfg`.
pub fn convexity_certificate_with(
    profile: &MaterialProfile,
    omega: f64,
    engine: &Engine,
    cfg: &QuadratureConfig,
) -> Result<ConvexityCertificate> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("ω must be positive, got {omega}")));
    }
    engine.check(profile)?;
    let cutoff = first_zone_edge(profile, cfg)?;
    if omega >= cutoff {
        return Err(Error::OmegaTooHigh { omega, cutoff });
    }
    let w2 = omega * omega;
    let f = |k: f64| engine.delta(profile, w2, k * k).map(|d| d - 1.0);
    let (lo, hi) = edge_wavenumber_bracket(profile);
    let (mut a, mut b) = (omega * lo, omega * hi);
    if f(a)? > 0.0 {
        a = 0.0;
    }
    while f(b)? < 0.0 {
        b *= 2.0;
        if b > 1e6 * omega.max(1.0) {
            return Err(Error::ScanIncomplete(format!("Δ stays below 1 up to k = {b}")));
        }
    }
    let mut failure = None;
    let k10 = brent(
        |k| {
            f(k).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NAN
            })
        },
        a,
        b,
        4.0 * f64::EPSILON * b,
        0.0,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let k10 = k10.ok_or_else(|| Error::ScanIncomplete("edge wavenumber not bracketed".into()))?;
    let bracket = edge_wavenumber_bound(profile, omega, k10);

    let mut lemma = true;
    for k in [0.0, k10] {
        let d = engine.k_derivatives(profile, w2, k * k)?;
        lemma &= d.d_dk2 > 0.0 && d.d2_dk2k2 > 0.0;
    }
    let n = CERTIFICATE_GRID;
    let mut ks = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    for i in 1..=n {
        let k = k10 * i as f64 / (n + 1) as f64;
        let d = engine.k_derivatives(profile, w2, k * k)?;
        lemma &= d.d_dk2 > 0.0 && d.d2_dk2k2 > 0.0;
        ks.push(k);
        h.push(d.curvature_numerator(k));
    }
    let min_h = h.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConvexityCertificate { omega, cutoff, k10, ks, h, min_h, lemma, bracket, passed: min_h > 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::presets;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn homogeneous_branch_is_a_circle() {
        let h = MaterialProfile::homogeneous(1.0, 1.0, 1.0).unwrap();
        let branches = iso_branches(&h, 2.0, None, &cfg()).unwrap();
        assert_eq!(branches.len(), 1);
        let b = &branches[0];
        assert!(b.closed);
        for &(k, big_k) in &b.points {
            assert!((big_k - (4.0 - k * k).sqrt()).abs() < 1e-7, "{k} {big_k}");
        }
        assert_eq!(b.edges.len(), 1);
        assert!((b.edges[0].k - 2.0).abs() < 1e-10);
        match dK_dk(&h, 2.0, 1.0, &cfg()).unwrap() {
            IsoSlope::Interior(s) => assert!((s + 1.0 / 3f64.sqrt()).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        match dK_dk(&h, 2.0, 0.0, &cfg()).unwrap() {
            IsoSlope::Flat { second } => assert!((second + 0.5).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn homogeneous_zws_at_normal_incidence() {
        let h = MaterialProfile::homogeneous(1.0, 1.0, 1.0).unwrap();
        match dK_dk(&h, PI, 0.0, &cfg()).unwrap() {
            IsoSlope::FlatZws { m: 1, second } => assert!((second + 1.0 / PI).abs() < 1e-7, "{second}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn homogeneous_certificate() {
        let h = MaterialProfile::homogeneous(1.0, 1.0, 1.0).unwrap();
        let c = convexity_certificate(&h, 2.0, &cfg()).unwrap();
        assert!(c.passed && c.lemma && c.bracket.satisfied);
        assert!((c.k10 - 2.0).abs() < 1e-12);
        assert!((c.cutoff - PI).abs() < 1e-10);
        // h = sin²(s)/s² · (… ) > 0 for Δ = cos√(ω² − k²).
        assert!(c.min_h > 0.0);
        assert!(matches!(convexity_certificate(&h, 3.5, &cfg()), Err(Error::OmegaTooHigh { .. })));
    }

    #[test]
    fn truncated_engine_needs_layers() {
        let p = presets::graded_cubic();
        assert!(matches!(truncated_series_isofreq(&p, 2.0, 4, &cfg()), Err(Error::NotPiecewiseConstant)));
    }

    #[test]
    fn truncated_engine_converges_to_exact() {
        let p = presets::soft_bilayer();
        let exact = Engine::Exact(cfg());
        let series = Engine::Truncated(30);
        for &(w, k) in &[(3.0, 1.0), (6.8, 4.0)] {
            let a = exact.k_derivatives(&p, w * w, k * k).unwrap();
            let b = series.k_derivatives(&p, w * w, k * k).unwrap();
            assert!((a.delta - b.delta).abs() < 1e-12);
            assert!((a.d_dk2 - b.d_dk2).abs() < 1e-8);
            assert!((a.d2_dk2k2 - b.d2_dk2k2).abs() < 1e-6);
        }
    }
}
