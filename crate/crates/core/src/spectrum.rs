//! Dispersion cuts: Floquet branches ω_n(K, k), band edges, Dirichlet and
//! Neumann values, zero-width stopbands, stopband decay and branch slopes.

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Mat2};
use crate::lyapunov::{
    delta_real, eigenvector, first_derivatives_from, floquet_k, full_bundle, mode_integrals, zws_residual,
    ModeIntegrals,
};
use crate::matricant::{propagate, PeriodPropagator, QuadratureConfig};
use crate::profile::{Average, Expr, MaterialProfile};
use crate::roots::brent;
use crate::scan::{monotone_pieces, root_in_piece, Cut, MonotonePieces};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Acceptance threshold on both ZWS residuals.
pub const TOL_ZWS: f64 = 1e-7;
/// Candidates with `||Δ| − 1|` above this are reported without Newton refinement.
pub const ZWS_WINDOW: f64 = 0.1;
/// Largest phase advance between scan samples.
pub const PHASE_STEP: f64 = PI / 8.0;

/// Δ along ω at fixed k.
pub(crate) struct OmegaCut<'a> {
    pub profile: &'a MaterialProfile,
    pub k2: f64,
    pub cfg: &'a QuadratureConfig,
}

impl Cut for OmegaCut<'_> {
    fn delta(&self, omega: f64) -> Result<f64> {
        delta_real(self.profile, omega * omega, self.k2, self.cfg)
    }

    fn slope(&self, omega: f64) -> Result<f64> {
        let prop = PeriodPropagator::real(self.profile, omega * omega, self.k2, self.cfg)?;
        Ok(2.0 * omega * first_derivatives_from(&prop).d_dw2)
    }
}

/// Lowest frequency that can carry a real-K wave at wavenumber `k`.
pub fn omega_floor(profile: &MaterialProfile, k: f64) -> f64 {
    k.abs() * profile.extremum(Expr::Mu2OverRho).0.sqrt()
}

/// A fixed-k cut of Δ over `[omega_floor(k), omega_max]`, split into monotone pieces.
///
/// Piece `n − 1` carries branch `n`: for every `K` it holds at most one root of
/// `Δ = cos K`, and a tangential root at a shared end belongs to both pieces.
pub struct OmegaScan<'a> {
    profile: &'a MaterialProfile,
    k: f64,
    cfg: QuadratureConfig,
    pieces: Option<MonotonePieces>,
}

/// One root of `Δ = cos K` on a fixed-k cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    /// Branch index, starting at 1.
    pub n: usize,
    pub omega: f64,
    /// Set when the root sits on a critical point of Δ (a double root).
    pub double: bool,
}

impl<'a> OmegaScan<'a> {
    pub fn new(profile: &'a MaterialProfile, k: f64, omega_max: f64, cfg: &QuadratureConfig) -> Result<Self> {
        if !k.is_finite() || !omega_max.is_finite() || omega_max <= 0.0 {
            return Err(Error::InvalidArgument(format!("k = {k}, ω_max = {omega_max}")));
        }
        let lo = omega_floor(profile, k);
        let pieces = if lo >= omega_max {
            None
        } else {
            let cut = OmegaCut { profile, k2: k * k, cfg };
            let step = PHASE_STEP / profile.extremum(Expr::RhoOverMu1).1.sqrt();
            Some(monotone_pieces(&cut, lo, omega_max, step)?)
        };
        Ok(OmegaScan { profile, k, cfg: *cfg, pieces })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn pieces(&self) -> Option<&MonotonePieces> {
        self.pieces.as_ref()
    }

    fn cut(&self) -> OmegaCut<'_> {
        OmegaCut { profile: self.profile, k2: self.k * self.k, cfg: &self.cfg }
    }

    /// Roots of `Δ = target` ordered by branch index.
    pub fn roots(&self, target: f64) -> Result<Vec<SpectralPoint>> {
        let Some(pieces) = &self.pieces else { return Ok(Vec::new()) };
        let cut = self.cut();
        let mut out = Vec::new();
        for i in 0..pieces.len() {
            if let Some(omega) = root_in_piece(&cut, pieces, i, target)? {
                let double = (omega == pieces.bounds[i] && i > 0)
                    || (omega == pieces.bounds[i + 1] && i + 1 < pieces.len());
                out.push(SpectralPoint { n: i + 1, omega, double });
            }
        }
        Ok(out)
    }

    /// Stopband intervals `[lo, hi]` with their sign `(−1)^m`, in increasing ω.
    ///
    /// The interval below the first branch (k > 0) comes first with `m = 0`.
    pub fn gaps(&self) -> Result<Vec<Gap>> {
        let Some(pieces) = &self.pieces else { return Ok(Vec::new()) };
        let cut = self.cut();
        let mut out = Vec::new();
        if self.k != 0.0 {
            if let Some(hi) = root_in_piece(&cut, pieces, 0, 1.0)? {
                out.push(Gap { index: 0, m: 0, lo: 0.0, hi, extremum: pieces.bounds[0] });
            }
        }
        for (j, (t, v)) in pieces.critical().enumerate() {
            let target = v.signum();
            let lo = root_in_piece(&cut, pieces, j, target)?;
            let hi = root_in_piece(&cut, pieces, j + 1, target)?;
            if let (Some(lo), Some(hi)) = (lo, hi) {
                out.push(Gap { index: j + 1, m: if target > 0.0 { 0 } else { 1 }, lo, hi, extremum: t });
            }
        }
        Ok(out)
    }
}

/// A closed stopband interval on a fixed-k cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    /// 0 for the low-frequency gap, else the number of branches below it.
    pub index: usize,
    /// `Δ` has sign `(−1)^m` inside.
    pub m: u32,
    pub lo: f64,
    pub hi: f64,
    /// Critical point of Δ inside the gap.
    pub extremum: f64,
}

impl Gap {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Roots ω_n(K, k) of `Δ = cos K` in `(0, ω_max]` (ω = 0 included at the origin).
pub fn floquet_branches(
    profile: &MaterialProfile,
    big_k: f64,
    k: f64,
    omega_max: f64,
    cfg: &QuadratureConfig,
) -> Result<Vec<SpectralPoint>> {
    OmegaScan::new(profile, k, omega_max, cfg)?.roots(big_k.cos())
}

/// Cutoffs `ω_{n,0}` (Δ = 1) and `ω_{n,1}` (Δ = −1) at fixed k.
#[derive(Debug, Clone, PartialEq)]
pub struct BandEdges {
    pub k: f64,
    pub zone_centre: Vec<SpectralPoint>,
    pub zone_edge: Vec<SpectralPoint>,
    pub gaps: Vec<Gap>,
}

impl BandEdges {
    /// `ω_n(πm, k)`.
    pub fn edge(&self, n: usize, m: u32) -> Option<f64> {
        let list = if m.is_multiple_of(2) { &self.zone_centre } else { &self.zone_edge };
        list.iter().find(|p| p.n == n).map(|p| p.omega)
    }

    /// Double roots, the zero-width-stopband candidates.
    pub fn tangencies(&self) -> impl Iterator<Item = (&SpectralPoint, f64)> {
        self.zone_centre
            .iter()
            .map(|p| (p, 1.0))
            .chain(self.zone_edge.iter().map(|p| (p, -1.0)))
            .filter(|(p, _)| p.double)
    }
}

/// Half-width of the ω-interval in which a band edge is pinned down when Δ is
/// known to `10·rel_tol`: near-closed gaps have tiny `∂Δ/∂ω` at their edges.
pub fn edge_uncertainty(profile: &MaterialProfile, omega: f64, k: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if omega == 0.0 {
        return Ok(0.0);
    }
    let prop = PeriodPropagator::real(profile, omega * omega, k * k, cfg)?;
    let slope = 2.0 * omega * first_derivatives_from(&prop).d_dw2;
    Ok(10.0 * cfg.rel_tol / slope.abs())
}

pub fn band_edges(profile: &MaterialProfile, k: f64, omega_max: f64, cfg: &QuadratureConfig) -> Result<BandEdges> {
    let scan = OmegaScan::new(profile, k, omega_max, cfg)?;
    Ok(BandEdges { k, zone_centre: scan.roots(1.0)?, zone_edge: scan.roots(-1.0)?, gaps: scan.gaps()? })
}

/// Zeros in ω of `m₂(y₀)` (Dirichlet) and `m₃(y₀)` (Neumann) on `[omega_floor, ω_max]`.
pub fn dirichlet_neumann(
    profile: &MaterialProfile,
    y0: f64,
    k: f64,
    omega_max: f64,
    cfg: &QuadratureConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0..1.0).contains(&y0) {
        return Err(Error::OutOfDomain(y0));
    }
    let lo = omega_floor(profile, k);
    if lo >= omega_max {
        return Ok((Vec::new(), Vec::new()));
    }
    let entries = |omega: f64| -> Result<(f64, f64)> {
        let m = propagate(profile, y0, y0 + 1.0, C64::new(omega * omega, 0.0), C64::new(k * k, 0.0), cfg)?;
        Ok((m.m2().im, m.m3().im))
    };
    // Twice the resolution of the Δ scan: the two families interlace.
    let step = 0.5 * PHASE_STEP / profile.extremum(Expr::RhoOverMu1).1.sqrt();
    let n = ((omega_max - lo) / step).ceil().max(2.0) as usize;
    let mut grid = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let w = lo + (omega_max - lo) * i as f64 / n as f64;
        grid.push((w, entries(w)?));
    }
    let scale = |v: f64| v.abs() <= 1e-13;
    let mut dirichlet = Vec::new();
    let mut neumann = Vec::new();
    if scale(grid[0].1 .0) {
        dirichlet.push(lo);
    }
    if scale(grid[0].1 .1) {
        neumann.push(lo);
    }
    for pair in grid.windows(2) {
        let ((a, (da, na)), (b, (db, nb))) = (pair[0], pair[1]);
        for (fa, fb, which, out) in [(da, db, 0, &mut dirichlet), (na, nb, 1, &mut neumann)] {
            if fa != 0.0 && fa.signum() != fb.signum() {
                let mut failure = None;
                let root = brent(
                    |w| match entries(w) {
                        Ok(v) => {
                            if which == 0 {
                                v.0
                            } else {
                                v.1
                            }
                        }
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::NAN
                        }
                    },
                    a,
                    b,
                    4.0 * f64::EPSILON * b.max(1.0),
                    0.0,
                );
                if let Some(e) = failure {
                    return Err(e);
                }
                out.extend(root);
            }
        }
    }
    Ok((dirichlet, neumann))
}

/// Outcome of a zero-width-stopband check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZwsReport {
    pub omega: f64,
    pub k: f64,
    /// Sign of Δ at the point, i.e. `M(1,0) ≈ sign·I`.
    pub sign: f64,
    pub delta: f64,
    /// `max |M(1,0) − sign·I|`.
    pub residual_m: f64,
    /// `sup |m₂(y)|` over a uniform grid.
    pub residual_m2: f64,
    pub newton_converged: bool,
    pub iterations: usize,
    pub confirmed: bool,
}

/// Grid used for `sup |m₂|`.
const M2_GRID: usize = 64;

/// Refines a candidate ZWS in `(ω², k²)` and tests `M(1,0) = ±I` and `m₂ ≡ 0`.
///
/// Newton runs on `∇Δ = 0` with the Hessian of Δ; a ZWS is a stationary point of
/// Δ on a cutoff. The Hessian is singular along ZWS lines, so steps use its
/// pseudo-inverse.
pub fn detect_zws(profile: &MaterialProfile, omega: f64, k: f64, cfg: &QuadratureConfig) -> Result<ZwsReport> {
    let mut x = [omega * omega, k * k];
    let start = delta_real(profile, x[0], x[1], cfg)?;
    let mut converged = false;
    let mut iterations = 0;
    let origin = omega == 0.0 && k == 0.0;
    if !origin && (start.abs() - 1.0).abs() <= ZWS_WINDOW {
        for it in 1..=60 {
            iterations = it;
            let b = full_bundle(profile, x[0], x[1], cfg)?;
            let g = [b.d_dw2, b.d_dk2];
            let (ww, kk, wk) = (b.d2_dw2w2.unwrap_or(0.0), b.d2_dk2k2.unwrap_or(0.0), b.d2_dw2k2.unwrap_or(0.0));
            let (vals, vecs) = sym_eigen(ww, wk, kk);
            let top = vals[0].abs().max(vals[1].abs());
            if top == 0.0 || !top.is_finite() {
                break;
            }
            let mut step = [0.0, 0.0];
            for (l, v) in vals.iter().zip(&vecs) {
                if l.abs() > 1e-8 * top {
                    let c = -(v[0] * g[0] + v[1] * g[1]) / l;
                    step[0] += c * v[0];
                    step[1] += c * v[1];
                }
            }
            x[0] += step[0];
            x[1] = (x[1] + step[1]).max(0.0);
            let size = step[0].hypot(step[1]);
            if size <= 1e-14 * x[0].abs().max(1.0) {
                converged = true;
                break;
            }
        }
    }
    // A step far from the candidate has found some other stationary point.
    let moved = (x[0].max(0.0).sqrt() - omega).hypot(x[1].sqrt() - k) > 0.1 * omega.hypot(k).max(1.0);
    if moved || !x.iter().all(|v| v.is_finite()) {
        converged = false;
        x = [omega * omega, k * k];
    }
    let prop = PeriodPropagator::real(profile, x[0], x[1], cfg)?;
    let m = prop.monodromy_matrix();
    let delta = 0.5 * m.trace().re;
    let sign = if delta >= 0.0 { 1.0 } else { -1.0 };
    let residual_m = zws_residual(&m, sign);
    let residual_m2 = (0..M2_GRID).map(|i| prop.row(i as f64 / M2_GRID as f64).m2.abs()).fold(0.0, f64::max);
    Ok(ZwsReport {
        omega: x[0].max(0.0).sqrt(),
        k: x[1].sqrt(),
        sign,
        delta,
        residual_m,
        residual_m2,
        newton_converged: converged,
        iterations,
        confirmed: !(x[0] == 0.0 && x[1] == 0.0) && residual_m <= TOL_ZWS && residual_m2 <= TOL_ZWS,
    })
}

/// Locates ZWS along a k-grid from tangencies of the critical values of Δ.
///
/// For each critical point of the fixed-k cuts, `|Δ_crit(k)| − 1 ≥ 0` touches zero
/// at a ZWS; local minima over the grid below [`ZWS_WINDOW`] are refined.
pub fn zws_scan(profile: &MaterialProfile, ks: &[f64], omega_max: f64, cfg: &QuadratureConfig) -> Result<Vec<ZwsReport>> {
    let mut columns: Vec<Vec<(f64, f64)>> = Vec::with_capacity(ks.len());
    for &k in ks {
        let scan = OmegaScan::new(profile, k, omega_max, cfg)?;
        columns.push(scan.pieces().map(|p| p.critical().collect()).unwrap_or_default());
    }
    let mut reports: Vec<ZwsReport> = Vec::new();
    let depth = columns.iter().map(Vec::len).max().unwrap_or(0);
    for j in 0..depth {
        let excess = |i: usize| columns[i].get(j).map(|&(_, v)| v.abs() - 1.0);
        for i in 0..ks.len() {
            let Some(e) = excess(i) else { continue };
            let left = if i > 0 { excess(i - 1) } else { None };
            let right = if i + 1 < ks.len() { excess(i + 1) } else { None };
            let is_min = left.is_none_or(|l| e <= l) && right.is_none_or(|r| e < r);
            if !is_min || e > ZWS_WINDOW {
                continue;
            }
            let report = detect_zws(profile, columns[i][j].0, ks[i], cfg)?;
            let duplicate = reports.iter().any(|r| {
                (r.omega - report.omega).abs() < 1e-6 * report.omega.max(1.0) && (r.k - report.k).abs() < 1e-6
            });
            if !duplicate {
                reports.push(report);
            }
        }
    }
    reports.sort_by(|a, b| a.k.total_cmp(&b.k).then(a.omega.total_cmp(&b.omega)));
    Ok(reports)
}

/// Im K across one stopband at fixed k.
#[derive(Debug, Clone, PartialEq)]
pub struct StopbandProfile {
    pub gap: Gap,
    pub k: f64,
    /// `(ω, Im K)` samples from edge to edge.
    pub samples: Vec<(f64, f64)>,
    pub omega_ext: f64,
    pub delta_ext: f64,
    /// `d²Im K/dω²` at `omega_ext` from the second derivative of Δ.
    pub curvature: f64,
}

/// Samples Im K over gap number `gap` (as numbered by [`OmegaScan::gaps`]).
pub fn stopband_profile(
    profile: &MaterialProfile,
    k: f64,
    gap: usize,
    omega_max: f64,
    samples: usize,
    cfg: &QuadratureConfig,
) -> Result<Option<StopbandProfile>> {
    let scan = OmegaScan::new(profile, k, omega_max, cfg)?;
    let Some(g) = scan.gaps()?.into_iter().find(|g| g.index == gap) else { return Ok(None) };
    if g.width() <= 0.0 {
        return Ok(None);
    }
    let n = samples.max(3);
    let mut pts = Vec::with_capacity(n);
    for i in 0..n {
        let w = g.lo + g.width() * i as f64 / (n - 1) as f64;
        pts.push((w, floquet_k(delta_real(profile, w * w, k * k, cfg)?).im));
    }
    let omega_ext = if g.index == 0 { 0.0 } else { g.extremum };
    let b = full_bundle(profile, omega_ext * omega_ext, k * k, cfg)?;
    let delta_ext = delta_real(profile, omega_ext * omega_ext, k * k, cfg)?;
    let root = (delta_ext * delta_ext - 1.0).sqrt();
    let curvature = if omega_ext == 0.0 {
        2.0 * b.d_dw2 / root
    } else {
        let d2 = 2.0 * b.d_dw2 + 4.0 * omega_ext * omega_ext * b.d2_dw2w2.unwrap_or(0.0);
        delta_ext.signum() * d2 / root
    };
    Ok(Some(StopbandProfile { gap: g, k, samples: pts, omega_ext, delta_ext, curvature }))
}

/// ω_n(K, k) for one branch, widening the scan range until the branch is found.
pub fn branch_omega(profile: &MaterialProfile, big_k: f64, k: f64, n: usize, cfg: &QuadratureConfig) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("branch indices start at 1".into()));
    }
    let (rho, mu1, mu2) = (profile.average(Average::Rho), profile.average(Average::Mu1), profile.average(Average::Mu2));
    let reach = big_k.abs() + PI * n as f64;
    let mut omega_max = 1.5 * ((mu1 * reach * reach + mu2 * k * k) / rho).sqrt() + 1.0;
    for _ in 0..12 {
        let roots = floquet_branches(profile, big_k, k, omega_max, cfg)?;
        if let Some(p) = roots.iter().find(|p| p.n == n) {
            // A root in the last, truncated piece is only trusted if that piece closed.
            if p.n < roots.len() || p.omega < omega_max {
                return Ok(p.omega);
            }
        }
        omega_max *= 2.0;
    }
    Err(Error::ScanIncomplete(format!("branch {n} not found below ω = {omega_max}")))
}

/// `dω_n/dK` along a branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KSlope {
    /// Open passband: `−sin K/(∂Δ/∂ω)`.
    Interior(f64),
    /// Non-degenerate cutoff: first derivative 0, second derivative given.
    Cutoff { second: f64 },
    /// Zero-width stopband: finite one-sided slope.
    Zws(f64),
    /// `ω = k = 0`: slope `1/√(⟨ρ⟩⟨μ₁⁻¹⟩)`.
    Origin(f64),
}

impl KSlope {
    /// First derivative.
    pub fn first(self) -> f64 {
        match self {
            KSlope::Interior(v) | KSlope::Zws(v) | KSlope::Origin(v) => v,
            KSlope::Cutoff { .. } => 0.0,
        }
    }
}

/// Whether `K` lies on `πℤ`, and which `m`.
fn zone_point(big_k: f64) -> Option<i64> {
    let m = (big_k / PI).round();
    ((big_k - m * PI).abs() <= 1e-12).then_some(m as i64)
}

fn parity(e: i64) -> f64 {
    if e.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `dω_n/dK` at a known branch point `(K, k, ω)`.
///
/// On `K ∈ [0, π]` odd branches increase and even ones decrease, which fixes
/// the sign of the ZWS slope.
pub fn domega_dk_floquet_at(
    profile: &MaterialProfile,
    big_k: f64,
    k: f64,
    n: usize,
    omega: f64,
    cfg: &QuadratureConfig,
) -> Result<KSlope> {
    if omega == 0.0 && k == 0.0 {
        let v = 1.0 / (profile.average(Average::Rho) * profile.average(Average::InvMu1)).sqrt();
        return Ok(KSlope::Origin(v));
    }
    let prop = PeriodPropagator::real(profile, omega * omega, k * k, cfg)?;
    let first = first_derivatives_from(&prop);
    let d_domega = 2.0 * omega * first.d_dw2;
    let Some(m) = zone_point(big_k) else {
        return Ok(KSlope::Interior(-big_k.sin() / d_domega));
    };
    let mono = prop.monodromy_matrix();
    if zws_residual(&mono, parity(m)) <= TOL_ZWS {
        let b = full_bundle(profile, omega * omega, k * k, cfg)?;
        let d2 = 2.0 * b.d_dw2 + 4.0 * omega * omega * b.d2_dw2w2.unwrap_or(0.0);
        let magnitude = (parity(m + 1) * d2).sqrt();
        return Ok(KSlope::Zws(parity(n as i64 + 1) / magnitude));
    }
    Ok(KSlope::Cutoff { second: parity(m + 1) / d_domega })
}

/// `dω_n/dK` at `(K, k)` on branch `n`.
pub fn domega_d_big_k(profile: &MaterialProfile, big_k: f64, k: f64, n: usize, cfg: &QuadratureConfig) -> Result<KSlope> {
    let omega = branch_omega(profile, big_k, k, n, cfg)?;
    domega_dk_floquet_at(profile, big_k, k, n, omega, cfg)
}

/// `dω_n/dk = −(k/ω)(∂Δ/∂k²)/(∂Δ/∂ω²)` at a branch point, with the special values
/// at `k = 0`.
pub fn domega_dk_at(profile: &MaterialProfile, k: f64, omega: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if k == 0.0 {
        return Ok(if omega == 0.0 {
            (profile.average(Average::Mu2) / profile.average(Average::Rho)).sqrt()
        } else {
            0.0
        });
    }
    let prop = PeriodPropagator::real(profile, omega * omega, k * k, cfg)?;
    let b = first_derivatives_from(&prop);
    if zws_residual(&prop.monodromy_matrix(), prop.monodromy_matrix().trace().re.signum()) <= TOL_ZWS {
        return Err(Error::ZwsDegenerate);
    }
    Ok(-(k / omega) * b.d_dk2 / b.d_dw2)
}

pub fn domega_dk(profile: &MaterialProfile, big_k: f64, k: f64, n: usize, cfg: &QuadratureConfig) -> Result<f64> {
    let omega = branch_omega(profile, big_k, k, n, cfg)?;
    domega_dk_at(profile, k, omega, cfg)
}

/// A Bloch mode sampled over the period.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochMode {
    pub big_k: f64,
    pub k: f64,
    pub omega: f64,
    /// Unit eigenvector of `M(1,0)` for `e^{iK}`.
    pub w: [C64; 2],
    /// `(y, u, μ₁u′)` samples.
    pub samples: Vec<(f64, C64, C64)>,
    /// `‖η(1) − e^{iK}η(0)‖`.
    pub quasi_residual: f64,
    pub integrals: ModeIntegrals,
}

impl BlochMode {
    /// `dω²/dk²` from the mode: `∫μ₂|u|²/∫ρ|u|²`.
    pub fn domega2_dk2(&self) -> f64 {
        self.integrals.mu2 / self.integrals.rho
    }

    /// `d(ω²/k²)/d(k²) = −∫μ₁|u′|²/(k⁴∫ρ|u|²)`.
    pub fn velocity_derivative(&self) -> f64 {
        -self.integrals.mu1_grad / (self.k.powi(4) * self.integrals.rho)
    }
}

/// The mode `η(y) = M(y,0)w` on branch `n` at `(K, k)`, sampled at `grid + 1` points.
pub fn bloch_eigenfunction(
    profile: &MaterialProfile,
    big_k: f64,
    k: f64,
    n: usize,
    grid: usize,
    cfg: &QuadratureConfig,
) -> Result<BlochMode> {
    let omega = branch_omega(profile, big_k, k, n, cfg)?;
    bloch_mode_at(profile, big_k, k, omega, grid, cfg)
}

pub fn bloch_mode_at(
    profile: &MaterialProfile,
    big_k: f64,
    k: f64,
    omega: f64,
    grid: usize,
    cfg: &QuadratureConfig,
) -> Result<BlochMode> {
    let prop = PeriodPropagator::real(profile, omega * omega, k * k, cfg)?;
    let mono = prop.monodromy_matrix();
    let q = C64::new(0.0, big_k).exp();
    let w = eigenvector(&mono, q);
    let grid = grid.max(1);
    let samples = (0..=grid)
        .map(|i| {
            let y = i as f64 / grid as f64;
            let eta = prop.at(y).apply(w);
            (y, eta[0], eta[1] * C64::new(0.0, -1.0))
        })
        .collect();
    let end = mono.apply(w);
    let quasi_residual = ((end[0] - q * w[0]).norm_sqr() + (end[1] - q * w[1]).norm_sqr()).sqrt();
    Ok(BlochMode { big_k, k, omega, w, samples, quasi_residual, integrals: mode_integrals(&prop, w) })
}

/// `ω_n²/k²` along a list of wavenumbers.
pub fn high_k_limit(profile: &MaterialProfile, big_k: f64, n: usize, ks: &[f64], cfg: &QuadratureConfig) -> Result<Vec<f64>> {
    ks.iter()
        .map(|&k| {
            if k == 0.0 {
                return Err(Error::InvalidArgument("k must be nonzero".into()));
            }
            let w = branch_omega(profile, big_k, k, n, cfg)?;
            Ok(w * w / (k * k))
        })
        .collect()
}

/// `M(1,0)` for real arguments.
pub fn monodromy_real(profile: &MaterialProfile, omega: f64, k: f64, cfg: &QuadratureConfig) -> Result<Mat2> {
    Ok(PeriodPropagator::real(profile, omega * omega, k * k, cfg)?.monodromy_matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::presets;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn unit() -> MaterialProfile {
        MaterialProfile::homogeneous(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn homogeneous_branches_fold_the_light_line() {
        let big_k = 0.7;
        let roots = floquet_branches(&unit(), big_k, 0.0, 12.0, &cfg()).unwrap();
        let expected = [big_k, 2.0 * PI - big_k, 2.0 * PI + big_k, 4.0 * PI - big_k];
        assert_eq!(roots.len(), 4);
        for (p, e) in roots.iter().zip(expected) {
            assert!((p.omega - e).abs() < 1e-11, "{p:?} vs {e}");
        }
        assert_eq!(roots.iter().map(|p| p.n).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn homogeneous_edges_are_double_and_gaps_empty() {
        let e = band_edges(&unit(), 0.0, 10.0, &cfg()).unwrap();
        assert_eq!(e.zone_centre[0].omega, 0.0);
        for p in &e.zone_edge {
            let target = PI * (2 * p.n.div_ceil(2) - 1) as f64;
            assert!((p.omega - target).abs() < 1e-7, "{p:?}");
        }
        assert!(e.zone_edge[0].double && e.zone_edge[1].double);
        for g in &e.gaps {
            assert_eq!(g.width(), 0.0);
        }
    }

    #[test]
    fn uniform_speed_shifts_branches() {
        let p = presets::uniform_speed();
        let base = floquet_branches(&p, 1.0, 0.0, 15.0, &cfg()).unwrap();
        for k in [1.0, 2.0] {
            let moved = floquet_branches(&p, 1.0, k, 16.0, &cfg()).unwrap();
            for (a, b) in base.iter().zip(&moved) {
                assert_eq!(a.n, b.n);
                assert!((b.omega - (a.omega * a.omega + k * k).sqrt()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn origin_slopes() {
        let p = presets::graded_cubic();
        let rho = p.average(Average::Rho);
        let inv = p.average(Average::InvMu1);
        let s = domega_d_big_k(&p, 0.0, 0.0, 1, &cfg()).unwrap();
        assert_eq!(s, KSlope::Origin(1.0 / (rho * inv).sqrt()));
        let v = domega_dk(&p, 0.0, 0.0, 1, &cfg()).unwrap();
        assert!((v - (p.average(Average::Mu2) / rho).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn slope_matches_finite_difference() {
        let p = presets::graded_cubic();
        let cfg = cfg();
        for n in 1..=3 {
            let (kk, k) = (1.1, 1.0);
            let h = 1e-5;
            let fd = (branch_omega(&p, kk + h, k, n, &cfg).unwrap() - branch_omega(&p, kk - h, k, n, &cfg).unwrap())
                / (2.0 * h);
            let s = domega_d_big_k(&p, kk, k, n, &cfg).unwrap().first();
            assert!((s - fd).abs() < 1e-6 * s.abs().max(1.0), "n = {n}: {s} vs {fd}");
            let fdk = (branch_omega(&p, kk, k + h, n, &cfg).unwrap() - branch_omega(&p, kk, k - h, n, &cfg).unwrap())
                / (2.0 * h);
            let sk = domega_dk(&p, kk, k, n, &cfg).unwrap();
            assert!((sk - fdk).abs() < 1e-6 * sk.abs().max(1.0), "n = {n}: {sk} vs {fdk}");
        }
    }

    #[test]
    fn cutoff_second_derivative_matches_branch_curvature() {
        let p = presets::graded_cubic();
        let cfg = cfg();
        let h = 1e-3;
        let at = branch_omega(&p, PI, 1.0, 1, &cfg).unwrap();
        let near = branch_omega(&p, PI - h, 1.0, 1, &cfg).unwrap();
        let KSlope::Cutoff { second } = domega_d_big_k(&p, PI, 1.0, 1, &cfg).unwrap() else { panic!() };
        let fd = 2.0 * (near - at) / (h * h);
        assert!((second - fd).abs() < 1e-4 * second.abs(), "{second} vs {fd}");
    }

    #[test]
    fn mode_identities_hold() {
        let p = presets::graded_cubic();
        let cfg = cfg();
        let mode = bloch_eigenfunction(&p, 1.3, 2.0, 2, 32, &cfg).unwrap();
        assert!(mode.quasi_residual < 1e-8, "{}", mode.quasi_residual);
        let v2 = mode.omega * mode.omega / 4.0;
        let lhs = v2 * mode.integrals.rho;
        let rhs = mode.integrals.mu1_grad / 4.0 + mode.integrals.mu2;
        assert!((lhs - rhs).abs() < 1e-9 * lhs, "{lhs} vs {rhs}");
        let direct = domega_dk(&p, 1.3, 2.0, 2, &cfg).unwrap();
        assert!((2.0 / mode.omega * mode.domega2_dk2() - direct).abs() < 1e-8 * direct.abs());
        assert!(mode.velocity_derivative() < 0.0);
    }

    #[test]
    fn homogeneous_mode_is_a_plane_wave() {
        let mode = bloch_mode_at(&unit(), 0.9, 0.0, 0.9, 16, &cfg()).unwrap();
        let u0 = mode.samples[0].1;
        for &(y, u, _) in &mode.samples {
            let expected = u0 * C64::new(0.0, 0.9 * y).exp();
            assert!((u - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn origin_is_not_a_zws() {
        let r = detect_zws(&unit(), 0.0, 0.0, &cfg()).unwrap();
        assert!(!r.confirmed);
    }

    #[test]
    fn uniform_speed_zws_confirmed() {
        let p = presets::uniform_speed();
        let r = detect_zws(&p, 4.0 * PI + 0.01, 0.0, &cfg()).unwrap();
        assert!(r.confirmed, "{r:?}");
        assert_eq!(r.sign, -1.0);
        assert!((r.omega * r.omega - r.k * r.k - 16.0 * PI * PI).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn dirichlet_neumann_of_homogeneous_medium() {
        let (d, n) = dirichlet_neumann(&unit(), 0.0, 0.0, 10.0, &cfg()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(n.len(), 4);
        for (j, w) in d.iter().enumerate() {
            assert!((w - PI * (j + 1) as f64).abs() < 1e-10);
        }
        assert_eq!(n[0], 0.0);
    }
}
