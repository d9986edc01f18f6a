//! The Lyapunov function Δ(ω², k²) = ½ tr M(1,0), Floquet K and derivatives of Δ.

use crate::error::{Error, Result};
use crate::linalg::{Mat2, ONE};
use crate::matricant::{propagate, PeriodPropagator, QuadratureConfig};
use crate::profile::{Average, MaterialProfile};
use crate::quad::gl10;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Half-width of the band around |Δ| = 1 classified as a cutoff.
pub const EPS_CUT: f64 = 1e-9;
/// Entry-wise distance of M(1,0) from ±I treated as degenerate by the eigenvector formula.
pub const EPS_ZWS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Passband,
    CutoffPlus,
    CutoffMinus,
    Stopband,
}

impl Classification {
    pub fn of(delta: f64) -> Self {
        if (delta - 1.0).abs() <= EPS_CUT {
            Classification::CutoffPlus
        } else if (delta + 1.0).abs() <= EPS_CUT {
            Classification::CutoffMinus
        } else if delta.abs() < 1.0 {
            Classification::Passband
        } else {
            Classification::Stopband
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Classification::Passband => "passband",
            Classification::CutoffPlus => "cutoff+",
            Classification::CutoffMinus => "cutoff-",
            Classification::Stopband => "stopband",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSample {
    pub omega2: C64,
    pub k2: C64,
    pub delta: C64,
    /// Classification of `Re Δ`; only meaningful for real arguments.
    pub classification: Classification,
    /// Floquet parameter with `Re K ∈ [0, π]`.
    pub floquet_k: C64,
    /// Set at ω = k = 0, where Δ = 1 without a zero-width gap.
    pub origin: bool,
}

/// Δ(ω², k²) for complex arguments.
pub fn delta(profile: &MaterialProfile, omega2: C64, k2: C64, cfg: &QuadratureConfig) -> Result<LyapunovSample> {
    let m = propagate(profile, 0.0, 1.0, omega2, k2, cfg)?;
    let d = m.half_trace();
    let real_args = omega2.im == 0.0 && k2.im == 0.0;
    let floquet_k = if real_args { floquet_k(d.re) } else { floquet_k_complex(d) };
    Ok(LyapunovSample {
        omega2,
        k2,
        delta: d,
        classification: Classification::of(d.re),
        floquet_k,
        origin: omega2 == C64::new(0.0, 0.0) && k2 == C64::new(0.0, 0.0),
    })
}

/// Δ for real arguments.
pub fn delta_real(profile: &MaterialProfile, omega2: f64, k2: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(propagate(profile, 0.0, 1.0, C64::new(omega2, 0.0), C64::new(k2, 0.0), cfg)?.half_trace().re)
}

/// Maps a real Δ to K on the strip `Re K ∈ [0, π]`, `Im K ≥ 0`.
pub fn floquet_k(delta: f64) -> C64 {
    if delta > 1.0 {
        C64::new(0.0, delta.acosh())
    } else if delta < -1.0 {
        C64::new(PI, (-delta).acosh())
    } else {
        C64::new(delta.acos(), 0.0)
    }
}

/// Principal `arccos` for complex Δ (`Re K ∈ [0, π]`).
pub fn floquet_k_complex(delta: C64) -> C64 {
    let k = delta.acos();
    if k.re < 0.0 {
        -k
    } else {
        k
    }
}

/// Quadratic expansion `1 + ½⟨μ₁⁻¹⟩(⟨μ₂⟩k² − ⟨ρ⟩ω²)` around the origin.
pub fn delta_small(profile: &MaterialProfile, omega2: f64, k2: f64) -> f64 {
    let flex = profile.average(Average::InvMu1);
    1.0 + 0.5 * flex * (profile.average(Average::Mu2) * k2 - profile.average(Average::Rho) * omega2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMethod {
    Integral,
    Eigen,
    FiniteDiff,
}

/// First (and optionally second) partial derivatives of Δ in ω² and k².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBundle {
    pub d_dw2: f64,
    pub d_dk2: f64,
    pub d2_dw2w2: Option<f64>,
    pub d2_dk2k2: Option<f64>,
    pub d2_dw2k2: Option<f64>,
    pub method: DerivativeMethod,
}

impl DerivativeBundle {
    fn first(d_dw2: f64, d_dk2: f64, method: DerivativeMethod) -> Self {
        DerivativeBundle { d_dw2, d_dk2, d2_dw2w2: None, d2_dk2k2: None, d2_dw2k2: None, method }
    }
}

/// Quadrature nodes over one period, aligned with segment boundaries.
pub(crate) struct PanelNodes {
    /// Panel boundaries in increasing order.
    pub panels: Vec<(f64, f64)>,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    /// Panel index of each node.
    pub panel_of: Vec<usize>,
}

/// Largest local phase per panel; GL10 resolves this to near machine precision.
const PANEL_PHASE: f64 = 0.6;

impl PanelNodes {
    pub fn new(prop: &PeriodPropagator) -> Self {
        let profile = prop.profile();
        let mut panels = Vec::new();
        for (seg, &rate) in profile.segments().iter().zip(prop.rates()) {
            let min = if seg.is_constant() { 1 } else { 4 };
            let n = ((rate * seg.len() / PANEL_PHASE).ceil() as usize).max(min);
            for j in 0..n {
                let a = seg.from + seg.len() * j as f64 / n as f64;
                let b = seg.from + seg.len() * (j + 1) as f64 / n as f64;
                panels.push((a, b));
            }
        }
        let (gx, gw) = gl10();
        let mut x = Vec::with_capacity(panels.len() * gx.len());
        let mut w = Vec::with_capacity(x.capacity());
        let mut panel_of = Vec::with_capacity(x.capacity());
        for (p, &(a, b)) in panels.iter().enumerate() {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (xi, wi) in gx.iter().zip(gw) {
                x.push(mid + half * xi);
                w.push(wi * half);
                panel_of.push(p);
            }
        }
        PanelNodes { panels, x, w, panel_of }
    }
}

fn check_real(omega2: f64, k2: f64) -> Result<()> {
    if omega2.is_finite() && k2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("non-finite (ω², k²) = ({omega2}, {k2})")))
    }
}

/// `∂Δ/∂ω² = ½∫ρm₂`, `∂Δ/∂k² = −½∫μ₂m₂`; valid in passbands and stopbands alike.
pub fn d_delta_integral(profile: &MaterialProfile, omega2: f64, k2: f64, cfg: &QuadratureConfig) -> Result<DerivativeBundle> {
    check_real(omega2, k2)?;
    let prop = PeriodPropagator::real(profile, omega2, k2, cfg)?;
    Ok(first_derivatives_from(&prop))
}

pub(crate) fn first_derivatives_from(prop: &PeriodPropagator) -> DerivativeBundle {
    let nodes = PanelNodes::new(prop);
    let profile = prop.profile();
    let (mut sr, mut sm) = (0.0, 0.0);
    for (&x, &w) in nodes.x.iter().zip(&nodes.w) {
        let m2 = prop.shifted_monodromy(x).m2.im;
        let mat = profile.segments()[profile.segment_index(x)].eval(x);
        sr += w * mat.rho * m2;
        sm += w * mat.mu2 * m2;
    }
    DerivativeBundle::first(0.5 * sr, -0.5 * sm, DerivativeMethod::Integral)
}

/// First derivatives from the Bloch eigenvector of M(1,0).
///
/// In an open passband `∂Δ/∂ω² = sin K/(w⁺Tw)·∫ρ|u|²`; at a cutoff the proper
/// and generalized eigenvectors give `∂Δ/∂ω² = ∫ρ|u|²/(2i·w_d⁺Tw_g)`, with
/// `u` the first component of `M(y,0)w` and `T = [[0,1],[1,0]]`.
pub fn d_delta_eigen(profile: &MaterialProfile, omega2: f64, k2: f64, cfg: &QuadratureConfig) -> Result<DerivativeBundle> {
    check_real(omega2, k2)?;
    let prop = PeriodPropagator::real(profile, omega2, k2, cfg)?;
    let m = prop.monodromy_matrix();
    let delta = 0.5 * m.trace().re;
    if delta.abs() > 1.0 + EPS_CUT {
        return Err(Error::NotInPassband { delta });
    }
    let at_cutoff = delta.abs() >= 1.0 - EPS_CUT;
    if at_cutoff {
        let sign = delta.signum();
        if (m - Mat2::scalar(C64::new(sign, 0.0))).max_abs() <= EPS_ZWS {
            return Err(Error::ZwsDegenerate);
        }
    }
    let q = if at_cutoff { C64::new(delta.signum(), 0.0) } else { C64::new(0.0, floquet_k(delta).re).exp() };
    let w = eigenvector(&m, q);
    let norms = mode_integrals(&prop, w);
    let (int_rho, int_mu2) = (C64::new(norms.rho, 0.0), C64::new(norms.mu2, 0.0));
    let factor = if at_cutoff {
        let wtw = cutoff_pairing(&m, q, w);
        (C64::new(0.0, 2.0) * wtw).inv()
    } else {
        let wtw = 2.0 * (w[0].conj() * w[1]).re;
        C64::new(floquet_k(delta).re.sin() / wtw, 0.0)
    };
    Ok(DerivativeBundle::first((factor * int_rho).re, -(factor * int_mu2).re, DerivativeMethod::Eigen))
}

/// Eigenvector of `m` for eigenvalue `q`, from whichever row is better conditioned.
pub(crate) fn eigenvector(m: &Mat2, q: C64) -> [C64; 2] {
    let a = [m.m2, q - m.m1];
    let b = [q - m.m4, m.m3];
    let na = a[0].norm_sqr() + a[1].norm_sqr();
    let nb = b[0].norm_sqr() + b[1].norm_sqr();
    let (v, n) = if na >= nb { (a, na) } else { (b, nb) };
    if n < 1e-300 {
        // M = qI: every vector is an eigenvector.
        return [ONE, C64::new(0.0, 0.0)];
    }
    let s = n.sqrt().recip();
    [v[0] * s, v[1] * s]
}

/// `w_d⁺Tw_g` at a cutoff, in the closed form that avoids solving for `w_g`:
/// `|w_d|²M₂*/(|M₁−q|² + |M₂|²)`, or the equivalent form in M₃, M₄.
pub(crate) fn cutoff_pairing(m: &Mat2, q: C64, w: [C64; 2]) -> C64 {
    let wn = w[0].norm_sqr() + w[1].norm_sqr();
    let a = (m.m1 - q).norm_sqr() + m.m2.norm_sqr();
    let b = (m.m4 - q).norm_sqr() + m.m3.norm_sqr();
    if a >= b {
        m.m2.conj() * (wn / a)
    } else {
        m.m3.conj() * (wn / b)
    }
}

/// Weighted norms of the mode `η = M(y,0)w = (u, iμ₁u′)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeIntegrals {
    /// `∫ρ|u|²`
    pub rho: f64,
    /// `∫μ₂|u|²`
    pub mu2: f64,
    /// `∫μ₁|u′|²`
    pub mu1_grad: f64,
}

pub(crate) fn mode_integrals(prop: &PeriodPropagator, w: [C64; 2]) -> ModeIntegrals {
    let nodes = PanelNodes::new(prop);
    let profile = prop.profile();
    let mut out = ModeIntegrals { rho: 0.0, mu2: 0.0, mu1_grad: 0.0 };
    for (&x, &wt) in nodes.x.iter().zip(&nodes.w) {
        let eta = prop.at(x).apply(w);
        let mat = profile.segments()[profile.segment_index(x)].eval(x);
        let u2 = eta[0].norm_sqr();
        out.rho += wt * mat.rho * u2;
        out.mu2 += wt * mat.mu2 * u2;
        out.mu1_grad += wt * eta[1].norm_sqr() / mat.mu1;
    }
    out
}

/// Central differences of Δ with a step relative to the scale of each variable.
pub fn d_delta_fd(profile: &MaterialProfile, omega2: f64, k2: f64, cfg: &QuadratureConfig) -> Result<DerivativeBundle> {
    check_real(omega2, k2)?;
    let f = |a: f64, b: f64| delta_real(profile, a, b, cfg);
    let hw = 1e-4 * omega2.abs().max(1.0);
    let hk = 1e-4 * k2.abs().max(1.0);
    let dw = (f(omega2 + hw, k2)? - f(omega2 - hw, k2)?) / (2.0 * hw);
    let dk = (f(omega2, k2 + hk)? - f(omega2, k2 - hk)?) / (2.0 * hk);
    Ok(DerivativeBundle::first(dw, dk, DerivativeMethod::FiniteDiff))
}

/// Which second derivative of Δ to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Second {
    Omega2Omega2,
    K2K2,
    Omega2K2,
}

/// Second partial derivatives `(∂²Δ/∂(ω²)², ∂²Δ/∂(k²)², ∂²Δ/∂ω²∂k²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hessian {
    pub ww: f64,
    pub kk: f64,
    pub wk: f64,
}

impl Hessian {
    pub fn get(&self, which: Second) -> f64 {
        match which {
            Second::Omega2Omega2 => self.ww,
            Second::K2K2 => self.kk,
            Second::Omega2K2 => self.wk,
        }
    }
}

pub fn d2_delta(profile: &MaterialProfile, omega2: f64, k2: f64, cfg: &QuadratureConfig, which: Second) -> Result<f64> {
    Ok(hessian(profile, omega2, k2, cfg)?.get(which))
}

pub fn hessian(profile: &MaterialProfile, omega2: f64, k2: f64, cfg: &QuadratureConfig) -> Result<Hessian> {
    check_real(omega2, k2)?;
    let prop = PeriodPropagator::real(profile, omega2, k2, cfg)?;
    Ok(hessian_from(&prop))
}

/// First and second derivatives from one propagation.
pub fn full_bundle(profile: &MaterialProfile, omega2: f64, k2: f64, cfg: &QuadratureConfig) -> Result<DerivativeBundle> {
    check_real(omega2, k2)?;
    let prop = PeriodPropagator::real(profile, omega2, k2, cfg)?;
    let mut b = first_derivatives_from(&prop);
    let h = hessian_from(&prop);
    b.d2_dw2w2 = Some(h.ww);
    b.d2_dk2k2 = Some(h.kk);
    b.d2_dw2k2 = Some(h.wk);
    Ok(b)
}

/// Nested quadrature over `0 ≤ ς₂ ≤ ς₁ ≤ 1` of `F·M₂(ς₂+1, ς₁)·M₂(ς₁, ς₂)`:
/// `∂²Δ/∂(ω²)² = −∫∫ρρ·K`, `∂²Δ/∂(k²)² = −∫∫μ₂μ₂·K`,
/// `∂²Δ/∂ω²∂k² = ½∫∫(ρ₁μ₂₂ + μ₂₁ρ₂)·K`.
pub(crate) fn hessian_from(prop: &PeriodPropagator) -> Hessian {
    let profile = prop.profile();
    let nodes = PanelNodes::new(prop);
    let mono = prop.monodromy_matrix();
    let coef = |x: f64| {
        let m = profile.segments()[profile.segment_index(x)].eval(x);
        (m.rho, m.mu2)
    };
    struct Node {
        m: Mat2,
        p: Mat2,
        rho: f64,
        mu2: f64,
        w: f64,
    }
    let make = |x: f64, w: f64| {
        let m = prop.at(x);
        let (rho, mu2) = coef(x);
        Node { m, p: m * mono, rho, mu2, w }
    };
    let all: Vec<Node> = nodes.x.iter().zip(&nodes.w).map(|(&x, &w)| make(x, w)).collect();
    // M₂(ς₂+1, ς₁)·M₂(ς₁, ς₂) for outer node `a` (ς₁) and inner node `b` (ς₂).
    let kernel = |a: &Node, b: &Node| -> f64 {
        let m12_inner = a.m.m1 * (-b.m.m2) + a.m.m2 * b.m.m1;
        let m12_outer = b.p.m1 * (-a.m.m2) + b.p.m2 * a.m.m1;
        (m12_outer * m12_inner).re
    };
    let (gx, gw) = gl10();
    let (mut ww, mut kk, mut wk) = (0.0, 0.0, 0.0);
    let mut first_in_panel = 0;
    for (ia, a) in all.iter().enumerate() {
        let pa = nodes.panel_of[ia];
        if ia > 0 && nodes.panel_of[ia - 1] != pa {
            first_in_panel = ia;
        }
        let (mut sr, mut sm) = (0.0, 0.0);
        for b in &all[..first_in_panel] {
            let k = kernel(a, b) * b.w;
            sr += k * b.rho;
            sm += k * b.mu2;
        }
        let start = nodes.panels[pa].0;
        let (mid, half) = (0.5 * (start + nodes.x[ia]), 0.5 * (nodes.x[ia] - start));
        for (xi, wi) in gx.iter().zip(gw) {
            let b = make(mid + half * xi, wi * half);
            let k = kernel(a, &b) * b.w;
            sr += k * b.rho;
            sm += k * b.mu2;
        }
        ww += a.w * a.rho * sr;
        kk += a.w * a.mu2 * sm;
        wk += a.w * (a.rho * sm + a.mu2 * sr);
    }
    Hessian { ww: -ww, kk: -kk, wk: 0.5 * wk }
}

/// `∂²Δ/∂(ω²)²` through the symmetrised square form
/// `−½∫₀¹dy∫₀¹dy₁ ρ(y)ρ(y+y₁)M₂(y+1, y+y₁)M₂(y+y₁, y)`; used as a consistency check.
pub fn d2_dw2w2_square(profile: &MaterialProfile, omega2: f64, k2: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let prop = PeriodPropagator::real(profile, omega2, k2, cfg)?;
    let nodes = PanelNodes::new(&prop);
    let (gx, gw) = gl10();
    let rho = |x: f64| {
        let x = x - x.floor();
        profile.segments()[profile.segment_index(x)].rho.eval(x)
    };
    // M(t, s) for s ≤ t ≤ s + 1 with arbitrary s ∈ [0, 2).
    let between = |t: f64, s: f64| -> Mat2 {
        let shift = s.floor();
        prop.between(t - shift, s - shift)
    };
    let mut total = 0.0;
    for (&y, &wy) in nodes.x.iter().zip(&nodes.w) {
        // Split y₁ ∈ [0,1] where y + y₁ crosses a segment boundary.
        let mut cuts: Vec<f64> = vec![0.0, 1.0];
        for b in profile.boundaries().into_iter().chain(std::iter::once(1.0)) {
            for shifted in [b - y, b + 1.0 - y] {
                if shifted > 0.0 && shifted < 1.0 {
                    cuts.push(shifted);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        let mut inner = 0.0;
        for pair in cuts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let pieces = ((prop.rates().iter().cloned().fold(0.0, f64::max) * (b - a) / PANEL_PHASE).ceil() as usize).max(1);
            for j in 0..pieces {
                let pa = a + (b - a) * j as f64 / pieces as f64;
                let pb = a + (b - a) * (j + 1) as f64 / pieces as f64;
                let (mid, half) = (0.5 * (pa + pb), 0.5 * (pb - pa));
                for (xi, wi) in gx.iter().zip(gw) {
                    let y1 = mid + half * xi;
                    let s = y + y1;
                    let outer = between(y + 1.0, s);
                    let inner_m = between(s, y);
                    inner += wi * half * rho(s) * (outer.m2 * inner_m.m2).re;
                }
            }
        }
        total += wy * rho(y) * inner;
    }
    Ok(-0.5 * total)
}

/// `ω`-derivatives from the `ω²` ones: `∂Δ/∂ω = 2ω∂Δ/∂ω²`,
/// `∂²Δ/∂ω² = 2∂Δ/∂ω² + 4ω²∂²Δ/∂(ω²)²`.
pub fn chain_first(x: f64, d_dx2: f64) -> f64 {
    2.0 * x * d_dx2
}

pub fn chain_second(x: f64, d_dx2: f64, d2_dx2x2: f64) -> f64 {
    2.0 * d_dx2 + 4.0 * x * x * d2_dx2x2
}

/// Distance of a monodromy matrix from `sign·I`.
pub fn zws_residual(m: &Mat2, sign: f64) -> f64 {
    (*m - Mat2::scalar(ONE * sign)).max_abs()
}
