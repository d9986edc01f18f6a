//! Propagators M(y, y₀) of the first-order system η′ = Qη with η = (u, iμ₁u′).

use crate::error::{Error, Result};
use crate::linalg::{Mat2, I, ONE, ZERO};
use crate::profile::{Material, MaterialProfile, Segment};
use num_complex::Complex64 as C64;

/// Default tolerance on |det M − 1|.
pub const EPS_DET: f64 = 1e-10;
/// Default tolerance on the realness pattern of M for real arguments.
pub const EPS_SYM: f64 = 1e-9;

/// Product-integration rule used on non-constant segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Coefficients frozen at each sub-slab midpoint (second order).
    MidpointFrozen,
    /// Two-point Gauss rule with one commutator (fourth order).
    FourthOrderCommutator,
    /// Three-point Gauss rule with nested commutators (sixth order).
    SixthOrderCommutator,
}

impl Scheme {
    fn order(self) -> i32 {
        match self {
            Scheme::MidpointFrozen => 2,
            Scheme::FourthOrderCommutator => 4,
            Scheme::SixthOrderCommutator => 6,
        }
    }

    /// Sub-slabs per radian of local phase for the first trial.
    fn density(self) -> f64 {
        match self {
            Scheme::MidpointFrozen => 40.0,
            Scheme::FourthOrderCommutator => 4.0,
            Scheme::SixthOrderCommutator => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::MidpointFrozen => "midpoint-frozen",
            Scheme::FourthOrderCommutator => "fourth-order-commutator",
            Scheme::SixthOrderCommutator => "sixth-order-commutator",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Scheme::MidpointFrozen, Scheme::FourthOrderCommutator, Scheme::SixthOrderCommutator]
            .into_iter()
            .find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Largest number of sub-slabs allowed on one segment.
    pub max_subdivision: usize,
    pub scheme: Scheme,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivision: 1 << 16,
            scheme: Scheme::SixthOrderCommutator,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(tol: f64) -> Self {
        QuadratureConfig { abs_tol: tol, rel_tol: tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if self.max_subdivision < 8 {
            return Err(Error::InvalidArgument("max_subdivision must be at least 8".into()));
        }
        Ok(())
    }
}

/// A propagator with the point it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matricant2 {
    pub matrix: Mat2,
    pub omega2: C64,
    pub k2: C64,
    pub y: f64,
    pub y0: f64,
    /// Estimated absolute error of the entries.
    pub error_estimate: f64,
}

impl Matricant2 {
    pub fn m1(&self) -> C64 {
        self.matrix.m1
    }
    pub fn m2(&self) -> C64 {
        self.matrix.m2
    }
    pub fn m3(&self) -> C64 {
        self.matrix.m3
    }
    pub fn m4(&self) -> C64 {
        self.matrix.m4
    }

    pub fn det_residual(&self) -> f64 {
        (self.matrix.det() - ONE).norm()
    }

    /// Largest of |Im M₁|, |Im M₄|, |Re M₂|, |Re M₃|; zero for an exactly structured matrix.
    pub fn structure_residual(&self) -> f64 {
        let m = &self.matrix;
        m.m1.im.abs().max(m.m4.im.abs()).max(m.m2.re.abs()).max(m.m3.re.abs())
    }

    pub fn half_trace(&self) -> C64 {
        self.matrix.trace() * 0.5
    }
}

/// Periodic functions `im₂,₃(y) = M₂,₃(y+1, y)`, `m₁,₄(y) = M₁,₄(y+1, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyRow {
    pub y: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl MonodromyRow {
    fn from_matrix(y: f64, m: &Mat2) -> Self {
        MonodromyRow { y, m1: m.m1.re, m2: m.m2.im, m3: m.m3.im, m4: m.m4.re }
    }

    /// `m₁m₄ + m₂m₃`, equal to det M.
    pub fn det(&self) -> f64 {
        self.m1 * self.m4 + self.m2 * self.m3
    }
}

/// `Q = i·[[0, −1/μ₁], [μ₂k² − ρω², 0]]`.
#[inline]
pub fn q_of(m: Material, omega2: C64, k2: C64) -> Mat2 {
    Mat2::new(ZERO, C64::new(0.0, -1.0 / m.mu1), I * (k2 * m.mu2 - omega2 * m.rho), ZERO)
}

pub fn q_matrix(profile: &MaterialProfile, y: f64, omega2: C64, k2: C64) -> Result<Mat2> {
    Ok(q_of(profile.sample(y)?, omega2, k2))
}

/// One product-integration step over `[a, a + h]` inside a segment.
fn step(seg: &Segment, a: f64, h: f64, omega2: C64, k2: C64, scheme: Scheme) -> Mat2 {
    let q = |y: f64| q_of(seg.eval(y), omega2, k2);
    let omega = match scheme {
        Scheme::MidpointFrozen => q(a + 0.5 * h).scale_re(h),
        Scheme::FourthOrderCommutator => {
            const D: f64 = 0.288_675_134_594_812_9; // √3/6
            let a1 = q(a + (0.5 - D) * h);
            let a2 = q(a + (0.5 + D) * h);
            (a1 + a2).scale_re(0.5 * h) + a2.commutator(&a1).scale_re(3f64.sqrt() / 12.0 * h * h)
        }
        Scheme::SixthOrderCommutator => {
            const D: f64 = 0.387_298_334_620_741_7; // √15/10
            let a1 = q(a + (0.5 - D) * h);
            let a2 = q(a + 0.5 * h);
            let a3 = q(a + (0.5 + D) * h);
            let al1 = a2.scale_re(h);
            let al2 = (a3 - a1).scale_re(15f64.sqrt() * h / 3.0);
            let al3 = (a3 - a2.scale_re(2.0) + a1).scale_re(10.0 * h / 3.0);
            let c1 = al1.commutator(&al2);
            let c2 = al1.commutator(&(al3.scale_re(2.0) + c1)).scale_re(-1.0 / 60.0);
            let left = al1.scale_re(-20.0) - al3 + c1;
            al1 + al3.scale_re(1.0 / 12.0) + left.commutator(&(al2 + c2)).scale_re(1.0 / 240.0)
        }
    };
    omega.expm_traceless()
}

/// Exact propagator of a homogeneous slab of thickness `h`.
fn exact_step(m: Material, h: f64, omega2: C64, k2: C64) -> Mat2 {
    q_of(m, omega2, k2).scale_re(h).expm_traceless()
}

/// Crude bound on the local wavenumber `√|ρω² − μ₂k²|/√μ₁` over a segment.
fn local_rate(seg: &Segment, omega2: C64, k2: C64) -> f64 {
    (0..=8)
        .map(|i| {
            let y = seg.from + seg.len() * i as f64 / 8.0;
            let m = seg.eval(y);
            ((omega2 * m.rho - k2 * m.mu2).norm() / m.mu1).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Ordered product of `n` steps over `[a, b]`, optionally recording partial products.
fn product(
    seg: &Segment,
    a: f64,
    b: f64,
    n: usize,
    omega2: C64,
    k2: C64,
    scheme: Scheme,
    mut nodes: Option<&mut Vec<Mat2>>,
) -> Mat2 {
    let h = (b - a) / n as f64;
    let mut acc = Mat2::IDENTITY;
    if let Some(v) = nodes.as_deref_mut() {
        v.clear();
        v.push(acc);
    }
    for j in 0..n {
        acc = step(seg, a + j as f64 * h, h, omega2, k2, scheme) * acc;
        if let Some(v) = nodes.as_deref_mut() {
            v.push(acc);
        }
    }
    acc
}

struct Adaptive {
    matrix: Mat2,
    steps: usize,
    error: f64,
    converged: bool,
    nodes: Vec<Mat2>,
}

/// Step-doubling on one smooth piece `[a, b]` of a segment.
fn adaptive_product(
    seg: &Segment,
    a: f64,
    b: f64,
    omega2: C64,
    k2: C64,
    cfg: &QuadratureConfig,
    keep_nodes: bool,
) -> Adaptive {
    let frac = (b - a) / seg.len();
    let phase = local_rate(seg, omega2, k2) * (b - a);
    let max_steps = ((cfg.max_subdivision as f64 * frac).ceil() as usize).max(2);
    let mut n = ((cfg.scheme.density() * (phase + 1.0)).ceil() as usize).clamp(1, max_steps);
    let mut nodes_prev = Vec::new();
    let mut nodes_next = Vec::new();
    let mut prev = product(seg, a, b, n, omega2, k2, cfg.scheme, keep_nodes.then_some(&mut nodes_prev));
    let factor = (2f64.powi(cfg.scheme.order()) - 1.0).recip();
    loop {
        let next_n = 2 * n;
        let next = product(seg, a, b, next_n, omega2, k2, cfg.scheme, keep_nodes.then_some(&mut nodes_next));
        let diff = (next - prev).max_abs();
        let scale = next.max_abs().max(1.0);
        let error = diff * factor;
        if error <= cfg.abs_tol + cfg.rel_tol * scale || !next.is_finite() {
            return Adaptive { matrix: next, steps: next_n, error, converged: next.is_finite(), nodes: nodes_next };
        }
        if 2 * next_n > max_steps {
            return Adaptive { matrix: next, steps: next_n, error, converged: false, nodes: nodes_next };
        }
        n = next_n;
        prev = next;
        std::mem::swap(&mut nodes_prev, &mut nodes_next);
    }
}

/// Propagation over one period with `M(y, 0)` cached at every sub-slab boundary.
///
/// Cheap repeated access to `M(y, 0)`, `M(y, y₀)` and `M(y+1, y)` for a fixed
/// `(ω², k²)` is what the derivative integrals and Green function need.
#[derive(Debug, Clone)]
pub struct PeriodPropagator<'a> {
    profile: &'a MaterialProfile,
    omega2: C64,
    k2: C64,
    scheme: Scheme,
    /// Per segment: sub-slab count (0 for homogeneous) and `M(y_j, 0)` nodes.
    steps: Vec<usize>,
    nodes: Vec<Vec<Mat2>>,
    rates: Vec<f64>,
    error: f64,
    converged: bool,
}

impl<'a> PeriodPropagator<'a> {
    pub fn new(profile: &'a MaterialProfile, omega2: C64, k2: C64, cfg: &QuadratureConfig) -> Result<Self> {
        let p = Self::build(profile, omega2, k2, cfg);
        if !p.converged {
            let estimate = Matricant2 {
                matrix: p.monodromy_matrix(),
                omega2,
                k2,
                y: 1.0,
                y0: 0.0,
                error_estimate: p.error,
            };
            return Err(Error::ToleranceNotReached { estimate: Box::new(estimate), error: p.error });
        }
        Ok(p)
    }

    /// Real-argument convenience constructor.
    pub fn real(profile: &'a MaterialProfile, omega2: f64, k2: f64, cfg: &QuadratureConfig) -> Result<Self> {
        Self::new(profile, C64::new(omega2, 0.0), C64::new(k2, 0.0), cfg)
    }

    fn build(profile: &'a MaterialProfile, omega2: C64, k2: C64, cfg: &QuadratureConfig) -> Self {
        let segs = profile.segments();
        let mut steps = Vec::with_capacity(segs.len());
        let mut nodes = Vec::with_capacity(segs.len());
        let mut rates = Vec::with_capacity(segs.len());
        let mut acc = Mat2::IDENTITY;
        let mut error = 0.0;
        let mut converged = true;
        for seg in segs {
            rates.push(local_rate(seg, omega2, k2));
            if seg.is_constant() {
                let next = exact_step(seg.eval(seg.from), seg.len(), omega2, k2) * acc;
                nodes.push(vec![acc, next]);
                steps.push(0);
                acc = next;
            } else {
                let ad = adaptive_product(seg, seg.from, seg.to, omega2, k2, cfg, true);
                error += ad.error * acc.max_abs().max(1.0);
                converged &= ad.converged;
                nodes.push(ad.nodes.iter().map(|n| *n * acc).collect());
                steps.push(ad.steps);
                acc = ad.matrix * acc;
            }
        }
        PeriodPropagator { profile, omega2, k2, scheme: cfg.scheme, steps, nodes, rates, error, converged }
    }

    pub fn profile(&self) -> &'a MaterialProfile {
        self.profile
    }

    pub fn omega2(&self) -> C64 {
        self.omega2
    }

    pub fn k2(&self) -> C64 {
        self.k2
    }

    pub fn error_estimate(&self) -> f64 {
        self.error
    }

    /// Sub-slab counts per segment (0 marks an exactly propagated segment).
    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    /// Local wavenumber bound per segment.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// `M(1, 0)`.
    pub fn monodromy_matrix(&self) -> Mat2 {
        *self.nodes.last().and_then(|v| v.last()).expect("at least one segment")
    }

    /// `M(y, 0)` for `y ∈ [0, 1]`.
    pub fn at(&self, y: f64) -> Mat2 {
        let y = y.clamp(0.0, 1.0);
        if y >= 1.0 {
            return self.monodromy_matrix();
        }
        let i = self.profile.segment_index(y);
        let seg = &self.profile.segments()[i];
        let nodes = &self.nodes[i];
        let n = self.steps[i];
        if n == 0 {
            return exact_step(seg.eval(seg.from), y - seg.from, self.omega2, self.k2) * nodes[0];
        }
        let h = seg.len() / n as f64;
        let j = (((y - seg.from) / h).floor() as usize).min(n - 1);
        let yj = seg.from + j as f64 * h;
        let dy = y - yj;
        if dy <= 0.0 {
            return nodes[j];
        }
        step(seg, yj, dy, self.omega2, self.k2, self.scheme) * nodes[j]
    }

    /// `M(y, y₀)` for `0 ≤ y₀ ≤ 1` and `y₀ ≤ y ≤ 2`.
    pub fn between(&self, y: f64, y0: f64) -> Mat2 {
        let inv0 = self.at(y0).adjugate();
        if y <= 1.0 {
            self.at(y) * inv0
        } else {
            self.at(y - 1.0) * self.monodromy_matrix() * inv0
        }
    }

    /// `M(y+1, y) = M(y,0)·M(1,0)·M(y,0)⁻¹` for `y ∈ [0, 1]`.
    pub fn shifted_monodromy(&self, y: f64) -> Mat2 {
        let my = self.at(y);
        my * self.monodromy_matrix() * my.adjugate()
    }

    pub fn row(&self, y: f64) -> MonodromyRow {
        MonodromyRow::from_matrix(y, &self.shifted_monodromy(y))
    }

    pub fn matricant(&self, matrix: Mat2, y: f64, y0: f64) -> Matricant2 {
        Matricant2 { matrix, omega2: self.omega2, k2: self.k2, y, y0, error_estimate: self.error }
    }
}

/// Direct propagation of `M(y, y₀)` with periodic extension of the coefficients.
pub fn propagate(
    profile: &MaterialProfile,
    y0: f64,
    y: f64,
    omega2: C64,
    k2: C64,
    cfg: &QuadratureConfig,
) -> Result<Matricant2> {
    cfg.validate()?;
    if !(y0 >= 0.0 && y >= y0 && y.is_finite()) {
        return Err(Error::InvalidArgument(format!("need 0 ≤ y₀ ≤ y, got y₀ = {y0}, y = {y}")));
    }
    let mut acc = Mat2::IDENTITY;
    let mut error = 0.0;
    let mut converged = true;
    let segs = profile.segments();
    let mut cell = y0.floor();
    let mut i = profile.segment_index(y0 - cell);
    let mut a = y0 - cell;
    loop {
        let seg = &segs[i];
        let b = seg.to.min(y - cell);
        if b > a {
            if seg.is_constant() {
                acc = exact_step(seg.eval(seg.from), b - a, omega2, k2) * acc;
            } else {
                let ad = adaptive_product(seg, a, b, omega2, k2, cfg, false);
                error += ad.error * acc.max_abs().max(1.0);
                converged &= ad.converged;
                acc = ad.matrix * acc;
            }
        }
        if cell + seg.to >= y {
            break;
        }
        i += 1;
        if i == segs.len() {
            i = 0;
            cell += 1.0;
        }
        a = segs[i].from;
    }
    let m = Matricant2 { matrix: acc, omega2, k2, y, y0, error_estimate: error };
    if !converged {
        return Err(Error::ToleranceNotReached { estimate: Box::new(m), error });
    }
    Ok(m)
}

/// `M(y₀+1, y₀)` by direct propagation over one period.
pub fn monodromy(profile: &MaterialProfile, y0: f64, omega2: C64, k2: C64, cfg: &QuadratureConfig) -> Result<Matricant2> {
    if !(0.0..1.0).contains(&y0) {
        return Err(Error::OutOfDomain(y0));
    }
    propagate(profile, y0, y0 + 1.0, omega2, k2, cfg)
}

/// `M(y₀+1, y₀)` through the similarity `M(y₀,0)·M(1,0)·M(y₀,0)⁻¹`.
pub fn monodromy_similarity(
    profile: &MaterialProfile,
    y0: f64,
    omega2: C64,
    k2: C64,
    cfg: &QuadratureConfig,
) -> Result<Matricant2> {
    if !(0.0..1.0).contains(&y0) {
        return Err(Error::OutOfDomain(y0));
    }
    cfg.validate()?;
    let p = PeriodPropagator::new(profile, omega2, k2, cfg)?;
    Ok(p.matricant(p.shifted_monodromy(y0), y0 + 1.0, y0))
}

/// `m₁..m₄` on a grid of base points for real `(ω², k²)`.
pub fn m_functions(
    profile: &MaterialProfile,
    omega2: f64,
    k2: f64,
    grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<MonodromyRow>> {
    let p = PeriodPropagator::real(profile, omega2, k2, cfg)?;
    grid.iter()
        .map(|&y| {
            if !(0.0..=1.0).contains(&y) {
                return Err(Error::OutOfDomain(y));
            }
            Ok(p.row(y))
        })
        .collect()
}

/// A homogeneous layer for the closed-form bilayer propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub rho: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub thickness: f64,
}

impl Layer {
    pub fn new(rho: f64, mu1: f64, mu2: f64, thickness: f64) -> Self {
        Layer { rho, mu1, mu2, thickness }
    }

    /// `Z = √(ρμ₁)·√(1 − μ₂k²/(ρω²))` with principal roots.
    pub fn impedance(&self, omega: C64, k: C64) -> C64 {
        let z0 = (self.rho * self.mu1).sqrt();
        let ratio = k * k * self.mu2 / (omega * omega * self.rho);
        (ONE - ratio).sqrt() * z0
    }

    /// `ψ = ωZd/μ₁`.
    pub fn phase(&self, omega: C64, k: C64) -> C64 {
        omega * self.impedance(omega, k) * self.thickness / self.mu1
    }
}

/// Closed-form monodromy of a two-layer period (layer 1 first).
///
/// With `cⱼ = cos ψⱼ`, `sⱼ = sin ψⱼ`:
/// `M₁ = c₂c₁ − (Z₁/Z₂)s₂s₁`, `M₄ = c₂c₁ − (Z₂/Z₁)s₂s₁`,
/// `M₂ = −i[c₂s₁/(ωZ₁) + s₂c₁/(ωZ₂)]`, `M₃ = −iω[Z₂s₂c₁ + Z₁s₁c₂]`.
pub fn bilayer_monodromy(layer1: Layer, layer2: Layer, omega: C64, k: C64) -> Result<Matricant2> {
    let omega2 = omega * omega;
    let k2 = k * k;
    let total = layer1.thickness + layer2.thickness;
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("layer thicknesses sum to {total}, expected 1")));
    }
    let wrap = |matrix| Matricant2 { matrix, omega2, k2, y: 1.0, y0: 0.0, error_estimate: 0.0 };
    if omega == ZERO {
        if k != ZERO {
            return Err(Error::OmegaZero);
        }
        let flex = layer1.thickness / layer1.mu1 + layer2.thickness / layer2.mu1;
        return Ok(wrap(Mat2::new(ONE, C64::new(0.0, -flex), ZERO, ONE)));
    }
    let (z1, z2) = (layer1.impedance(omega, k), layer2.impedance(omega, k));
    let (p1, p2) = (layer1.phase(omega, k), layer2.phase(omega, k));
    const TINY: f64 = 1e-8;
    if z1.norm() < TINY || z2.norm() < TINY {
        // A layer sits at its turning point; use the removable-singularity form.
        let e1 = layer_matrix_sinc(layer1, omega2, k2);
        let e2 = layer_matrix_sinc(layer2, omega2, k2);
        return Ok(wrap(e2 * e1));
    }
    let (c1, s1) = (p1.cos(), p1.sin());
    let (c2, s2) = (p2.cos(), p2.sin());
    let m1 = c2 * c1 - z1 / z2 * s2 * s1;
    let m4 = c2 * c1 - z2 / z1 * s2 * s1;
    let m2 = -I * (c2 * s1 / (omega * z1) + s2 * c1 / (omega * z2));
    let m3 = -I * omega * (z2 * s2 * c1 + z1 * s1 * c2);
    Ok(wrap(Mat2::new(m1, m2, m3, m4)))
}

fn layer_matrix_sinc(layer: Layer, omega2: C64, k2: C64) -> Mat2 {
    let d = layer.thickness;
    let theta2 = (omega2 * layer.rho - k2 * layer.mu2) * (d * d / layer.mu1);
    let (c, sinc) = crate::linalg::cos_sinc_of_sq(theta2);
    Mat2::new(c, -I * sinc * (d / layer.mu1), -I * sinc * (omega2 * layer.rho - k2 * layer.mu2) * d, c)
}

/// The layers of a piecewise-constant profile, or `NotPiecewiseConstant`.
pub fn layers_of(profile: &MaterialProfile) -> Result<Vec<Layer>> {
    if !profile.is_piecewise_constant() {
        return Err(Error::NotPiecewiseConstant);
    }
    Ok(profile
        .segments()
        .iter()
        .map(|s| {
            let m = s.eval(s.from);
            Layer::new(m.rho, m.mu1, m.mu2, s.len())
        })
        .collect())
}

/// Monodromy of a piecewise-constant profile with each layer exponential replaced
/// by its Taylor polynomial `Σ_{n<terms} (Qd)ⁿ/n!`.
pub fn truncated_series_monodromy(profile: &MaterialProfile, omega2: C64, k2: C64, terms: usize) -> Result<Mat2> {
    let layers = layers_of(profile)?;
    let mut acc = Mat2::IDENTITY;
    for l in layers {
        let a = q_of(Material { rho: l.rho, mu1: l.mu1, mu2: l.mu2 }, omega2, k2).scale_re(l.thickness);
        let mut term = Mat2::IDENTITY;
        let mut sum = if terms > 0 { Mat2::IDENTITY } else { Mat2::scalar(ZERO) };
        for n in 1..terms {
            term = (term * a).scale_re(1.0 / n as f64);
            sum = sum + term;
        }
        acc = sum * acc;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{presets, Average};

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn q_matrix_examples() {
        let h = MaterialProfile::homogeneous(1.0, 1.0, 1.0).unwrap();
        let q = q_matrix(&h, 0.3, re(1.0), re(0.0)).unwrap();
        assert_eq!(q, Mat2::new(ZERO, -I, -I, ZERO));
        let soft = presets::soft_bilayer();
        let q = q_matrix(&soft, 0.1, re(1.0), re(1.0)).unwrap();
        assert_eq!(q.m2, -I);
        assert!((q.m3 - I * 0.15).norm() < 1e-15);
        assert!(q_matrix(&soft, 1.0, re(1.0), re(1.0)).is_err());
    }

    #[test]
    fn origin_propagator_is_shear_flexibility() {
        let p = presets::graded_cubic();
        let cfg = QuadratureConfig::default();
        let m = propagate(&p, 0.0, 1.0, ZERO, ZERO, &cfg).unwrap();
        let flex = p.average(Average::InvMu1);
        assert!((m.matrix.m2 - C64::new(0.0, -flex)).norm() < 1e-12);
        assert!((m.matrix.m1 - ONE).norm() < 1e-14 && m.matrix.m3.norm() < 1e-14);
    }

    #[test]
    fn homogeneous_closed_form() {
        let h = MaterialProfile::homogeneous(1.0, 1.0, 1.0).unwrap();
        let w: f64 = 2.7;
        let m = propagate(&h, 0.0, 1.0, re(w * w), ZERO, &QuadratureConfig::default()).unwrap().matrix;
        let exp = Mat2::new(re(w.cos()), C64::new(0.0, -w.sin() / w), C64::new(0.0, -w * w.sin()), re(w.cos()));
        assert!((m - exp).max_abs() < 1e-14);
    }

    #[test]
    fn schemes_converge_at_their_order() {
        let p = presets::graded_cubic();
        let seg = &p.segments()[0];
        let (w2, k2) = (re(9.0), re(1.0));
        let reference = product(seg, 0.0, 1.0, 4096, w2, k2, Scheme::SixthOrderCommutator, None);
        for scheme in [Scheme::MidpointFrozen, Scheme::FourthOrderCommutator, Scheme::SixthOrderCommutator] {
            let n = 16;
            let e1 = (product(seg, 0.0, 1.0, n, w2, k2, scheme, None) - reference).max_abs();
            let e2 = (product(seg, 0.0, 1.0, 2 * n, w2, k2, scheme, None) - reference).max_abs();
            let observed = (e1 / e2).log2();
            let expected = scheme.order() as f64;
            assert!((observed - expected).abs() < 0.4, "{scheme:?}: observed order {observed}");
        }
    }

    #[test]
    fn all_schemes_agree_at_default_tolerance() {
        let p = presets::graded_cubic();
        let base = propagate(&p, 0.0, 1.0, re(4.0), re(1.0), &QuadratureConfig::default()).unwrap().matrix;
        for scheme in [Scheme::MidpointFrozen, Scheme::FourthOrderCommutator] {
            let cfg = QuadratureConfig { scheme, abs_tol: 1e-10, rel_tol: 1e-10, max_subdivision: 1 << 20 };
            let m = propagate(&p, 0.0, 1.0, re(4.0), re(1.0), &cfg).unwrap().matrix;
            assert!((m - base).max_abs() < 1e-9, "{scheme:?}");
        }
    }

    #[test]
    fn tolerance_exhaustion_returns_estimate() {
        let p = presets::graded_cubic();
        let cfg = QuadratureConfig { abs_tol: 1e-16, rel_tol: 1e-16, max_subdivision: 8, scheme: Scheme::MidpointFrozen };
        match propagate(&p, 0.0, 1.0, re(100.0), ZERO, &cfg) {
            Err(Error::ToleranceNotReached { estimate, error }) => {
                assert!(error > 0.0);
                assert!(estimate.det_residual() < 1e-10);
            }
            other => panic!("expected ToleranceNotReached, got {other:?}"),
        }
    }

    #[test]
    fn direct_and_similarity_paths_agree() {
        let cfg = QuadratureConfig::default();
        for p in [presets::contrast_bilayer(), presets::graded_cubic()] {
            for y0 in [0.0, 0.3, 0.5, 0.7] {
                let a = monodromy(&p, y0, re(6.0), re(2.0), &cfg).unwrap().matrix;
                let b = monodromy_similarity(&p, y0, re(6.0), re(2.0), &cfg).unwrap().matrix;
                assert!((a - b).max_abs() < 1e-9, "y0 = {y0}");
                assert!((a.trace() - b.trace()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn propagation_across_several_periods() {
        let p = presets::contrast_bilayer();
        let cfg = QuadratureConfig::default();
        let one = propagate(&p, 0.25, 1.25, re(3.0), re(0.5), &cfg).unwrap().matrix;
        let two = propagate(&p, 0.25, 2.25, re(3.0), re(0.5), &cfg).unwrap().matrix;
        assert!((two - one * one).max_abs() < 1e-12);
    }

    #[test]
    fn bilayer_example_phases() {
        let l1 = Layer::new(1.0, 1.0, 1.0, 0.5);
        let l2 = Layer::new(2.0, 12.0, 12.0, 0.5);
        let (w, k) = (re(1.0), ZERO);
        assert!((l1.impedance(w, k) - ONE).norm() < 1e-15);
        assert!((l2.impedance(w, k) - re(24f64.sqrt())).norm() < 1e-14);
        assert!((l1.phase(w, k) - re(0.5)).norm() < 1e-15);
        assert!((l2.phase(w, k) - re(24f64.sqrt() / 24.0)).norm() < 1e-15);
    }

    #[test]
    fn identical_layers_collapse_to_homogeneous() {
        let l = Layer::new(1.0, 1.0, 1.0, 0.5);
        let w: f64 = 2.0;
        let m = bilayer_monodromy(l, l, re(w), ZERO).unwrap().matrix;
        assert!((m.m1 - re(w.cos())).norm() < 1e-14);
        assert!((m.m2 - C64::new(0.0, -w.sin() / w)).norm() < 1e-14);
    }

    #[test]
    fn bilayer_handles_evanescent_and_turning_layers() {
        let p = presets::contrast_bilayer();
        let layers = layers_of(&p).unwrap();
        let cfg = QuadratureConfig::default();
        // ω = k: layer 1 at its turning point; ω = 2k: layer 2 evanescent.
        for (w, k) in [(2.0, 2.0), (3.0, 1.5), (1.0, 3.0)] {
            let closed = bilayer_monodromy(layers[0], layers[1], re(w), re(k)).unwrap().matrix;
            let num = propagate(&p, 0.0, 1.0, re(w * w), re(k * k), &cfg).unwrap().matrix;
            assert!((closed - num).max_abs() < 1e-9 * num.max_abs().max(1.0), "({w},{k})");
        }
        assert!(matches!(bilayer_monodromy(layers[0], layers[1], ZERO, ONE), Err(Error::OmegaZero)));
    }

    #[test]
    fn truncated_series_converges_to_exact() {
        let p = presets::soft_bilayer();
        let exact = propagate(&p, 0.0, 1.0, re(3.4 * 3.4), re(1.0), &QuadratureConfig::default()).unwrap().matrix;
        let t4 = truncated_series_monodromy(&p, re(3.4 * 3.4), re(1.0), 4).unwrap();
        let t30 = truncated_series_monodromy(&p, re(3.4 * 3.4), re(1.0), 30).unwrap();
        assert!((t30 - exact).max_abs() < 1e-13);
        assert!((t4 - exact).max_abs() > 1e-3);
        assert!(matches!(
            truncated_series_monodromy(&presets::graded_cubic(), ONE, ONE, 4),
            Err(Error::NotPiecewiseConstant)
        ));
    }

    #[test]
    fn passband_m_functions() {
        let p = presets::graded_cubic();
        let cfg = QuadratureConfig::default();
        let delta = propagate(&p, 0.0, 1.0, re(4.0), ZERO, &cfg).unwrap().half_trace().re;
        assert!(delta.abs() < 1.0);
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
        let rows = m_functions(&p, 4.0, 0.0, &grid, &cfg).unwrap();
        let sign = rows[0].m2.signum();
        for r in &rows {
            assert_eq!(r.m2.signum(), sign);
            assert!(r.m2 * r.m3 > 0.0);
            assert!((r.det() - 1.0).abs() < 1e-10);
            assert!((0.5 * (r.m1 + r.m4) - delta).abs() < 1e-10);
        }
    }

    #[test]
    fn m2_derivative_matches_diagonal_difference() {
        let p = presets::graded_cubic();
        let cfg = QuadratureConfig::default();
        let prop = PeriodPropagator::real(&p, 4.0, 1.0, &cfg).unwrap();
        for &y in &[0.2, 0.45, 0.8] {
            let h = 1e-4;
            let d = (prop.row(y + h).m2 - prop.row(y - h).m2) / (2.0 * h);
            let r = prop.row(y);
            let mu1 = p.sample(y).unwrap().mu1;
            assert!((d - (r.m1 - r.m4) / mu1).abs() < 1e-6, "y = {y}");
        }
    }

    #[test]
    fn symmetric_profile_has_equal_diagonal() {
        let p = MaterialProfile::unit(vec![
            crate::profile::Segment::constant(0.0, 0.3, 1.0, 2.0, 1.5),
            crate::profile::Segment::constant(0.3, 0.7, 3.0, 1.0, 0.5),
            crate::profile::Segment::constant(0.7, 1.0, 1.0, 2.0, 1.5),
        ])
        .unwrap();
        let m = propagate(&p, 0.0, 1.0, re(7.0), re(2.0), &QuadratureConfig::default()).unwrap().matrix;
        assert!((m.m1 - m.m4).norm() < EPS_SYM);
    }
}
