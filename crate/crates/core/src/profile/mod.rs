//! Unit-period material profiles ρ(y), μ₁(y), μ₂(y).

mod file;
pub mod presets;

pub use file::{parse_profile, ProfileFile};

use crate::error::{Error, Result};
use crate::quad;
use crate::roots::golden_min;
use std::sync::OnceLock;

/// Pointwise coefficient values at one position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub rho: f64,
    pub mu1: f64,
    pub mu2: f64,
}

/// A scalar coefficient on one segment, in the global coordinate y.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFn {
    Constant(f64),
    /// Coefficients `c₀ + c₁y + c₂y² + …`.
    Polynomial(Vec<f64>),
    /// `(y, value)` knots with linear interpolation, strictly increasing in y.
    Sampled(Vec<(f64, f64)>),
    /// `c55 − c45²/c44`, the reduced shear stiffness of a monoclinic layer.
    Reduced {
        c44: Box<CoefficientFn>,
        c45: Box<CoefficientFn>,
        c55: Box<CoefficientFn>,
    },
}

impl CoefficientFn {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            CoefficientFn::Constant(v) => *v,
            CoefficientFn::Polynomial(c) => c.iter().rev().fold(0.0, |acc, ci| acc * y + ci),
            CoefficientFn::Sampled(knots) => interp(knots, y),
            CoefficientFn::Reduced { c44, c45, c55 } => {
                let c45 = c45.eval(y);
                c55.eval(y) - c45 * c45 / c44.eval(y)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            CoefficientFn::Constant(_) => true,
            CoefficientFn::Polynomial(c) => c.iter().skip(1).all(|&ci| ci == 0.0),
            CoefficientFn::Sampled(k) => k.windows(2).all(|w| w[0].1 == w[1].1),
            CoefficientFn::Reduced { c44, c45, c55 } => {
                c44.is_constant() && c45.is_constant() && c55.is_constant()
            }
        }
    }

    fn rescaled(&self, period: f64) -> CoefficientFn {
        match self {
            CoefficientFn::Constant(v) => CoefficientFn::Constant(*v),
            CoefficientFn::Polynomial(c) => CoefficientFn::Polynomial(
                c.iter().enumerate().map(|(i, ci)| ci * period.powi(i as i32)).collect(),
            ),
            CoefficientFn::Sampled(k) => {
                CoefficientFn::Sampled(k.iter().map(|&(y, v)| (y / period, v)).collect())
            }
            CoefficientFn::Reduced { c44, c45, c55 } => CoefficientFn::Reduced {
                c44: Box::new(c44.rescaled(period)),
                c45: Box::new(c45.rescaled(period)),
                c55: Box::new(c55.rescaled(period)),
            },
        }
    }

    /// ∫ₐᵇ f dy, exact for constants, polynomials and linear interpolants.
    fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            CoefficientFn::Constant(v) => v * (b - a),
            CoefficientFn::Polynomial(c) => {
                let anti = |y: f64| {
                    c.iter()
                        .enumerate()
                        .rev()
                        .fold(0.0, |acc, (i, ci)| acc * y + ci / (i as f64 + 1.0))
                        * y
                };
                anti(b) - anti(a)
            }
            CoefficientFn::Sampled(knots) => piecewise_linear_integral(knots, a, b, |y0, v0, y1, v1| {
                0.5 * (v0 + v1) * (y1 - y0)
            }),
            CoefficientFn::Reduced { .. } => quad::integrate(|y| self.eval(y), a, b, 1e-15),
        }
    }

    /// ∫ₐᵇ 1/f dy; exact for constants and linear interpolants.
    fn reciprocal_integral(&self, a: f64, b: f64) -> f64 {
        match self {
            CoefficientFn::Constant(v) => (b - a) / v,
            CoefficientFn::Sampled(knots) => {
                piecewise_linear_integral(knots, a, b, |y0, v0, y1, v1| {
                    if (v1 - v0).abs() <= 1e-14 * v0.abs() {
                        (y1 - y0) * 2.0 / (v0 + v1)
                    } else {
                        (y1 - y0) * (v1 / v0).ln() / (v1 - v0)
                    }
                })
            }
            _ => {
                let scale = (b - a) / self.eval(0.5 * (a + b));
                quad::integrate(|y| 1.0 / self.eval(y), a, b, 1e-15 * scale.abs())
            }
        }
    }

    /// Interior points where the derivative of a polynomial vanishes or where
    /// sampled knots sit; candidates for extrema.
    fn critical_points(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            CoefficientFn::Polynomial(c) if c.len() > 2 => {
                let deriv: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, ci)| i as f64 * ci).collect();
                polynomial_roots_in(&deriv, a, b)
            }
            CoefficientFn::Sampled(k) => k.iter().map(|p| p.0).filter(|&y| y > a && y < b).collect(),
            _ => Vec::new(),
        }
    }
}

fn interp(knots: &[(f64, f64)], y: f64) -> f64 {
    if knots.len() == 1 || y <= knots[0].0 {
        return knots[0].1;
    }
    let last = knots[knots.len() - 1];
    if y >= last.0 {
        return last.1;
    }
    let i = knots.partition_point(|p| p.0 <= y);
    let (y0, v0) = knots[i - 1];
    let (y1, v1) = knots[i];
    v0 + (v1 - v0) * (y - y0) / (y1 - y0)
}

fn piecewise_linear_integral(
    knots: &[(f64, f64)],
    a: f64,
    b: f64,
    piece: impl Fn(f64, f64, f64, f64) -> f64,
) -> f64 {
    let mut cuts = vec![a];
    cuts.extend(knots.iter().map(|p| p.0).filter(|&y| y > a && y < b));
    cuts.push(b);
    cuts.windows(2)
        .map(|w| piece(w[0], interp(knots, w[0]), w[1], interp(knots, w[1])))
        .sum()
}

/// Real roots of a polynomial inside `(a, b)` via sampling plus bisection.
fn polynomial_roots_in(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let p = |y: f64| c.iter().rev().fold(0.0, |acc, ci| acc * y + ci);
    let n = 64 * c.len().max(1);
    let mut roots = Vec::new();
    let mut prev = (a, p(a));
    for i in 1..=n {
        let y = a + (b - a) * i as f64 / n as f64;
        let v = p(y);
        if prev.1 == 0.0 {
            roots.push(prev.0);
        } else if prev.1.signum() != v.signum() && v != 0.0 {
            if let Some(r) = crate::roots::brent(p, prev.0, y, 1e-15, 0.0) {
                roots.push(r);
            }
        }
        prev = (y, v);
    }
    roots.retain(|&r| r > a && r < b);
    roots
}

/// One piece `[from, to)` of the unit period.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub from: f64,
    pub to: f64,
    pub rho: CoefficientFn,
    pub mu1: CoefficientFn,
    pub mu2: CoefficientFn,
}

impl Segment {
    pub fn new(from: f64, to: f64, rho: CoefficientFn, mu1: CoefficientFn, mu2: CoefficientFn) -> Self {
        Segment { from, to, rho, mu1, mu2 }
    }

    /// A homogeneous slab.
    pub fn constant(from: f64, to: f64, rho: f64, mu1: f64, mu2: f64) -> Self {
        use CoefficientFn::Constant;
        Segment::new(from, to, Constant(rho), Constant(mu1), Constant(mu2))
    }

    #[inline]
    pub fn eval(&self, y: f64) -> Material {
        Material { rho: self.rho.eval(y), mu1: self.mu1.eval(y), mu2: self.mu2.eval(y) }
    }

    pub fn is_constant(&self) -> bool {
        self.rho.is_constant() && self.mu1.is_constant() && self.mu2.is_constant()
    }

    pub fn len(&self) -> f64 {
        self.to - self.from
    }

    fn critical_points(&self) -> Vec<f64> {
        let mut pts = self.rho.critical_points(self.from, self.to);
        pts.extend(self.mu1.critical_points(self.from, self.to));
        pts.extend(self.mu2.critical_points(self.from, self.to));
        pts
    }
}

/// Period averages ⟨·⟩ = ∫₀¹ (·) dy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Average {
    Rho,
    Mu2,
    InvMu1,
    Mu1,
}

/// Pointwise expressions whose range over the period is needed by the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Expr {
    Mu2OverRho,
    RhoOverMu2,
    Rho,
    Mu1,
    Mu2,
    RhoOverMu1,
    Mu2OverMu1,
}

impl Expr {
    fn eval(self, m: Material) -> f64 {
        match self {
            Expr::Mu2OverRho => m.mu2 / m.rho,
            Expr::RhoOverMu2 => m.rho / m.mu2,
            Expr::Rho => m.rho,
            Expr::Mu1 => m.mu1,
            Expr::Mu2 => m.mu2,
            Expr::RhoOverMu1 => m.rho / m.mu1,
            Expr::Mu2OverMu1 => m.mu2 / m.mu1,
        }
    }

    const ALL: [Expr; 7] = [
        Expr::Mu2OverRho,
        Expr::RhoOverMu2,
        Expr::Rho,
        Expr::Mu1,
        Expr::Mu2,
        Expr::RhoOverMu1,
        Expr::Mu2OverMu1,
    ];
}

/// Number of uniform samples used for validation and extrema.
pub const SAMPLE_RESOLUTION: usize = 10_000;

/// A validated profile on the unit period.
#[derive(Debug)]
pub struct MaterialProfile {
    segments: Vec<Segment>,
    period_scale: f64,
    ranges: OnceLock<Vec<(f64, f64)>>,
}

impl Clone for MaterialProfile {
    fn clone(&self) -> Self {
        MaterialProfile {
            segments: self.segments.clone(),
            period_scale: self.period_scale,
            ranges: self.ranges.clone(),
        }
    }
}

impl PartialEq for MaterialProfile {
    fn eq(&self, other: &Self) -> bool {
        self.segments == other.segments && self.period_scale == other.period_scale
    }
}

impl MaterialProfile {
    /// Builds a profile from segments given on `[0, period)`; coordinates are
    /// rescaled to the unit period.
    pub fn new(segments: Vec<Segment>, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidProfile { field: "period".into(), reason: format!("must be positive, got {period}") });
        }
        let segments: Vec<Segment> = if period == 1.0 {
            segments
        } else {
            segments
                .into_iter()
                .map(|s| Segment {
                    from: s.from / period,
                    to: s.to / period,
                    rho: s.rho.rescaled(period),
                    mu1: s.mu1.rescaled(period),
                    mu2: s.mu2.rescaled(period),
                })
                .collect()
        };
        let p = MaterialProfile { segments, period_scale: period, ranges: OnceLock::new() };
        p.validate()?;
        Ok(p)
    }

    /// Profile on the unit period.
    pub fn unit(segments: Vec<Segment>) -> Result<Self> {
        Self::new(segments, 1.0)
    }

    /// A single homogeneous medium.
    pub fn homogeneous(rho: f64, mu1: f64, mu2: f64) -> Result<Self> {
        Self::unit(vec![Segment::constant(0.0, 1.0, rho, mu1, mu2)])
    }

    /// Two homogeneous layers `[0, d₁)` and `[d₁, 1)`, each `(ρ, μ₁, μ₂)`.
    pub fn bilayer(first: (f64, f64, f64), second: (f64, f64, f64), d1: f64) -> Result<Self> {
        Self::unit(vec![
            Segment::constant(0.0, d1, first.0, first.1, first.2),
            Segment::constant(d1, 1.0, second.0, second.1, second.2),
        ])
    }

    fn validate(&self) -> Result<()> {
        const EDGE_TOL: f64 = 1e-12;
        let segs = &self.segments;
        if segs.is_empty() {
            return Err(Error::InvalidProfile { field: "segments".into(), reason: "no segments".into() });
        }
        if segs[0].from.abs() > EDGE_TOL {
            return Err(Error::InvalidProfile {
                field: "segments[0].from".into(),
                reason: format!("must start at 0, got {}", segs[0].from),
            });
        }
        for (i, s) in segs.iter().enumerate() {
            if !(s.to > s.from) {
                return Err(Error::InvalidProfile {
                    field: format!("segments[{i}]"),
                    reason: format!("empty interval [{}, {})", s.from, s.to),
                });
            }
            if i > 0 && (s.from - segs[i - 1].to).abs() > EDGE_TOL {
                return Err(Error::InvalidProfile {
                    field: format!("segments[{i}].from"),
                    reason: format!("gap or overlap with previous segment ending at {}", segs[i - 1].to),
                });
            }
            for (name, c) in [("rho", &s.rho), ("mu1", &s.mu1), ("mu2", &s.mu2)] {
                check_coefficient(c, &format!("segments[{i}].{name}"), s.from, s.to)?;
            }
        }
        let last = segs[segs.len() - 1].to;
        if (last - 1.0).abs() > EDGE_TOL {
            return Err(Error::InvalidProfile {
                field: format!("segments[{}].to", segs.len() - 1),
                reason: format!("must end at the period, got {}", last * self.period_scale),
            });
        }
        Ok(())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// The physical period the profile was declared with.
    pub fn period_scale(&self) -> f64 {
        self.period_scale
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.segments.iter().all(Segment::is_constant)
    }

    /// Index of the segment containing `y ∈ [0, 1)` (half-open convention).
    pub fn segment_index(&self, y: f64) -> usize {
        let i = self.segments.partition_point(|s| s.to <= y);
        i.min(self.segments.len() - 1)
    }

    /// Coefficients at `y ∈ [0, 1)`; at a boundary the right limit is returned.
    pub fn sample(&self, y: f64) -> Result<Material> {
        if !(0.0..1.0).contains(&y) {
            return Err(Error::OutOfDomain(y));
        }
        Ok(self.segments[self.segment_index(y)].eval(y))
    }

    /// Left limit at `y ∈ (0, 1]`.
    pub fn sample_left(&self, y: f64) -> Material {
        let i = self.segments.partition_point(|s| s.to < y).min(self.segments.len() - 1);
        self.segments[i].eval(y)
    }

    pub fn average(&self, which: Average) -> f64 {
        self.segments
            .iter()
            .map(|s| match which {
                Average::Rho => s.rho.integral(s.from, s.to),
                Average::Mu2 => s.mu2.integral(s.from, s.to),
                Average::Mu1 => s.mu1.integral(s.from, s.to),
                Average::InvMu1 => s.mu1.reciprocal_integral(s.from, s.to),
            })
            .sum()
    }

    /// `(min, max)` of `expr` over the closed period, including one-sided limits at jumps.
    pub fn extremum(&self, expr: Expr) -> (f64, f64) {
        let ranges = self.ranges.get_or_init(|| Expr::ALL.iter().map(|&e| self.compute_extremum(e)).collect());
        let i = Expr::ALL.iter().position(|&e| e == expr).unwrap();
        ranges[i]
    }

    fn compute_extremum(&self, expr: Expr) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.segments {
            let f = |y: f64| expr.eval(s.eval(y));
            let n = ((SAMPLE_RESOLUTION as f64 * s.len()).ceil() as usize).max(16);
            let ys: Vec<f64> = (0..=n).map(|i| s.from + s.len() * i as f64 / n as f64).collect();
            let vals: Vec<f64> = ys.iter().map(|&y| f(y)).collect();
            for &v in &vals {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if s.is_constant() {
                continue;
            }
            for y in s.critical_points() {
                let v = f(y);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            for i in 1..n {
                let (a, b) = (ys[i - 1], ys[i + 1]);
                if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
                    lo = lo.min(golden_min(f, a, b, 1e-12).1);
                }
                if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] {
                    hi = hi.max(-golden_min(|y| -f(y), a, b, 1e-12).1);
                }
            }
        }
        (lo, hi)
    }

    /// Positions in `[0, 1)` where some coefficient may jump, including 0.
    pub fn boundaries(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.from).collect()
    }
}

fn check_coefficient(c: &CoefficientFn, field: &str, from: f64, to: f64) -> Result<()> {
    if let CoefficientFn::Sampled(k) = c {
        if k.is_empty() {
            return Err(Error::InvalidProfile { field: field.into(), reason: "no samples".into() });
        }
        if k.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidProfile { field: field.into(), reason: "sample grid not strictly increasing".into() });
        }
    }
    if let CoefficientFn::Polynomial(p) = c {
        if p.is_empty() {
            return Err(Error::InvalidProfile { field: field.into(), reason: "no coefficients".into() });
        }
    }
    let n = ((SAMPLE_RESOLUTION as f64 * (to - from)).ceil() as usize).max(16);
    for i in 0..=n {
        let y = from + (to - from) * i as f64 / n as f64;
        let v = c.eval(y);
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidProfile {
                field: field.into(),
                reason: format!("must be finite and positive, got {v} at y = {y}"),
            });
        }
    }
    Ok(())
}

/// One layer of monoclinic stiffness input.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoclinicSegment {
    pub from: f64,
    pub to: f64,
    pub c44: CoefficientFn,
    pub c45: CoefficientFn,
    pub c55: CoefficientFn,
    pub rho: CoefficientFn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonoclinicInput {
    pub segments: Vec<MonoclinicSegment>,
    pub period: f64,
}

/// Reduces monoclinic stiffness to `μ₁ = c44`, `μ₂ = c55 − c45²/c44`.
pub fn reduce_monoclinic(input: &MonoclinicInput) -> Result<MaterialProfile> {
    let segments = input
        .segments
        .iter()
        .map(|s| reduce_segment(s, input.period))
        .collect::<Result<Vec<_>>>()?;
    MaterialProfile::new(segments, input.period)
}

pub(crate) fn reduce_segment(s: &MonoclinicSegment, period: f64) -> Result<Segment> {
    let n = ((SAMPLE_RESOLUTION as f64 * (s.to - s.from) / period).ceil() as usize).max(16);
    for i in 0..=n {
        let y = s.from + (s.to - s.from) * i as f64 / n as f64;
        let (c44, c45, c55) = (s.c44.eval(y), s.c45.eval(y), s.c55.eval(y));
        let value = c44 * c55 - c45 * c45;
        if !(c44 > 0.0) || !(value > 0.0) {
            return Err(Error::DegenerateStiffness { y, value });
        }
    }
    let zero_coupling = matches!(s.c45, CoefficientFn::Constant(v) if v == 0.0);
    let mu2 = if zero_coupling {
        s.c55.clone()
    } else if s.c44.is_constant() && s.c45.is_constant() && s.c55.is_constant() {
        let (c44, c45, c55) = (s.c44.eval(s.from), s.c45.eval(s.from), s.c55.eval(s.from));
        CoefficientFn::Constant(c55 - c45 * c45 / c44)
    } else {
        CoefficientFn::Reduced {
            c44: Box::new(s.c44.clone()),
            c45: Box::new(s.c45.clone()),
            c55: Box::new(s.c55.clone()),
        }
    };
    Ok(Segment::new(s.from, s.to, s.rho.clone(), s.c44.clone(), mu2))
}
