//! Quasi-periodic Green function of the unit cell and the resolvent it generates.

use crate::error::{Error, Result};
use crate::linalg::{Mat2, I};
use crate::matricant::{PeriodPropagator, QuadratureConfig};
use crate::profile::{Material, MaterialProfile};
use crate::quad::integrate;
use num_complex::Complex64 as C64;

/// Condition number of `M(1,0) − e^{iK}I` above which (K, λ) counts as on the spectrum.
pub const MAX_CONDITION: f64 = 1e12;

/// Which operator the spectral parameter belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventMode {
    /// `A_K u = −ρ⁻¹(μ₁u′)′ + k²μ₂ρ⁻¹u`, resolvent in ω².
    Frequency,
    /// `B_K u = μ₂⁻¹(μ₁u′)′ + ω²ρμ₂⁻¹u`, resolvent in k².
    Wavenumber,
}

/// One evaluation of the tensor kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEval {
    pub y: f64,
    pub source: f64,
    pub big_k: f64,
    pub omega2: f64,
    pub k2: f64,
    pub tensor: Mat2,
}

/// The tensor kernel `M(y,ς)H(y−ς) − M(y,0)[M(1,0) − e^{iK}I]⁻¹M(1,ς)` for one
/// `(K, ω², k²)`, with `H(0) = 1`.
pub struct GreenFunction<'a> {
    prop: PeriodPropagator<'a>,
    big_k: f64,
    inverse: Mat2,
    condition: f64,
}

impl<'a> GreenFunction<'a> {
    pub fn new(profile: &'a MaterialProfile, big_k: f64, omega2: f64, k2: f64, cfg: &QuadratureConfig) -> Result<Self> {
        if !big_k.is_finite() {
            return Err(Error::InvalidArgument(format!("K must be finite, got {big_k}")));
        }
        let prop = PeriodPropagator::real(profile, omega2, k2, cfg)?;
        let shifted = prop.monodromy_matrix() - Mat2::scalar(C64::from_polar(1.0, big_k));
        let det = shifted.det();
        let condition = if det.norm() == 0.0 {
            f64::INFINITY
        } else {
            prop.monodromy_matrix().frobenius() * shifted.frobenius() / det.norm()
        };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::OnSpectrum { condition });
        }
        let inverse = shifted.adjugate().scale(det.inv());
        Ok(GreenFunction { prop, big_k, inverse, condition })
    }

    /// `‖M(1,0)‖·‖(M(1,0) − e^{iK}I)⁻¹‖` in the Frobenius norm; large when
    /// `M(1,0) − e^{iK}I` is near singular, including when it nearly vanishes.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    fn tensor_from(&self, my: Mat2, ms: Mat2, y: f64, source: f64) -> Mat2 {
        let ms_inv = ms.adjugate();
        let tail = my * self.inverse * self.prop.monodromy_matrix() * ms_inv;
        if y >= source {
            my * ms_inv - tail
        } else {
            -tail
        }
    }

    pub fn tensor(&self, y: f64, source: f64) -> Mat2 {
        self.tensor_from(self.prop.at(y), self.prop.at(source), y, source)
    }

    /// The scalar kernel `G₁₂(y, ς)`: `u(y) = ∫G₁₂(y,ς)γ(ς)dς` for a source `γ`
    /// entering the flux equation.
    pub fn kernel(&self, y: f64, source: f64) -> C64 {
        self.tensor(y, source).m2
    }

    pub fn eval(&self, y: f64, source: f64) -> GreenEval {
        GreenEval {
            y,
            source,
            big_k: self.big_k,
            omega2: self.prop.omega2().re,
            k2: self.prop.k2().re,
            tensor: self.tensor(y, source),
        }
    }

    /// `u` on the uniform grid `yᵢ = i/(n−1)` for forcing `g` sampled on the same grid.
    pub fn apply(&self, mode: ResolventMode, forcing: &[C64]) -> Result<Vec<C64>> {
        let n = forcing.len();
        if n < 2 {
            return Err(Error::InvalidArgument("forcing needs at least two samples".into()));
        }
        let profile = self.prop.profile();
        let h = 1.0 / (n - 1) as f64;
        let grid: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let mats: Vec<Mat2> = grid.iter().map(|&y| self.prop.at(y)).collect();
        let source: Vec<C64> = grid
            .iter()
            .zip(forcing)
            .enumerate()
            .map(|(j, (&s, &g))| {
                let m = nodal_material(profile, s, j + 1 == n)?;
                let w = if j == 0 || j + 1 == n { 0.5 * h } else { h };
                Ok(w * match mode {
                    ResolventMode::Frequency => -I * m.rho * g,
                    ResolventMode::Wavenumber => I * m.mu2 * g,
                })
            })
            .collect::<Result<_>>()?;
        Ok((0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.tensor_from(mats[i], mats[j], grid[i], grid[j]).m2 * source[j])
                    .sum()
            })
            .collect())
    }
}

pub fn green_tensor(
    profile: &MaterialProfile,
    y: f64,
    source: f64,
    big_k: f64,
    omega2: f64,
    k2: f64,
    cfg: &QuadratureConfig,
) -> Result<GreenEval> {
    Ok(GreenFunction::new(profile, big_k, omega2, k2, cfg)?.eval(y, source))
}

/// `(operator − λ)⁻¹g` on the uniform grid of `forcing`.
pub fn resolvent_apply(
    profile: &MaterialProfile,
    big_k: f64,
    mode: ResolventMode,
    omega2: f64,
    k2: f64,
    forcing: &[C64],
    cfg: &QuadratureConfig,
) -> Result<Vec<C64>> {
    GreenFunction::new(profile, big_k, omega2, k2, cfg)?.apply(mode, forcing)
}

/// Coefficients at a grid node: the mean of both one-sided limits at an
/// interface, the left limit at the period end.
fn nodal_material(profile: &MaterialProfile, y: f64, last: bool) -> Result<Material> {
    if last {
        return Ok(profile.sample_left(1.0));
    }
    let right = profile.sample(y)?;
    if y <= 0.0 {
        return Ok(right);
    }
    let left = profile.sample_left(y);
    Ok(Material {
        rho: 0.5 * (left.rho + right.rho),
        mu1: 0.5 * (left.mu1 + right.mu1),
        mu2: 0.5 * (left.mu2 + right.mu2),
    })
}

/// Harmonic mean of μ₁ over `[a, b]`, the effective stiffness of one grid cell.
fn cell_stiffness(profile: &MaterialProfile, a: f64, b: f64) -> f64 {
    let mut cuts: Vec<f64> = profile.boundaries().into_iter().filter(|&t| t > a && t < b).collect();
    cuts.insert(0, a);
    cuts.push(b);
    let compliance: f64 = cuts
        .windows(2)
        .map(|w| {
            let seg = &profile.segments()[profile.segment_index(0.5 * (w[0] + w[1]))];
            integrate(|y| 1.0 / seg.eval(y).mu1, w[0], w[1], 1e-14)
        })
        .sum();
    (b - a) / compliance
}

/// `‖(operator − λ)u − g‖/‖g‖` over interior grid nodes, with the flux form of
/// `(μ₁u′)′` differenced between cell-averaged stiffnesses.
///
/// Away from interfaces the stencils at spacings h and 2h are Richardson-combined,
/// so the check itself is fourth order there.
pub fn operator_residual(
    profile: &MaterialProfile,
    mode: ResolventMode,
    omega2: f64,
    k2: f64,
    u: &[C64],
    forcing: &[C64],
) -> Result<f64> {
    let n = u.len();
    if n != forcing.len() || n < 3 {
        return Err(Error::InvalidArgument("u and g must share a grid of at least three nodes".into()));
    }
    let h = 1.0 / (n - 1) as f64;
    let interfaces = profile.boundaries();
    let flux = |i: usize, step: usize| {
        let (y, d) = (i as f64 * h, step as f64 * h);
        let mu_r = cell_stiffness(profile, y, y + d);
        let mu_l = cell_stiffness(profile, y - d, y);
        (mu_r * (u[i + step] - u[i]) - mu_l * (u[i] - u[i - step])) / (d * d)
    };
    let (mut num, mut den) = (0.0, 0.0);
    for i in 1..n - 1 {
        let y = i as f64 * h;
        let smooth = i >= 2 && i + 2 < n && interfaces.iter().all(|&t| (t - y).abs() >= 2.0 * h);
        let f = if smooth { (4.0 * flux(i, 1) - flux(i, 2)) / 3.0 } else { flux(i, 1) };
        let m = nodal_material(profile, y, false)?;
        let applied = match mode {
            ResolventMode::Frequency => (-f + (k2 * m.mu2 - omega2 * m.rho) * u[i]) / m.rho,
            ResolventMode::Wavenumber => (f + (omega2 * m.rho - k2 * m.mu2) * u[i]) / m.mu2,
        };
        num += (applied - forcing[i]).norm_sqr();
        den += forcing[i].norm_sqr();
    }
    Ok((num / den.max(f64::MIN_POSITIVE)).sqrt())
}

/// `|u(1) − e^{iK}u(0)|` relative to `max|u|`.
pub fn quasi_periodicity_residual(big_k: f64, u: &[C64]) -> f64 {
    let scale = u.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    (u[u.len() - 1] - C64::from_polar(1.0, big_k) * u[0]).norm() / scale
}
