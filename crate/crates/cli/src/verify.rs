//! Invariant checks with measured residuals, one row per check.

use crate::table::{Cell, Table};
use bloch1d::asymptotics::{bound_growth_upper, first_eig_bounds};
use bloch1d::greenfn::{operator_residual, quasi_periodicity_residual, GreenFunction, ResolventMode};
use bloch1d::isofreq::{convexity_certificate, first_zone_edge};
use bloch1d::lyapunov::{d_delta_eigen, d_delta_fd, d_delta_integral, delta_real, DerivativeBundle};
use bloch1d::matricant::{bilayer_monodromy, layers_of, monodromy, propagate, QuadratureConfig};
use bloch1d::profile::MaterialProfile;
use bloch1d::spectrum::{band_edges, branch_omega, dirichlet_neumann, edge_uncertainty, zws_scan};
use bloch1d::{Complex64 as C64, Result};
use std::f64::consts::PI;

const COLUMNS: &[&str] = &["profile", "check", "measured", "comparison", "threshold", "pass"];

#[derive(Debug, Clone, Copy)]
enum Comparison {
    AtMost,
    Above,
}

struct Outcome {
    measured: f64,
    comparison: Comparison,
    threshold: f64,
}

impl Outcome {
    fn at_most(measured: f64, threshold: f64) -> Self {
        Outcome { measured, comparison: Comparison::AtMost, threshold }
    }

    fn passed(&self) -> bool {
        match self.comparison {
            Comparison::AtMost => self.measured <= self.threshold,
            Comparison::Above => self.measured > self.threshold,
        }
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

type Check = fn(&MaterialProfile, &QuadratureConfig) -> Result<Outcome>;

const CHECKS: &[(&str, Check)] = &[
    ("unimodularity", unimodularity),
    ("structure", structure),
    ("trace-invariance", trace_invariance),
    ("bilayer-closed-form", bilayer_closed_form),
    ("derivative-agreement", derivative_agreement),
    ("interlacing", interlacing),
    ("dirichlet-neumann", dirichlet_neumann_intervals),
    ("monotone-in-k", monotone_in_k),
    ("first-eigenvalue-bounds", eigenvalue_bounds),
    ("growth-bound", growth_bound),
    ("convexity", convexity),
    ("green-residual", green_residual),
    ("green-quasi-periodicity", green_quasi_periodicity),
    ("zws-equivalence", zws_equivalence),
];

/// Runs every check on each profile; returns the report and the number of failures.
pub fn run(profiles: &[(String, MaterialProfile)], cfg: &QuadratureConfig) -> (Table, usize) {
    let mut table = Table::new(COLUMNS);
    let mut failed = 0;
    for (label, p) in profiles {
        for &(name, check) in CHECKS {
            let at = vec![("profile", Cell::from(label.as_str())), ("check", name.into())];
            match check(p, cfg) {
                Ok(o) if o.measured.is_nan() => {}
                Ok(o) => {
                    let pass = o.passed();
                    failed += usize::from(!pass);
                    let mut row = at;
                    row.extend([
                        ("measured", o.measured.into()),
                        ("comparison", if matches!(o.comparison, Comparison::AtMost) { "<=" } else { ">" }.into()),
                        ("threshold", o.threshold.into()),
                        ("pass", pass.into()),
                    ]);
                    table.push(row);
                }
                Err(e) => {
                    failed += 1;
                    table.push_error(at, e);
                }
            }
        }
    }
    (table, failed)
}

const SWEEP: [f64; 4] = [0.0, 4.0, 12.0, 25.0];

/// `|det M − 1|` relative to the squared entry size, which bounds rounding in det.
fn unimodularity(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for &w2 in &SWEEP {
        for &k2 in &SWEEP {
            let m = propagate(p, 0.0, 1.0, c(w2), c(k2), cfg)?;
            let size = m.matrix.max_abs().max(1.0);
            worst = worst.max(m.det_residual() / (size * size));
        }
    }
    Ok(Outcome::at_most(worst, 1e-10))
}

fn structure(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for &w2 in &SWEEP {
        for &k2 in &SWEEP {
            let m = propagate(p, 0.0, 1.0, c(w2), c(k2), cfg)?;
            worst = worst.max(m.structure_residual() / m.matrix.max_abs().max(1.0));
        }
    }
    Ok(Outcome::at_most(worst, 1e-9))
}

fn trace_invariance(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for &(w, k) in &[(1.3, 0.4), (4.7, 1.9), (8.2, 0.0)] {
        let base = propagate(p, 0.0, 1.0, c(w * w), c(k * k), cfg)?.matrix.trace();
        for j in 1..=9 {
            let tr = monodromy(p, j as f64 / 10.0, c(w * w), c(k * k), cfg)?.matrix.trace();
            worst = worst.max((tr - base).norm());
        }
    }
    Ok(Outcome::at_most(worst, 1e-9))
}

fn bilayer_closed_form(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let Ok(layers) = layers_of(p) else { return Ok(Outcome::at_most(f64::NAN, 0.0)) };
    if layers.len() != 2 {
        return Ok(Outcome::at_most(f64::NAN, 0.0));
    }
    let mut worst = 0.0f64;
    for w in [0.5, 3.0, 9.0] {
        for k in [0.0, 1.0, 4.0] {
            let exact = bilayer_monodromy(layers[0], layers[1], c(w), c(k))?.matrix;
            let numeric = propagate(p, 0.0, 1.0, c(w * w), c(k * k), cfg)?.matrix;
            worst = worst.max((exact - numeric).max_abs() / exact.max_abs().max(1.0));
        }
    }
    Ok(Outcome::at_most(worst, 1e-9))
}

fn spread(a: &DerivativeBundle, b: &DerivativeBundle) -> f64 {
    let scale = a.d_dw2.abs().max(a.d_dk2.abs());
    (a.d_dw2 - b.d_dw2).abs().max((a.d_dk2 - b.d_dk2).abs()) / scale
}

fn derivative_agreement(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for k in [0.5, 1.5] {
        for i in 1..=24 {
            let w = 0.5 * i as f64;
            if delta_real(p, w * w, k * k, cfg)?.abs() >= 0.95 {
                continue;
            }
            let a = d_delta_integral(p, w * w, k * k, cfg)?;
            worst = worst.max(spread(&a, &d_delta_eigen(p, w * w, k * k, cfg)?));
            worst = worst.max(spread(&a, &d_delta_fd(p, w * w, k * k, cfg)?));
        }
    }
    Ok(Outcome::at_most(worst, 1e-5))
}

/// Points where `f` changes sign on a uniform grid over `(lo, hi]`.
fn sign_changes(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut prev = f(lo)?;
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = f(x)?;
        if v.signum() != prev.signum() {
            out.push(x);
        }
        prev = v;
    }
    Ok(out)
}

/// Count of adjacent same-kind pairs among zeros of Δ and of ∂Δ/∂ω².
fn interlacing(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let mut violations = 0;
    for k in [0.0, 1.0] {
        let zeros = sign_changes(|w| delta_real(p, w * w, k * k, cfg), 1e-3, 20.0, 1000)?;
        let crit = sign_changes(|w| Ok(d_delta_integral(p, w * w, k * k, cfg)?.d_dw2), 1e-3, 20.0, 1000)?;
        let mut merged: Vec<(f64, u8)> = zeros.iter().map(|&z| (z, 0)).chain(crit.iter().map(|&z| (z, 1))).collect();
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        violations += merged.windows(2).filter(|w| w[0].1 == w[1].1).count();
    }
    Ok(Outcome::at_most(violations as f64, 0.0))
}

fn dirichlet_neumann_intervals(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let mut violations = 0;
    let tol = 1e-9;
    for k in [0.0, 1.0] {
        let omega_max = branch_omega(p, 0.0, k, 7, cfg)?.max(branch_omega(p, PI, k, 7, cfg)?) * 1.01;
        let e = band_edges(p, k, omega_max, cfg)?;
        let centre = |j: usize| if j == 0 { Some(0.0) } else { e.edge(j, 0) };
        let edge = |j: usize| e.edge(j, 1);
        for y0 in [0.0, 0.3] {
            let (d, n) = dirichlet_neumann(p, y0, k, omega_max, cfg)?;
            for i in 1..=6 {
                let j = i / 2;
                let d_range = if i % 2 == 0 { (centre(2 * j), centre(2 * j + 1)) } else { (edge(2 * j + 1), edge(2 * j + 2)) };
                let n_range = if i == 1 {
                    (Some(0.0), centre(1).or(Some(0.0)))
                } else if i % 2 == 1 {
                    (centre(2 * j), centre(2 * j + 1))
                } else {
                    (edge(2 * j - 1), edge(2 * j))
                };
                for (value, range) in [(d.get(i - 1), d_range), (n.get(i - 1), n_range)] {
                    let ok = match (value, range) {
                        (Some(&x), (Some(a), Some(b))) => {
                            (x >= a - tol || x >= a - tol - edge_uncertainty(p, a, k, cfg)?)
                                && (x <= b + tol || x <= b + tol + edge_uncertainty(p, b, k, cfg)?)
                        }
                        _ => false,
                    };
                    violations += usize::from(!ok);
                }
            }
        }
    }
    Ok(Outcome::at_most(violations as f64, 0.0))
}

fn monotone_in_k(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let mut violations = 0;
    for big_k in [0.0, PI / 2.0, PI] {
        for n in 1..=3 {
            let mut prev = -1.0;
            for i in 0..=10 {
                let w = branch_omega(p, big_k, 0.5 * i as f64, n, cfg)?;
                violations += usize::from(w <= prev);
                prev = w;
            }
        }
    }
    Ok(Outcome::at_most(violations as f64, 0.0))
}

fn eigenvalue_bounds(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let mut violations = 0;
    for k in [0.0, 1.0, 2.0] {
        for big_k in [PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI] {
            let w = branch_omega(p, big_k, k, 1, cfg)?;
            violations += first_eig_bounds(p, big_k, k, w).iter().filter(|r| !r.satisfied).count();
        }
    }
    Ok(Outcome::at_most(violations as f64, 0.0))
}

fn growth_bound(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let mut violations = 0;
    for i in 0..8 {
        for j in 0..8 {
            let w2 = C64::from_polar(5.0 * (i + 1) as f64, 0.8 * j as f64);
            let k2 = C64::from_polar(3.0 * (j + 1) as f64, -0.7 * i as f64);
            violations += usize::from(!bound_growth_upper(p, w2, k2, cfg)?.satisfied);
        }
    }
    Ok(Outcome::at_most(violations as f64, 0.0))
}

/// Smallest curvature numerator below the first cutoff; must stay positive.
fn convexity(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let cutoff = first_zone_edge(p, cfg)?;
    let mut worst = f64::INFINITY;
    for f in [0.3, 0.6, 0.9] {
        let cert = convexity_certificate(p, f * cutoff, cfg)?;
        let value = if cert.lemma && cert.bracket.satisfied { cert.min_h } else { f64::NEG_INFINITY };
        worst = worst.min(value);
    }
    Ok(Outcome { measured: worst, comparison: Comparison::Above, threshold: 0.0 })
}

/// 2⁹ + 1 nodes, so interfaces at dyadic fractions of the period fall on nodes.
const GREEN_POINTS: usize = 513;

struct GreenSolution {
    big_k: f64,
    omega2: f64,
    k2: f64,
    forcing: Vec<C64>,
    response: Vec<C64>,
}

fn green_solution(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<GreenSolution> {
    let (big_k, k2) = (0.7, 0.5);
    // First candidate frequency well clear of the spectrum.
    let mut w2 = 2.0;
    for i in 0..40 {
        w2 = 2.0 + 0.75 * i as f64;
        if (delta_real(p, w2, k2, cfg)? - f64::cos(big_k)).abs() > 0.2 {
            break;
        }
    }
    let g: Vec<C64> = (0..GREEN_POINTS)
        .map(|i| {
            let y = i as f64 / (GREEN_POINTS - 1) as f64;
            C64::new(1.0 + y * y, (2.0 * y).sin())
        })
        .collect();
    let u = GreenFunction::new(p, big_k, w2, k2, cfg)?.apply(ResolventMode::Frequency, &g)?;
    Ok(GreenSolution { big_k, omega2: w2, k2, forcing: g, response: u })
}

fn green_residual(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let s = green_solution(p, cfg)?;
    let residual = operator_residual(p, ResolventMode::Frequency, s.omega2, s.k2, &s.response, &s.forcing)?;
    Ok(Outcome::at_most(residual, 1e-4))
}

fn green_quasi_periodicity(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let s = green_solution(p, cfg)?;
    Ok(Outcome::at_most(quasi_periodicity_residual(s.big_k, &s.response), 1e-8))
}

/// Candidates where exactly one of the two ZWS residuals is small.
fn zws_equivalence(p: &MaterialProfile, cfg: &QuadratureConfig) -> Result<Outcome> {
    let ks: Vec<f64> = (0..=24).map(|i| 0.25 * i as f64).collect();
    let reports = zws_scan(p, &ks, 15.0, cfg)?;
    let mismatched = reports.iter().filter(|r| (r.residual_m <= 1e-7) != (r.residual_m2 <= 1e-7)).count();
    Ok(Outcome::at_most(mismatched as f64, 0.0))
}
