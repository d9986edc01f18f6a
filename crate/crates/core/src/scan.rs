//! Splitting a one-parameter cut of Δ into monotone pieces.
//!
//! Along ω at fixed k (or along k at fixed ω) the critical values of Δ all satisfy
//! |Δ| ≥ 1 and alternate in sign, so between consecutive critical points Δ is
//! monotone and `Δ = c` has at most one root for every `c ∈ [−1, 1]`.

use crate::error::{Error, Result};
use crate::roots::{brent, golden_min};

/// Critical values closer than this to ±1 count as tangencies (double roots).
pub const TANGENCY_TOL: f64 = 1e-8;
/// A piece end past the target by more than this is a resolvable crossing, not a tangency.
pub const CROSSING_TOL: f64 = 1e-10;
/// Sampling refinements tried before giving up on a cut.
const MAX_REFINEMENTS: usize = 4;

/// A cut of Δ split at its critical points.
#[derive(Debug, Clone)]
pub struct MonotonePieces {
    /// Piece boundaries `t₀ < t₁ < … < t_m`; interior ones are critical points.
    pub bounds: Vec<f64>,
    /// Δ at each boundary.
    pub values: Vec<f64>,
    /// All samples taken, in increasing `t`.
    pub samples: Vec<(f64, f64)>,
}

impl MonotonePieces {
    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Interior critical points with their Δ values.
    pub fn critical(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.bounds.len();
        self.bounds[1..n - 1].iter().copied().zip(self.values[1..n - 1].iter().copied())
    }
}

/// Evaluation hooks for one cut: Δ(t) and dΔ/dt.
pub trait Cut {
    fn delta(&self, t: f64) -> Result<f64>;
    fn slope(&self, t: f64) -> Result<f64>;
}

/// Samples `[lo, hi]` with initial step `step` and splits at the critical points of Δ.
///
/// The split is validated against the alternation property; failing that,
/// the step is halved.
pub fn monotone_pieces(cut: &dyn Cut, lo: f64, hi: f64, step: f64) -> Result<MonotonePieces> {
    pieces_inner(cut, lo, hi, step, true)
}

/// Like [`monotone_pieces`] for functions that are not discriminants: splits at
/// every sampled extremum without checking the critical values.
pub fn extremal_pieces(cut: &dyn Cut, lo: f64, hi: f64, step: f64) -> Result<MonotonePieces> {
    pieces_inner(cut, lo, hi, step, false)
}

fn pieces_inner(cut: &dyn Cut, lo: f64, hi: f64, step: f64, validate: bool) -> Result<MonotonePieces> {
    if !(hi > lo) || !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("empty scan range [{lo}, {hi}] or step {step}")));
    }
    let mut step = step;
    let mut last_reason = String::new();
    for _ in 0..=MAX_REFINEMENTS {
        let n = ((hi - lo) / step).ceil().max(2.0) as usize;
        let mut samples = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            samples.push((t, cut.delta(t)?));
        }
        match split(cut, &samples, validate)? {
            Ok(pieces) => return Ok(pieces),
            Err(reason) => last_reason = reason,
        }
        step *= 0.5;
    }
    Err(Error::ScanIncomplete(last_reason))
}

fn split(cut: &dyn Cut, samples: &[(f64, f64)], validate: bool) -> Result<std::result::Result<MonotonePieces, String>> {
    let mut bounds = vec![samples[0].0];
    let mut values = vec![samples[0].1];
    for i in 1..samples.len() - 1 {
        let (a, b, c) = (samples[i - 1].1, samples[i].1, samples[i + 1].1);
        let is_max = b >= a && b > c;
        let is_min = b <= a && b < c;
        if !(is_max || is_min) {
            continue;
        }
        let (tl, tr) = (samples[i - 1].0, samples[i + 1].0);
        let t = refine_critical(cut, tl, tr, is_max)?;
        if t <= *bounds.last().expect("nonempty") {
            continue;
        }
        // Keep the more extreme of the sampled and refined values.
        let refined = cut.delta(t)?;
        bounds.push(t);
        values.push(if is_max { refined.max(b) } else { refined.min(b) });
    }
    let last = samples[samples.len() - 1];
    bounds.push(last.0);
    values.push(last.1);
    let crit = &values[1..values.len() - 1];
    for (j, &v) in crit.iter().enumerate().filter(|_| validate) {
        if v.abs() < 1.0 - TANGENCY_TOL {
            return Ok(Err(format!("critical value {v} inside (−1, 1) at t = {}", bounds[j + 1])));
        }
        if j > 0 && v.signum() == crit[j - 1].signum() {
            return Ok(Err(format!("critical values of equal sign near t = {}", bounds[j + 1])));
        }
    }
    Ok(Ok(MonotonePieces { bounds, values, samples: samples.to_vec() }))
}

/// Locates the stationary point of Δ in `[tl, tr]`.
fn refine_critical(cut: &dyn Cut, tl: f64, tr: f64, is_max: bool) -> Result<f64> {
    let (sl, sr) = (cut.slope(tl)?, cut.slope(tr)?);
    let xtol = 1e-13 * tr.abs().max(1.0);
    if sl.signum() != sr.signum() && sl.is_finite() && sr.is_finite() {
        let mut failure = None;
        let root = brent(
            |t| match cut.slope(t) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            tl,
            tr,
            xtol,
            0.0,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        if let Some(t) = root {
            return Ok(t);
        }
    }
    let sign = if is_max { -1.0 } else { 1.0 };
    let (t, _) = golden_min(|t| cut.delta(t).map(|d| sign * d).unwrap_or(f64::INFINITY), tl, tr, xtol.max(1e-10));
    Ok(t)
}

/// The root of `Δ = target` in piece `i`, if any. Piece ends within
/// [`TANGENCY_TOL`] of the target are returned as roots at the end unless Δ
/// crosses the target there by more than [`CROSSING_TOL`].
pub fn root_in_piece(cut: &dyn Cut, pieces: &MonotonePieces, i: usize, target: f64) -> Result<Option<f64>> {
    let (a, b) = (pieces.bounds[i], pieces.bounds[i + 1]);
    let (fa, fb) = (pieces.values[i] - target, pieces.values[i + 1] - target);
    let tol = if fa.signum() != fb.signum() { CROSSING_TOL } else { TANGENCY_TOL };
    let touches = |f: f64, t: f64| f.abs() <= tol * (1.0 + t.abs().min(1.0));
    if touches(fa, a) {
        return Ok(Some(a));
    }
    if touches(fb, b) {
        return Ok(Some(b));
    }
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    let mut failure = None;
    let root = brent(
        |t| match cut.delta(t) {
            Ok(v) => v - target,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        4.0 * f64::EPSILON * b.abs().max(1.0),
        1e-13,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Cosine;
    impl Cut for Cosine {
        fn delta(&self, t: f64) -> Result<f64> {
            Ok(t.cos())
        }
        fn slope(&self, t: f64) -> Result<f64> {
            Ok(-t.sin())
        }
    }

    #[test]
    fn cosine_splits_at_multiples_of_pi() {
        let p = monotone_pieces(&Cosine, 0.0, 10.0, 0.3).unwrap();
        assert_eq!(p.len(), 4);
        for (j, (t, v)) in p.critical().enumerate() {
            assert!((t - std::f64::consts::PI * (j + 1) as f64).abs() < 1e-12);
            assert!((v.abs() - 1.0).abs() < 1e-15);
        }
        let r = root_in_piece(&Cosine, &p, 1, 0.0).unwrap().unwrap();
        assert!((r - 1.5 * std::f64::consts::PI).abs() < 1e-13);
        // Δ = −1 touches the end of pieces 0 and 1.
        assert_eq!(root_in_piece(&Cosine, &p, 0, -1.0).unwrap(), Some(p.bounds[1]));
        assert_eq!(root_in_piece(&Cosine, &p, 1, -1.0).unwrap(), Some(p.bounds[1]));
    }

    struct Wiggle;
    impl Cut for Wiggle {
        fn delta(&self, t: f64) -> Result<f64> {
            Ok(0.5 * (40.0 * t).cos())
        }
        fn slope(&self, t: f64) -> Result<f64> {
            Ok(-20.0 * (40.0 * t).sin())
        }
    }

    #[test]
    fn violations_are_reported() {
        assert!(matches!(monotone_pieces(&Wiggle, 0.0, 1.0, 0.01), Err(Error::ScanIncomplete(_))));
    }
}
