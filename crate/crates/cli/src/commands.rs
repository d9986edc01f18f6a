//! Sweep subcommands. Every grid cell yields rows or an error row.

use crate::args::{Grid, Mode};
use crate::error::CliError;
use crate::table::{Cell, Table};
use bloch1d::asymptotics::wkb_delta;
use bloch1d::greenfn::{operator_residual, quasi_periodicity_residual, GreenFunction};
use bloch1d::isofreq::{
    convexity_certificate_with, first_zone_edge, iso_branches_with, ConvexityCertificate, Engine, IsoBranch,
};
use bloch1d::lyapunov::{delta, delta_real};
use bloch1d::matricant::QuadratureConfig;
use bloch1d::profile::MaterialProfile;
use bloch1d::spectrum::{band_edges, branch_omega, domega_dk_floquet_at, floquet_branches, stopband_profile, zws_scan};
use bloch1d::{Complex64 as C64, Error};
use rayon::prelude::*;
use std::f64::consts::PI;

/// A loaded profile plus the unit conversion requested on the command line.
pub struct Context {
    pub profile: MaterialProfile,
    pub cfg: QuadratureConfig,
    /// Period length when `--physical` is set, else 1.
    pub scale: f64,
}

impl Context {
    /// Converts an input grid of ω, k, K or q to the unit period.
    fn grid(&self, g: Grid) -> Vec<f64> {
        g.scaled(self.scale).values()
    }

    /// Converts a unit-period value back to output units.
    fn out(&self, x: f64) -> Cell {
        Cell::F(x / self.scale)
    }

    /// Same for quantities in units of 1/ω² or 1/k², such as resolvent output.
    fn out_inverse_square(&self, x: f64) -> Cell {
        Cell::F(x * self.scale * self.scale)
    }
}

/// Maps `f` over `items` in parallel and concatenates the tables in item order.
fn gather<T: Sync>(columns: &[&'static str], items: &[T], f: impl Fn(&T) -> Table + Sync + Send) -> Table {
    let parts: Vec<Table> = items.par_iter().map(f).collect();
    let mut table = Table::new(columns);
    for part in parts {
        table.extend(part);
    }
    table
}

fn cartesian(outer: &[f64], inner: &[f64]) -> Vec<(f64, f64)> {
    outer.iter().flat_map(|&a| inner.iter().map(move |&b| (a, b))).collect()
}

const DELTA_MAP: &[&str] = &["omega", "k", "delta", "class", "re_big_k", "im_big_k"];

pub fn delta_map(ctx: &Context, omega: Grid, k: Grid) -> Table {
    let cells = cartesian(&ctx.grid(k), &ctx.grid(omega));
    gather(DELTA_MAP, &cells, |&(k, w)| {
        let mut t = Table::new(DELTA_MAP);
        let at = vec![("omega", ctx.out(w)), ("k", ctx.out(k))];
        match delta(&ctx.profile, C64::new(w * w, 0.0), C64::new(k * k, 0.0), &ctx.cfg) {
            Ok(s) => {
                let mut row = at;
                row.extend([
                    ("delta", s.delta.re.into()),
                    ("class", s.classification.name().into()),
                    ("re_big_k", ctx.out(s.floquet_k.re)),
                    ("im_big_k", ctx.out(s.floquet_k.im)),
                ]);
                t.push(row);
            }
            Err(e) => t.push_error(at, e),
        }
        t
    })
}

const BAND: &[&str] = &["kind", "k", "n", "big_k", "omega", "im_big_k", "slope", "monotone"];

/// Highest ω reached by the first `branches` branches at fixed k.
fn band_ceiling(ctx: &Context, k: f64, branches: usize) -> Result<f64, Error> {
    let top = branch_omega(&ctx.profile, 0.0, k, branches, &ctx.cfg)?
        .max(branch_omega(&ctx.profile, PI, k, branches, &ctx.cfg)?);
    Ok(top * (1.0 + 1e-9) + 1e-12)
}

pub fn band(ctx: &Context, k: Grid, big_k: Grid, branches: usize, stopband_samples: usize) -> Result<Table, CliError> {
    if branches == 0 {
        return Err(CliError::Config("--branches must be at least 1".into()));
    }
    let big_ks = ctx.grid(big_k);
    let ks = ctx.grid(k);
    let parts: Vec<Table> = ks.par_iter().map(|&k| band_at(ctx, k, &big_ks, branches, stopband_samples)).collect();
    let mut table = Table::new(BAND);
    for p in parts {
        table.extend(p);
    }
    Ok(table)
}

fn band_at(ctx: &Context, k: f64, big_ks: &[f64], branches: usize, stopband_samples: usize) -> Table {
    let mut t = Table::new(BAND);
    let at = |kind: &str| vec![("kind", Cell::from(kind)), ("k", ctx.out(k))];
    let omega_max = match band_ceiling(ctx, k, branches) {
        Ok(w) => w,
        Err(e) => {
            t.push_error(at("branch"), e);
            return t;
        }
    };
    let roots: Vec<_> = big_ks
        .par_iter()
        .map(|&bk| floquet_branches(&ctx.profile, bk, k, omega_max, &ctx.cfg))
        .collect();
    let mut previous: Vec<Option<(f64, f64)>> = vec![None; branches];
    for (&bk, found) in big_ks.iter().zip(roots) {
        let found = match found {
            Ok(v) => v,
            Err(e) => {
                let mut row = at("branch");
                row.push(("big_k", ctx.out(bk)));
                t.push_error(row, e);
                continue;
            }
        };
        for n in 1..=branches {
            let mut row = at("branch");
            row.extend([("n", n.into()), ("big_k", ctx.out(bk))]);
            let Some(p) = found.iter().find(|p| p.n == n) else {
                t.push_error(row, format!("branch {n} not found below ω = {omega_max}"));
                continue;
            };
            // ω_n rises as cos K falls on odd branches and the reverse on even ones.
            let monotone = previous[n - 1].map(|(prev_k, prev_w)| {
                let expected = if n % 2 == 1 { 1.0 } else { -1.0 } * (prev_k.cos() - bk.cos());
                (p.omega - prev_w) * expected.signum() >= -1e-10 * p.omega.max(1.0)
            });
            previous[n - 1] = Some((bk, p.omega));
            let slope = domega_dk_floquet_at(&ctx.profile, bk, k, n, p.omega, &ctx.cfg);
            row.extend([("omega", ctx.out(p.omega)), ("monotone", monotone.into())]);
            match slope {
                Ok(s) => {
                    row.push(("slope", s.first().into()));
                    t.push(row);
                }
                Err(e) => t.push_error(row, e),
            }
        }
    }
    match band_edges(&ctx.profile, k, omega_max, &ctx.cfg) {
        Ok(edges) => {
            for (kind, list, bk) in [("edge", &edges.zone_centre, 0.0), ("edge", &edges.zone_edge, PI)] {
                for p in list.iter().filter(|p| p.n <= branches) {
                    let mut row = at(kind);
                    row.extend([("n", p.n.into()), ("big_k", ctx.out(bk)), ("omega", ctx.out(p.omega))]);
                    t.push(row);
                }
            }
            for gap in edges.gaps.iter().filter(|g| g.index < branches && g.width() > 0.0) {
                match stopband_profile(&ctx.profile, k, gap.index, omega_max, stopband_samples, &ctx.cfg) {
                    Ok(Some(s)) => {
                        for &(w, im) in &s.samples {
                            let mut row = at("stopband");
                            row.extend([
                                ("n", gap.index.into()),
                                ("big_k", ctx.out(PI * f64::from(gap.m))),
                                ("omega", ctx.out(w)),
                                ("im_big_k", ctx.out(im)),
                            ]);
                            t.push(row);
                        }
                    }
                    Ok(None) => {}
                    Err(e) => {
                        let mut row = at("stopband");
                        row.push(("n", gap.index.into()));
                        t.push_error(row, e);
                    }
                }
            }
        }
        Err(e) => t.push_error(at("edge"), e),
    }
    t
}

const ISOFREQ: &[&str] =
    &["engine", "kind", "omega", "branch", "k", "big_k", "zws", "h", "cutoff", "lemma", "passed"];

pub fn isofreq(ctx: &Context, omega: Grid, k_max: Option<f64>, truncate_terms: Option<usize>) -> Result<Table, CliError> {
    let mut engines = vec![("exact", Engine::Exact(ctx.cfg))];
    if let Some(n) = truncate_terms {
        let e = Engine::Truncated(n);
        e.check(&ctx.profile)?;
        engines.push(("truncated", e));
    }
    let cutoff = first_zone_edge(&ctx.profile, &ctx.cfg)?;
    let k_max = k_max.map(|x| x * ctx.scale);
    let omegas = ctx.grid(omega);
    let jobs: Vec<(f64, usize)> = omegas.iter().flat_map(|&w| (0..engines.len()).map(move |e| (w, e))).collect();
    Ok(gather(ISOFREQ, &jobs, |&(w, e)| {
        let (name, engine) = &engines[e];
        let mut t = Table::new(ISOFREQ);
        let at = |kind: &str| vec![("engine", Cell::from(*name)), ("kind", kind.into()), ("omega", ctx.out(w))];
        match iso_branches_with(&ctx.profile, w, k_max, engine, &ctx.cfg) {
            Ok(branches) => push_branches(ctx, &mut t, &branches, &at),
            Err(e) => t.push_error(at("point"), e),
        }
        if w > 0.0 && w < cutoff {
            match convexity_certificate_with(&ctx.profile, w, engine, &ctx.cfg) {
                Ok(c) => push_certificate(ctx, &mut t, &c, &at),
                Err(e) => t.push_error(at("certificate"), e),
            }
        }
        t
    }))
}

fn push_branches(ctx: &Context, t: &mut Table, branches: &[IsoBranch], at: &dyn Fn(&str) -> Vec<(&'static str, Cell)>) {
    for b in branches {
        for &(k, bk) in &b.points {
            let mut row = at("point");
            row.extend([("branch", b.index.into()), ("k", ctx.out(k)), ("big_k", ctx.out(bk))]);
            t.push(row);
        }
        for e in &b.edges {
            let mut row = at("edge");
            row.extend([
                ("branch", b.index.into()),
                ("k", ctx.out(e.k)),
                ("big_k", ctx.out(PI * f64::from(e.m))),
                ("zws", e.zws.into()),
            ]);
            t.push(row);
        }
    }
}

fn push_certificate(
    ctx: &Context,
    t: &mut Table,
    c: &ConvexityCertificate,
    at: &dyn Fn(&str) -> Vec<(&'static str, Cell)>,
) {
    for (&k, &h) in c.ks.iter().zip(&c.h) {
        let mut row = at("curvature");
        row.extend([("branch", 1usize.into()), ("k", ctx.out(k)), ("h", ctx.out_inverse_square(h))]);
        t.push(row);
    }
    let mut row = at("certificate");
    row.extend([
        ("branch", 1usize.into()),
        ("k", ctx.out(c.k10)),
        ("big_k", ctx.out(PI)),
        ("h", ctx.out_inverse_square(c.min_h)),
        ("cutoff", ctx.out(c.cutoff)),
        ("lemma", c.lemma.into()),
        ("passed", c.passed.into()),
    ]);
    t.push(row);
}

const ZWS: &[&str] =
    &["omega", "k", "sign", "delta", "residual_m", "residual_m2", "newton_converged", "iterations", "confirmed"];

pub fn zws(ctx: &Context, k: Grid, omega_max: f64) -> Result<Table, CliError> {
    if !(omega_max > 0.0) {
        return Err(CliError::Config(format!("--omega-max must be positive, got {omega_max}")));
    }
    let ks = ctx.grid(k);
    let mut t = Table::new(ZWS);
    for r in zws_scan(&ctx.profile, &ks, omega_max * ctx.scale, &ctx.cfg)? {
        t.push(vec![
            ("omega", ctx.out(r.omega)),
            ("k", ctx.out(r.k)),
            ("sign", r.sign.into()),
            ("delta", r.delta.into()),
            ("residual_m", r.residual_m.into()),
            ("residual_m2", r.residual_m2.into()),
            ("newton_converged", r.newton_converged.into()),
            ("iterations", r.iterations.into()),
            ("confirmed", r.confirmed.into()),
        ]);
    }
    Ok(t)
}

const GREEN: &[&str] =
    &["kind", "big_k", "omega", "k", "y", "re_u", "im_u", "residual", "quasi_periodicity", "condition"];

pub struct GreenRequest {
    pub big_k: Grid,
    pub omega: Grid,
    pub k: Grid,
    pub mode: Mode,
    pub points: usize,
    pub forcing_wavenumber: f64,
}

pub fn green(ctx: &Context, req: &GreenRequest) -> Result<Table, CliError> {
    if req.points < 3 {
        return Err(CliError::Config("--points must be at least 3".into()));
    }
    let q = req.forcing_wavenumber * ctx.scale;
    let n = req.points;
    let forcing: Vec<C64> = (0..n).map(|i| C64::from_polar(1.0, q * i as f64 / (n - 1) as f64)).collect();
    let cells: Vec<(f64, f64, f64)> = ctx
        .grid(req.big_k)
        .into_iter()
        .flat_map(|bk| cartesian(&ctx.grid(req.omega), &ctx.grid(req.k)).into_iter().map(move |(w, k)| (bk, w, k)))
        .collect();
    Ok(gather(GREEN, &cells, |&(bk, w, k)| {
        let mut t = Table::new(GREEN);
        let at = |kind: &str| {
            vec![("kind", Cell::from(kind)), ("big_k", ctx.out(bk)), ("omega", ctx.out(w)), ("k", ctx.out(k))]
        };
        let solved = GreenFunction::new(&ctx.profile, bk, w * w, k * k, &ctx.cfg).and_then(|g| {
            let u = g.apply(req.mode.into(), &forcing)?;
            let residual = operator_residual(&ctx.profile, req.mode.into(), w * w, k * k, &u, &forcing)?;
            Ok((g.condition(), u, residual))
        });
        match solved {
            Ok((condition, u, residual)) => {
                for (i, z) in u.iter().enumerate() {
                    let mut row = at("sample");
                    row.extend([
                        ("y", Cell::F(ctx.scale * i as f64 / (n - 1) as f64)),
                        ("re_u", ctx.out_inverse_square(z.re)),
                        ("im_u", ctx.out_inverse_square(z.im)),
                    ]);
                    t.push(row);
                }
                let mut row = at("summary");
                row.extend([
                    ("residual", residual.into()),
                    ("quasi_periodicity", quasi_periodicity_residual(bk, &u).into()),
                    ("condition", condition.into()),
                ]);
                t.push(row);
            }
            Err(e) => t.push_error(at("summary"), e),
        }
        t
    }))
}

const WKB: &[&str] = &["omega", "k", "delta", "delta_wkb", "deviation", "supersonic"];

pub fn wkb_compare(ctx: &Context, omega: Grid, k: Grid) -> Result<Table, CliError> {
    let cells = cartesian(&ctx.grid(k), &ctx.grid(omega));
    let rows: Vec<Result<Table, Error>> = cells
        .par_iter()
        .map(|&(k, w)| {
            let mut t = Table::new(WKB);
            let at = vec![("omega", ctx.out(w)), ("k", ctx.out(k))];
            let exact = match delta_real(&ctx.profile, w * w, k * k, &ctx.cfg) {
                Ok(d) => d,
                Err(e) => {
                    t.push_error(at, e);
                    return Ok(t);
                }
            };
            let mut row = at;
            row.push(("delta", exact.into()));
            match wkb_delta(&ctx.profile, w, k) {
                Ok(approx) => {
                    row.extend([
                        ("delta_wkb", approx.into()),
                        ("deviation", (approx - exact).abs().into()),
                        ("supersonic", true.into()),
                    ]);
                    t.push(row);
                }
                Err(Error::NotSupersonic { .. }) => {
                    row.push(("supersonic", false.into()));
                    t.push(row);
                }
                Err(e) if e.is_config() => return Err(e),
                Err(e) => t.push_error(row, e),
            }
            Ok(t)
        })
        .collect();
    let mut table = Table::new(WKB);
    for part in rows {
        table.extend(part?);
    }
    Ok(table)
}
