use crate::error::CliError;
use bloch1d::greenfn::ResolventMode;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

/// Inclusive uniform grid written `a:b:n`, or a single value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

impl Grid {
    pub fn single(x: f64) -> Self {
        Grid { from: x, to: x, count: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.to } else { self.from + step * i as f64 }).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Grid { from: self.from * factor, to: self.to * factor, count: self.count }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let number = |t: &str| -> Result<f64, String> {
            let v: f64 = t.trim().parse().map_err(|_| format!("`{t}` is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{t}` is not finite"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [x] => Ok(Grid::single(number(x)?)),
            [a, b, n] => {
                let (from, to) = (number(a)?, number(b)?);
                let count: usize = n.trim().parse().map_err(|_| format!("`{n}` is not a point count"))?;
                if count == 0 {
                    return Err("a grid needs at least one point".into());
                }
                if count > 1 && to <= from {
                    return Err(format!("grid `{s}` must have from < to"));
                }
                Ok(Grid { from, to, count })
            }
            _ => Err(format!("expected `a:b:n` or a single value, got `{s}`")),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.from, self.to, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Mode {
    /// Solve for u given ρ-weighted forcing at fixed k.
    Frequency,
    /// Solve for u given μ₂-weighted forcing at fixed ω.
    Wavenumber,
}

impl From<Mode> for ResolventMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Frequency => ResolventMode::Frequency,
            Mode::Wavenumber => ResolventMode::Wavenumber,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bloch1d", version, about = "Floquet-Bloch spectra of periodically layered media")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// TOML profile file.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub profile: Option<PathBuf>,
    /// Built-in profile.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Absolute and relative tolerance of the propagator.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Product-integral scheme.
    #[arg(long, global = true, default_value = "sixth-order-commutator")]
    pub scheme: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    #[serde(skip)]
    pub format: Format,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    #[serde(skip)]
    pub jobs: usize,
    /// Read and write ω, k, K and y in units of the profile's period.
    #[arg(long, global = true)]
    pub physical: bool,
    /// Write to a file instead of stdout.
    #[arg(long, short, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Δ, its classification and Im K over an (ω, k) raster.
    DeltaMap {
        #[arg(long)]
        omega: Grid,
        #[arg(long, default_value = "0")]
        k: Grid,
    },
    /// Branches ω_n(K) at fixed k, with cutoffs and stopband decay.
    Band {
        #[arg(long, default_value = "1")]
        k: Grid,
        #[arg(long = "K", default_value = "0:3.141592653589793:33")]
        big_k: Grid,
        /// Number of branches.
        #[arg(long, default_value_t = 5)]
        branches: usize,
        /// Im K samples across each stopband.
        #[arg(long, default_value_t = 41)]
        stopband_samples: usize,
    },
    /// Real isofrequency branches K(k) and the convexity certificate.
    Isofreq {
        #[arg(long)]
        omega: Grid,
        #[arg(long)]
        k_max: Option<f64>,
        /// Also run the truncated power-series engine with this many terms.
        #[arg(long)]
        truncate_terms: Option<usize>,
    },
    /// Zero-width stopbands along a k grid.
    ZwsScan {
        #[arg(long)]
        k: Grid,
        #[arg(long)]
        omega_max: f64,
    },
    /// Quasi-periodic resolvent applied to a plane-wave forcing.
    Green {
        #[arg(long = "K")]
        big_k: Grid,
        #[arg(long)]
        omega: Grid,
        #[arg(long)]
        k: Grid,
        #[arg(long, value_enum, default_value_t = Mode::Frequency)]
        mode: Mode,
        /// Grid points over the period.
        #[arg(long, default_value_t = 512)]
        points: usize,
        /// Forcing g(y) = exp(i q y).
        #[arg(long, default_value_t = 0.0)]
        forcing_wavenumber: f64,
    },
    /// Exact Δ against the high-frequency approximation.
    WkbCompare {
        #[arg(long)]
        omega: Grid,
        #[arg(long, default_value = "0")]
        k: Grid,
    },
    /// Invariant checks with measured residuals.
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::DeltaMap { .. } => "delta-map",
            Command::Band { .. } => "band",
            Command::Isofreq { .. } => "isofreq",
            Command::ZwsScan { .. } => "zws-scan",
            Command::Green { .. } => "green",
            Command::WkbCompare { .. } => "wkb-compare",
            Command::Verify => "verify",
        }
    }
}

impl Common {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::Config(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_parse_and_include_both_ends() {
        let g: Grid = "0:2:5".parse().unwrap();
        assert_eq!(g.values(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!("3.5".parse::<Grid>().unwrap().values(), vec![3.5]);
    }

    #[test]
    fn malformed_grids_are_rejected() {
        for bad in ["", "1:2", "2:1:3", "0:1:0", "a:1:2", "0:inf:2", "1:2:3:4"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }
}
