//! TOML profile files.
//!
//! ```toml
//! period = 1.0
//!
//! [[segments]]
//! from = 0.0
//! to = 0.5
//! rho = { kind = "constant", data = 1.0 }
//! mu1 = { kind = "polynomial", data = [1.0, 0.5] }
//! mu2 = { kind = "sampled", data = [[0.0, 1.0], [0.5, 1.2]] }
//!
//! [[segments]]
//! from = 0.5
//! to = 1.0
//! [segments.monoclinic]
//! c44 = { kind = "constant", data = 2.0 }
//! c45 = { kind = "constant", data = 0.5 }
//! c55 = { kind = "constant", data = 1.5 }
//! rho = { kind = "constant", data = 1.0 }
//! ```

use super::{reduce_segment, CoefficientFn, MaterialProfile, MonoclinicSegment, Segment};
use crate::error::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    #[serde(default = "unit_period")]
    pub period: f64,
    pub segments: Vec<SegmentSpec>,
}

fn unit_period() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub from: f64,
    pub to: f64,
    pub rho: Option<CoefficientSpec>,
    pub mu1: Option<CoefficientSpec>,
    pub mu2: Option<CoefficientSpec>,
    pub monoclinic: Option<MonoclinicSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonoclinicSpec {
    pub c44: CoefficientSpec,
    pub c45: CoefficientSpec,
    pub c55: CoefficientSpec,
    pub rho: CoefficientSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum CoefficientSpec {
    Constant(f64),
    Polynomial(Vec<f64>),
    Sampled(Vec<(f64, f64)>),
}

impl From<&CoefficientSpec> for CoefficientFn {
    fn from(spec: &CoefficientSpec) -> Self {
        match spec {
            CoefficientSpec::Constant(v) => CoefficientFn::Constant(*v),
            CoefficientSpec::Polynomial(c) => CoefficientFn::Polynomial(c.clone()),
            CoefficientSpec::Sampled(k) => CoefficientFn::Sampled(k.clone()),
        }
    }
}

impl ProfileFile {
    pub fn into_profile(self) -> Result<MaterialProfile> {
        let mut segments = Vec::with_capacity(self.segments.len());
        for (i, s) in self.segments.iter().enumerate() {
            let seg = match (&s.monoclinic, &s.rho, &s.mu1, &s.mu2) {
                (Some(m), None, None, None) => reduce_segment(
                    &MonoclinicSegment {
                        from: s.from,
                        to: s.to,
                        c44: (&m.c44).into(),
                        c45: (&m.c45).into(),
                        c55: (&m.c55).into(),
                        rho: (&m.rho).into(),
                    },
                    self.period,
                )
                .map_err(|e| Error::InvalidProfile { field: format!("segments[{i}].monoclinic"), reason: e.to_string() })?,
                (None, Some(rho), Some(mu1), Some(mu2)) => {
                    Segment::new(s.from, s.to, rho.into(), mu1.into(), mu2.into())
                }
                (Some(_), ..) => {
                    return Err(Error::InvalidProfile {
                        field: format!("segments[{i}]"),
                        reason: "give either `monoclinic` or `rho`/`mu1`/`mu2`, not both".into(),
                    })
                }
                (None, rho, mu1, _) => {
                    let missing = if rho.is_none() {
                        "rho"
                    } else if mu1.is_none() {
                        "mu1"
                    } else {
                        "mu2"
                    };
                    return Err(Error::InvalidProfile {
                        field: format!("segments[{i}].{missing}"),
                        reason: "missing coefficient".into(),
                    });
                }
            };
            segments.push(seg);
        }
        MaterialProfile::new(segments, self.period)
    }
}

/// Parses and validates a TOML profile.
pub fn parse_profile(text: &str) -> Result<MaterialProfile> {
    let file: ProfileFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_profile()
}
