//! Run configuration: JSON with decimal-string numerics.

use anyhow::{anyhow, bail, Context, Result};
use kms_realize::realizable::BaseSchedule;
use kms_realize::spectra::ClosedSetSpec;
use kms_realize::textfmt::parse_f64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Wreath,
    FreeProduct,
    Growth,
    Padic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Order of the explicit first coordinate block; defaults to `2k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0_order: Option<usize>,
    #[serde(default)]
    pub stages: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    /// Window of the realization certificate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization_range: Option<String>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padic: Option<PadicConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetConfig {
    #[serde(default)]
    pub intervals: Vec<[String; 2]>,
    #[serde(default)]
    pub points: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleConfig {
    InverseSquare,
    Geometric { q: String },
    Explicit { bases: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub range: String,
    pub n: usize,
    pub tol: String,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            range: "10".into(),
            n: 10_001,
            tol: "1e-6".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionConfig {
    pub p: u64,
    pub level: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CocycleKind {
    Coboundary,
    Homomorphism,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthConfig {
    #[serde(default = "one")]
    pub dim: usize,
    pub modulus: u64,
    /// Rotation steps per generator; golden-ratio steps when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<u64>>,
    pub cocycle: CocycleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
    pub horizon: u64,
    pub tol: String,
    pub points: Vec<u64>,
    pub s: Vec<String>,
    #[serde(default = "default_net_beta")]
    pub net_beta: String,
    /// Net radius; `ceil(37 / s)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<u64>,
    #[serde(default = "default_census")]
    pub census_radius: u64,
}

fn one() -> usize {
    1
}

fn default_net_beta() -> String {
    "1".into()
}

fn default_census() -> u64 {
    32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PadicConfig {
    pub p: u64,
    pub levels: Vec<u32>,
    pub max_len: usize,
    #[serde(default = "h_lo")]
    pub h_lo: i64,
    #[serde(default = "h_hi")]
    pub h_hi: i64,
}

fn h_lo() -> i64 {
    -2
}

fn h_hi() -> i64 {
    2
}

/// Command-line overrides of the grid section.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridOverride {
    pub n: Option<usize>,
    pub tol: Option<String>,
    pub range: Option<String>,
}

pub fn num(s: &str, what: &str) -> Result<f64> {
    parse_f64(s.trim(), 0).map_err(|e| anyhow!("{what}: {e}"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("config parse")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &GridOverride) {
        if let Some(n) = o.n {
            self.grid.n = n;
        }
        if let Some(t) = &o.tol {
            self.grid.tol = t.clone();
        }
        if let Some(r) = &o.range {
            self.grid.range = r.clone();
        }
    }

    /// Canonical bytes: the hashed and stored form.
    pub fn canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn closed_set(&self) -> Result<ClosedSetSpec> {
        let set = self.set.as_ref().ok_or_else(|| anyhow!("mode needs a set"))?;
        let mut iv = Vec::new();
        for [lo, hi] in &set.intervals {
            iv.push((num(lo, "interval end")?, num(hi, "interval end")?));
        }
        let pts = set.points.iter().map(|p| num(p, "point")).collect::<Result<Vec<_>>>()?;
        Ok(ClosedSetSpec::new(iv, pts)?)
    }

    pub fn range(&self) -> Result<f64> {
        num(&self.grid.range, "grid range")
    }

    pub fn tol(&self) -> Result<f64> {
        num(&self.grid.tol, "grid tol")
    }

    pub fn realization_range(&self) -> Result<f64> {
        match &self.realization_range {
            Some(r) => num(r, "realization range"),
            None => Ok(20.0),
        }
    }

    /// Default schedule is geometric with ratio 0.9.
    pub fn base_schedule(&self, a: f64) -> Result<BaseSchedule> {
        Ok(match &self.schedule {
            None => BaseSchedule::Geometric { a, q: 0.9 },
            Some(ScheduleConfig::InverseSquare) => BaseSchedule::InverseSquare(a),
            Some(ScheduleConfig::Geometric { q }) => BaseSchedule::Geometric { a, q: num(q, "schedule q")? },
            Some(ScheduleConfig::Explicit { bases }) => {
                BaseSchedule::Explicit(bases.iter().map(|b| num(b, "base")).collect::<Result<_>>()?)
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.range()?;
        let tol = self.tol()?;
        if !(r > 0.0 && r.is_finite()) || !(tol > 0.0) || self.grid.n < 3 {
            bail!("grid needs range > 0, tol > 0 and at least 3 points");
        }
        match self.mode {
            Mode::Wreath => {
                let k = self.closed_set()?;
                if !k.contains(0.0) {
                    bail!("wreath mode needs 0 in the set");
                }
                let t = num(self.t.as_deref().ok_or_else(|| anyhow!("wreath mode needs t"))?, "t")?;
                if !(t > 1.0 && t.is_finite()) {
                    bail!("t must exceed 1");
                }
            }
            Mode::FreeProduct => {
                let k = self.closed_set()?;
                if k.contains(0.0) {
                    bail!("free-product mode needs 0 outside the set");
                }
                if k.is_empty() {
                    bail!("free-product mode needs a nonempty set");
                }
                let q = self.k.ok_or_else(|| anyhow!("free-product mode needs k"))?;
                if q < 2 {
                    bail!("k must be at least 2");
                }
                if self.stages > 0 {
                    bail!("free-product mode uses explicit blocks only; stages must be 0");
                }
            }
            Mode::Growth => {
                if self.growth.is_none() {
                    bail!("growth mode needs a growth section");
                }
            }
            Mode::Padic => {
                if self.padic.is_none() {
                    bail!("padic mode needs a padic section");
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wreath_needs_zero() {
        let bad = r#"{"mode":"wreath","set":{"intervals":[["1","2"]]},"t":"2"}"#;
        assert!(RunConfig::from_json(bad).is_err());
        let good = r#"{"mode":"wreath","set":{"points":["0"]},"t":"2"}"#;
        assert!(RunConfig::from_json(good).is_ok());
    }

    #[test]
    fn free_product_excludes_zero() {
        let bad = r#"{"mode":"free-product","set":{"intervals":[["-1","2"]]},"k":2}"#;
        assert!(RunConfig::from_json(bad).is_err());
        let good = r#"{"mode":"free-product","set":{"intervals":[["3","inf"]]},"k":2}"#;
        assert!(RunConfig::from_json(good).is_ok());
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(RunConfig::from_json(r#"{"mode":"padic","padic":{"p":3,"levels":[1],"max_len":2},"x":1}"#).is_err());
    }

    #[test]
    fn canonical_roundtrip() {
        let c = RunConfig::from_json(r#"{"mode":"wreath","set":{"points":["0"]},"t":"2"}"#).unwrap();
        assert_eq!(RunConfig::from_json(&c.canonical()).unwrap(), c);
    }
}
