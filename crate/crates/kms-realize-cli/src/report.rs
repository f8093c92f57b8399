//! Certificates, artifacts and the run manifest.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub pass: bool,
    /// Measured quantity; compared against `threshold`.
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Certificate {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: &str, value: f64, threshold: f64, detail: String) -> Self {
        Certificate {
            name: name.into(),
            pass: value <= threshold,
            value,
            threshold,
            detail,
        }
    }

    pub fn flag(name: &str, pass: bool, detail: String) -> Self {
        Certificate {
            name: name.into(),
            pass,
            value: if pass { 0.0 } else { 1.0 },
            threshold: 0.0,
            detail,
        }
    }
}

/// A file produced by a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn text(name: &str, s: String) -> Self {
        Artifact {
            name: name.into(),
            bytes: s.into_bytes(),
        }
    }

    pub fn json<T: Serialize>(name: &str, v: &T) -> Self {
        let mut s = serde_json::to_string_pretty(v).expect("report serializes");
        s.push('\n');
        Self::text(name, s)
    }

    pub fn is_csv(&self) -> bool {
        self.name.ends_with(".csv")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Data rows of a CSV: lines after the header.
pub fn csv_rows(bytes: &[u8]) -> usize {
    bytes.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count().saturating_sub(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateStatus {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub tool_version: String,
    pub mode: String,
    pub config: String,
    pub config_sha256: String,
    pub artifacts: Vec<ArtifactEntry>,
    pub certificates: Vec<CertificateStatus>,
    pub pass: bool,
    /// Wall-clock timings live here, outside every hashed artifact.
    pub timings: String,
}

pub const MANIFEST_FORMAT: u32 = 1;
pub const CONFIG_FILE: &str = "config.json";
pub const CERTS_FILE: &str = "certificates.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub step: String,
    pub seconds: f64,
}

impl Manifest {
    pub fn new(mode: &str, config_text: &str, artifacts: &[Artifact], certs: &[Certificate]) -> Self {
        let entries = artifacts
            .iter()
            .map(|a| ArtifactEntry {
                path: a.name.clone(),
                sha256: a.is_csv().then(|| sha256_hex(&a.bytes)),
                rows: a.is_csv().then(|| csv_rows(&a.bytes)),
            })
            .collect();
        Manifest {
            format: MANIFEST_FORMAT,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            mode: mode.into(),
            config: CONFIG_FILE.into(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            artifacts: entries,
            certificates: certs
                .iter()
                .map(|c| CertificateStatus {
                    name: c.name.clone(),
                    pass: c.pass,
                })
                .collect(),
            pass: certs.iter().all(|c| c.pass),
            timings: TIMINGS_FILE.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn rows_skip_header_and_trailing_newline() {
        assert_eq!(csv_rows(b"a,b\n1,2\n3,4\n"), 2);
        assert_eq!(csv_rows(b"a,b\n"), 0);
        assert_eq!(csv_rows(b"a,b\n1,2\n3,"), 2);
    }

    #[test]
    fn manifest_hashes_csv_only() {
        let arts = [Artifact::text("s.csv", "x\n1\n".into()), Artifact::text("b.txt", "q".into())];
        let m = Manifest::new("wreath", "{}", &arts, &[]);
        assert!(m.artifacts[0].sha256.is_some());
        assert!(m.artifacts[1].sha256.is_none());
        assert!(m.pass);
    }
}
