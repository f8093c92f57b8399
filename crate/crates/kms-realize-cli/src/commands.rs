//! Command entry points: run a config into a directory, verify a stored run.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use crate::config::{GridOverride, Mode, RunConfig};
use crate::pipeline::{
    self, conformality_certificate, free_rn_certificate, mode_name, wreath_rn_certificate, Outcome, BLOCKS_FILE,
    MEASURES_FILE,
};
use crate::report::{csv_rows, sha256_hex, Certificate, Manifest, CERTS_FILE, CONFIG_FILE, MANIFEST_FILE, TIMINGS_FILE};
use kms_realize::conformal::parse_blocks;

pub fn load_config(path: &Path, grid: &GridOverride) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    cfg.apply(grid);
    cfg.validate().with_context(|| format!("config {}", path.display()))?;
    Ok(cfg)
}

/// Writes every artifact, the timings and the manifest into `dir`.
pub fn write_run(dir: &Path, cfg: &RunConfig, out: &Outcome) -> Result<Manifest> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for a in &out.artifacts {
        fs::write(dir.join(&a.name), &a.bytes).with_context(|| format!("writing {}", a.name))?;
    }
    let mut timings = serde_json::to_string_pretty(&out.timings)?;
    timings.push('\n');
    fs::write(dir.join(TIMINGS_FILE), timings)?;
    let manifest = Manifest::new(mode_name(cfg.mode), &cfg.canonical(), &out.artifacts, &out.certificates);
    let mut m = serde_json::to_string_pretty(&manifest)?;
    m.push('\n');
    fs::write(dir.join(MANIFEST_FILE), m)?;
    Ok(manifest)
}

fn run_mode(cfg: &RunConfig, dir: &Path, allowed: &[Mode], threads: usize) -> Result<Manifest> {
    if !allowed.contains(&cfg.mode) {
        bail!("mode {} is not handled by this command", mode_name(cfg.mode));
    }
    let out = pipeline::run(cfg, threads)?;
    write_run(dir, cfg, &out)
}

pub fn cmd_build_spectrum(cfg: &RunConfig, dir: &Path, threads: usize) -> Result<Manifest> {
    run_mode(cfg, dir, &[Mode::Wreath, Mode::FreeProduct], threads)
}

pub fn cmd_growth(cfg: &RunConfig, dir: &Path, threads: usize) -> Result<Manifest> {
    run_mode(cfg, dir, &[Mode::Growth], threads)
}

pub fn cmd_padic(cfg: &RunConfig, dir: &Path, threads: usize) -> Result<Manifest> {
    run_mode(cfg, dir, &[Mode::Padic], threads)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOutcome {
    pub checks: Vec<Check>,
}

impl VerifyOutcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Re-runs every certificate of a stored run.
///
/// Order: file integrity, certificates recomputed from the stored blocks and
/// measures, then a full replay of the config whose outputs must match the
/// stored files byte for byte. Stops at the first failing check.
pub fn cmd_verify(manifest_path: &Path, threads: usize) -> Result<VerifyOutcome> {
    let dir: PathBuf = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let text = fs::read_to_string(manifest_path).with_context(|| format!("reading {}", manifest_path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text).context("parsing manifest")?;
    let mut checks = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| -> bool {
        checks.push(Check {
            name: name.into(),
            pass,
            detail,
        });
        pass
    };

    let read = |name: &str| fs::read(dir.join(name));
    let mut ok = true;
    for a in &manifest.artifacts {
        let bytes = match read(&a.path) {
            Ok(b) => b,
            Err(e) => {
                ok = false;
                push("integrity", false, format!("{}: {e}", a.path));
                break;
            }
        };
        if let Some(sha) = &a.sha256 {
            let rows = csv_rows(&bytes);
            if &sha256_hex(&bytes) != sha || a.rows.is_some_and(|r| r != rows) {
                ok = false;
                push("integrity", false, format!("{}: hash or row count differs ({rows} rows)", a.path));
                break;
            }
        }
    }
    if !ok {
        return Ok(VerifyOutcome { checks });
    }
    let cfg_text = String::from_utf8(read(CONFIG_FILE)?).context("config is not UTF-8")?;
    if !push(
        "integrity",
        sha256_hex(cfg_text.as_bytes()) == manifest.config_sha256,
        format!("{} artifacts and config hash", manifest.artifacts.len()),
    ) {
        return Ok(VerifyOutcome { checks });
    }
    let cfg = RunConfig::from_json(&cfg_text)?;

    let stored: Vec<Certificate> = serde_json::from_slice(&read(CERTS_FILE)?).context("parsing certificates")?;
    if matches!(cfg.mode, Mode::Wreath | Mode::FreeProduct) {
        let blocks_text = String::from_utf8(read(BLOCKS_FILE)?)?;
        let measures_text = String::from_utf8(read(MEASURES_FILE)?)?;
        let c = conformality_certificate(&blocks_text, &measures_text)?;
        if !push(&c.name, c.pass, format!("max defect {:e}; {}", c.value, c.detail)) {
            return Ok(VerifyOutcome { checks });
        }
        let blocks = parse_blocks(&blocks_text)?;
        let c = match cfg.mode {
            Mode::Wreath => wreath_rn_certificate(blocks)?,
            _ => free_rn_certificate(cfg.k.ok_or_else(|| anyhow!("config lacks k"))?, &blocks)?,
        };
        if !push(&c.name, c.pass, format!("max relative diff {:e}; {}", c.value, c.detail)) {
            return Ok(VerifyOutcome { checks });
        }
    }

    let fresh = pipeline::run(&cfg, threads)?;
    for c in &fresh.certificates {
        let same = stored
            .iter()
            .find(|s| s.name == c.name)
            .is_some_and(|s| s.pass == c.pass && s.value.to_bits() == c.value.to_bits());
        let detail = format!("value {:e}, threshold {:e}; {}", c.value, c.threshold, c.detail);
        if !push(&c.name, c.pass && same, if same { detail } else { format!("stored value differs; {detail}") }) {
            return Ok(VerifyOutcome { checks });
        }
    }
    for a in &fresh.artifacts {
        let on_disk = read(&a.name).unwrap_or_default();
        if !push("replay", on_disk == a.bytes, a.name.clone()) {
            return Ok(VerifyOutcome { checks });
        }
    }
    Ok(VerifyOutcome { checks })
}
