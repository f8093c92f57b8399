//! Pipeline orchestration: set, target, cocycle, spectrum, certificates.

use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use kms_realize::conformal::{
    conformality_defect_raw, parse_blocks, write_blocks, FiniteConformalBlock, FiniteGroupTable, ProbVector,
    TruncatedProductSystem,
};
use kms_realize::exprat::{OrderSequence, RealizeOptions, Target};
use kms_realize::growth::{
    self, build_measure_net, net_defect, omega_mu, spectrum_flags, uniquely_ergodic_class, CocycleModel,
    CocyclePreset, GridRotation, WordMetricGroup,
};
use kms_realize::math::linspace;
use kms_realize::padic;
use kms_realize::realizable::{build_realizable, fraction_pair, RealizableCocycle, Side, Stage};
use kms_realize::spectra::{
    self, assemble_free_product, assemble_wreath, shift_cylinder, shift_rn_derivative, solve_free_product_spectrum, solve_spectrum,
    target_phi_from_set, theta_cylinder_ratio, theta_rn_derivative, ClosedSetSpec, FiniteSpace, FreeCell,
    FreeProductSystem, SpectrumReport,
};
use kms_realize::textfmt::{fmt_f64, parse_f64};
use serde::Serialize;

use crate::config::{num, CocycleKind, Mode, RunConfig};
use crate::report::{Artifact, Certificate, Timing, CERTS_FILE, CONFIG_FILE};

pub const SPECTRUM_FILE: &str = "spectrum.json";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const BLOCKS_FILE: &str = "blocks.txt";
pub const MEASURES_FILE: &str = "measures.txt";

pub const CONFORMAL_BETAS: [f64; 5] = [-3.0, -1.0, 0.0, 1.0, 3.0];
pub const CONFORMAL_TOL: f64 = 1e-12;
pub const RN_BETAS: [f64; 3] = [-2.0, 0.0, 1.0];
pub const RN_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-10;
pub const IDENTITY_POINTS: usize = 10_000;
/// Half-width of the free-product finite-group window in the RN certificate.
pub const FREE_RN_WINDOW: usize = 1;

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub certificates: Vec<Certificate>,
    pub timings: Vec<Timing>,
}

impl Outcome {
    fn timed<T>(&mut self, step: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t0 = Instant::now();
        let out = f().with_context(|| format!("stage {step}"))?;
        self.timings.push(Timing {
            step: step.into(),
            seconds: t0.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    fn certify(&mut self, step: &str, f: impl FnOnce() -> Result<Certificate>) -> Result<()> {
        let c = self.timed(step, f)?;
        self.certificates.push(c);
        Ok(())
    }

    pub fn pass(&self) -> bool {
        self.certificates.iter().all(|c| c.pass)
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }
}

/// Worker count from `KMS_REALIZE_THREADS`, else the available parallelism.
pub fn threads_from_env() -> usize {
    std::env::var("KMS_REALIZE_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

pub fn run(cfg: &RunConfig, threads: usize) -> Result<Outcome> {
    cfg.validate()?;
    let mut out = Outcome::default();
    out.artifacts.push(Artifact::text(CONFIG_FILE, cfg.canonical()));
    match cfg.mode {
        Mode::Wreath => run_wreath(cfg, &mut out)?,
        Mode::FreeProduct => run_free_product(cfg, &mut out)?,
        Mode::Growth => run_growth(cfg, &mut out)?,
        Mode::Padic => run_padic(cfg, &mut out, threads)?,
    }
    let certs = out.certificates.clone();
    out.artifacts.push(Artifact::json(CERTS_FILE, &certs));
    Ok(out)
}

pub fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Wreath => "wreath",
        Mode::FreeProduct => "free-product",
        Mode::Growth => "growth",
        Mode::Padic => "padic",
    }
}

// ---------------------------------------------------------------- spectrum reports

#[derive(Serialize)]
struct IntervalJson {
    lo: f64,
    hi: f64,
    clipped_lo: bool,
    clipped_hi: bool,
}

#[derive(Serialize)]
struct SpectrumJson<'a> {
    mode: &'a str,
    range: [f64; 2],
    grid_points: usize,
    tolerance: f64,
    strict_tolerance: f64,
    isolated_roots: &'a [f64],
    flat_intervals: Vec<IntervalJson>,
    warnings: &'a [String],
    grid_mismatches: usize,
}

fn spectrum_artifact(mode: &str, rep: &SpectrumReport, mismatches: usize) -> Artifact {
    Artifact::json(
        SPECTRUM_FILE,
        &SpectrumJson {
            mode,
            range: [rep.range.0, rep.range.1],
            grid_points: rep.grid_points,
            tolerance: rep.tolerance,
            strict_tolerance: rep.strict_tolerance,
            isolated_roots: &rep.isolated_roots,
            flat_intervals: rep
                .flat_intervals
                .iter()
                .map(|f| IntervalJson {
                    lo: f.lo,
                    hi: f.hi,
                    clipped_lo: f.clipped_lo,
                    clipped_hi: f.clipped_hi,
                })
                .collect(),
            warnings: &rep.warnings,
            grid_mismatches: mismatches,
        },
    )
}

/// Grid points where membership in the report disagrees with `d(beta, K) <= tol`.
pub fn grid_mismatches(set: &ClosedSetSpec, rep: &SpectrumReport, r: f64, n: usize, tol: f64) -> usize {
    linspace(-r, r, n)
        .into_iter()
        .filter(|&b| (set.distance(b) <= tol) != rep.covers(b))
        .count()
}

fn samples_csv(grid: &[f64], cols: &[&dyn Fn(f64) -> Option<f64>]) -> String {
    let mut s = String::from("beta,phi,phi1,phi2\n");
    for &b in grid {
        s.push_str(&fmt_f64(b));
        for c in cols {
            s.push(',');
            if let Some(v) = c(b) {
                s.push_str(&fmt_f64(v));
            }
        }
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------- conformal measures file

/// One `measure / beta / weights / end` record per beta.
pub fn write_measures(records: &[(f64, Vec<f64>)]) -> String {
    let mut s = String::new();
    for (beta, w) in records {
        s.push_str("measure\nbeta ");
        s.push_str(&fmt_f64(*beta));
        s.push_str("\nweights");
        for x in w {
            s.push(' ');
            s.push_str(&fmt_f64(*x));
        }
        s.push_str("\nend\n");
    }
    s
}

pub fn parse_measures(text: &str) -> Result<Vec<(f64, Vec<f64>)>> {
    let mut out = Vec::new();
    let mut beta = None;
    let mut weights = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        let ln = i + 1;
        if line.is_empty() || line == "measure" {
            continue;
        }
        if let Some(rest) = line.strip_prefix("beta ") {
            beta = Some(parse_f64(rest.trim(), ln)?);
        } else if let Some(rest) = line.strip_prefix("weights") {
            weights = Some(rest.split_whitespace().map(|w| parse_f64(w, ln)).collect::<Result<Vec<_>, _>>()?);
        } else if line == "end" {
            let b = beta.take().ok_or_else(|| anyhow!("line {ln}: measure without beta"))?;
            let w = weights.take().ok_or_else(|| anyhow!("line {ln}: measure without weights"))?;
            out.push((b, w));
        } else {
            return Err(anyhow!("line {ln}: unexpected `{line}`"));
        }
    }
    if beta.is_some() || weights.is_some() {
        return Err(anyhow!("unterminated measure record"));
    }
    Ok(out)
}

fn conformal_records(blocks: &[FiniteConformalBlock]) -> Result<Vec<(f64, Vec<f64>)>> {
    let sys = TruncatedProductSystem::new(blocks.to_vec(), 0.0)?;
    CONFORMAL_BETAS
        .iter()
        .map(|&b| Ok((b, sys.conformal_measure(b)?.weights().to_vec())))
        .collect()
}

/// Brute-force conformality of stored weights against stored blocks, on raw
/// (not renormalized) weights.
pub fn conformality_certificate(blocks_text: &str, measures_text: &str) -> Result<Certificate> {
    let blocks = parse_blocks(blocks_text)?;
    let records = parse_measures(measures_text)?;
    let sys = TruncatedProductSystem::new(blocks, 0.0)?;
    let gens = sys.all_generators();
    let mut worst: f64 = 0.0;
    let mut all = !records.is_empty();
    for (beta, w) in &records {
        if w.len() != sys.num_configurations() {
            return Ok(Certificate::flag(
                "conformality",
                false,
                format!("beta {beta}: {} weights for {} configurations", w.len(), sys.num_configurations()),
            ));
        }
        let rep = conformality_defect_raw(&sys, w, *beta, &gens, CONFORMAL_TOL)?;
        worst = worst.max(rep.max_defect);
        all &= rep.pass;
    }
    let mut c = Certificate::at_most(
        "conformality",
        worst,
        CONFORMAL_TOL,
        format!("{} measures, {} generators, {} configurations", records.len(), gens.len(), sys.num_configurations()),
    );
    c.pass &= all;
    Ok(c)
}

// ---------------------------------------------------------------- wreath

/// Small explicit system with potential values in `{t, 1/t, 1}` used for the
/// atom-level shift and conformality certificates.
pub fn wreath_blocks(t: f64) -> Result<Vec<FiniteConformalBlock>> {
    let a = FiniteConformalBlock::new(
        FiniteGroupTable::cyclic(3)?,
        ProbVector::from_masses(&[1.0, t, 1.0])?,
        vec![t, 1.0 / t, 1.0],
        t,
    )?;
    let b = FiniteConformalBlock::new(
        FiniteGroupTable::cyclic(2)?,
        ProbVector::from_masses(&[1.0, t])?,
        vec![1.0 / t, t],
        t,
    )?;
    Ok(vec![a, b])
}

fn explicit_cocycle(blocks: Vec<FiniteConformalBlock>) -> RealizableCocycle {
    RealizableCocycle::from_stages(blocks.into_iter().map(Stage::Explicit).collect(), 0.0, 0.0)
}

fn explicit_space(blocks: Vec<FiniteConformalBlock>) -> Result<FiniteSpace> {
    Ok(FiniteSpace::new(explicit_cocycle(blocks))?)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn cylinders(coords: &[i64], atoms: usize) -> Vec<spectra::Cylinder> {
    let mut out = vec![Vec::new()];
    for &m in coords {
        out = out
            .into_iter()
            .flat_map(|c: spectra::Cylinder| {
                (0..atoms).map(move |a| {
                    let mut d = c.clone();
                    d.push((m, a));
                    d
                })
            })
            .collect();
    }
    out
}

/// Shift RN derivative against cylinder ratios, exhaustive over windows of size 1 to 3.
pub fn wreath_rn_certificate(blocks: Vec<FiniteConformalBlock>) -> Result<Certificate> {
    let sys = assemble_wreath(explicit_cocycle(blocks))?;
    let atoms = sys.space().atoms();
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for &beta in &RN_BETAS {
        for coords in [&[0i64][..], &[-1, 0], &[-1, 0, 1]] {
            for c in cylinders(coords, atoms) {
                let x0 = c.iter().find(|p| p.0 == 0).map(|p| p.1).expect("window holds 0");
                let ratio = sys.cylinder_measure(beta, &shift_cylinder(&c, 1))? / sys.cylinder_measure(beta, &c)?;
                worst = worst.max(rel_diff(ratio, shift_rn_derivative(&sys, beta, x0)?));
                count += 1;
            }
        }
    }
    Ok(Certificate::at_most(
        "rn-shift",
        worst,
        RN_TOL,
        format!("{count} cylinders over {atoms} atoms"),
    ))
}

fn run_wreath(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let set = cfg.closed_set()?;
    let t = num(cfg.t.as_deref().unwrap_or_default(), "t")?;
    let (r, tol, n) = (cfg.range()?, cfg.tol()?, cfg.grid.n);
    let target = target_phi_from_set(&set, t)?;
    let rep = out.timed("spectrum", || Ok(solve_spectrum(&|b| target.eval(b), r, tol, n)?))?;
    let mism = grid_mismatches(&set, &rep, r, n, tol);
    out.certificates.push(Certificate::at_most(
        "spectrum-trace",
        mism as f64,
        0.0,
        format!("{} roots, {} intervals", rep.isolated_roots.len(), rep.flat_intervals.len()),
    ));
    out.artifacts.push(spectrum_artifact("wreath", &rep, mism));
    let grid = linspace(-r, r, n);
    let phi = |b: f64| Some(target.eval(b));
    let none = |_: f64| None;
    out.artifacts.push(Artifact::text(SAMPLES_FILE, samples_csv(&grid, &[&phi, &none, &none])));

    if cfg.stages > 0 {
        realization(cfg, &target, t, out)?;
    }

    let blocks = wreath_blocks(t)?;
    let blocks_text = write_blocks(&blocks);
    let measures_text = write_measures(&conformal_records(&blocks)?);
    out.certify("rn", || wreath_rn_certificate(blocks.clone()))?;
    out.certify("conformality", || conformality_certificate(&blocks_text, &measures_text))?;
    out.artifacts.push(Artifact::text(BLOCKS_FILE, blocks_text));
    out.artifacts.push(Artifact::text(MEASURES_FILE, measures_text));
    Ok(())
}

#[derive(Serialize)]
struct StageJson {
    stage: usize,
    base: f64,
    next_base: f64,
    ratio_bound: f64,
    tolerance: f64,
    fit_certified: f64,
    fit_rigorous: bool,
    clamp_excess: f64,
    factor_min: f64,
    psi_max: f64,
    phi_gap: f64,
    degree: usize,
    factors_used: usize,
    identity_residual: Option<f64>,
}

#[derive(Serialize)]
struct RealizationJson {
    stages: usize,
    range: f64,
    bases: Vec<f64>,
    certified: f64,
    grid_max: f64,
    rigorous: bool,
    bound: f64,
    tail_bound: f64,
    reports: Vec<StageJson>,
}

pub const REALIZATION_FILE: &str = "realization.json";

fn realization(cfg: &RunConfig, target: &spectra::SetTarget, t: f64, out: &mut Outcome) -> Result<()> {
    let k = cfg.stages;
    let rr = cfg.realization_range()?;
    let schedule = cfg.base_schedule(t)?;
    let opts = RealizeOptions {
        range: rr,
        ..Default::default()
    };
    let orders = OrderSequence::new(vec![2, 3])?;
    let cocycle = out.timed("realization", || {
        Ok(build_realizable(target.bump(), t, k, &schedule, &orders, &opts)?)
    })?;
    let cert = cocycle.certificate().copied().ok_or_else(|| anyhow!("realization returned no certificate"))?;
    let mut residuals = Vec::new();
    out.timed("identities", || {
        for s in cocycle.stages() {
            residuals.push(match s {
                Stage::Partitioned(p) => Some(p.max_identity_residual(rr, IDENTITY_POINTS)),
                Stage::Explicit(_) => None,
            });
        }
        Ok(())
    })?;
    let bound = 2f64.powi(1 - k as i32);
    let worst_res = residuals.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    out.certificates.push(Certificate::at_most(
        "realization-gap",
        cert.certified,
        bound,
        format!("{k} stages on [-{rr}, {rr}], rigorous {}", cert.rigorous),
    ));
    out.certificates.push(Certificate::at_most(
        "identity-residuals",
        worst_res,
        IDENTITY_TOL,
        format!("{IDENTITY_POINTS} points per stage"),
    ));
    let reports = cocycle
        .reports()
        .iter()
        .zip(&residuals)
        .map(|(s, res)| StageJson {
            stage: s.stage,
            base: s.base,
            next_base: s.next_base,
            ratio_bound: s.ratio_bound,
            tolerance: s.tolerance,
            fit_certified: s.fit.certified,
            fit_rigorous: s.fit.rigorous,
            clamp_excess: s.clamp_excess,
            factor_min: s.factor_min,
            psi_max: s.psi_max,
            phi_gap: s.phi_gap,
            degree: s.degree,
            factors_used: s.factors_used,
            identity_residual: *res,
        })
        .collect();
    out.artifacts.push(Artifact::json(
        REALIZATION_FILE,
        &RealizationJson {
            stages: k,
            range: rr,
            bases: cocycle.bases(),
            certified: cert.certified,
            grid_max: cert.grid_max,
            rigorous: cert.rigorous,
            bound,
            tail_bound: cocycle.tail_bound(),
            reports,
        },
    ));
    Ok(())
}

// ---------------------------------------------------------------- free product

/// Ratio of `mu(theta^-1 C)` to `mu(C)` against the RN formula, exhaustive
/// over cells on the x window and on y, z windows `{-1, 0, 1}`.
pub fn free_rn_certificate(order: usize, blocks: &[FiniteConformalBlock]) -> Result<Certificate> {
    if blocks.len() != 2 {
        return Err(anyhow!("free-product certificate needs two blocks, found {}", blocks.len()));
    }
    let sys = FreeProductSystem::new(
        order,
        FREE_RN_WINDOW,
        explicit_space(vec![blocks[0].clone()])?,
        explicit_space(vec![blocks[1].clone()])?,
    )?;
    free_rn_over(&sys)
}

fn free_rn_over(sys: &FreeProductSystem) -> Result<Certificate> {
    let xs: Vec<i64> = sys.x_coords().collect();
    let (s1, s2) = sys.spaces();
    let x_cells = cylinders(&xs, sys.order());
    let y_cells = cylinders(&[-1, 0, 1], s1.atoms());
    let z_cells = cylinders(&[-1, 0, 1], s2.atoms());
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for &beta in &RN_BETAS {
        let cache = sys.measures(beta)?;
        for x in &x_cells {
            for y in &y_cells {
                for z in &z_cells {
                    let cell = FreeCell {
                        x: x.clone(),
                        y: y.clone(),
                        z: z.clone(),
                    };
                    let ratio = theta_cylinder_ratio(sys, beta, &cell, &cache)?;
                    worst = worst.max(rel_diff(ratio, theta_rn_derivative(sys, beta, &cell)?));
                    count += 1;
                }
            }
        }
    }
    Ok(Certificate::at_most(
        "rn-theta",
        worst,
        RN_TOL,
        format!("{count} cells, coordinate group order {}", sys.order()),
    ))
}

/// Tolerance on `|q phi_1 - 1|`-type defects at reported spectrum points,
/// relative to the root tolerance.
pub const EXTENSION_DEFECT_FACTOR: f64 = 1e3;

fn run_free_product(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let set = cfg.closed_set()?;
    let k = cfg.k.unwrap_or(2);
    let order = cfg.lambda0_order.unwrap_or(2 * k);
    let (r, tol, n) = (cfg.range()?, cfg.tol()?, cfg.grid.n);
    let pair = out.timed("fractions", || Ok(fraction_pair(&set, k, order)?))?;
    let chk = pair.checks(r, n);
    let base_ok = chk.lower_tail <= 0.25 && chk.upper_tail <= 0.25 && chk.coth_at_delta <= 2.0;
    let (a, b, c) = pair.bases();
    out.certificates.push(Certificate::flag(
        "fraction-bases",
        base_ok,
        format!(
            "a {a}, b {b}, c {c}, lower tail {:.6}, upper tail {:.6}, coth {:.6}",
            chk.lower_tail, chk.upper_tail, chk.coth_at_delta
        ),
    ));
    let unit = (pair.phi(Side::Lower, 0.0) - 1.0).abs().max((pair.phi(Side::Upper, 0.0) - 1.0).abs());
    out.certificates.push(Certificate::at_most("unit-at-zero", unit, 1e-12, "max |phi_i(0) - 1|".into()));

    let rep = out.timed("spectrum", || Ok(solve_free_product_spectrum(&pair, r, tol, n)?))?;
    let mism = grid_mismatches(&set, &rep, r, n, tol);
    out.certificates.push(Certificate::at_most(
        "spectrum-trace",
        mism as f64,
        0.0,
        format!("{} roots, {} intervals", rep.isolated_roots.len(), rep.flat_intervals.len()),
    ));
    out.artifacts.push(spectrum_artifact("free-product", &rep, mism));
    let grid = linspace(-r, r, n);
    let none = |_: f64| None;
    let p1 = |b: f64| Some(pair.phi(Side::Lower, b));
    let p2 = |b: f64| Some(pair.phi(Side::Upper, b));
    out.artifacts.push(Artifact::text(SAMPLES_FILE, samples_csv(&grid, &[&none, &p1, &p2])));

    let blocks = vec![pair.explicit_block(Side::Lower)?, pair.explicit_block(Side::Upper)?];
    let blocks_text = write_blocks(&blocks);
    let measures_text = write_measures(&conformal_records(&blocks)?);
    out.certify("rn", || free_rn_certificate(k, &blocks))?;
    out.certify("conformality", || conformality_certificate(&blocks_text, &measures_text))?;

    let ext = cfg.extension.clone().unwrap_or(crate::config::ExtensionConfig { p: 3, level: 1 });
    let sys = assemble_free_product(&pair, FREE_RN_WINDOW)?;
    let beta = rep
        .isolated_roots
        .first()
        .copied()
        .or_else(|| rep.flat_intervals.first().map(|f| 0.5 * (f.lo + f.hi)))
        .unwrap_or(1.0);
    let er = out.timed("extension", || Ok(spectra::dummy_extension_check(ext.p, ext.level, &sys, &pair, &rep, beta)?))?;
    let defect_tol = EXTENSION_DEFECT_FACTOR * tol;
    out.certificates.push(Certificate {
        name: "extension".into(),
        pass: er.transitive && er.lifted_rn_max_diff <= RN_TOL && er.conformality_max_defect <= defect_tol,
        value: er.conformality_max_defect,
        threshold: defect_tol,
        detail: format!(
            "mod {}^{}: order {} of {}, {} cells, lifted RN diff {:e}",
            er.p, er.level, er.order, er.expected_order, er.cells_checked, er.lifted_rn_max_diff
        ),
    });
    out.artifacts.push(Artifact::text(BLOCKS_FILE, blocks_text));
    out.artifacts.push(Artifact::text(MEASURES_FILE, measures_text));
    Ok(())
}

// ---------------------------------------------------------------- growth

pub const GROWTH_FILE: &str = "growth.json";

#[derive(Serialize)]
struct GrowthJson {
    class: String,
    upper_estimate: f64,
    lower_estimate: f64,
    has_nonpos_limsup_point: bool,
    has_nonneg_liminf_point: bool,
    horizon: u64,
    tolerance: f64,
    invariant_omega: Vec<f64>,
    invariant_class: String,
    growth_indicator: Option<f64>,
}

pub fn growth_model(cfg: &crate::config::GrowthConfig) -> Result<CocycleModel> {
    let amp = cfg.amplitude.as_deref().map(|a| num(a, "amplitude")).transpose()?.unwrap_or(1.0);
    let weights = match &cfg.weights {
        Some(w) => w.iter().map(|x| num(x, "weight")).collect::<Result<Vec<_>>>()?,
        None => vec![1.0; cfg.dim],
    };
    let preset = match cfg.cocycle {
        CocycleKind::Coboundary => CocyclePreset::Coboundary { amplitude: amp },
        CocycleKind::Homomorphism => CocyclePreset::Homomorphism { weights },
        CocycleKind::Mixed => CocyclePreset::Mixed { amplitude: amp, weights },
    };
    let steps = match &cfg.steps {
        Some(s) => s.clone(),
        None => vec![growth::golden_step(cfg.modulus); cfg.dim],
    };
    let group = WordMetricGroup::lattice(cfg.dim)?;
    Ok(CocycleModel::new(group, GridRotation { modulus: cfg.modulus, steps }, preset)?)
}

fn run_growth(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let g = cfg.growth.as_ref().expect("validated");
    let model = growth_model(g)?;
    let tol = num(&g.tol, "growth tol")?;

    let census = out.timed("census", || Ok(growth::ball_census(model.group(), g.census_radius, growth::GROWTH_CAP)?))?;
    let mut csv = String::from("k,sphere,indicator\n");
    for (k, &c) in census.counts.iter().enumerate() {
        let ind = if k == 0 { String::new() } else { fmt_f64(census.indicator(k)) };
        csv.push_str(&format!("{k},{c},{ind}\n"));
    }
    out.artifacts.push(Artifact::text("census.csv", csv));
    let pre = growth::growth_precheck(model.group());
    out.certificates.push(match &pre {
        Ok(v) => Certificate::at_most("growth-precheck", *v, growth::GROWTH_THRESHOLD, "last complete sphere".into()),
        Err(e) => Certificate::flag("growth-precheck", false, e.to_string()),
    });

    let flags = out.timed("limsup", || Ok(spectrum_flags(&model, &g.points, g.horizon, tol)?))?;
    let mut csv = String::from("point,n,tail_plus,tail_minus\n");
    for &x in &g.points {
        let up = growth::limsup_ratio(&model, x, 1.0, g.horizon)?;
        let down = growth::limsup_ratio(&model, x, -1.0, g.horizon)?;
        for (i, (u, d)) in up.tail.iter().zip(&down.tail).enumerate() {
            csv.push_str(&format!("{x},{i},{},{}\n", fmt_f64(*u), fmt_f64(*d)));
        }
    }
    out.artifacts.push(Artifact::text("limsup.csv", csv));

    let uniform = ProbVector::uniform(model.states() as usize)?;
    let om = omega_mu(&model, &uniform)?;
    let inv_class = uniquely_ergodic_class(&om, 1e-9);
    out.certificates.push(Certificate::flag(
        "classifier-agreement",
        flags.class == inv_class,
        format!("limsup class {}, invariant-measure class {}", flags.class, inv_class),
    ));

    let beta = num(&g.net_beta, "net beta")?;
    let split = model.states() * 3 / 10;
    let f = move |x: u64| if x < split { 1.0 } else { -0.5 };
    let mut csv = String::from("s,radius,generator,measured,bound,slack,holds\n");
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    for s_txt in &g.s {
        let s = num(s_txt, "s")?;
        let radius = g.radius.unwrap_or((37.0 / s).ceil() as u64);
        let net = out.timed("net", || Ok(build_measure_net(&model, g.points[0], beta, s, radius)?))?;
        for h in model.group().generators() {
            let c = net_defect(&model, &net, &h, &f)?;
            worst = worst.max(c.measured - c.analytic_bound - c.slack);
            all &= c.holds;
            let gen: Vec<String> = h.iter().map(|v| v.to_string()).collect();
            csv.push_str(&format!(
                "{},{radius},{},{},{},{},{}\n",
                fmt_f64(s),
                gen.join(" "),
                fmt_f64(c.measured),
                fmt_f64(c.analytic_bound),
                fmt_f64(c.slack),
                c.holds
            ));
        }
    }
    out.artifacts.push(Artifact::text("defects.csv", csv));
    let mut c = Certificate::at_most("net-defect", worst, 0.0, "measured - bound - slack".into());
    c.pass &= all;
    out.certificates.push(c);

    out.artifacts.push(Artifact::json(
        GROWTH_FILE,
        &GrowthJson {
            class: flags.class.as_str().into(),
            upper_estimate: flags.upper_estimate,
            lower_estimate: flags.lower_estimate,
            has_nonpos_limsup_point: flags.has_nonpos_limsup_point,
            has_nonneg_liminf_point: flags.has_nonneg_liminf_point,
            horizon: flags.horizon,
            tolerance: flags.tolerance,
            invariant_omega: om,
            invariant_class: inv_class.as_str().into(),
            growth_indicator: pre.ok(),
        },
    ));
    Ok(())
}

// ---------------------------------------------------------------- padic

pub const PADIC_FILE: &str = "padic.json";

#[derive(Serialize)]
struct ClosureJson {
    level: u32,
    order: u64,
    expected_order: u64,
    is_full: bool,
}

#[derive(Serialize)]
struct PadicJson {
    p: u64,
    closures: Vec<ClosureJson>,
    max_len: usize,
    alphabet_size: usize,
    words_checked: u64,
    big_words: u64,
    max_entry_bits: u64,
}

fn run_padic(cfg: &RunConfig, out: &mut Outcome, threads: usize) -> Result<()> {
    let pc = cfg.padic.as_ref().expect("validated");
    let gens = [padic::generator("g1", None)?, padic::generator("g2", None)?];
    let mut closures = Vec::new();
    for &level in &pc.levels {
        let rep = out.timed("closure", || Ok(padic::subgroup_closure_mod(pc.p, level, &gens)?))?;
        out.certificates.push(Certificate::flag(
            &format!("closure-{}^{}", pc.p, level),
            rep.is_full,
            format!("order {} of {}", rep.order, rep.expected_order),
        ));
        closures.push(ClosureJson {
            level,
            order: rep.order,
            expected_order: rep.expected_order,
            is_full: rep.is_full,
        });
    }
    let letters = padic::alphabet(pc.h_lo, pc.h_hi);
    let free = out.timed("freeness", || Ok(padic::freeness_suite_threads(&letters, pc.max_len, threads)))?;
    let (cert, json) = match free {
        Ok(f) => (
            Certificate::flag(
                "freeness",
                true,
                format!("{} reduced words up to length {}", f.words_checked, f.max_len),
            ),
            PadicJson {
                p: pc.p,
                closures,
                max_len: f.max_len,
                alphabet_size: f.alphabet_size,
                words_checked: f.words_checked,
                big_words: f.big_words,
                max_entry_bits: f.max_entry_bits,
            },
        ),
        Err(e) => (
            Certificate::flag("freeness", false, e.to_string()),
            PadicJson {
                p: pc.p,
                closures,
                max_len: pc.max_len,
                alphabet_size: letters.len(),
                words_checked: 0,
                big_words: 0,
                max_entry_bits: 0,
            },
        ),
    };
    out.certificates.push(cert);
    out.artifacts.push(Artifact::json(PADIC_FILE, &json));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_roundtrip() {
        let recs = vec![(-3.0, vec![0.25, 0.75]), (1.0, vec![0.5, 0.5])];
        assert_eq!(parse_measures(&write_measures(&recs)).unwrap(), recs);
        assert!(parse_measures("measure\nbeta 1\n").is_err());
        assert!(parse_measures("junk\n").is_err());
    }

    #[test]
    fn wreath_blocks_conformal() {
        let blocks = wreath_blocks(2.0).unwrap();
        let text = write_blocks(&blocks);
        let m = write_measures(&conformal_records(&blocks).unwrap());
        assert!(conformality_certificate(&text, &m).unwrap().pass);
    }

    #[test]
    fn perturbed_measure_fails() {
        let blocks = wreath_blocks(2.0).unwrap();
        let mut recs = conformal_records(&blocks).unwrap();
        recs[1].1[2] += 1e-3;
        let c = conformality_certificate(&write_blocks(&blocks), &write_measures(&recs)).unwrap();
        assert!(!c.pass && c.value > 1e-6, "{c:?}");
    }

    #[test]
    fn wreath_rn_passes() {
        let c = wreath_rn_certificate(wreath_blocks(2.0).unwrap()).unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn cylinders_enumerated() {
        assert_eq!(cylinders(&[-1, 0, 1], 3).len(), 27);
        assert_eq!(cylinders(&[], 3), vec![Vec::<(i64, usize)>::new()]);
    }

    #[test]
    fn threads_positive() {
        assert!(threads_from_env() >= 1);
    }
}
