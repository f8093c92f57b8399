//! Word balls, truncated limsup estimates, weighted orbit nets and the
//! four-way spectrum classification for groups of subexponential growth.
//!
//! State spaces are finite grids `Z/M` on which `Z^d` acts by rotations, so
//! everything here is an exact finite sum; limits are replaced by quantities
//! reported together with their horizon.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::conformal::ProbVector;
use crate::error::{Error, Result};
use crate::math::{self, abs, cos, exp, pow, PI};

/// Group element: a lattice vector, or a reduced word with letters `±(i+1)`.
pub type Element = Vec<i64>;

/// Finitely generated group with its standard symmetric generating set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordMetricGroup {
    /// `Z^dim` with generators `±e_i`; word length is the l1 norm.
    Lattice { dim: usize },
    /// Free group; present only so growth-dependent code can refuse it.
    Free { rank: usize },
}

impl WordMetricGroup {
    pub fn lattice(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("lattice dimension must be positive"));
        }
        Ok(WordMetricGroup::Lattice { dim })
    }

    pub fn identity(&self) -> Element {
        match self {
            WordMetricGroup::Lattice { dim } => vec![0; *dim],
            WordMetricGroup::Free { .. } => Vec::new(),
        }
    }

    pub fn generators(&self) -> Vec<Element> {
        match self {
            WordMetricGroup::Lattice { dim } => (0..*dim)
                .flat_map(|i| {
                    let mut p = vec![0; *dim];
                    let mut m = vec![0; *dim];
                    p[i] = 1;
                    m[i] = -1;
                    [p, m]
                })
                .collect(),
            WordMetricGroup::Free { rank } => (1..=*rank as i64).flat_map(|i| [vec![i], vec![-i]]).collect(),
        }
    }

    pub fn mul(&self, g: &[i64], h: &[i64]) -> Element {
        match self {
            WordMetricGroup::Lattice { .. } => g.iter().zip(h).map(|(a, b)| a + b).collect(),
            WordMetricGroup::Free { .. } => {
                let mut out: Element = g.to_vec();
                for &l in h {
                    if out.last() == Some(&-l) {
                        out.pop();
                    } else {
                        out.push(l);
                    }
                }
                out
            }
        }
    }

    pub fn inverse(&self, g: &[i64]) -> Element {
        match self {
            WordMetricGroup::Lattice { .. } => g.iter().map(|a| -a).collect(),
            WordMetricGroup::Free { .. } => g.iter().rev().map(|a| -a).collect(),
        }
    }

    pub fn word_length(&self, g: &[i64]) -> u64 {
        match self {
            WordMetricGroup::Lattice { .. } => g.iter().map(|a| a.unsigned_abs()).sum(),
            WordMetricGroup::Free { .. } => g.len() as u64,
        }
    }

    /// Elements of length exactly `k`, in a fixed order.
    pub fn sphere(&self, k: u64, cap: usize) -> Result<Vec<Element>> {
        let mut out = Vec::new();
        match self {
            WordMetricGroup::Lattice { dim } => {
                let mut cur = vec![0i64; *dim];
                lattice_sphere(&mut cur, 0, k as i64, &mut out, cap)?;
            }
            WordMetricGroup::Free { rank } => {
                let mut cur = Vec::new();
                free_sphere(*rank as i64, &mut cur, k as usize, &mut out, cap)?;
            }
        }
        Ok(out)
    }
}

fn push_capped(out: &mut Vec<Element>, e: Element, cap: usize) -> Result<()> {
    if out.len() >= cap {
        return Err(Error::SizeCap(format!("sphere exceeds {cap} elements")));
    }
    out.push(e);
    Ok(())
}

fn lattice_sphere(cur: &mut Vec<i64>, i: usize, left: i64, out: &mut Vec<Element>, cap: usize) -> Result<()> {
    if i + 1 == cur.len() {
        cur[i] = -left;
        push_capped(out, cur.clone(), cap)?;
        if left != 0 {
            cur[i] = left;
            push_capped(out, cur.clone(), cap)?;
        }
        return Ok(());
    }
    for v in -left..=left {
        cur[i] = v;
        lattice_sphere(cur, i + 1, left - v.abs(), out, cap)?;
    }
    Ok(())
}

fn free_sphere(rank: i64, cur: &mut Element, left: usize, out: &mut Vec<Element>, cap: usize) -> Result<()> {
    if left == 0 {
        return push_capped(out, cur.clone(), cap);
    }
    for l in (1..=rank).flat_map(|i| [i, -i]) {
        if cur.last() == Some(&-l) {
            continue;
        }
        cur.push(l);
        free_sphere(rank, cur, left - 1, out, cap)?;
        cur.pop();
    }
    Ok(())
}

/// Sphere counts `|G_k|` for `k = 0..=n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct Census {
    pub counts: Vec<u64>,
}

impl Census {
    /// `|G_k|^{1/k}` for `k >= 1`.
    pub fn indicator(&self, k: usize) -> f64 {
        pow(self.counts[k] as f64, 1.0 / k as f64)
    }

    pub fn horizon(&self) -> usize {
        self.counts.len() - 1
    }
}

/// Exact sphere counts up to `n_max`; fails once the ball exceeds `cap` elements.
pub fn ball_census(group: &WordMetricGroup, n_max: u64, cap: usize) -> Result<Census> {
    let mut counts = Vec::new();
    let mut total = 0usize;
    for k in 0..=n_max {
        let s = group.sphere(k, cap.saturating_sub(total))?;
        total += s.len();
        counts.push(s.len() as u64);
    }
    Ok(Census { counts })
}

pub const GROWTH_RADIUS: u64 = 64;
pub const GROWTH_THRESHOLD: f64 = 1.2;
pub const GROWTH_CAP: usize = 1_000_000;

/// Empirical subexponential-growth guard: the census is run to
/// [`GROWTH_RADIUS`] or until [`GROWTH_CAP`] elements, and the indicator at the
/// last complete sphere must not exceed [`GROWTH_THRESHOLD`].
pub fn growth_precheck(group: &WordMetricGroup) -> Result<f64> {
    let mut total = 0usize;
    let mut last = f64::INFINITY;
    for k in 1..=GROWTH_RADIUS {
        match group.sphere(k, GROWTH_CAP.saturating_sub(total)) {
            Ok(s) => {
                total += s.len();
                last = pow(s.len() as f64, 1.0 / k as f64);
            }
            Err(_) => break,
        }
    }
    if last > GROWTH_THRESHOLD {
        return Err(Error::Domain(format!(
            "sphere growth indicator {last:.4} exceeds {GROWTH_THRESHOLD}; group is not treated as subexponential"
        )));
    }
    Ok(last)
}

// ---------------------------------------------------------------- models

/// `Z^d` acting on `Z/modulus` by `x -> x + sum_i n_i step_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridRotation {
    pub modulus: u64,
    pub steps: Vec<u64>,
}

impl GridRotation {
    pub fn act(&self, g: &[i64], x: u64) -> u64 {
        let m = self.modulus as i128;
        let shift: i128 = g.iter().zip(&self.steps).map(|(&n, &s)| n as i128 * s as i128).sum();
        (x as i128 + shift).rem_euclid(m) as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CocyclePreset {
    /// `A (cos(2 pi g.x / M) - cos(2 pi x / M))`.
    Coboundary { amplitude: f64 },
    /// `<w, g>`, constant in `x`.
    Homomorphism { weights: Vec<f64> },
    /// Sum of the two above.
    Mixed { amplitude: f64, weights: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CocycleModel {
    group: WordMetricGroup,
    space: GridRotation,
    cocycle: CocyclePreset,
}

/// Closest integer to `M (sqrt 5 - 1) / 2`, made coprime to `M`.
pub fn golden_step(modulus: u64) -> u64 {
    let mut s = math::floor(modulus as f64 * (math::sqrt(5.0) - 1.0) / 2.0 + 0.5) as u64;
    while num_integer::gcd(s, modulus) != 1 {
        s += 1;
    }
    s % modulus
}

impl CocycleModel {
    pub fn new(group: WordMetricGroup, space: GridRotation, cocycle: CocyclePreset) -> Result<Self> {
        let dim = match group {
            WordMetricGroup::Lattice { dim } => dim,
            WordMetricGroup::Free { .. } => {
                growth_precheck(&group)?;
                return Err(Error::Domain(String::from("models act through lattice groups only")));
            }
        };
        if space.modulus < 2 || space.steps.len() != dim {
            return Err(Error::invalid("rotation needs modulus >= 2 and one step per generator"));
        }
        let w_len = match &cocycle {
            CocyclePreset::Coboundary { amplitude } => {
                if !amplitude.is_finite() {
                    return Err(Error::invalid("amplitude must be finite"));
                }
                dim
            }
            CocyclePreset::Homomorphism { weights } => weights.len(),
            CocyclePreset::Mixed { amplitude, weights } => {
                if !amplitude.is_finite() {
                    return Err(Error::invalid("amplitude must be finite"));
                }
                weights.len()
            }
        };
        if w_len != dim {
            return Err(Error::invalid("one homomorphism weight per lattice direction"));
        }
        growth_precheck(&group)?;
        Ok(CocycleModel { group, space, cocycle })
    }

    /// `Z` on a golden-ratio rotation grid.
    pub fn integers(modulus: u64, cocycle: CocyclePreset) -> Result<Self> {
        let space = GridRotation {
            modulus,
            steps: vec![golden_step(modulus)],
        };
        CocycleModel::new(WordMetricGroup::lattice(1)?, space, cocycle)
    }

    pub fn group(&self) -> &WordMetricGroup {
        &self.group
    }

    pub fn space(&self) -> &GridRotation {
        &self.space
    }

    pub fn cocycle(&self) -> &CocyclePreset {
        &self.cocycle
    }

    pub fn states(&self) -> u64 {
        self.space.modulus
    }

    pub fn act(&self, g: &[i64], x: u64) -> u64 {
        self.space.act(g, x)
    }

    fn height(&self, x: u64) -> f64 {
        cos(2.0 * PI * x as f64 / self.space.modulus as f64)
    }

    /// `Omega(g, x)`.
    pub fn omega(&self, g: &[i64], x: u64) -> f64 {
        let hom = |w: &[f64]| -> f64 { w.iter().zip(g).map(|(w, &n)| w * n as f64).sum() };
        match &self.cocycle {
            CocyclePreset::Coboundary { amplitude } => amplitude * (self.height(self.act(g, x)) - self.height(x)),
            CocyclePreset::Homomorphism { weights } => hom(weights),
            CocyclePreset::Mixed { amplitude, weights } => {
                amplitude * (self.height(self.act(g, x)) - self.height(x)) + hom(weights)
            }
        }
    }

    /// `sup_x |Omega(g, x)| / |g|` bound for the bounded part: `2 |A|`.
    pub fn coboundary_bound(&self) -> f64 {
        match &self.cocycle {
            CocyclePreset::Coboundary { amplitude } | CocyclePreset::Mixed { amplitude, .. } => 2.0 * abs(*amplitude),
            CocyclePreset::Homomorphism { .. } => 0.0,
        }
    }
}

// ---------------------------------------------------------------- limsup

#[derive(Clone, Debug, PartialEq)]
pub struct LimsupEstimate {
    pub horizon: u64,
    /// `tail[n] = max over n < |g| <= horizon of beta Omega(g, x) / |g|`, for `n < horizon`.
    pub tail: Vec<f64>,
    /// `tail[horizon / 2]`: the reported estimate.
    pub estimate: f64,
}

/// Horizon-truncated estimate of `limsup beta Omega(g, x) / |g|`.
pub fn limsup_ratio(model: &CocycleModel, x: u64, beta: f64, horizon: u64) -> Result<LimsupEstimate> {
    if horizon < 2 {
        return Err(Error::invalid("horizon must be at least 2"));
    }
    let mut sphere_max = vec![f64::NEG_INFINITY; horizon as usize + 1];
    for k in 1..=horizon {
        for g in model.group.sphere(k, GROWTH_CAP)? {
            let v = if beta == 0.0 { 0.0 } else { beta * model.omega(&g, x) / k as f64 };
            sphere_max[k as usize] = math::max(sphere_max[k as usize], v);
        }
    }
    let mut tail = vec![f64::NEG_INFINITY; horizon as usize];
    let mut run = f64::NEG_INFINITY;
    for n in (0..horizon as usize).rev() {
        run = math::max(run, sphere_max[n + 1]);
        tail[n] = run;
    }
    let estimate = tail[horizon as usize / 2];
    Ok(LimsupEstimate { horizon, tail, estimate })
}

/// The four possible spectra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpectrumClass {
    Zero,
    NonNegative,
    NonPositive,
    All,
}

impl SpectrumClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumClass::Zero => "{0}",
            SpectrumClass::NonNegative => "[0,inf)",
            SpectrumClass::NonPositive => "(-inf,0]",
            SpectrumClass::All => "R",
        }
    }
}

impl fmt::Display for SpectrumClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `[0, inf)` is in the spectrum iff some point has `limsup Omega/|g| <= 0`;
/// `(-inf, 0]` iff some point has `liminf Omega/|g| >= 0`.
pub fn classify_spectrum(has_nonpos_limsup_point: bool, has_nonneg_liminf_point: bool) -> SpectrumClass {
    match (has_nonpos_limsup_point, has_nonneg_liminf_point) {
        (true, true) => SpectrumClass::All,
        (true, false) => SpectrumClass::NonNegative,
        (false, true) => SpectrumClass::NonPositive,
        (false, false) => SpectrumClass::Zero,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumFlags {
    pub horizon: u64,
    pub tolerance: f64,
    /// Smallest estimate at `beta = 1` over the base points.
    pub upper_estimate: f64,
    /// Smallest estimate at `beta = -1` over the base points.
    pub lower_estimate: f64,
    pub has_nonpos_limsup_point: bool,
    pub has_nonneg_liminf_point: bool,
    pub class: SpectrumClass,
}

/// Runs [`limsup_ratio`] at `beta = +1` and `-1` from each base point; a flag
/// is set when some estimate is at most `tol`.
pub fn spectrum_flags(model: &CocycleModel, points: &[u64], horizon: u64, tol: f64) -> Result<SpectrumFlags> {
    if points.is_empty() {
        return Err(Error::invalid("need at least one base point"));
    }
    let mut up = f64::INFINITY;
    let mut down = f64::INFINITY;
    for &x in points {
        up = math::min(up, limsup_ratio(model, x, 1.0, horizon)?.estimate);
        down = math::min(down, limsup_ratio(model, x, -1.0, horizon)?.estimate);
    }
    let a = up <= tol;
    let b = down <= tol;
    Ok(SpectrumFlags {
        horizon,
        tolerance: tol,
        upper_estimate: up,
        lower_estimate: down,
        has_nonpos_limsup_point: a,
        has_nonneg_liminf_point: b,
        class: classify_spectrum(a, b),
    })
}

// ---------------------------------------------------------------- measure nets

/// Normalized `sum_{|g| <= R} e^{beta Omega(g, x) - |g| s} delta_{g x}`, aggregated per state.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureNet {
    pub base: u64,
    pub beta: f64,
    pub s: f64,
    pub radius: u64,
    /// Unnormalized total mass of the truncated sum.
    pub mass: f64,
    /// Mass of the outermost sphere relative to the total.
    pub tail_ratio: f64,
    /// `(state, weight)` for every reached state, weights positive and summing to 1.
    pub atoms: Vec<(u64, f64)>,
}

pub const NET_TAIL_TOL: f64 = 1e-15;

fn orbit_weight(model: &CocycleModel, g: &[i64], x: u64, beta: f64, s: f64) -> f64 {
    exp(beta * model.omega(g, x) - model.group.word_length(g) as f64 * s)
}

pub fn build_measure_net(model: &CocycleModel, x: u64, beta: f64, s: f64, radius: u64) -> Result<MeasureNet> {
    if !(s > 0.0 && s.is_finite()) || x >= model.states() {
        return Err(Error::invalid("need s > 0 and a base point on the grid"));
    }
    let mut w = vec![0.0; model.states() as usize];
    let mut total = 0.0;
    let mut outer = 0.0;
    for k in 0..=radius {
        let mut sphere = 0.0;
        for g in model.group.sphere(k, GROWTH_CAP)? {
            let v = orbit_weight(model, &g, x, beta, s);
            w[model.act(&g, x) as usize] += v;
            sphere += v;
        }
        total += sphere;
        if k == radius {
            outer = sphere;
        }
    }
    if !total.is_finite() {
        return Err(Error::Convergence(String::from("weights overflow")));
    }
    let tail_ratio = outer / total;
    if tail_ratio > NET_TAIL_TOL {
        return Err(Error::Convergence(format!(
            "outer sphere carries {tail_ratio:e} of the mass at radius {radius}; weights do not decay fast enough for s = {s}"
        )));
    }
    Ok(MeasureNet {
        base: x,
        beta,
        s,
        radius,
        mass: total,
        tail_ratio,
        atoms: w
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(y, v)| (y as u64, v / total))
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefectCertificate {
    pub generator: Element,
    /// `|int f(h.) e^{beta Omega(h, .)} dm - int f dm|` for the normalized net.
    pub measured: f64,
    /// `||f|| (e^{|h| s} - 1)`.
    pub analytic_bound: f64,
    /// Ball-boundary contribution, normalized by the net mass.
    pub slack: f64,
    pub holds: bool,
}

/// Conformality defect of the net for translation by `h` on the test function `f`.
pub fn net_defect(model: &CocycleModel, net: &MeasureNet, h: &[i64], f: &dyn Fn(u64) -> f64) -> Result<DefectCertificate> {
    let sup_f = (0..model.states()).map(|x| abs(f(x))).fold(0.0, math::max);
    let mut measured = 0.0;
    for &(y, m) in &net.atoms {
        measured += m * (f(model.act(h, y)) * exp(net.beta * model.omega(h, y)) - f(y));
    }
    let measured = abs(measured);
    let hl = model.group.word_length(h);
    // elements entering or leaving the ball under reindexing g' = h g
    let h_inv = model.group.inverse(h);
    let mut slack = 0.0;
    let r = net.radius;
    for k in r.saturating_sub(hl) + 1..=r + hl {
        for g in model.group.sphere(k, GROWTH_CAP)? {
            let moved = model.group.mul(&h_inv, &g);
            let lm = model.group.word_length(&moved);
            let e = exp(net.beta * model.omega(&g, net.base));
            if k > r && lm <= r {
                slack += e * exp(-(lm as f64) * net.s);
            } else if k <= r && lm > r {
                slack += e * exp(-(k as f64) * net.s);
            }
        }
    }
    let slack = sup_f * slack / net.mass;
    let analytic_bound = sup_f * math::expm1(hl as f64 * net.s);
    // relative rounding allowance for summing O(states) terms
    let rounding = 1e-12 * sup_f * (1.0 + analytic_bound);
    Ok(DefectCertificate {
        generator: h.to_vec(),
        measured,
        analytic_bound,
        slack,
        holds: measured <= analytic_bound + slack + rounding,
    })
}

// ---------------------------------------------------------------- invariant measures

/// `Omega_mu(g) = int Omega(g, x) dmu(x)` at `g`, after checking invariance of `mu`.
pub fn omega_mu_at(model: &CocycleModel, mu: &ProbVector, g: &[i64]) -> Result<f64> {
    check_invariant(model, mu)?;
    Ok(omega_integral(model, mu, g))
}

fn omega_integral(model: &CocycleModel, mu: &ProbVector, g: &[i64]) -> f64 {
    mu.weights()
        .iter()
        .enumerate()
        .map(|(x, m)| m * model.omega(g, x as u64))
        .sum()
}

fn check_invariant(model: &CocycleModel, mu: &ProbVector) -> Result<()> {
    if mu.len() as u64 != model.states() {
        return Err(Error::invalid("measure size does not match the grid"));
    }
    let w = mu.weights();
    for g in model.group.generators() {
        for x in 0..model.states() {
            let d = abs(w[model.act(&g, x) as usize] - w[x as usize]);
            if d > 1e-10 {
                return Err(Error::Domain(format!("measure is not invariant: defect {d:e} at state {x}")));
            }
        }
    }
    Ok(())
}

/// `Omega_mu` on each generator, in [`WordMetricGroup::generators`] order.
pub fn omega_mu(model: &CocycleModel, mu: &ProbVector) -> Result<Vec<f64>> {
    check_invariant(model, mu)?;
    Ok(model
        .group
        .generators()
        .iter()
        .map(|g| omega_integral(model, mu, g))
        .collect())
}

/// For a uniquely ergodic action: `R` if `Omega_mu` vanishes, `{0}` otherwise.
pub fn uniquely_ergodic_class(omega_mu: &[f64], tol: f64) -> SpectrumClass {
    if omega_mu.iter().all(|v| abs(*v) <= tol) {
        SpectrumClass::All
    } else {
        SpectrumClass::Zero
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sphere_counts() {
        let z = WordMetricGroup::lattice(1).unwrap();
        let c = ball_census(&z, 10, 1000).unwrap();
        assert_eq!(c.counts[0], 1);
        assert!(c.counts[1..].iter().all(|&n| n == 2));
        let z2 = WordMetricGroup::lattice(2).unwrap();
        let c = ball_census(&z2, 12, 10_000).unwrap();
        for k in 1..=12 {
            assert_eq!(c.counts[k], 4 * k as u64);
        }
        let f2 = WordMetricGroup::Free { rank: 2 };
        let c = ball_census(&f2, 5, 10_000).unwrap();
        assert_eq!(c.counts, vec![1, 4, 12, 36, 108, 324]);
        assert!(matches!(ball_census(&f2, 12, 10_000), Err(Error::SizeCap(_))));
    }

    #[test]
    fn precheck() {
        assert!(growth_precheck(&WordMetricGroup::lattice(1).unwrap()).is_ok());
        assert!(growth_precheck(&WordMetricGroup::lattice(2).unwrap()).is_ok());
        assert!(matches!(growth_precheck(&WordMetricGroup::Free { rank: 2 }), Err(Error::Domain(_))));
        let space = GridRotation { modulus: 5, steps: vec![1, 2] };
        let r = CocycleModel::new(WordMetricGroup::Free { rank: 2 }, space, CocyclePreset::Coboundary { amplitude: 1.0 });
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    fn cob() -> CocycleModel {
        CocycleModel::integers(1000, CocyclePreset::Coboundary { amplitude: 1.0 }).unwrap()
    }

    fn hom(c: f64) -> CocycleModel {
        CocycleModel::integers(1000, CocyclePreset::Homomorphism { weights: vec![c] }).unwrap()
    }

    #[test]
    fn limsup_examples() {
        for n in [16u64, 64, 256] {
            let e = limsup_ratio(&cob(), 3, 1.0, n).unwrap();
            for (i, t) in e.tail.iter().enumerate().skip(1) {
                assert!(*t <= 2.0 / i as f64 + 1e-12);
            }
            let e = limsup_ratio(&hom(0.7), 3, 1.0, n).unwrap();
            assert!(e.tail.iter().all(|t| abs(t - 0.7) < 1e-15));
            let e = limsup_ratio(&hom(0.7), 3, 0.0, n).unwrap();
            assert_eq!(e.estimate, 0.0);
        }
    }

    #[test]
    fn classification() {
        let all = [
            classify_spectrum(true, true),
            classify_spectrum(true, false),
            classify_spectrum(false, true),
            classify_spectrum(false, false),
        ];
        assert_eq!(all, [SpectrumClass::All, SpectrumClass::NonNegative, SpectrumClass::NonPositive, SpectrumClass::Zero]);
        assert_eq!(spectrum_flags(&cob(), &[0, 7], 64, 0.1).unwrap().class, SpectrumClass::All);
        assert_eq!(spectrum_flags(&hom(1.0), &[0], 64, 0.1).unwrap().class, SpectrumClass::Zero);
    }

    #[test]
    fn trivial_net_is_geometric() {
        let m = CocycleModel::integers(10_000, CocyclePreset::Homomorphism { weights: vec![0.0] }).unwrap();
        let s = 0.5;
        let net = build_measure_net(&m, 0, 0.0, s, 80).unwrap();
        assert!(abs(net.atoms.iter().map(|a| a.1).sum::<f64>() - 1.0) < 1e-12);
        let z = 1.0 + 2.0 * exp(-s) / (1.0 - exp(-s));
        for n in [-3i64, 0, 2, 5] {
            let y = m.act(&[n], 0);
            let w = net.atoms.iter().find(|a| a.0 == y).unwrap().1;
            assert!(abs(w - exp(-(n.abs() as f64) * s) / z) < 1e-13);
        }
    }

    #[test]
    fn net_defect_within_bound() {
        let m = cob();
        for s in [0.5, 0.1, 0.01] {
            let r = math::ceil(37.0 / s) as u64;
            let net = build_measure_net(&m, 0, 1.0, s, r).unwrap();
            let f = |x: u64| if x < 300 { 1.0 } else { -0.5 };
            for h in m.group().generators() {
                let c = net_defect(&m, &net, &h, &f).unwrap();
                assert!(c.holds, "{c:?}");
            }
        }
    }

    #[test]
    fn divergent_net_rejected() {
        let r = build_measure_net(&hom(1.0), 0, 1.0, 0.1, 50);
        assert!(matches!(r, Err(Error::Convergence(_))));
    }

    #[test]
    fn omega_mu_examples() {
        let u = ProbVector::uniform(1000).unwrap();
        assert!(abs(omega_mu(&cob(), &u).unwrap()[0]) < 1e-12);
        assert!(abs(omega_mu(&hom(0.3), &u).unwrap()[0] - 0.3) < 1e-12);
        let mixed = CocycleModel::integers(1000, CocyclePreset::Mixed { amplitude: 2.0, weights: vec![-0.4] }).unwrap();
        assert!(abs(omega_mu(&mixed, &u).unwrap()[0] + 0.4) < 1e-12);
        assert_eq!(uniquely_ergodic_class(&omega_mu(&cob(), &u).unwrap(), 1e-9), SpectrumClass::All);
        assert_eq!(uniquely_ergodic_class(&omega_mu(&hom(0.3), &u).unwrap(), 1e-9), SpectrumClass::Zero);
        let mut w = vec![1.0; 1000];
        w[0] = 2.0;
        let skew = ProbVector::from_masses(&w).unwrap();
        assert!(matches!(omega_mu(&cob(), &skew), Err(Error::Domain(_))));
    }

    fn models() -> Vec<CocycleModel> {
        let z2 = WordMetricGroup::lattice(2).unwrap();
        let space = GridRotation { modulus: 997, steps: vec![616, 123] };
        vec![
            cob(),
            hom(1.3),
            CocycleModel::integers(1000, CocyclePreset::Mixed { amplitude: 0.5, weights: vec![0.2] }).unwrap(),
            CocycleModel::new(z2, space, CocyclePreset::Mixed { amplitude: 1.5, weights: vec![0.1, -0.7] }).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn cocycle_identity(i in 0usize..4, a in -50i64..50, b in -50i64..50, c in -50i64..50, d in -50i64..50, x in 0u64..997) {
            let m = &models()[i];
            let dim = m.space().steps.len();
            let g: Vec<i64> = [a, b][..dim].to_vec();
            let h: Vec<i64> = [c, d][..dim].to_vec();
            let gh = m.group().mul(&g, &h);
            let lhs = m.omega(&g, m.act(&h, x)) + m.omega(&h, x);
            prop_assert!(abs(lhs - m.omega(&gh, x)) <= 1e-10);
        }

        #[test]
        fn omega_mu_additive(i in 0usize..4, a in -20i64..20, b in -20i64..20, c in -20i64..20, d in -20i64..20) {
            let m = &models()[i];
            let dim = m.space().steps.len();
            let u = ProbVector::uniform(m.states() as usize).unwrap();
            let g: Vec<i64> = [a, b][..dim].to_vec();
            let h: Vec<i64> = [c, d][..dim].to_vec();
            let gh = m.group().mul(&g, &h);
            let s = omega_mu_at(m, &u, &g).unwrap() + omega_mu_at(m, &u, &h).unwrap();
            prop_assert!(abs(omega_mu_at(m, &u, &gh).unwrap() - s) <= 1e-9);
        }

        #[test]
        fn word_length_axioms(a in -30i64..30, b in -30i64..30, c in -30i64..30, d in -30i64..30) {
            let z2 = WordMetricGroup::lattice(2).unwrap();
            let g = vec![a, b];
            let h = vec![c, d];
            prop_assert_eq!(z2.word_length(&z2.inverse(&g)), z2.word_length(&g));
            prop_assert!(z2.word_length(&z2.mul(&g, &h)) <= z2.word_length(&g) + z2.word_length(&h));
            prop_assert_eq!(z2.word_length(&g) == 0, g == z2.identity());
        }
    }
}
