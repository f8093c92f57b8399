//! Staged product realization of `phi = 1 + P_a zeta` and the two explicit
//! fraction constructions whose level sets cut out a closed set avoiding 0.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::conformal::{self, FiniteConformalBlock, FiniteGroupTable, ProbVector};
use crate::error::{Error, Result};
use crate::exprat::{self, certify_sup_sampled, OrderSequence, PartitionedBlockSystem, RealizeOptions, SupCertificate, Target};
use crate::math::{self, abs, exp, ln, tanh, Interval, LogAcc};
use crate::spectra::ClosedSetSpec;

/// `P(beta) = (a^beta - 1)/(a^beta + 1)`, written as `tanh(beta ln a / 2)` so it
/// is odd to the last bit.
#[inline]
pub fn mobius_eval(a: f64, beta: f64) -> f64 {
    tanh(0.5 * beta * ln(a))
}

/// Values of `P_a` over a cell; `P_a` is increasing.
pub fn mobius_enclose(a: f64, b0: f64, b1: f64) -> Interval {
    Interval::new(mobius_eval(a, b0), mobius_eval(a, b1))
}

/// Upper bound on `sup |P_{a_n} / P_{a_next}|`.
///
/// The ratio `tanh(u x)/tanh(v x)` is even and monotone in `x > 0` between
/// `u/v` at 0 and 1 at infinity. The bound is the larger limit; a grid pass
/// confirms monotonicity and that no sample exceeds it.
pub fn ratio_bound(a_n: f64, a_next: f64) -> Result<f64> {
    if !(a_n > 1.0 && a_next > 1.0 && a_n.is_finite() && a_next.is_finite()) {
        return Err(Error::invalid("bases must be finite and exceed 1"));
    }
    let (u, v) = (ln(a_n), ln(a_next));
    let limit0 = u / v;
    let bound = math::max(limit0, 1.0);
    let scale = 1.0 / math::min(u, v);
    let mut prev = limit0;
    let increasing = limit0 <= 1.0;
    for i in 1..=2000 {
        let x = scale * 40.0 * i as f64 / 2000.0;
        let r = mobius_eval(a_n, x) / mobius_eval(a_next, x);
        let slack = 1e-12 * bound;
        if r > bound + slack || (increasing && r < prev - slack) || (!increasing && r > prev + slack) {
            return Err(Error::Numeric(format!(
                "ratio of factors {a_n}, {a_next} is not monotone near x = {x}"
            )));
        }
        prev = r;
    }
    Ok(bound)
}

/// Decreasing bases `a_1 = a > a_2 > ... > 1` with summable `a_n - 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum BaseSchedule {
    /// `a_n = 1 + (a - 1)/n^2`.
    InverseSquare(f64),
    /// `a_n = 1 + (a - 1) q^(n-1)` with `0 < q < 1`; consecutive ratios of
    /// `ln a_n` stay near `1/q`.
    Geometric { a: f64, q: f64 },
    /// Explicit list; must cover one more stage than is built.
    Explicit(Vec<f64>),
}

impl BaseSchedule {
    /// Base of stage `n >= 1`.
    pub fn base(&self, n: usize) -> Result<f64> {
        match self {
            BaseSchedule::InverseSquare(a) => Ok(1.0 + (a - 1.0) / (n * n) as f64),
            BaseSchedule::Geometric { a, q } => {
                if !(*q > 0.0 && *q < 1.0) {
                    return Err(Error::invalid("geometric ratio must lie in (0, 1)"));
                }
                Ok(1.0 + (a - 1.0) * math::pow(*q, (n - 1) as f64))
            }
            BaseSchedule::Explicit(v) => v
                .get(n - 1)
                .copied()
                .ok_or_else(|| Error::invalid(format!("schedule has no base for stage {n}"))),
        }
    }

    /// Bound on `sum_{n > k} ln a_n`.
    pub fn tail_log_sum(&self, k: usize) -> f64 {
        match self {
            // sum_{n>k} (a-1)/n^2 <= (a-1)/k
            BaseSchedule::InverseSquare(a) => (a - 1.0) / k.max(1) as f64,
            // ln(1 + x) <= x, geometric sum from n = k + 1
            BaseSchedule::Geometric { a, q } => (a - 1.0) * math::pow(*q, k as f64) / (1.0 - q),
            BaseSchedule::Explicit(_) => f64::INFINITY,
        }
    }

    fn validate(&self, a: f64, stages: usize) -> Result<()> {
        let mut prev = f64::INFINITY;
        for n in 1..=stages + 1 {
            let b = self.base(n)?;
            if !(b > 1.0 && b < prev && b.is_finite()) {
                return Err(Error::invalid("schedule bases must decrease strictly and exceed 1"));
            }
            prev = b;
        }
        if abs(self.base(1)? - a) > 1e-12 * a {
            return Err(Error::invalid("first schedule base must equal a"));
        }
        Ok(())
    }
}

/// One factor of a realizable product.
#[derive(Clone, Debug, PartialEq)]
pub enum Stage {
    Explicit(FiniteConformalBlock),
    Partitioned(PartitionedBlockSystem),
}

impl Stage {
    pub fn integrate_potential(&self, beta: f64) -> f64 {
        match self {
            Stage::Explicit(b) => conformal::integrate_potential(b, beta).unwrap_or(f64::NAN),
            Stage::Partitioned(s) => s.integrate_potential(beta),
        }
    }

    /// Cyclic or explicit group orders the stage occupies.
    pub fn orders(&self) -> Vec<usize> {
        match self {
            Stage::Explicit(b) => vec![b.order()],
            Stage::Partitioned(s) => s.orders(),
        }
    }

    pub fn size(&self) -> BigUint {
        match self {
            Stage::Explicit(b) => BigUint::from(b.order()),
            Stage::Partitioned(s) => s.size(),
        }
    }

    /// The base `a` bounding the potential: `H` takes values in `[1/a, a]`.
    pub fn base(&self) -> f64 {
        match self {
            Stage::Explicit(b) => b.base_a(),
            Stage::Partitioned(s) => s.t(),
        }
    }
}

/// Per-stage diagnostics of [`build_realizable`].
#[derive(Clone, Debug, PartialEq)]
pub struct StageReport {
    pub stage: usize,
    pub base: f64,
    pub next_base: f64,
    pub ratio_bound: f64,
    pub tolerance: f64,
    pub fit: SupCertificate,
    /// Largest amount by which the stage target left `[-1/2, 1/2]` before clamping.
    pub clamp_excess: f64,
    /// `min (1 + P_k zeta_k)` on the grid.
    pub factor_min: f64,
    /// `max psi_k` on the grid.
    pub psi_max: f64,
    /// Grid maximum of `|phi - psi_k|`.
    pub phi_gap: f64,
    pub degree: usize,
    pub factors_used: usize,
}

/// Product of finite stages realizing `phi(beta) = prod_n int H_n^beta dmu_{n,beta}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizableCocycle {
    stages: Vec<Stage>,
    reports: Vec<StageReport>,
    certificate: Option<SupCertificate>,
    range: f64,
    tail_bound: f64,
}

impl RealizableCocycle {
    /// Wraps already built stages; no certificate is attached.
    pub fn from_stages(stages: Vec<Stage>, range: f64, tail_bound: f64) -> Self {
        RealizableCocycle {
            stages,
            reports: Vec::new(),
            certificate: None,
            range,
            tail_bound,
        }
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn reports(&self) -> &[StageReport] {
        &self.reports
    }

    /// Certified `sup |phi - psi_K|` over the window, when built from a target.
    pub fn certificate(&self) -> Option<&SupCertificate> {
        self.certificate.as_ref()
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    /// Bound on `|ln|` of the omitted stages' product over the window.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn bases(&self) -> Vec<f64> {
        self.stages.iter().map(Stage::base).collect()
    }

    /// Places an explicit block in front of the product.
    pub fn with_prefix(mut self, block: FiniteConformalBlock) -> Self {
        self.stages.insert(0, Stage::Explicit(block));
        self
    }

    pub fn orders(&self) -> Vec<usize> {
        self.stages.iter().flat_map(Stage::orders).collect()
    }
}

/// `prod_n int H_n^beta dmu_{n,beta}` over the stored stages.
pub fn eval_phi(cocycle: &RealizableCocycle, beta: f64) -> f64 {
    cocycle.stages.iter().map(|s| s.integrate_potential(beta)).product()
}

/// `1 + P_a zeta`.
pub struct EnvelopeTarget<'a> {
    pub zeta: &'a dyn Target,
    pub a: f64,
}

impl Target for EnvelopeTarget<'_> {
    fn eval(&self, beta: f64) -> f64 {
        1.0 + mobius_eval(self.a, beta) * self.zeta.eval(beta)
    }

    fn enclose(&self, b0: f64, b1: f64) -> Option<Interval> {
        let z = self.zeta.enclose(b0, b1)?;
        Some(Interval::point(1.0).add(mobius_enclose(self.a, b0, b1).mul(z)))
    }
}

struct StageTarget<'a> {
    phi: &'a EnvelopeTarget<'a>,
    done: &'a [PartitionedBlockSystem],
    bases: &'a [f64],
    a_k: f64,
}

/// Stage targets are evaluated at least this far from 0, where `P_k` vanishes.
const NEAR_ZERO: f64 = 1e-5;

fn psi(done: &[PartitionedBlockSystem], bases: &[f64], beta: f64) -> f64 {
    done.iter()
        .zip(bases)
        .map(|(s, &a)| 1.0 + mobius_eval(a, beta) * s.zeta(beta))
        .product()
}

impl StageTarget<'_> {
    fn raw(&self, beta: f64) -> f64 {
        let b = if abs(beta) < NEAR_ZERO {
            if beta < 0.0 {
                -NEAR_ZERO
            } else {
                NEAR_ZERO
            }
        } else {
            beta
        };
        let p = psi(self.done, self.bases, b);
        (self.phi.eval(b) - p) / (p * mobius_eval(self.a_k, b))
    }
}

impl Target for StageTarget<'_> {
    fn eval(&self, beta: f64) -> f64 {
        let v = self.raw(beta);
        math::min(0.5, math::max(-0.5, v))
    }
}

/// Builds `stages` blocks whose product approximates `phi = 1 + P_a zeta`.
///
/// Stage `k` realizes `f_k = (phi - psi_{k-1})/(psi_{k-1} P_k)` to within
/// `min(1/(4 C_k), 2^-k)` with `C_k` from [`ratio_bound`]; the final
/// `sup |phi - psi_K|` on the window is certified by interval enclosures.
pub fn build_realizable(
    zeta: &dyn Target,
    a: f64,
    stages: usize,
    schedule: &BaseSchedule,
    orders: &OrderSequence,
    opts: &RealizeOptions,
) -> Result<RealizableCocycle> {
    if stages == 0 {
        return Err(Error::invalid("at least one stage is required"));
    }
    if !(a > 1.0 && a.is_finite()) {
        return Err(Error::invalid("a must exceed 1"));
    }
    schedule.validate(a, stages)?;
    let r = opts.range;
    let phi = EnvelopeTarget { zeta, a };
    let grid = math::linspace(-r, r, opts.fit.cert_points.max(2));
    let phi_vals: Vec<f64> = grid.iter().map(|&b| phi.eval(b)).collect();
    let mut done: Vec<PartitionedBlockSystem> = Vec::new();
    let mut bases: Vec<f64> = Vec::new();
    let mut reports = Vec::new();
    let mut js = orders.clone();
    for k in 1..=stages {
        let a_k = schedule.base(k)?;
        let a_next = schedule.base(k + 1)?;
        let c_k = ratio_bound(a_k, a_next).map_err(|e| e.at_stage(k))?;
        let tol = math::min(1.0 / (4.0 * c_k), exp(-(k as f64) * math::LN_2));
        let target = StageTarget {
            phi: &phi,
            done: &done,
            bases: &bases,
            a_k,
        };
        let clamp_excess = grid
            .iter()
            .map(|&b| math::max(0.0, abs(target.raw(b)) - 0.5))
            .fold(0.0, math::max);
        let sys = exprat::realize_block(&target, a_k, tol, &js, opts).map_err(|e| e.at_stage(k))?;
        let fit = certify_sup_sampled(
            &target,
            &grid,
            &grid.iter().map(|&b| target.eval(b)).collect::<Vec<_>>(),
            &|b| sys.zeta(b),
            &|b0, b1| sys.zeta_enclosure(b0, b1),
        );
        js = js.advanced(sys.orders().len());
        let degree = sys.report().degree;
        let used = sys.orders().len();
        done.push(sys);
        bases.push(a_k);
        let mut factor_min = f64::INFINITY;
        let mut psi_max: f64 = 0.0;
        let mut gap: f64 = 0.0;
        for (&b, &pv) in grid.iter().zip(&phi_vals) {
            let f = 1.0 + mobius_eval(a_k, b) * done[k - 1].zeta(b);
            factor_min = math::min(factor_min, f);
            let p = psi(&done, &bases, b);
            psi_max = math::max(psi_max, p);
            gap = math::max(gap, abs(pv - p));
        }
        if factor_min < 0.5 {
            return Err(Error::Convergence(format!("factor minimum {factor_min} below 1/2")).at_stage(k));
        }
        if psi_max > 2.0 {
            return Err(Error::Convergence(format!("partial product reaches {psi_max} > 2")).at_stage(k));
        }
        reports.push(StageReport {
            stage: k,
            base: a_k,
            next_base: a_next,
            ratio_bound: c_k,
            tolerance: tol,
            fit,
            clamp_excess,
            factor_min,
            psi_max,
            phi_gap: gap,
            degree,
            factors_used: used,
        });
    }
    let certificate = certify_sup_sampled(
        &phi,
        &grid,
        &phi_vals,
        &|b| psi(&done, &bases, b),
        &|b0, b1| {
            done.iter().zip(&bases).fold(Interval::point(1.0), |acc, (s, &ak)| {
                let f = Interval::point(1.0).add(mobius_enclose(ak, b0, b1).mul(s.zeta_enclosure(b0, b1)));
                acc.mul(f)
            })
        },
    );
    let tail_bound = r * schedule.tail_log_sum(stages);
    Ok(RealizableCocycle {
        stages: done.into_iter().map(Stage::Partitioned).collect(),
        reports,
        certificate: Some(certificate),
        range: r,
        tail_bound,
    })
}

// ---------------------------------------------------------------- fractions

/// Piecewise linear fold: identity on `[-1/2, 1/2]`, back to 0 at `+-1`, zero beyond.
pub fn clamp_fold(t: f64) -> f64 {
    let a = abs(t);
    if a <= 0.5 {
        t
    } else if a <= 1.0 {
        if t > 0.0 {
            1.0 - t
        } else {
            -1.0 - t
        }
    } else {
        0.0
    }
}

/// `ln sum_i c_i x_i^beta` over terms with positive coefficient.
fn ln_mix(terms: &[(f64, f64)], beta: f64) -> f64 {
    let mut acc = LogAcc::new();
    for &(c, x) in terms {
        if c > 0.0 {
            acc.add(ln(c) + beta * ln(x));
        }
    }
    acc.value()
}

/// Which of the two fraction functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Level `1/k`.
    Lower,
    /// Level `k`.
    Upper,
}

/// Numeric checks of the base choices.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionChecks {
    /// `(2(k-1) + l - l/k) b^-delta`, must be at most 1/4.
    pub lower_tail: f64,
    /// `2(k-1)(b/a)^delta + (l - l/k)(c/a)^delta`, must be at most 1/4.
    pub upper_tail: f64,
    /// `(a^delta + 1)/(a^delta - 1)`, must be at most 2.
    pub coth_at_delta: f64,
    /// Grid maximum of `|Q|` over `|beta| >= delta`, per side.
    pub q_outside: [f64; 2],
    /// Whether some grid point in `(0, delta)` has `|Q| > 1/2`, per side.
    pub fold_exercised: [bool; 2],
}

/// The pair of realizable fractions whose levels `1/k` and `k` are attained exactly on `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionPair {
    set: ClosedSetSpec,
    k: usize,
    l: usize,
    delta: f64,
    a: f64,
    b: f64,
    c: f64,
}

const BASE_CEILING: f64 = 1e150;

/// Chooses `delta`, then `b` and `a` by doubling until the base inequalities hold.
///
/// `lambda0_order = 2k + l` is the order of the explicit first block.
pub fn fraction_pair(set: &ClosedSetSpec, k: usize, lambda0_order: usize) -> Result<FractionPair> {
    if k < 2 {
        return Err(Error::invalid("k must be at least 2"));
    }
    if lambda0_order < 2 * k {
        return Err(Error::invalid(format!("first block order {lambda0_order} is below 2k = {}", 2 * k)));
    }
    if lambda0_order > conformal::MAX_TABLE_ORDER {
        return Err(Error::invalid("first block order exceeds the table limit"));
    }
    let d0 = set.distance(0.0);
    if !(d0 > 0.0) {
        return Err(Error::Domain(String::from("the set must not contain 0")));
    }
    let delta = if d0.is_finite() { 0.5 * d0 } else { 1.0 };
    let l = lambda0_order - 2 * k;
    let kf = k as f64;
    let lf = l as f64;
    let w = 2.0 * (kf - 1.0);
    let v = lf - lf / kf;
    let mut b = 2.0;
    while (w + v) * exp(-delta * ln(b)) > 0.25 {
        b *= 2.0;
        if b > BASE_CEILING {
            return Err(Error::Construction {
                inequality: String::from("2(k-1) b^beta + (l - l/k) b^beta <= 1/4 for beta <= -delta"),
                detail: format!("no b below {BASE_CEILING:e} with delta = {delta}"),
            });
        }
    }
    let c = b + 1.0;
    let mut a = c + 1.0;
    let upper = |a: f64| w * exp(delta * ln(b / a)) + v * exp(delta * ln(c / a));
    let coth = |a: f64| {
        let x = exp(delta * ln(a));
        (x + 1.0) / (x - 1.0)
    };
    while upper(a) > 0.25 || coth(a) > 2.0 {
        a *= 2.0;
        if a > BASE_CEILING {
            let which = if upper(a) > 0.25 {
                "2(k-1)(b/a)^beta + (l - l/k)(c/a)^beta <= 1/4 for beta >= delta"
            } else {
                "(a^delta + 1)/(a^delta - 1) <= 2"
            };
            return Err(Error::Construction {
                inequality: String::from(which),
                detail: format!("no a below {BASE_CEILING:e} with delta = {delta}"),
            });
        }
    }
    Ok(FractionPair {
        set: set.clone(),
        k,
        l,
        delta,
        a,
        b,
        c,
    })
}

impl FractionPair {
    pub fn set(&self) -> &ClosedSetSpec {
        &self.set
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn lambda0_order(&self) -> usize {
        2 * self.k + self.l
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `(a, b, c)`.
    pub fn bases(&self) -> (f64, f64, f64) {
        (self.a, self.b, self.c)
    }

    /// `max(0, 1 - d(beta, K))`, equal to 1 exactly on `K`.
    pub fn bump(&self, beta: f64) -> f64 {
        math::max(0.0, 1.0 - self.set.distance(beta))
    }

    fn kf(&self) -> f64 {
        self.k as f64
    }

    /// `ln(1 + 2(k-1) b^beta + a^beta + l c^beta)`.
    fn ln_big(&self, beta: f64) -> f64 {
        let (k, l) = (self.kf(), self.l as f64);
        ln_mix(&[(1.0, 1.0), (2.0 * (k - 1.0), self.b), (1.0, self.a), (l, self.c)], beta)
    }

    /// `ln(k + k a^beta + l c^beta)`.
    fn ln_level(&self, beta: f64) -> f64 {
        let (k, l) = (self.kf(), self.l as f64);
        ln_mix(&[(k, 1.0), (k, self.a), (l, self.c)], beta)
    }

    /// `ln(2(k-1) b^beta + (l - l/k) c^beta)`.
    fn ln_excess(&self, beta: f64) -> f64 {
        let (k, l) = (self.kf(), self.l as f64);
        ln_mix(&[(2.0 * (k - 1.0), self.b), (l - l / k, self.c)], beta)
    }

    /// `(a^beta + 1)/(a^beta - 1)`; infinite at 0.
    fn coth(&self, beta: f64) -> f64 {
        1.0 / mobius_eval(self.a, beta)
    }

    /// The singular comparison function; `None` at 0.
    pub fn q(&self, side: Side, beta: f64) -> Option<f64> {
        if beta == 0.0 {
            return None;
        }
        let v = match side {
            Side::Lower => -exp(self.ln_excess(beta) - self.ln_big(beta)),
            Side::Upper => {
                let (k, l) = (self.kf(), self.l as f64);
                let den = ln_mix(&[(1.0, 1.0), (1.0, self.a), (l / k, self.c)], beta);
                exp(self.ln_excess(beta) - den)
            }
        };
        Some(v * self.coth(beta))
    }

    /// `F(Q) * bump`, with value 0 at 0.
    pub fn zeta(&self, side: Side, beta: f64) -> f64 {
        match self.q(side, beta) {
            None => 0.0,
            Some(q) => clamp_fold(q) * self.bump(beta),
        }
    }

    /// The explicit fraction multiplying `1 + P zeta`.
    pub fn prefactor(&self, side: Side, beta: f64) -> f64 {
        match side {
            Side::Lower => exp(self.ln_big(beta) - self.ln_level(beta)),
            Side::Upper => exp(self.ln_level(beta) - self.ln_big(beta)),
        }
    }

    /// `phi_1` (lower) or `phi_2` (upper).
    pub fn phi(&self, side: Side, beta: f64) -> f64 {
        self.prefactor(side, beta) * (1.0 + mobius_eval(self.a, beta) * self.zeta(side, beta))
    }

    /// The level the function attains on `K`: `1/k` or `k`.
    pub fn level(&self, side: Side) -> f64 {
        match side {
            Side::Lower => 1.0 / self.kf(),
            Side::Upper => self.kf(),
        }
    }

    /// `|zeta - Q| / |Q|`, which vanishes exactly where `phi` hits its level.
    ///
    /// Away from 0 this equals `|phi - level| / |phi_gap|` for a factor that
    /// never vanishes, and unlike the raw difference it does not sink below
    /// floating point resolution in the tails. At 0 the value is 1.
    pub fn scaled_residual(&self, side: Side, beta: f64) -> f64 {
        match self.q(side, beta) {
            None => 1.0,
            Some(q) => abs(clamp_fold(q) * self.bump(beta) - q) / abs(q),
        }
    }

    /// `zeta` as a [`Target`] for the staged construction.
    pub fn zeta_target(&self, side: Side) -> ZetaTarget<'_> {
        ZetaTarget { pair: self, side }
    }

    /// Explicit block on the cyclic group of order `2k + l` whose integrated
    /// potential is the prefactor of the chosen side.
    pub fn explicit_block(&self, side: Side) -> Result<FiniteConformalBlock> {
        let (k, l) = (self.k, self.l);
        let (a, b, c) = (self.a, self.b, self.c);
        let mut masses = Vec::with_capacity(2 * k + l);
        let mut pot = Vec::with_capacity(2 * k + l);
        match side {
            Side::Lower => {
                masses.push(1.0);
                pot.push(1.0);
                for _ in 1..k {
                    masses.push(1.0);
                    pot.push(b);
                }
                masses.push(a);
                pot.push(1.0);
                for _ in 1..k {
                    masses.push(a);
                    pot.push(b / a);
                }
            }
            Side::Upper => {
                masses.push(1.0);
                pot.push(1.0);
                for _ in 1..k {
                    masses.push(b);
                    pot.push(1.0 / b);
                }
                for _ in 1..k {
                    masses.push(b);
                    pot.push(a / b);
                }
                masses.push(a);
                pot.push(1.0);
            }
        }
        for _ in 0..l {
            masses.push(c);
            pot.push(1.0);
        }
        let hi = pot.iter().fold(1.0, |m, &h| math::max(m, math::max(h, 1.0 / h)));
        let group = FiniteGroupTable::cyclic(2 * k + l)?;
        let mu = ProbVector::from_masses(&masses)?;
        FiniteConformalBlock::new(group, mu, pot, math::max(hi, 1.0 + 1e-9))
    }

    /// Evaluates the base inequalities and the `|Q| <= 1/2` claim on a grid.
    pub fn checks(&self, r: f64, points: usize) -> FractionChecks {
        let (k, l) = (self.kf(), self.l as f64);
        let w = 2.0 * (k - 1.0);
        let v = l - l / k;
        let d = self.delta;
        let mut q_outside = [0.0f64; 2];
        let mut fold = [false; 2];
        for (i, side) in [Side::Lower, Side::Upper].into_iter().enumerate() {
            for beta in math::linspace(-r, r, points) {
                if let Some(q) = self.q(side, beta) {
                    if abs(beta) >= d {
                        q_outside[i] = math::max(q_outside[i], abs(q));
                    } else if beta > 0.0 && abs(q) > 0.5 {
                        fold[i] = true;
                    }
                }
            }
        }
        FractionChecks {
            lower_tail: (w + v) * exp(-d * ln(self.b)),
            upper_tail: w * exp(d * ln(self.b / self.a)) + v * exp(d * ln(self.c / self.a)),
            coth_at_delta: self.coth(d),
            q_outside,
            fold_exercised: fold,
        }
    }
}

/// `zeta` of one side of a [`FractionPair`].
pub struct ZetaTarget<'a> {
    pair: &'a FractionPair,
    side: Side,
}

impl Target for ZetaTarget<'_> {
    fn eval(&self, beta: f64) -> f64 {
        self.pair.zeta(self.side, beta)
    }
}
