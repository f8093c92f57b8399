//! Closed target sets, spectrum solving, and the two group-action assemblies
//! (shift-twisted product and free product with a three-case homeomorphism)
//! together with their Radon-Nikodym data on finite cylinders.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::conformal::{self, ProbVector, TruncatedProductSystem};
use crate::error::{Error, Result};
use crate::exprat::Target;
use crate::math::{self, abs, exp, ln, Interval};
use crate::padic;
use crate::realizable::{eval_phi, mobius_eval, FractionPair, RealizableCocycle, Side, Stage};

// ---------------------------------------------------------------- closed sets

/// Finite union of closed intervals (endpoints may be infinite) and points.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedSetSpec {
    intervals: Vec<(f64, f64)>,
    points: Vec<f64>,
}

impl ClosedSetSpec {
    /// Intervals must be disjoint; points are kept sorted and deduplicated.
    pub fn new(mut intervals: Vec<(f64, f64)>, mut points: Vec<f64>) -> Result<Self> {
        for &(lo, hi) in &intervals {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::invalid(format!("bad interval [{lo}, {hi}]")));
            }
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("points must be finite"));
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in intervals.windows(2) {
            if w[1].0 <= w[0].1 {
                return Err(Error::invalid(format!(
                    "intervals [{}, {}] and [{}, {}] overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(ClosedSetSpec { intervals, points })
    }

    pub fn whole_line() -> Self {
        ClosedSetSpec {
            intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)],
            points: Vec::new(),
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.points.is_empty()
    }

    /// `d(beta, K)`; infinite for the empty set.
    pub fn distance(&self, beta: f64) -> f64 {
        let mut d = f64::INFINITY;
        for &(lo, hi) in &self.intervals {
            let e = if beta < lo {
                lo - beta
            } else if beta > hi {
                beta - hi
            } else {
                0.0
            };
            d = math::min(d, e);
        }
        for &p in &self.points {
            d = math::min(d, abs(beta - p));
        }
        d
    }

    pub fn contains(&self, beta: f64) -> bool {
        self.distance(beta) == 0.0
    }
}

// ---------------------------------------------------------------- wreath target

/// `d(beta, K) / (2 (1 + beta^2))`, the bump behind the wreath target.
#[derive(Clone, Debug, PartialEq)]
pub struct SetBump {
    set: ClosedSetSpec,
}

impl SetBump {
    pub fn set(&self) -> &ClosedSetSpec {
        &self.set
    }
}

impl Target for SetBump {
    fn eval(&self, beta: f64) -> f64 {
        self.set.distance(beta) / (2.0 * (1.0 + beta * beta))
    }

    // |d'| <= 1 and d <= |beta| give |(d/(2(1+b^2)))'| <= 1/2 + 1/4
    fn lipschitz(&self) -> Option<f64> {
        Some(0.75)
    }

    fn tail_sup(&self, r: f64) -> Option<f64> {
        let r = math::max(r, 1.0);
        Some(r / (2.0 * (1.0 + r * r)))
    }
}

/// `phi(beta) = 1 + P_t(beta) d(beta, K) / (2 (1 + beta^2))`; equals 1 exactly on `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetTarget {
    bump: SetBump,
    t: f64,
}

impl SetTarget {
    pub fn bump(&self) -> &SetBump {
        &self.bump
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

impl Target for SetTarget {
    fn eval(&self, beta: f64) -> f64 {
        1.0 + mobius_eval(self.t, beta) * self.bump.eval(beta)
    }

    // |P'| <= ln t / 2, |bump| <= 1/4, |P| <= 1, |bump'| <= 3/4
    fn lipschitz(&self) -> Option<f64> {
        Some(ln(self.t) / 8.0 + 0.75)
    }
}

pub fn target_phi_from_set(set: &ClosedSetSpec, t: f64) -> Result<SetTarget> {
    if !(t > 1.0 && t.is_finite()) {
        return Err(Error::invalid("t must exceed 1"));
    }
    if !set.contains(0.0) {
        return Err(Error::Domain(String::from(
            "the set must contain 0 for an invariant measure at beta = 0",
        )));
    }
    Ok(SetTarget {
        bump: SetBump { set: set.clone() },
        t,
    })
}

// ---------------------------------------------------------------- solver

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatInterval {
    pub lo: f64,
    pub hi: f64,
    pub clipped_lo: bool,
    pub clipped_hi: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub isolated_roots: Vec<f64>,
    pub flat_intervals: Vec<FlatInterval>,
    pub tolerance: f64,
    /// Threshold below which a residual counts as numerically zero.
    pub strict_tolerance: f64,
    pub range: (f64, f64),
    pub grid_points: usize,
    pub warnings: Vec<String>,
}

impl SpectrumReport {
    /// Whether `beta` lies in a reported interval or within `tolerance` of a root.
    pub fn covers(&self, beta: f64) -> bool {
        let slack = 1e-12 * math::max(1.0, abs(beta));
        self.flat_intervals
            .iter()
            .any(|iv| beta >= iv.lo - slack && beta <= iv.hi + slack)
            || self.isolated_roots.iter().any(|&r| abs(r - beta) <= self.tolerance)
    }

    pub fn is_empty(&self) -> bool {
        self.isolated_roots.is_empty() && self.flat_intervals.is_empty()
    }
}

/// Residual shape fed to [`solve_residual`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Residual {
    /// Signed; transversal roots show up as sign changes.
    Signed,
    /// Nonnegative; roots are minima.
    Magnitude,
}

fn golden_min(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (math::sqrt(5.0) - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (abs(g(c)), abs(g(d)));
    for _ in 0..200 {
        if b - a <= 1e-14 * math::max(1.0, abs(a)) {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = abs(g(c));
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = abs(g(d));
        }
    }
    if gc < gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// Finds the zero set of `g` on `[lo, hi]`.
///
/// Runs of grid points with `|g| <= tol/100` become flat intervals (a run of
/// one point becomes a root). Sign changes between nonzero neighbours are
/// bisected to width `tol`. Interior local minima of `|g|` are refined by
/// golden section and kept when the minimum is below `tol/100`.
pub fn solve_residual(g: &dyn Fn(f64) -> f64, kind: Residual, lo: f64, hi: f64, tol: f64, grid_n: usize) -> Result<SpectrumReport> {
    if !(lo < hi && tol > 0.0 && grid_n >= 3) {
        return Err(Error::invalid("need lo < hi, tol > 0 and at least 3 grid points"));
    }
    let grid = math::linspace(lo, hi, grid_n);
    let vals: Vec<f64> = grid.iter().map(|&b| g(b)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(String::from("residual is not finite on the grid")));
    }
    let strict = tol / 100.0;
    let h = (hi - lo) / (grid_n - 1) as f64;
    let zero: Vec<bool> = vals.iter().map(|v| abs(*v) <= strict).collect();
    let mut roots = Vec::new();
    let mut flats = Vec::new();
    let mut i = 0;
    while i < grid_n {
        if zero[i] {
            let start = i;
            while i + 1 < grid_n && zero[i + 1] {
                i += 1;
            }
            if start == i {
                roots.push(grid[i]);
            } else {
                flats.push(FlatInterval {
                    lo: grid[start],
                    hi: grid[i],
                    clipped_lo: start == 0,
                    clipped_hi: i == grid_n - 1,
                });
            }
        }
        i += 1;
    }
    for i in 0..grid_n - 1 {
        if zero[i] || zero[i + 1] {
            continue;
        }
        if kind == Residual::Signed && vals[i].signum() != vals[i + 1].signum() {
            let (mut a, mut b) = (grid[i], grid[i + 1]);
            let mut ga = vals[i];
            while b - a > tol {
                let m = 0.5 * (a + b);
                let gm = g(m);
                if gm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if gm.signum() == ga.signum() {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            let r = 0.5 * (a + b);
            if abs(g(r)) <= tol {
                roots.push(r);
            }
        }
    }
    for i in 1..grid_n - 1 {
        if zero[i] || zero[i - 1] || zero[i + 1] {
            continue;
        }
        let (l, c, r) = (abs(vals[i - 1]), abs(vals[i]), abs(vals[i + 1]));
        let sign_change = kind == Residual::Signed
            && (vals[i - 1].signum() != vals[i].signum() || vals[i].signum() != vals[i + 1].signum());
        if c <= l && c <= r && !sign_change {
            let (x, v) = golden_min(g, grid[i - 1], grid[i + 1]);
            if v <= strict {
                roots.push(x);
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| abs(*a - *b) <= tol);
    // a root inside or adjacent to a flat interval is part of it
    roots.retain(|&x| !flats.iter().any(|f| x >= f.lo - h && x <= f.hi + h));
    let mut warnings = Vec::new();
    let mut features: Vec<(f64, f64)> = roots.iter().map(|&x| (x, x)).collect();
    features.extend(flats.iter().map(|f| (f.lo, f.hi)));
    features.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in features.windows(2) {
        if w[1].0 - w[0].1 < 2.0 * h {
            warnings.push(format!(
                "features near {} and {} are closer than two grid steps",
                w[0].1, w[1].0
            ));
        }
    }
    Ok(SpectrumReport {
        isolated_roots: roots,
        flat_intervals: flats,
        tolerance: tol,
        strict_tolerance: strict,
        range: (lo, hi),
        grid_points: grid_n,
        warnings,
    })
}

/// Zero set of `phi - 1` on `[-r, r]`.
pub fn solve_spectrum(phi: &dyn Fn(f64) -> f64, r: f64, tol: f64, grid_n: usize) -> Result<SpectrumReport> {
    solve_residual(&|b| phi(b) - 1.0, Residual::Signed, -r, r, tol, grid_n)
}

/// Simultaneous solve of `phi_1 = 1/k` and `phi_2 = k` through the scaled
/// residuals of [`FractionPair::scaled_residual`].
pub fn solve_free_product_spectrum(pair: &FractionPair, r: f64, tol: f64, grid_n: usize) -> Result<SpectrumReport> {
    let g = |b: f64| {
        math::max(
            pair.scaled_residual(Side::Lower, b),
            pair.scaled_residual(Side::Upper, b),
        )
    };
    solve_residual(&g, Residual::Magnitude, -r, r, tol, grid_n)
}

// ---------------------------------------------------------------- realized spaces

/// A realizing product whose stages are all explicit, enumerated atom by atom.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpace {
    cocycle: RealizableCocycle,
    truncation: TruncatedProductSystem,
    ln_h: Vec<f64>,
}

impl FiniteSpace {
    pub fn new(cocycle: RealizableCocycle) -> Result<Self> {
        let mut blocks = Vec::new();
        for s in cocycle.stages() {
            match s {
                Stage::Explicit(b) => blocks.push(b.clone()),
                Stage::Partitioned(_) => {
                    return Err(Error::Window(String::from(
                        "atom-level operations need explicit stages only",
                    )))
                }
            }
        }
        let truncation = TruncatedProductSystem::new(blocks, cocycle.tail_bound())?;
        let n = truncation.num_configurations();
        if n > 1 << 16 {
            return Err(Error::SizeCap(format!("{n} atoms exceed the enumeration cap")));
        }
        let mut cfg = vec![0; truncation.blocks().len()];
        let mut ln_h = Vec::with_capacity(n);
        for idx in 0..n {
            truncation.decode(idx, &mut cfg);
            let s: f64 = cfg
                .iter()
                .zip(truncation.blocks())
                .map(|(&c, b)| ln(b.potential()[c]))
                .sum();
            ln_h.push(s);
        }
        Ok(FiniteSpace {
            cocycle,
            truncation,
            ln_h,
        })
    }

    pub fn atoms(&self) -> usize {
        self.ln_h.len()
    }

    pub fn truncation(&self) -> &TruncatedProductSystem {
        &self.truncation
    }

    pub fn phi(&self, beta: f64) -> f64 {
        eval_phi(&self.cocycle, beta)
    }

    pub fn potential(&self, x: usize) -> f64 {
        exp(self.ln_h[x])
    }

    /// The conformal measure of the realizing cocycle.
    pub fn nu(&self, beta: f64) -> Result<ProbVector> {
        self.truncation.conformal_measure(beta)
    }

    /// `nu_beta` reweighted by `H^beta / phi(beta)`.
    pub fn eta(&self, beta: f64) -> Result<ProbVector> {
        conformal::cohomologous_transform(&self.nu(beta)?, &self.ln_h, beta)
    }

    /// Realizing cocycle at the atom level: `ln mu(g x) - ln mu(x)` summed over blocks.
    pub fn omega0(&self, block: usize, g: usize, x: usize) -> f64 {
        let mut cfg = vec![0; self.truncation.blocks().len()];
        self.truncation.decode(x, &mut cfg);
        self.truncation.blocks()[block].omega(g, cfg[block])
    }

    /// Coboundary-adjusted cocycle `ln H(g x) - ln H(x) + omega0`.
    pub fn omega1(&self, block: usize, g: usize, x: usize) -> f64 {
        self.ln_h[self.act(block, g, x)] - self.ln_h[x] + self.omega0(block, g, x)
    }

    /// Left translation by `g` in the given block.
    pub fn act(&self, block: usize, g: usize, x: usize) -> usize {
        let mut cfg = vec![0; self.truncation.blocks().len()];
        self.truncation.decode(x, &mut cfg);
        cfg[block] = self.truncation.blocks()[block].group().mul(g, cfg[block]);
        self.truncation.encode(&cfg)
    }
}

/// Cylinder: `(coordinate, atom)` pairs sorted by coordinate.
pub type Cylinder = Vec<(i64, usize)>;

/// Image of a cylinder under the integer action `(n . x)_m = x_{m - n}`.
pub fn shift_cylinder(c: &[(i64, usize)], n: i64) -> Cylinder {
    c.iter().map(|&(m, a)| (m + n, a)).collect()
}

// ---------------------------------------------------------------- wreath

/// Shift-twisted product over a realizing space: coordinates `n <= 0` carry
/// `eta_beta`, coordinates `n > 0` carry `nu_beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct WreathSystem {
    space: FiniteSpace,
}

pub fn assemble_wreath(cocycle: RealizableCocycle) -> Result<WreathSystem> {
    Ok(WreathSystem {
        space: FiniteSpace::new(cocycle)?,
    })
}

impl WreathSystem {
    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn phi(&self, beta: f64) -> f64 {
        self.space.phi(beta)
    }

    /// `Omega(n, x)` for the integer generator power `n`, reading `x` from a cylinder.
    pub fn omega_shift(&self, n: i64, x: &[(i64, usize)]) -> Result<f64> {
        let at = |m: i64| -> Result<f64> {
            x.iter()
                .find(|c| c.0 == m)
                .map(|c| self.space.ln_h[c.1])
                .ok_or_else(|| Error::Window(format!("coordinate {m} outside the cylinder")))
        };
        let mut s = 0.0;
        if n > 0 {
            for i in 0..n {
                s -= at(-i)?;
            }
        } else {
            for i in 1..=-n {
                s += at(i)?;
            }
        }
        Ok(s)
    }

    /// Measure of a cylinder under `prod_{n<=0} eta x prod_{n>0} nu`.
    pub fn cylinder_measure(&self, beta: f64, c: &[(i64, usize)]) -> Result<f64> {
        let eta = self.space.eta(beta)?;
        let nu = self.space.nu(beta)?;
        Ok(c.iter()
            .map(|&(m, a)| if m <= 0 { eta.weights()[a] } else { nu.weights()[a] })
            .product())
    }
}

/// `d((-1) . mu_beta)/d mu_beta = phi(beta) H(x_0)^-beta`.
pub fn shift_rn_derivative(sys: &WreathSystem, beta: f64, x0: usize) -> Result<f64> {
    if x0 >= sys.space.atoms() {
        return Err(Error::Window(format!("atom {x0} outside the space")));
    }
    Ok(sys.phi(beta) * exp(-beta * sys.space.ln_h[x0]))
}

// ---------------------------------------------------------------- free product

/// Cell of the free-product truncation: the finite-group coordinates and the two space factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeCell {
    pub x: Cylinder,
    pub y: Cylinder,
    pub z: Cylinder,
}

/// Which of the three clopen pieces a cell lies in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Piece {
    /// `x_0 = x_1 = e`.
    Fixed,
    /// `x_0 != e`.
    Lower,
    /// `x_0 = e, x_1 != e`.
    Upper,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeProductSystem {
    order: usize,
    window: usize,
    first: FiniteSpace,
    second: FiniteSpace,
}

/// Identity of the cyclic coordinate group.
const E: usize = 0;

fn coord(c: &[(i64, usize)], m: i64) -> Option<usize> {
    c.iter().find(|p| p.0 == m).map(|p| p.1)
}

/// `theta_0`: keep negative coordinates, put `e` at 0, shift the rest up by one.
pub fn theta0(x: &[(i64, usize)]) -> Result<Cylinder> {
    match coord(x, 0) {
        Some(v) if v != E => {}
        _ => return Err(Error::Window(String::from("theta_0 needs x_0 != e in the cylinder"))),
    }
    let mut out: Cylinder = x.iter().map(|&(m, a)| if m >= 0 { (m + 1, a) } else { (m, a) }).collect();
    out.push((0, E));
    out.sort();
    Ok(out)
}

/// Inverse of [`theta0`] on cells with `x_0 = e`, `x_1 != e`.
pub fn theta0_inv(x: &[(i64, usize)]) -> Result<Cylinder> {
    match (coord(x, 0), coord(x, 1)) {
        (Some(E), Some(v)) if v != E => {}
        _ => return Err(Error::Window(String::from("inverse needs x_0 = e and x_1 != e"))),
    }
    let mut out: Cylinder = x
        .iter()
        .filter(|p| p.0 != 0)
        .map(|&(m, a)| if m > 0 { (m - 1, a) } else { (m, a) })
        .collect();
    out.sort();
    Ok(out)
}

impl FreeProductSystem {
    /// `order` is the size of the cyclic coordinate group, `window` the half-width `W`.
    pub fn new(order: usize, window: usize, first: FiniteSpace, second: FiniteSpace) -> Result<Self> {
        if order < 2 {
            return Err(Error::invalid("coordinate group must be nontrivial"));
        }
        if window < 1 {
            return Err(Error::Window(String::from("window must retain coordinates 0 and 1")));
        }
        Ok(FreeProductSystem {
            order,
            window,
            first,
            second,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn spaces(&self) -> (&FiniteSpace, &FiniteSpace) {
        (&self.first, &self.second)
    }

    /// Coordinates kept for the finite-group factor: one wider on the right.
    pub fn x_coords(&self) -> core::ops::RangeInclusive<i64> {
        -(self.window as i64)..=self.window as i64 + 1
    }

    pub fn piece(&self, c: &FreeCell) -> Result<Piece> {
        let x0 = coord(&c.x, 0).ok_or_else(|| Error::Window(String::from("x_0 missing")))?;
        if x0 != E {
            return Ok(Piece::Lower);
        }
        let x1 = coord(&c.x, 1).ok_or_else(|| Error::Window(String::from("x_1 missing")))?;
        Ok(if x1 == E { Piece::Fixed } else { Piece::Upper })
    }

    /// Preimage of a cell under the three-case homeomorphism.
    pub fn theta_preimage(&self, c: &FreeCell) -> Result<FreeCell> {
        Ok(match self.piece(c)? {
            Piece::Fixed => c.clone(),
            Piece::Lower => FreeCell {
                x: theta0(&c.x)?,
                y: shift_cylinder(&c.y, -1),
                z: c.z.clone(),
            },
            Piece::Upper => FreeCell {
                x: theta0_inv(&c.x)?,
                y: c.y.clone(),
                z: shift_cylinder(&c.z, -1),
            },
        })
    }

    /// Image of a cell under the homeomorphism.
    pub fn theta_image(&self, c: &FreeCell) -> Result<FreeCell> {
        Ok(match self.piece(c)? {
            Piece::Fixed => c.clone(),
            Piece::Lower => FreeCell {
                x: theta0(&c.x)?,
                y: c.y.clone(),
                z: shift_cylinder(&c.z, 1),
            },
            Piece::Upper => FreeCell {
                x: theta0_inv(&c.x)?,
                y: shift_cylinder(&c.y, 1),
                z: c.z.clone(),
            },
        })
    }

    /// `Omega(a, .)`: 0, `ln H_1(y_0)` or `ln H_2(z_0)` by piece.
    pub fn omega_theta(&self, c: &FreeCell) -> Result<f64> {
        Ok(match self.piece(c)? {
            Piece::Fixed => 0.0,
            Piece::Lower => self.first.ln_h[coord(&c.y, 0).ok_or_else(|| Error::Window(String::from("y_0 missing")))?],
            Piece::Upper => self.second.ln_h[coord(&c.z, 0).ok_or_else(|| Error::Window(String::from("z_0 missing")))?],
        })
    }

    /// Product measure of a cell: uniform on the group coordinates, and on each
    /// space `eta` at negative coordinates, `nu` at the others.
    pub fn cell_measure(&self, beta: f64, c: &FreeCell, cache: &MeasureCache) -> f64 {
        let _ = beta;
        let q = self.order as f64;
        let mut m = exp(-(c.x.len() as f64) * ln(q));
        for &(n, a) in &c.y {
            m *= if n < 0 { cache.eta1[a] } else { cache.nu1[a] };
        }
        for &(n, a) in &c.z {
            m *= if n < 0 { cache.eta2[a] } else { cache.nu2[a] };
        }
        m
    }

    pub fn measures(&self, beta: f64) -> Result<MeasureCache> {
        Ok(MeasureCache {
            nu1: self.first.nu(beta)?.weights().to_vec(),
            eta1: self.first.eta(beta)?.weights().to_vec(),
            nu2: self.second.nu(beta)?.weights().to_vec(),
            eta2: self.second.eta(beta)?.weights().to_vec(),
        })
    }
}

/// Per-atom weights of both spaces at one beta.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureCache {
    pub nu1: Vec<f64>,
    pub eta1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub eta2: Vec<f64>,
}

/// Free-product system over the explicit fraction blocks of a pair, with
/// coordinate group order `k` so that the spectrum condition reads
/// `phi_1 = 1/k`, `phi_2 = k`.
pub fn assemble_free_product(pair: &FractionPair, window: usize) -> Result<FreeProductSystem> {
    let space = |side| -> Result<FiniteSpace> {
        let blk = pair.explicit_block(side)?;
        FiniteSpace::new(RealizableCocycle::from_stages(vec![Stage::Explicit(blk)], 0.0, 0.0))
    };
    FreeProductSystem::new(pair.k(), window, space(Side::Lower)?, space(Side::Upper)?)
}

/// `d(theta_* mu_beta)/d mu_beta` on a cell: 1, `phi_1^-1 H_1(y_0)^beta / q`
/// or `q phi_2^-1 H_2(z_0)^beta`.
pub fn theta_rn_derivative(sys: &FreeProductSystem, beta: f64, cell: &FreeCell) -> Result<f64> {
    let q = sys.order as f64;
    Ok(match sys.piece(cell)? {
        Piece::Fixed => 1.0,
        Piece::Lower => {
            let y0 = coord(&cell.y, 0).ok_or_else(|| Error::Window(String::from("y_0 missing")))?;
            exp(beta * sys.first.ln_h[y0]) / (q * sys.first.phi(beta))
        }
        Piece::Upper => {
            let z0 = coord(&cell.z, 0).ok_or_else(|| Error::Window(String::from("z_0 missing")))?;
            q * exp(beta * sys.second.ln_h[z0]) / sys.second.phi(beta)
        }
    })
}

/// `mu_beta(theta^-1 C) / mu_beta(C)` from the product measure directly.
pub fn theta_cylinder_ratio(sys: &FreeProductSystem, beta: f64, cell: &FreeCell, cache: &MeasureCache) -> Result<f64> {
    let pre = sys.theta_preimage(cell)?;
    Ok(sys.cell_measure(beta, &pre, cache) / sys.cell_measure(beta, cell, cache))
}

// ---------------------------------------------------------------- extension check

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionReport {
    pub p: u64,
    pub level: u32,
    pub order: u64,
    pub expected_order: u64,
    pub transitive: bool,
    pub cells_checked: usize,
    /// Largest relative gap between lifted ratios and [`theta_rn_derivative`] over `z-cell x Y-cell`.
    pub lifted_rn_max_diff: f64,
    pub spectrum_points: usize,
    /// Largest `|RN - e^{beta Omega}|` over the pieces at reported spectrum points,
    /// using the exact fraction functions.
    pub conformality_max_defect: f64,
}

/// Checks the product with the finite quotient `SL(2, Z/p^N)`: the translation
/// action of `<g1, g2>` is transitive, lifted Radon-Nikodym values on
/// `z-cell x Y-cell` agree with the `Y` values, and at spectrum points the
/// exact fractions make every piece conformal.
pub fn dummy_extension_check(
    p: u64,
    level: u32,
    sys: &FreeProductSystem,
    pair: &FractionPair,
    spectrum: &SpectrumReport,
    beta: f64,
) -> Result<ExtensionReport> {
    let gens = [padic::generator("g1", None)?, padic::generator("g2", None)?];
    let closure = padic::subgroup_closure_mod(p, level, &gens)?;
    if !closure.is_full {
        return Err(Error::DensityDefect(format!(
            "translation action mod {p}^{level} reaches {} of {} elements",
            closure.order, closure.expected_order
        )));
    }
    let modulus = p.pow(level);
    let h = padic::generator("h", Some(0))?.reduce(modulus);
    let elements = padic::enumerate_closure_mod(p, level, &gens)?;
    let z_uniform = 1.0 / elements.len() as f64;
    let cache = sys.measures(beta)?;
    let mut worst: f64 = 0.0;
    let mut cells = 0;
    let na = sys.first.atoms().min(3);
    let nb = sys.second.atoms().min(3);
    for (zi, z) in elements.iter().enumerate().step_by((elements.len() / 8).max(1)) {
        let hz = h.mul(z);
        // translation is a bijection of the quotient; uniform mass is unchanged
        if elements.binary_search(&hz).is_err() {
            return Err(Error::DensityDefect(format!("h moves element {zi} outside the quotient")));
        }
        for x0 in 0..sys.order {
            for x1 in 0..sys.order {
                for y0 in 0..na {
                    for z0 in 0..nb {
                        let cell = FreeCell {
                            x: vec![(0, x0), (1, x1)],
                            y: vec![(0, y0)],
                            z: vec![(0, z0)],
                        };
                        let lifted = (z_uniform / z_uniform) * theta_cylinder_ratio(sys, beta, &cell, &cache)?;
                        let want = theta_rn_derivative(sys, beta, &cell)?;
                        worst = math::max(worst, abs(lifted - want) / math::max(abs(want), f64::MIN_POSITIVE));
                        cells += 1;
                    }
                }
            }
        }
    }
    let mut pts: Vec<f64> = spectrum.isolated_roots.clone();
    for f in &spectrum.flat_intervals {
        pts.push(f.lo);
        pts.push(0.5 * (f.lo + f.hi));
        pts.push(f.hi);
    }
    let q = pair.k() as f64;
    let mut defect: f64 = 0.0;
    for &b in &pts {
        defect = math::max(defect, abs(1.0 / (q * pair.phi(Side::Lower, b)) - 1.0));
        defect = math::max(defect, abs(q / pair.phi(Side::Upper, b) - 1.0));
    }
    Ok(ExtensionReport {
        p,
        level,
        order: closure.order,
        expected_order: closure.expected_order,
        transitive: closure.is_full,
        cells_checked: cells,
        lifted_rn_max_diff: worst,
        spectrum_points: pts.len(),
        conformality_max_defect: defect,
    })
}

/// Enclosure helper for reports: `phi` values over a cell of a Lipschitz target.
pub fn lipschitz_cell(f: &dyn Target, b0: f64, b1: f64) -> Option<Interval> {
    f.enclose(b0, b1)
}
