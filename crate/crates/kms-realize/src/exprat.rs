//! Ratios of positive exponential sums `sum c_i a_i^beta / sum d_j b_j^beta`,
//! the smoothing kernel `(2^x + 2^-x)^-n`, sup-norm fitting inside the family,
//! and realization of a signed target as a three-part finite block.
//!
//! Fitting works in the logistic variable `s = rho^beta / (1 + rho^beta)`:
//! every combination `sum_j lambda_j C(n,j) s^j (1-s)^(n-j)` with
//! `lambda_0 = lambda_n = 0` and `lambda_j >= 0` is a ratio in the family whose
//! denominator `(1 + rho^beta)^n` is shared by all terms. The shared denominator
//! is what makes the integer bookkeeping of [`realize_block`] exact.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::math::{self, abs, exp, floor, ln, log1p, Interval, LogAcc, LN_2};

const LN_10: f64 = core::f64::consts::LN_10;

/// One term `c * b^beta`, kept as logarithms so huge binomial coefficients fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub ln_coef: f64,
    pub ln_base: f64,
}

impl Term {
    pub fn new(coef: f64, base: f64) -> Result<Term> {
        if !(coef.is_finite() && coef > 0.0 && base.is_finite() && base > 0.0) {
            return Err(Error::invalid(format!(
                "term ({coef}, {base}) needs positive finite coefficient and base"
            )));
        }
        Ok(Term {
            ln_coef: ln(coef),
            ln_base: ln(base),
        })
    }

    #[inline]
    pub fn ln_at(&self, beta: f64) -> f64 {
        self.ln_coef + beta * self.ln_base
    }
}

fn ln_sum(terms: &[Term], beta: f64) -> f64 {
    let mut acc = LogAcc::new();
    for t in terms {
        acc.add(t.ln_at(beta));
    }
    acc.value()
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + log1p(exp(-x))
    } else {
        log1p(exp(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpSumRatio {
    numer: Vec<Term>,
    denom: Vec<Term>,
}

impl ExpSumRatio {
    /// From `(coefficient, base)` pairs.
    pub fn new(numer: &[(f64, f64)], denom: &[(f64, f64)]) -> Result<Self> {
        let n = numer.iter().map(|&(c, b)| Term::new(c, b)).collect::<Result<Vec<_>>>()?;
        let d = denom.iter().map(|&(c, b)| Term::new(c, b)).collect::<Result<Vec<_>>>()?;
        Self::from_terms(n, d)
    }

    /// An empty numerator is accepted and denotes the zero function.
    pub fn from_terms(numer: Vec<Term>, denom: Vec<Term>) -> Result<Self> {
        if denom.is_empty() {
            return Err(Error::invalid("denominator needs at least one term"));
        }
        if numer
            .iter()
            .chain(&denom)
            .any(|t| !(t.ln_coef.is_finite() && t.ln_base.is_finite()))
        {
            return Err(Error::invalid("non-finite term"));
        }
        if !numer.is_empty() {
            let (nlo, nhi) = base_span(&numer);
            let (dlo, dhi) = base_span(&denom);
            if !(dhi > nhi) {
                return Err(Error::invalid(
                    "largest denominator base must exceed every numerator base",
                ));
            }
            if !(dlo < nlo) {
                return Err(Error::invalid(
                    "smallest denominator base must be below every numerator base",
                ));
            }
        }
        Ok(ExpSumRatio { numer, denom })
    }

    pub fn numer(&self) -> &[Term] {
        &self.numer
    }

    pub fn denom(&self) -> &[Term] {
        &self.denom
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_empty()
    }

    pub fn ln_eval(&self, beta: f64) -> f64 {
        if self.numer.is_empty() {
            return f64::NEG_INFINITY;
        }
        ln_sum(&self.numer, beta) - ln_sum(&self.denom, beta)
    }

    pub fn eval(&self, beta: f64) -> f64 {
        exp(self.ln_eval(beta))
    }

    /// Limits at both ends are zero by the base ordering.
    pub fn tail_limit(&self, _side: Tail) -> f64 {
        0.0
    }

    /// `r(-beta)` as a ratio with reciprocal bases.
    pub fn reflect(&self) -> Self {
        let flip = |v: &[Term]| {
            v.iter()
                .map(|t| Term {
                    ln_coef: t.ln_coef,
                    ln_base: -t.ln_base,
                })
                .collect()
        };
        ExpSumRatio {
            numer: flip(&self.numer),
            denom: flip(&self.denom),
        }
    }

    /// Rigorous enclosure of the ratio over `[b0, b1]`.
    ///
    /// Both sums are first multiplied by `e^{-m beta}` with `m` the mean log base
    /// of the denominator at the midpoint; this leaves the ratio unchanged and
    /// makes each term's range over the cell narrow.
    pub fn enclose(&self, b0: f64, b1: f64) -> Interval {
        if self.numer.is_empty() {
            return Interval::point(0.0);
        }
        let mid = 0.5 * (b0 + b1);
        let lz = ln_sum(&self.denom, mid);
        let mut m = 0.0;
        for t in &self.denom {
            m += exp(t.ln_at(mid) - lz) * t.ln_base;
        }
        let bracket = |terms: &[Term]| {
            let mut lo = LogAcc::new();
            let mut hi = LogAcc::new();
            for t in terms {
                let slope = t.ln_base - m;
                let x0 = t.ln_coef + b0 * slope;
                let x1 = t.ln_coef + b1 * slope;
                lo.add(math::min(x0, x1));
                hi.add(math::max(x0, x1));
            }
            (lo.value(), hi.value())
        };
        let (nlo, nhi) = bracket(&self.numer);
        let (dlo, dhi) = bracket(&self.denom);
        Interval {
            lo: exp(nlo - dhi),
            hi: exp(nhi - dlo),
        }
    }

    /// `sup_{|beta| >= r} r(beta)`, from the dominant denominator term on each side.
    pub fn tail_sup(&self, r: f64) -> f64 {
        if self.numer.is_empty() {
            return 0.0;
        }
        let r = math::max(r, 0.0);
        let (_, dhi) = base_span(&self.denom);
        let (dlo, _) = base_span(&self.denom);
        let top = self
            .denom
            .iter()
            .filter(|t| t.ln_base == dhi)
            .fold(f64::NEG_INFINITY, |a, t| math::max(a, t.ln_coef));
        let bot = self
            .denom
            .iter()
            .filter(|t| t.ln_base == dlo)
            .fold(f64::NEG_INFINITY, |a, t| math::max(a, t.ln_coef));
        // for beta >= r each numerator term over the top term is decreasing
        let mut plus = LogAcc::new();
        let mut minus = LogAcc::new();
        for t in &self.numer {
            plus.add(t.ln_coef - top + r * (t.ln_base - dhi));
            minus.add(t.ln_coef - bot - r * (t.ln_base - dlo));
        }
        exp(math::max(plus.value(), minus.value()))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("ratio\n");
        for t in &self.numer {
            s.push_str(&format!("numer {} {}\n", fmt_ln_sci(t.ln_coef), fmt_ln_sci(t.ln_base)));
        }
        for t in &self.denom {
            s.push_str(&format!("denom {} {}\n", fmt_ln_sci(t.ln_coef), fmt_ln_sci(t.ln_base)));
        }
        s.push_str("end\n");
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut numer = Vec::new();
        let mut denom = Vec::new();
        let mut open = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let mut it = raw.split_whitespace();
            match it.next() {
                None => continue,
                Some("ratio") => open = true,
                Some("end") => {
                    if !open {
                        return Err(Error::Parse { line, msg: String::from("`end` without `ratio`") });
                    }
                    return Self::from_terms(numer, denom);
                }
                Some(k @ ("numer" | "denom")) => {
                    let c = parse_ln_sci(it.next().unwrap_or(""), line)?;
                    let b = parse_ln_sci(it.next().unwrap_or(""), line)?;
                    let t = Term { ln_coef: c, ln_base: b };
                    if k == "numer" {
                        numer.push(t)
                    } else {
                        denom.push(t)
                    }
                }
                Some(k) => return Err(Error::Parse { line, msg: format!("unknown key `{k}`") }),
            }
        }
        Err(Error::Parse { line: text.lines().count(), msg: String::from("unterminated ratio") })
    }
}

fn base_span(terms: &[Term]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in terms {
        lo = math::min(lo, t.ln_base);
        hi = math::max(hi, t.ln_base);
    }
    (lo, hi)
}

/// Positive number given by its logarithm, printed in decimal scientific form
/// even when it is far outside the `f64` range.
pub fn fmt_ln_sci(lnx: f64) -> String {
    let mut e = floor(lnx / LN_10);
    let mut m = exp(lnx - e * LN_10);
    if m >= 10.0 {
        m /= 10.0;
        e += 1.0;
    }
    if m < 1.0 {
        m *= 10.0;
        e -= 1.0;
    }
    format!("{:.16}e{}", m, e as i64)
}

pub fn parse_ln_sci(s: &str, line: usize) -> Result<f64> {
    let bad = || Error::Parse { line, msg: format!("bad scientific number `{s}`") };
    let (m, e) = s.split_once(['e', 'E']).ok_or_else(bad)?;
    let m: f64 = m.parse().map_err(|_| bad())?;
    let e: i64 = e.parse().map_err(|_| bad())?;
    if !(m > 0.0) {
        return Err(bad());
    }
    Ok(ln(m) + e as f64 * LN_10)
}

/// Natural log of a positive big integer.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return ln(x.to_u64().unwrap_or(u64::MAX) as f64);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    ln(top) + shift as f64 * LN_2
}

// ---------------------------------------------------------------- kernel

/// `(2^x + 2^-x)^-n` normalised to unit integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApproximateUnit {
    n: u32,
    norm: f64,
    quad_error: f64,
}

fn ln_kernel(n: u32, x: f64) -> f64 {
    let ax = abs(x);
    -(n as f64) * (ax * LN_2 + log1p(exp(-2.0 * ax * LN_2)))
}

impl ApproximateUnit {
    pub fn order(&self) -> u32 {
        self.n
    }

    /// The normalising integral.
    pub fn normalizer(&self) -> f64 {
        self.norm
    }

    pub fn quadrature_error(&self) -> f64 {
        self.quad_error
    }

    pub fn eval(&self, x: f64) -> f64 {
        exp(ln_kernel(self.n, x)) / self.norm
    }

    /// The shifted kernel `x -> phi_n(x - y)` as a ratio of exponential sums:
    /// `2^{-ny} 2^{nx} / sum_i C(n,i) 4^{-iy} 4^{ix}`, divided by the normaliser.
    pub fn shifted_ratio(&self, y: f64) -> ExpSumRatio {
        let n = self.n as usize;
        let lb = math::ln_binomial_row(n);
        let numer = vec![Term {
            ln_coef: -(n as f64) * y * LN_2 - ln(self.norm),
            ln_base: n as f64 * LN_2,
        }];
        let denom = (0..=n)
            .map(|i| Term {
                ln_coef: lb[i] - 2.0 * i as f64 * y * LN_2,
                ln_base: 2.0 * i as f64 * LN_2,
            })
            .collect();
        ExpSumRatio { numer, denom }
    }
}

/// Builds the approximate unit of order `n`, computing its normaliser by adaptive
/// Gauss-Kronrod quadrature to relative accuracy well below `1e-10`.
pub fn approximate_unit(n: u32) -> Result<ApproximateUnit> {
    if n == 0 {
        return Err(Error::invalid("approximate unit needs n >= 1"));
    }
    // tail beyond X is at most 2^{-nX} / (n ln 2)
    let nf = n as f64;
    let x_max = (40.0 * LN_10) / (nf * LN_2);
    let tail = exp(-nf * x_max * LN_2) / (nf * LN_2);
    let f = |x: f64| exp(ln_kernel(n, x));
    let (half, err) = adaptive_gk15(&f, 0.0, x_max, 1e-14, 4000)?;
    let norm = 2.0 * (half + tail);
    let quad_error = 2.0 * (err + tail);
    if !(quad_error <= 1e-10 * norm) {
        return Err(Error::Numeric(format!(
            "quadrature for n = {n} reached error {quad_error:e} on value {norm}"
        )));
    }
    Ok(ApproximateUnit { n, norm, quad_error })
}

#[allow(clippy::excessive_precision)]
const GK_X: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const GK_WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const GK_WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WK[7];
    let mut g = fc * GK_WG[3];
    for i in 0..7 {
        let dx = h * GK_X[i];
        let s = f(c - dx) + f(c + dx);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, abs((k - g) * h))
}

/// Global adaptive quadrature: bisect the worst interval until the summed
/// error estimate is below `rel_tol` times the integral.
pub fn adaptive_gk15(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<(f64, f64)> {
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= rel_tol * abs(total) || err < 1e-300 {
            return Ok((total, err));
        }
        if parts.len() >= max_intervals {
            return Err(Error::Numeric(format!(
                "quadrature did not converge: {} intervals, value {total}, error {err:e}",
                parts.len()
            )));
        }
        let (wi, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, p)| if p.3 > be { (i, p.3) } else { (bi, be) });
        let (pa, pb, _, _) = parts.swap_remove(wi);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk15(f, pa, m);
        let (v2, e2) = gk15(f, m, pb);
        parts.push((pa, m, v1, e1));
        parts.push((m, pb, v2, e2));
    }
}

// ---------------------------------------------------------------- targets

/// A real function of beta to be approximated.
pub trait Target {
    fn eval(&self, beta: f64) -> f64;

    /// Global Lipschitz constant when one is known analytically.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// Rigorous enclosure of the values on `[b0, b1]`, if available.
    fn enclose(&self, b0: f64, b1: f64) -> Option<Interval> {
        let l = self.lipschitz()?;
        let (f0, f1) = (self.eval(b0), self.eval(b1));
        let slack = math::max(0.0, 0.5 * (l * (b1 - b0) - abs(f1 - f0)));
        Some(Interval::new(f0, f1).widen(slack))
    }

    /// `sup_{|beta| >= r} |f(beta)|`, if the decay is declared.
    fn tail_sup(&self, _r: f64) -> Option<f64> {
        None
    }
}

impl Target for ExpSumRatio {
    fn eval(&self, beta: f64) -> f64 {
        ExpSumRatio::eval(self, beta)
    }

    fn enclose(&self, b0: f64, b1: f64) -> Option<Interval> {
        Some(ExpSumRatio::enclose(self, b0, b1))
    }

    fn tail_sup(&self, r: f64) -> Option<f64> {
        Some(ExpSumRatio::tail_sup(self, r))
    }
}

/// Closure target with optional declared Lipschitz constant and tail bound.
pub struct FnTarget<F, T = fn(f64) -> f64> {
    f: F,
    lipschitz: Option<f64>,
    tail: Option<T>,
}

impl<F: Fn(f64) -> f64> FnTarget<F> {
    pub fn new(f: F) -> Self {
        FnTarget { f, lipschitz: None, tail: None }
    }
}

impl<F: Fn(f64) -> f64, T: Fn(f64) -> f64> FnTarget<F, T> {
    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_tail<T2: Fn(f64) -> f64>(self, tail: T2) -> FnTarget<F, T2> {
        FnTarget {
            f: self.f,
            lipschitz: self.lipschitz,
            tail: Some(tail),
        }
    }
}

impl<F: Fn(f64) -> f64, T: Fn(f64) -> f64> Target for FnTarget<F, T> {
    fn eval(&self, beta: f64) -> f64 {
        (self.f)(beta)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    fn tail_sup(&self, r: f64) -> Option<f64> {
        self.tail.as_ref().map(|t| t(r))
    }
}

/// Sup-norm certificate: grid maximum plus the worst cell enclosure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupCertificate {
    pub grid_max: f64,
    pub certified: f64,
    pub argmax: f64,
    pub points: usize,
    /// False when the target had no enclosure and a finite-difference
    /// Lipschitz estimate was used between grid points.
    pub rigorous: bool,
}

/// Certifies `sup |approx - f|` over `[-r, r]`.
pub fn certify_sup(
    f: &dyn Target,
    approx_eval: &dyn Fn(f64) -> f64,
    approx_enclose: &dyn Fn(f64, f64) -> Interval,
    r: f64,
    points: usize,
) -> SupCertificate {
    let grid = math::linspace(-r, r, points.max(2));
    let fv: Vec<f64> = grid.iter().map(|&b| f.eval(b)).collect();
    certify_sup_sampled(f, &grid, &fv, approx_eval, approx_enclose)
}

pub(crate) fn certify_sup_sampled(
    f: &dyn Target,
    grid: &[f64],
    fv: &[f64],
    approx_eval: &dyn Fn(f64) -> f64,
    approx_enclose: &dyn Fn(f64, f64) -> Interval,
) -> SupCertificate {
    let mut grid_max: f64 = 0.0;
    let mut argmax = grid[0];
    for (&b, &v) in grid.iter().zip(fv) {
        let e = abs(approx_eval(b) - v);
        if e > grid_max {
            grid_max = e;
            argmax = b;
        }
    }
    let rigorous = f.enclose(grid[0], grid[1]).is_some();
    let est_lip = if rigorous {
        0.0
    } else {
        let mut l: f64 = 0.0;
        for i in 1..grid.len() {
            l = math::max(l, abs(fv[i] - fv[i - 1]) / (grid[i] - grid[i - 1]));
        }
        2.0 * l
    };
    let mut certified = grid_max;
    for i in 1..grid.len() {
        let (b0, b1) = (grid[i - 1], grid[i]);
        let fe = match f.enclose(b0, b1) {
            Some(iv) => iv,
            None => {
                let slack = math::max(0.0, 0.5 * (est_lip * (b1 - b0) - abs(fv[i] - fv[i - 1])));
                Interval::new(fv[i - 1], fv[i]).widen(slack)
            }
        };
        let ae = approx_enclose(b0, b1);
        certified = math::max(certified, ae.max_abs_diff(fe));
    }
    SupCertificate {
        grid_max,
        certified,
        argmax,
        points: grid.len(),
        rigorous,
    }
}

// ---------------------------------------------------------------- logistic basis

/// Basis `C(n,j) s^j (1-s)^(n-j)` in the logistic variable `s(beta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticBasis {
    n: usize,
    ln_rho: f64,
    ln_binom: Vec<f64>,
}

/// Basis values below `e^-CUTOFF` times the row peak are dropped while fitting.
const ROW_CUTOFF: f64 = 36.0;

impl LogisticBasis {
    pub fn new(n: usize, ln_rho: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("basis degree must be at least 2"));
        }
        if !(ln_rho.is_finite() && ln_rho > 0.0) {
            return Err(Error::invalid("logistic rate must be positive"));
        }
        Ok(LogisticBasis {
            n,
            ln_rho,
            ln_binom: math::ln_binomial_row(n),
        })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn ln_rho(&self) -> f64 {
        self.ln_rho
    }

    /// `(ln s, ln(1 - s))`.
    #[inline]
    pub fn ln_s(&self, beta: f64) -> (f64, f64) {
        let x = beta * self.ln_rho;
        (-softplus(-x), -softplus(x))
    }

    #[inline]
    pub fn ln_value(&self, j: usize, beta: f64) -> f64 {
        let (a, b) = self.ln_s(beta);
        self.ln_binom[j] + j as f64 * a + (self.n - j) as f64 * b
    }

    /// Beta at which basis element `j` peaks.
    pub fn node(&self, j: usize) -> f64 {
        let s = j as f64 / self.n as f64;
        (ln(s) - ln(1.0 - s)) / self.ln_rho
    }

    /// Significant basis values at `beta`: returns the first index and fills `out`.
    pub fn row(&self, beta: f64, out: &mut Vec<f64>) -> usize {
        let (a, b) = self.ln_s(beta);
        let lv = |j: usize| self.ln_binom[j] + j as f64 * a + (self.n - j) as f64 * b;
        let s = exp(a);
        let mut peak = (s * self.n as f64) as usize;
        peak = peak.min(self.n);
        // the row is log-concave; step to the true maximum
        while peak < self.n && lv(peak + 1) > lv(peak) {
            peak += 1;
        }
        while peak > 0 && lv(peak - 1) > lv(peak) {
            peak -= 1;
        }
        let top = lv(peak);
        let mut lo = peak;
        while lo > 0 && lv(lo - 1) > top - ROW_CUTOFF {
            lo -= 1;
        }
        let mut hi = peak;
        while hi < self.n && lv(hi + 1) > top - ROW_CUTOFF {
            hi += 1;
        }
        out.clear();
        for j in lo..=hi {
            out.push(exp(lv(j)));
        }
        lo
    }

    /// `sum_j lambda_j B_j(beta)` over all terms.
    pub fn combine(&self, lambda: &[f64], beta: f64) -> f64 {
        let (a, b) = self.ln_s(beta);
        let mut s = 0.0;
        for (j, &l) in lambda.iter().enumerate() {
            if l != 0.0 {
                s += l * exp(self.ln_binom[j] + j as f64 * a + (self.n - j) as f64 * b);
            }
        }
        s
    }

    /// The combination `sum lambda_j B_j` with `lambda_j >= 0` as a ratio.
    /// Zero coefficients are omitted from the numerator.
    pub fn to_ratio(&self, lambda: &[f64]) -> Result<ExpSumRatio> {
        if lambda.len() != self.n + 1 || lambda[0] != 0.0 || lambda[self.n] != 0.0 {
            return Err(Error::invalid("end coefficients must vanish"));
        }
        let numer = lambda
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0)
            .map(|(j, &l)| Term {
                ln_coef: ln(l) + self.ln_binom[j],
                ln_base: j as f64 * self.ln_rho,
            })
            .collect();
        let denom = (0..=self.n)
            .map(|j| Term {
                ln_coef: self.ln_binom[j],
                ln_base: j as f64 * self.ln_rho,
            })
            .collect();
        ExpSumRatio::from_terms(numer, denom)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    /// First basis degree tried; doubled on failure.
    pub degree: usize,
    pub max_degree: usize,
    /// `beta * ln rho` at the window edge.
    pub span: f64,
    /// Fit grid points per basis degree.
    pub density: usize,
    /// Minimax reweighting rounds.
    pub rounds: usize,
    /// Coordinate sweeps per round.
    pub sweeps: usize,
    /// Certification grid size.
    pub cert_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            degree: 256,
            max_degree: 2048,
            span: 4.0,
            density: 2,
            rounds: 16,
            sweeps: 40,
            cert_points: 10_001,
        }
    }
}

/// Box-constrained weighted least squares in the logistic basis, followed by
/// Lawson reweighting toward the minimax solution on the grid.
/// Returns the coefficients with the smallest grid sup error.
pub fn fit_coefficients(
    basis: &LogisticBasis,
    grid: &[f64],
    values: &[f64],
    lo: f64,
    hi: f64,
    init: &[f64],
    rounds: usize,
    sweeps: usize,
) -> (Vec<f64>, f64) {
    let n = basis.degree();
    let dim = n + 1;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(grid.len());
    let mut buf = Vec::new();
    for &b in grid {
        let start = basis.row(b, &mut buf);
        rows.push((start, buf.clone()));
    }
    let eval_row = |lam: &[f64], r: &(usize, Vec<f64>)| -> f64 {
        r.1.iter().enumerate().map(|(k, v)| v * lam[r.0 + k]).sum()
    };
    let sup_err = |lam: &[f64]| -> (f64, Vec<f64>) {
        let e: Vec<f64> = rows.iter().zip(values).map(|(r, &v)| eval_row(lam, r) - v).collect();
        (e.iter().fold(0.0, |a, &x| math::max(a, abs(x))), e)
    };
    let mut lam: Vec<f64> = init.to_vec();
    lam[0] = 0.0;
    lam[n] = 0.0;
    let (mut best_err, mut err) = sup_err(&lam);
    let mut best = lam.clone();
    let mut w = vec![1.0; grid.len()];
    let mut gram = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    for _ in 0..rounds {
        gram.iter_mut().for_each(|x| *x = 0.0);
        rhs.iter_mut().for_each(|x| *x = 0.0);
        for ((r, &v), &wi) in rows.iter().zip(values).zip(&w) {
            let (s, vals) = (r.0, &r.1);
            for (a, &va) in vals.iter().enumerate() {
                let ja = s + a;
                rhs[ja] += wi * va * v;
                let wa = wi * va;
                let row = &mut gram[ja * dim..(ja + 1) * dim];
                for (b, &vb) in vals.iter().enumerate() {
                    row[s + b] += wa * vb;
                }
            }
        }
        let diag_max = (0..dim).map(|j| gram[j * dim + j]).fold(0.0, math::max);
        for _ in 0..sweeps {
            for j in 1..n {
                let d = gram[j * dim + j];
                if d <= 1e-14 * diag_max {
                    continue;
                }
                let row = &gram[j * dim..(j + 1) * dim];
                let mut g = 0.0;
                for (k, &x) in row.iter().enumerate() {
                    if x != 0.0 {
                        g += x * lam[k];
                    }
                }
                let next = lam[j] + (rhs[j] - g) / d;
                lam[j] = math::min(hi, math::max(lo, next));
            }
        }
        let (e, ev) = sup_err(&lam);
        err = ev;
        if e < best_err {
            best_err = e;
            best.copy_from_slice(&lam);
        }
        // Lawson update
        let mut total = 0.0;
        for (wi, &ei) in w.iter_mut().zip(&err) {
            *wi *= math::max(abs(ei), 1e-3 * e);
            total += *wi;
        }
        let scale = grid.len() as f64 / total;
        w.iter_mut().for_each(|x| *x *= scale);
    }
    let _ = err;
    (best, best_err)
}

/// Result of [`fit_c0`].
#[derive(Clone, Debug, PartialEq)]
pub struct FitOutcome {
    pub ratio: ExpSumRatio,
    pub certificate: SupCertificate,
    pub degree: usize,
    pub range: f64,
}

/// Smallest power-of-two window beyond which the declared tail is below `eps / 6`.
pub fn default_range(f: &dyn Target, eps: f64) -> Result<f64> {
    let mut r = 1.0;
    while r <= 4096.0 {
        match f.tail_sup(r) {
            Some(t) if t <= eps / 6.0 => return Ok(r),
            Some(_) => r *= 2.0,
            None => return Err(Error::invalid("target declares no tail bound; pass a range")),
        }
    }
    Err(Error::invalid("declared tail does not fall below eps/6 within |beta| <= 4096"))
}

/// Fits a nonnegative target vanishing at infinity by a ratio of positive
/// exponential sums, certified in sup norm on `[-range, range]`.
///
/// `budget` caps the number of degree doublings.
pub fn fit_c0(
    f: &dyn Target,
    eps: f64,
    range: Option<f64>,
    budget: usize,
    opts: &FitOptions,
) -> Result<FitOutcome> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let r = match range {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(_) => return Err(Error::invalid("range must be positive")),
        None => default_range(f, eps)?,
    };
    let floor_coef = 1e-9 * eps;
    let mut best: Option<(f64, FitOutcome)> = None;
    let mut degree = opts.degree;
    let cert_grid = math::linspace(-r, r, opts.cert_points.max(2));
    let cert_vals: Vec<f64> = cert_grid.iter().map(|&b| f.eval(b)).collect();
    for _ in 0..budget.max(1) {
        let basis = LogisticBasis::new(degree, opts.span / r)?;
        let grid = math::linspace(-r, r, opts.density * degree + 1);
        let vals: Vec<f64> = grid.iter().map(|&b| f.eval(b)).collect();
        let mut init = vec![0.0; degree + 1];
        for (j, x) in init.iter_mut().enumerate().take(degree).skip(1) {
            *x = math::max(0.0, f.eval(basis.node(j)));
        }
        let (mut lam, _) = fit_coefficients(&basis, &grid, &vals, 0.0, f64::INFINITY, &init, opts.rounds, opts.sweeps);
        for x in lam.iter_mut().take(degree).skip(1) {
            *x = math::max(*x, floor_coef);
        }
        let ratio = basis.to_ratio(&lam)?;
        let cert = certify_sup_sampled(
            f,
            &cert_grid,
            &cert_vals,
            &|b| ratio.eval(b),
            &|a, b| ratio.enclose(a, b),
        );
        let out = FitOutcome {
            ratio,
            certificate: cert,
            degree,
            range: r,
        };
        if cert.certified <= eps {
            return Ok(out);
        }
        if best.as_ref().is_none_or(|(e, _)| cert.certified < *e) {
            best = Some((cert.certified, out));
        }
        if degree * 2 > opts.max_degree {
            break;
        }
        degree *= 2;
    }
    let (e, o) = best.expect("at least one attempt");
    Err(Error::FitFailure {
        best_error: e,
        target: eps,
        detail: format!("best degree {} on [-{r}, {r}]", o.degree),
    })
}

// ---------------------------------------------------------------- block realization

/// Repeating pattern of factor orders `j_1, j_2, ...` with a read offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderSequence {
    pattern: Vec<usize>,
    offset: usize,
}

impl OrderSequence {
    pub fn new(pattern: Vec<usize>) -> Result<Self> {
        if pattern.is_empty() || pattern.iter().any(|&j| j < 2) {
            return Err(Error::invalid("factor orders must all be at least 2"));
        }
        Ok(OrderSequence { pattern, offset: 0 })
    }

    pub fn get(&self, i: usize) -> usize {
        self.pattern[(self.offset + i) % self.pattern.len()]
    }

    pub fn advanced(&self, by: usize) -> Self {
        OrderSequence {
            pattern: self.pattern.clone(),
            offset: self.offset + by,
        }
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn pattern(&self) -> &[usize] {
        &self.pattern
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AtomLabel {
    /// Atoms counted in the numerator sum.
    Numerator,
    /// A second copy of the numerator atoms.
    NumeratorCopy,
    Remainder,
}

impl AtomLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            AtomLabel::Numerator => "num",
            AtomLabel::NumeratorCopy => "copy",
            AtomLabel::Remainder => "rest",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "num" => Some(AtomLabel::Numerator),
            "copy" => Some(AtomLabel::NumeratorCopy),
            "rest" => Some(AtomLabel::Remainder),
            _ => None,
        }
    }
}

/// `count` atoms sharing label and unnormalised weight `e^{ln_base}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomClass {
    pub label: AtomLabel,
    pub ln_base: f64,
    pub count: BigUint,
}

/// One factor `prod_k Z/j_k` with atoms grouped into classes. Atoms are
/// numbered little-endian in the mixed radix of `orders`; classes occupy
/// consecutive index ranges in list order.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockFactor {
    orders: Vec<usize>,
    classes: Vec<AtomClass>,
    ln_counts: Vec<f64>,
    ln_norm: f64,
}

impl BlockFactor {
    pub fn new(orders: Vec<usize>, classes: Vec<AtomClass>) -> Result<Self> {
        if orders.iter().any(|&j| j < 2) {
            return Err(Error::invalid("factor orders must be at least 2"));
        }
        if classes.iter().any(|c| c.count.is_zero() || !c.ln_base.is_finite()) {
            return Err(Error::invalid("classes need positive counts and finite weights"));
        }
        let size: BigUint = orders.iter().fold(BigUint::one(), |a, &j| a * j);
        let total: BigUint = classes.iter().fold(BigUint::zero(), |a, c| a + &c.count);
        if size != total {
            return Err(Error::invalid(format!(
                "class counts total {total} but the factor has {size} atoms"
            )));
        }
        let ln_counts: Vec<f64> = classes.iter().map(|c| ln_biguint(&c.count)).collect();
        let mut acc = LogAcc::new();
        for (c, lc) in classes.iter().zip(&ln_counts) {
            acc.add(lc + c.ln_base);
        }
        Ok(BlockFactor {
            orders,
            classes,
            ln_counts,
            ln_norm: acc.value(),
        })
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn classes(&self) -> &[AtomClass] {
        &self.classes
    }

    pub fn size(&self) -> BigUint {
        self.orders.iter().fold(BigUint::one(), |a, &j| a * j)
    }

    /// `ln mu(atom)` for an atom of class `c`.
    pub fn ln_mass(&self, c: usize) -> f64 {
        self.classes[c].ln_base - self.ln_norm
    }

    /// `ln sum_{atoms with label} mu^beta`, up to the common normaliser.
    pub fn ln_label_sum(&self, label: AtomLabel, beta: f64) -> f64 {
        let mut acc = LogAcc::new();
        for (c, lc) in self.classes.iter().zip(&self.ln_counts) {
            if c.label == label {
                acc.add(lc + beta * c.ln_base);
            }
        }
        acc.value()
    }

    pub fn label_count(&self, label: AtomLabel) -> BigUint {
        self.classes
            .iter()
            .filter(|c| c.label == label)
            .fold(BigUint::zero(), |a, c| a + &c.count)
    }

    /// Class holding the atom with the given index.
    pub fn class_of(&self, idx: &BigUint) -> usize {
        let mut end = BigUint::zero();
        for (i, c) in self.classes.iter().enumerate() {
            end += &c.count;
            if idx < &end {
                return i;
            }
        }
        self.classes.len() - 1
    }

    /// Index of `g^{-1} x` where `g` is the unit of the cyclic factor `k`.
    pub fn step_back(&self, idx: &BigUint, k: usize) -> BigUint {
        let stride: BigUint = self.orders[..k].iter().fold(BigUint::one(), |a, &j| a * j);
        let digit = (idx / &stride).mod_floor(&BigUint::from(self.orders[k]));
        if digit.is_zero() {
            idx + &stride * (self.orders[k] - 1)
        } else {
            idx - &stride
        }
    }

    /// Relative conformality defect of claimed per-class masses `m` against
    /// the translation cocycle of this factor, sampled at class boundaries and
    /// strided interior atoms for a spread of cyclic factors:
    /// `max |e^{beta Omega(g, g^-1 x)} m(g^-1 x) / m(x) - 1|`.
    pub fn sampled_conformality(&self, beta: f64, claimed_ln: &[f64], max_positions: usize) -> Result<f64> {
        if claimed_ln.len() != self.classes.len() {
            return Err(Error::invalid("one claimed mass per class"));
        }
        let size = self.size();
        let mut probes: Vec<BigUint> = Vec::new();
        let mut start = BigUint::zero();
        let step = (self.classes.len() / 48).max(1);
        for (i, c) in self.classes.iter().enumerate() {
            if i % step == 0 || i + 1 == self.classes.len() {
                probes.push(start.clone());
                probes.push(&start + &c.count - 1u32);
            }
            start += &c.count;
        }
        for i in 1..16u32 {
            probes.push(&size * i / 16u32);
        }
        let np = self.orders.len();
        let pstep = (np / max_positions.max(1)).max(1);
        let mut worst: f64 = 0.0;
        for k in (0..np).step_by(pstep).chain(core::iter::once(np - 1)) {
            for x in &probes {
                let y = self.step_back(x, k);
                let (cx, cy) = (self.class_of(x), self.class_of(&y));
                let omega = self.ln_mass(cx) - self.ln_mass(cy);
                let d = math::expm1(beta * omega + claimed_ln[cy] - claimed_ln[cx]);
                worst = math::max(worst, abs(d));
            }
        }
        Ok(worst)
    }

    /// Exact `ln mu_beta` for each class atom.
    pub fn conformal_ln_masses(&self, beta: f64) -> Vec<f64> {
        let mut acc = LogAcc::new();
        for (c, lc) in self.classes.iter().zip(&self.ln_counts) {
            acc.add(lc + beta * c.ln_base);
        }
        let z = acc.value();
        self.classes.iter().map(|c| beta * c.ln_base - z).collect()
    }
}

/// Diagnostics recorded while realizing a block.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationReport {
    pub degree: usize,
    pub ln_rho: f64,
    pub range: f64,
    pub fit_error: f64,
    pub certified_error: f64,
    pub rigorous: bool,
    pub padding_error: [f64; 2],
    pub identity_residual: f64,
}

/// Finite block `F = F1 x F2` with a full-support measure and a partition
/// `F0, F1, F2` such that
/// `eta1/(1+t^beta) = mu_beta(F0)` and `t^beta eta2/(1+t^beta) = mu_beta(F1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedBlockSystem {
    t: f64,
    first: BlockFactor,
    second: BlockFactor,
    eta1: ExpSumRatio,
    eta2: ExpSumRatio,
    report: RealizationReport,
}

/// Log-domain sums of `mu^beta` over the three parts and the whole block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartSums {
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
    pub total: f64,
}

impl PartitionedBlockSystem {
    pub fn from_parts(
        t: f64,
        first: BlockFactor,
        second: BlockFactor,
        eta1: ExpSumRatio,
        eta2: ExpSumRatio,
        report: RealizationReport,
    ) -> Result<Self> {
        if !(t > 1.0 && t.is_finite()) {
            return Err(Error::invalid("t must exceed 1"));
        }
        Ok(PartitionedBlockSystem {
            t,
            first,
            second,
            eta1,
            eta2,
            report,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn factors(&self) -> (&BlockFactor, &BlockFactor) {
        (&self.first, &self.second)
    }

    pub fn eta_ratios(&self) -> (&ExpSumRatio, &ExpSumRatio) {
        (&self.eta1, &self.eta2)
    }

    pub fn report(&self) -> &RealizationReport {
        &self.report
    }

    pub fn orders(&self) -> Vec<usize> {
        let mut v = self.first.orders.clone();
        v.extend_from_slice(&self.second.orders);
        v
    }

    pub fn size(&self) -> BigUint {
        self.first.size() * self.second.size()
    }

    /// Sizes of `F0, F1, F2`; they are disjoint by construction and sum to `|F|`.
    pub fn part_sizes(&self) -> [BigUint; 3] {
        use AtomLabel::*;
        let (u1, c1, v1) = (
            self.first.label_count(Numerator),
            self.first.label_count(NumeratorCopy),
            self.first.label_count(Remainder),
        );
        let (u2, c2, v2) = (
            self.second.label_count(Numerator),
            self.second.label_count(NumeratorCopy),
            self.second.label_count(Remainder),
        );
        let l2 = self.second.size();
        let f0 = &u1 * &l2;
        let f1 = &c1 * (&u2 + &c2) + &v1 * &u2;
        let f2 = &c1 * &v2 + &v1 * (&c2 + &v2);
        [f0, f1, f2]
    }

    /// Which part an atom pair with the given labels belongs to.
    pub fn part_of(first: AtomLabel, second: AtomLabel) -> usize {
        use AtomLabel::*;
        match (first, second) {
            (Numerator, _) => 0,
            (NumeratorCopy, Numerator | NumeratorCopy) | (Remainder, Numerator) => 1,
            _ => 2,
        }
    }

    pub fn part_sums(&self, beta: f64) -> PartSums {
        use AtomLabel::*;
        use math::ln_add;
        let a = |f: &BlockFactor| {
            (
                f.ln_label_sum(Numerator, beta),
                f.ln_label_sum(NumeratorCopy, beta),
                f.ln_label_sum(Remainder, beta),
            )
        };
        let (u1, c1, v1) = a(&self.first);
        let (u2, c2, v2) = a(&self.second);
        let all2 = ln_add(ln_add(u2, c2), v2);
        let all1 = ln_add(ln_add(u1, c1), v1);
        PartSums {
            f0: u1 + all2,
            f1: ln_add(c1 + ln_add(u2, c2), v1 + u2),
            f2: ln_add(c1 + v2, v1 + ln_add(c2, v2)),
            total: all1 + all2,
        }
    }

    pub fn eta1(&self, beta: f64) -> f64 {
        self.eta1.eval(beta)
    }

    pub fn eta2(&self, beta: f64) -> f64 {
        self.eta2.eval(beta)
    }

    pub fn zeta(&self, beta: f64) -> f64 {
        self.eta1(beta) - self.eta2(beta)
    }

    pub fn zeta_enclosure(&self, b0: f64, b1: f64) -> Interval {
        self.eta1.enclose(b0, b1).sub(self.eta2.enclose(b0, b1))
    }

    /// `int H^beta dmu_beta` with `H = t, 1/t, 1` on `F0, F1, F2`.
    pub fn integrate_potential(&self, beta: f64) -> f64 {
        let s = self.part_sums(beta);
        let lt = ln(self.t);
        let mut acc = LogAcc::new();
        acc.add(beta * lt + s.f0);
        acc.add(-beta * lt + s.f1);
        acc.add(s.f2);
        exp(acc.value() - s.total)
    }

    /// Absolute residuals of the two block identities at `beta`.
    pub fn identity_residuals(&self, beta: f64) -> (f64, f64) {
        let s = self.part_sums(beta);
        let lw = softplus(beta * ln(self.t));
        let x1 = exp(s.f0 - s.total);
        let x2 = exp(s.f1 - s.total);
        let e1 = exp(self.eta1.ln_eval(beta) - lw);
        let e2 = exp(self.eta2.ln_eval(beta) + beta * ln(self.t) - lw);
        (abs(x1 - e1), abs(x2 - e2))
    }

    /// Largest identity residual over a uniform grid on `[-r, r]`.
    pub fn max_identity_residual(&self, r: f64, points: usize) -> f64 {
        math::linspace(-r, r, points)
            .into_iter()
            .map(|b| {
                let (a, c) = self.identity_residuals(b);
                math::max(a, c)
            })
            .fold(0.0, math::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealizeOptions {
    pub fit: FitOptions,
    /// Certification window `[-range, range]`.
    pub range: f64,
    /// Coefficients are quantised to multiples of `2^-scale_bits`.
    pub scale_bits: u32,
    /// Cap on the number of cyclic factors consumed by one block.
    pub max_factors: usize,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        RealizeOptions {
            fit: FitOptions::default(),
            range: 20.0,
            scale_bits: 40,
            max_factors: 20_000,
        }
    }
}

/// Integer padding: the smallest prefix product `L = j_1...j_p >= unit` with
/// `K = L div unit`, `T = L mod unit` and `T / (K * scale) <= eps / 6`.
fn padding(
    js: &OrderSequence,
    unit: &BigUint,
    ln_scale: f64,
    eps: f64,
    max_factors: usize,
) -> Result<(Vec<usize>, BigUint, BigUint, f64)> {
    let mut l = BigUint::one();
    let mut orders = Vec::new();
    let limit = ln(eps / 6.0);
    for i in 0..max_factors {
        let j = js.get(i);
        l *= j;
        orders.push(j);
        if &l >= unit {
            let (k, t) = l.div_rem(unit);
            let rel = if t.is_zero() {
                f64::NEG_INFINITY
            } else {
                ln_biguint(&t) - ln_biguint(&k) - ln_scale
            };
            if rel <= limit {
                return Ok((orders, k, t, exp(rel)));
            }
        }
    }
    Err(Error::Realization(format!(
        "no prefix of at most {max_factors} factors gives padding below eps/6"
    )))
}

/// Builds one side: classes for `X = num / ((2 num + rest)(1 + t^beta) + T)`
/// where `num` has counts `K a_j` and the side's extra weight factor is
/// `shift` (0 for the first side, `ln t` for the second).
fn side_classes(
    q: &[u64],
    binom: &[BigUint],
    scale: &BigUint,
    k: &BigUint,
    t_pad: &BigUint,
    ln_rho: f64,
    ln_t: f64,
    second: bool,
) -> Vec<AtomClass> {
    let n = binom.len() - 1;
    let mut num = Vec::new();
    let mut rest = Vec::new();
    for j in 0..=n {
        let a = &binom[j] * q[j];
        let full = scale * &binom[j];
        let b = &full - &a * 2u32;
        let base = j as f64 * ln_rho;
        // first side: num at rho^j, rest = K b_j at rho^j and K S C at t rho^j
        // second side: num at t rho^j, rest = K S C at rho^j and K b_j at t rho^j
        let (nb, full_base, b_base) = if second {
            (base + ln_t, base, base + ln_t)
        } else {
            (base, base + ln_t, base)
        };
        if !a.is_zero() {
            num.push(AtomClass {
                label: AtomLabel::Numerator,
                ln_base: nb,
                count: k * &a,
            });
        }
        if !b.is_zero() {
            rest.push(AtomClass {
                label: AtomLabel::Remainder,
                ln_base: b_base,
                count: k * &b,
            });
        }
        rest.push(AtomClass {
            label: AtomLabel::Remainder,
            ln_base: full_base,
            count: k * &full,
        });
    }
    if !t_pad.is_zero() {
        rest.push(AtomClass {
            label: AtomLabel::Remainder,
            ln_base: 0.0,
            count: t_pad.clone(),
        });
    }
    let copies: Vec<AtomClass> = num
        .iter()
        .map(|c| AtomClass {
            label: AtomLabel::NumeratorCopy,
            ..c.clone()
        })
        .collect();
    let mut out = num;
    out.extend(copies);
    out.extend(rest);
    out
}

/// `eta = K A (1 + t^beta) / (K (2A + B)(1 + t^beta) + T)` as a ratio.
fn padded_eta(q: &[u64], lb: &[f64], ln_scale: f64, ln_k: f64, ln_tpad: f64, ln_rho: f64, ln_t: f64) -> Result<ExpSumRatio> {
    let n = lb.len() - 1;
    let mut numer = Vec::new();
    let mut denom = Vec::new();
    for j in 0..=n {
        let base = j as f64 * ln_rho;
        if q[j] > 0 {
            let c = ln_k + ln(q[j] as f64) + lb[j];
            numer.push(Term { ln_coef: c, ln_base: base });
            numer.push(Term { ln_coef: c, ln_base: base + ln_t });
        }
        let c = ln_k + ln_scale + lb[j];
        denom.push(Term { ln_coef: c, ln_base: base });
        denom.push(Term { ln_coef: c, ln_base: base + ln_t });
    }
    if ln_tpad.is_finite() {
        denom.push(Term { ln_coef: ln_tpad, ln_base: 0.0 });
    }
    ExpSumRatio::from_terms(numer, denom)
}

/// Realizes a target `f` with values in `[-1/2, 1/2]` and zero tails as a
/// [`PartitionedBlockSystem`] with `||f - (eta1 - eta2)|| <= eps` on the
/// certification grid. Factor orders are consumed from `js`; the number used is
/// `system.orders().len()`.
pub fn realize_block(
    f: &dyn Target,
    t: f64,
    eps: f64,
    js: &OrderSequence,
    opts: &RealizeOptions,
) -> Result<PartitionedBlockSystem> {
    if !(t > 1.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t = {t} must exceed 1")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let r = opts.range;
    let fo = &opts.fit;
    let scale_f = (1u64 << opts.scale_bits) as f64;
    let half_q = 1u64 << (opts.scale_bits - 1);
    let ln_scale = opts.scale_bits as f64 * LN_2;
    let ln_t = ln(t);
    let cert_grid = math::linspace(-r, r, fo.cert_points.max(2));
    let cert_vals: Vec<f64> = cert_grid.iter().map(|&b| f.eval(b)).collect();
    let fit_budget = 2.0 * eps / 3.0;

    let mut degree = fo.degree;
    let mut best_err = f64::INFINITY;
    loop {
        let basis = LogisticBasis::new(degree, fo.span / r)?;
        let grid = math::linspace(-r, r, fo.density * degree + 1);
        let vals: Vec<f64> = grid.iter().map(|&b| clamp_half(f.eval(b))).collect();
        let mut init = vec![0.0; degree + 1];
        for (j, x) in init.iter_mut().enumerate().take(degree).skip(1) {
            *x = clamp_half(f.eval(basis.node(j)));
        }
        let (lam, _) = fit_coefficients(&basis, &grid, &vals, -0.5, 0.5, &init, fo.rounds, fo.sweeps);
        let mut qp = vec![0u64; degree + 1];
        let mut qm = vec![0u64; degree + 1];
        for j in 1..degree {
            let q = (abs(lam[j]) * scale_f + 0.5) as u64;
            let q = q.min(half_q);
            if lam[j] > 0.0 {
                qp[j] = q;
            } else {
                qm[j] = q;
            }
        }
        let lp: Vec<f64> = qp.iter().map(|&q| q as f64 / scale_f).collect();
        let lm: Vec<f64> = qm.iter().map(|&q| q as f64 / scale_f).collect();
        let r1 = basis.to_ratio(&lp)?;
        let r2 = basis.to_ratio(&lm)?;
        let cert = certify_sup_sampled(
            f,
            &cert_grid,
            &cert_vals,
            &|b| r1.eval(b) - r2.eval(b),
            &|a, b| r1.enclose(a, b).sub(r2.enclose(a, b)),
        );
        best_err = math::min(best_err, cert.certified);
        if cert.certified <= fit_budget {
            return assemble(f, t, eps, js, opts, &basis, &qp, &qm, cert, ln_scale, ln_t, &cert_grid, &cert_vals);
        }
        if degree * 2 > fo.max_degree {
            return Err(Error::FitFailure {
                best_error: best_err,
                target: fit_budget,
                detail: format!("signed fit up to degree {degree} on [-{r}, {r}]"),
            });
        }
        degree *= 2;
    }
}

fn clamp_half(x: f64) -> f64 {
    math::min(0.5, math::max(-0.5, x))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    f: &dyn Target,
    t: f64,
    eps: f64,
    js: &OrderSequence,
    opts: &RealizeOptions,
    basis: &LogisticBasis,
    qp: &[u64],
    qm: &[u64],
    fit_cert: SupCertificate,
    ln_scale: f64,
    ln_t: f64,
    cert_grid: &[f64],
    cert_vals: &[f64],
) -> Result<PartitionedBlockSystem> {
    let n = basis.degree();
    let ln_rho = basis.ln_rho();
    let scale = BigUint::one() << opts.scale_bits;
    let mut binom = Vec::with_capacity(n + 1);
    let mut c = BigUint::one();
    for j in 0..=n {
        binom.push(c.clone());
        c = c * (n - j) / (j + 1);
    }
    // atoms of the two-copies-plus-rest form, doubled by the (1 + t^beta) factor
    let unit = (&scale << n) * 2u32;
    let ln_unit_scale = ln_scale + LN_2;
    let (o1, k1, t1, pad1) = padding(js, &unit, ln_unit_scale, eps, opts.max_factors)?;
    let js2 = js.advanced(o1.len());
    let (o2, k2, t2, pad2) = padding(&js2, &unit, ln_unit_scale, eps, opts.max_factors)?;
    let first = BlockFactor::new(o1, side_classes(qp, &binom, &scale, &k1, &t1, ln_rho, ln_t, false))?;
    let second = BlockFactor::new(o2, side_classes(qm, &binom, &scale, &k2, &t2, ln_rho, ln_t, true))?;
    let lb = math::ln_binomial_row(n);
    let eta1 = padded_eta(qp, &lb, ln_scale, ln_biguint(&k1), ln_biguint(&t1), ln_rho, ln_t)?;
    let eta2 = padded_eta(qm, &lb, ln_scale, ln_biguint(&k2), ln_biguint(&t2), ln_rho, ln_t)?;
    let cert = certify_sup_sampled(
        f,
        cert_grid,
        cert_vals,
        &|b| eta1.eval(b) - eta2.eval(b),
        &|a, b| eta1.enclose(a, b).sub(eta2.enclose(a, b)),
    );
    let report = RealizationReport {
        degree: n,
        ln_rho,
        range: opts.range,
        fit_error: fit_cert.certified,
        certified_error: cert.certified,
        rigorous: cert.rigorous,
        padding_error: [pad1, pad2],
        identity_residual: 0.0,
    };
    let mut sys = PartitionedBlockSystem::from_parts(t, first, second, eta1, eta2, report)?;
    let res = sys.max_identity_residual(opts.range, cert_grid.len());
    sys.report.identity_residual = res;
    if cert.certified > eps {
        return Err(Error::FitFailure {
            best_error: cert.certified,
            target: eps,
            detail: String::from("padded block exceeds tolerance"),
        });
    }
    if !(res <= 1e-10) {
        return Err(Error::Realization(format!("block identity residual {res:e} exceeds 1e-10")));
    }
    Ok(sys)
}
