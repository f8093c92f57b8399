//! Finite probability blocks, truncated product systems and the conformality
//! machinery built on them.
//!
//! A block is a finite group `F` acting on itself by left translation, a
//! full-support weight vector `mu` and a positive potential `H`. The cocycle
//! is `Omega(g, h) = ln mu(gh) - ln mu(h)`; its unique beta-conformal measure is
//! `mu^beta / sum mu^beta`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, abs, exp, ln, LogAcc};
use crate::textfmt::{fmt_f64, parse_f64, parse_usize};

/// Largest block order with an explicit multiplication table.
pub const MAX_TABLE_ORDER: usize = 64;
/// Accepted deviation of a probability vector's total from one.
pub const NORM_TOL: f64 = 1e-12;
/// Inputs further than this from total mass one are rejected, not repaired.
pub const RENORM_LIMIT: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGroupTable {
    order: usize,
    mul: Vec<u8>,
    inv: Vec<u8>,
    identity: usize,
}

impl FiniteGroupTable {
    /// Builds a table from a row-major multiplication table and checks the
    /// group axioms exhaustively.
    pub fn from_table(order: usize, mul: Vec<usize>, identity: usize) -> Result<Self> {
        if order == 0 || order > MAX_TABLE_ORDER {
            return Err(Error::invalid(format!(
                "group order {order} outside 1..={MAX_TABLE_ORDER}"
            )));
        }
        if mul.len() != order * order {
            return Err(Error::invalid("multiplication table has wrong size"));
        }
        if identity >= order {
            return Err(Error::invalid("identity index out of range"));
        }
        if mul.iter().any(|&x| x >= order) {
            return Err(Error::invalid("multiplication table not closed"));
        }
        let m = |a: usize, b: usize| mul[a * order + b];
        for a in 0..order {
            if m(identity, a) != a || m(a, identity) != a {
                return Err(Error::invalid(format!("identity fails at {a}")));
            }
        }
        for a in 0..order {
            for b in 0..order {
                let ab = m(a, b);
                for c in 0..order {
                    if m(ab, c) != m(a, m(b, c)) {
                        return Err(Error::invalid(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        let mut inv = vec![0u8; order];
        for (a, slot) in inv.iter_mut().enumerate() {
            let found = (0..order).find(|&b| m(a, b) == identity && m(b, a) == identity);
            match found {
                Some(b) => *slot = b as u8,
                None => return Err(Error::invalid(format!("element {a} has no inverse"))),
            }
        }
        Ok(FiniteGroupTable {
            order,
            mul: mul.into_iter().map(|x| x as u8).collect(),
            inv,
            identity,
        })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        let mut mul = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mul.push((a + b) % n);
            }
        }
        Self::from_table(n, mul, 0)
    }

    /// Dihedral group of order `2n`; element `(r, s)` is encoded `r + n*s`.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::invalid("dihedral needs n >= 1"));
        }
        let order = 2 * n;
        let mut mul = Vec::with_capacity(order * order);
        for x in 0..order {
            let (r1, s1) = (x % n, x / n);
            for y in 0..order {
                let (r2, s2) = (y % n, y / n);
                // (r1 s1)(r2 s2): rotations conjugated by reflections flip sign
                let r = if s1 == 0 { (r1 + r2) % n } else { (r1 + n - r2) % n };
                let s = (s1 + s2) % 2;
                mul.push(r + n * s);
            }
        }
        Self::from_table(order, mul, 0)
    }

    pub fn direct_product(a: &Self, b: &Self) -> Result<Self> {
        let order = a.order * b.order;
        let mut mul = Vec::with_capacity(order * order);
        for x in 0..order {
            let (xa, xb) = (x % a.order, x / a.order);
            for y in 0..order {
                let (ya, yb) = (y % a.order, y / a.order);
                mul.push(a.mul(xa, ya) + a.order * b.mul(xb, yb));
            }
        }
        Self::from_table(order, mul, a.identity + a.order * b.identity)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn table(&self) -> Vec<usize> {
        self.mul.iter().map(|&x| x as usize).collect()
    }
}

/// Strictly positive weights summing to one within [`NORM_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector {
    weights: Vec<f64>,
}

impl ProbVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("empty probability vector"));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid(format!(
                "weight {i} = {} is not strictly positive",
                weights[i]
            )));
        }
        let total: f64 = weights.iter().sum();
        let dev = abs(total - 1.0);
        if dev <= NORM_TOL {
            Ok(ProbVector { weights })
        } else if dev <= RENORM_LIMIT {
            Ok(ProbVector {
                weights: weights.iter().map(|w| w / total).collect(),
            })
        } else {
            Err(Error::invalid(format!(
                "weights sum to {total}, off by {dev:e} (limit {RENORM_LIMIT:e})"
            )))
        }
    }

    /// Normalises arbitrary positive masses.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let lw: Vec<f64> = masses
            .iter()
            .map(|&m| if m > 0.0 { ln(m) } else { f64::NAN })
            .collect();
        if lw.iter().any(|x| x.is_nan()) {
            return Err(Error::invalid("masses must be strictly positive"));
        }
        Self::from_ln_masses(&lw)
    }

    /// Normalises masses given by their logarithms.
    pub fn from_ln_masses(lw: &[f64]) -> Result<Self> {
        if lw.is_empty() {
            return Err(Error::invalid("empty probability vector"));
        }
        if lw.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("non-finite log mass"));
        }
        let z = math::log_sum_exp(lw);
        let w: Vec<f64> = lw.iter().map(|x| exp(x - z)).collect();
        if w.iter().any(|x| *x <= 0.0) {
            return Err(Error::Numeric(String::from(
                "weight underflow: dynamic range exceeds f64",
            )));
        }
        let total: f64 = w.iter().sum();
        Ok(ProbVector {
            weights: w.iter().map(|x| x / total).collect(),
        })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("empty probability vector"));
        }
        Ok(ProbVector {
            weights: vec![1.0 / n as f64; n],
        })
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn max_abs_diff(&self, other: &ProbVector) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| abs(a - b))
            .fold(0.0, math::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteConformalBlock {
    group: FiniteGroupTable,
    base_measure: ProbVector,
    potential: Vec<f64>,
    base_a: f64,
}

impl FiniteConformalBlock {
    pub fn new(
        group: FiniteGroupTable,
        base_measure: ProbVector,
        potential: Vec<f64>,
        base_a: f64,
    ) -> Result<Self> {
        if base_measure.len() != group.order() || potential.len() != group.order() {
            return Err(Error::invalid(format!(
                "block of order {} needs {0} weights and potential values",
                group.order()
            )));
        }
        if !(base_a.is_finite() && base_a > 1.0) {
            return Err(Error::invalid(format!("block base a = {base_a} must exceed 1")));
        }
        let (lo, hi) = (1.0 / base_a, base_a);
        let slack = 1e-12;
        for (i, &h) in potential.iter().enumerate() {
            if !(h.is_finite() && h > 0.0) || h < lo * (1.0 - slack) || h > hi * (1.0 + slack) {
                return Err(Error::invalid(format!(
                    "potential value {h} at {i} outside [{lo}, {hi}]"
                )));
            }
        }
        Ok(FiniteConformalBlock {
            group,
            base_measure,
            potential,
            base_a,
        })
    }

    /// Block with constant potential one.
    pub fn flat(group: FiniteGroupTable, base_measure: ProbVector) -> Result<Self> {
        let n = group.order();
        Self::new(group, base_measure, vec![1.0; n], 2.0)
    }

    #[inline]
    pub fn group(&self) -> &FiniteGroupTable {
        &self.group
    }

    #[inline]
    pub fn base_measure(&self) -> &ProbVector {
        &self.base_measure
    }

    #[inline]
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    #[inline]
    pub fn base_a(&self) -> f64 {
        self.base_a
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.group.order()
    }

    /// `Omega(g, h) = ln mu(gh) - ln mu(h)`.
    pub fn omega(&self, g: usize, h: usize) -> f64 {
        let w = self.base_measure.weights();
        ln(w[self.group.mul(g, h)]) - ln(w[h])
    }

    /// Same block with the base measure replaced.
    pub fn with_base_measure(&self, m: ProbVector) -> Result<Self> {
        Self::new(self.group.clone(), m, self.potential.clone(), self.base_a)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("beta = {beta} is not finite")))
    }
}

/// `mu_beta(h) = mu(h)^beta / sum_g mu(g)^beta`, computed in the log domain.
pub fn conformal_weights(block: &FiniteConformalBlock, beta: f64) -> Result<ProbVector> {
    check_beta(beta)?;
    let lw: Vec<f64> = block
        .base_measure
        .weights()
        .iter()
        .map(|&w| beta * ln(w))
        .collect();
    ProbVector::from_ln_masses(&lw)
}

/// `sum_h H(h)^beta mu_beta(h)`.
pub fn integrate_potential(block: &FiniteConformalBlock, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let mut num = LogAcc::new();
    let mut den = LogAcc::new();
    for (&w, &h) in block.base_measure.weights().iter().zip(&block.potential) {
        let lw = beta * ln(w);
        den.add(lw);
        num.add(lw + beta * ln(h));
    }
    Ok(exp(num.value() - den.value()))
}

/// `dm -> e^{beta H} dm / int e^{beta H} dm`.
pub fn cohomologous_transform(measure: &ProbVector, h: &[f64], beta: f64) -> Result<ProbVector> {
    check_beta(beta)?;
    if h.len() != measure.len() {
        return Err(Error::invalid("measure and potential differ in length"));
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("non-finite coboundary values"));
    }
    let lw: Vec<f64> = measure
        .weights()
        .iter()
        .zip(h)
        .map(|(&w, &x)| ln(w) + beta * x)
        .collect();
    ProbVector::from_ln_masses(&lw)
}

/// Per-block conformal weights; the measure on the truncation is their product.
pub fn product_measure(blocks: &[FiniteConformalBlock], beta: f64) -> Result<Vec<ProbVector>> {
    blocks.iter().map(|b| conformal_weights(b, beta)).collect()
}

/// A group element supported in one block of a truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Generator {
    pub block: usize,
    pub element: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConformalityReport {
    pub max_defect: f64,
    pub pass: bool,
    pub configurations: usize,
    pub generators: usize,
}

/// Finite prefix of an infinite product of blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedProductSystem {
    blocks: Vec<FiniteConformalBlock>,
    tail_bound: f64,
}

/// Configurations are capped so brute-force checks stay cheap.
pub const MAX_CONFIGURATIONS: usize = 1 << 20;

impl TruncatedProductSystem {
    pub fn new(blocks: Vec<FiniteConformalBlock>, tail_bound: f64) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::invalid("truncation needs at least one block"));
        }
        if !(tail_bound >= 0.0 && tail_bound.is_finite()) {
            return Err(Error::invalid("tail bound must be finite and nonnegative"));
        }
        let mut n: usize = 1;
        for b in &blocks {
            n = n
                .checked_mul(b.order())
                .filter(|&n| n <= MAX_CONFIGURATIONS)
                .ok_or_else(|| Error::SizeCap(format!("more than {MAX_CONFIGURATIONS} configurations")))?;
        }
        Ok(TruncatedProductSystem { blocks, tail_bound })
    }

    pub fn blocks(&self) -> &[FiniteConformalBlock] {
        &self.blocks
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn num_configurations(&self) -> usize {
        self.blocks.iter().map(|b| b.order()).product()
    }

    /// Mixed-radix decoding, first block least significant.
    pub fn decode(&self, mut idx: usize, out: &mut [usize]) {
        for (o, b) in out.iter_mut().zip(&self.blocks) {
            *o = idx % b.order();
            idx /= b.order();
        }
    }

    pub fn encode(&self, cfg: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (c, b) in cfg.iter().zip(&self.blocks) {
            idx += c * stride;
            stride *= b.order();
        }
        idx
    }

    /// Product of per-block measures as one vector over configurations.
    pub fn product_density(&self, factors: &[ProbVector]) -> Result<ProbVector> {
        if factors.len() != self.blocks.len() {
            return Err(Error::invalid("one factor per block required"));
        }
        let n = self.num_configurations();
        let mut cfg = vec![0; self.blocks.len()];
        let mut out = Vec::with_capacity(n);
        for idx in 0..n {
            self.decode(idx, &mut cfg);
            let mut lp = 0.0;
            for (f, &c) in factors.iter().zip(&cfg) {
                lp += ln(f.weights()[c]);
            }
            out.push(lp);
        }
        ProbVector::from_ln_masses(&out)
    }

    /// Conformal measure of the truncation at `beta`.
    pub fn conformal_measure(&self, beta: f64) -> Result<ProbVector> {
        let f = product_measure(&self.blocks, beta)?;
        self.product_density(&f)
    }

    /// All single-block generators (every non-identity element of every block).
    pub fn all_generators(&self) -> Vec<Generator> {
        let mut g = Vec::new();
        for (bi, b) in self.blocks.iter().enumerate() {
            for e in 0..b.order() {
                if e != b.group().identity() {
                    g.push(Generator { block: bi, element: e });
                }
            }
        }
        g
    }

    /// `|sum_n ln int H_n^beta dmu_{n,beta}|` for the given further blocks is
    /// within the tail bound at every beta.
    pub fn tail_bound_covers(&self, extra: &[FiniteConformalBlock], betas: &[f64]) -> Result<bool> {
        for &b in betas {
            let mut s = 0.0;
            for blk in extra {
                s += ln(integrate_potential(blk, b)?);
            }
            if abs(s) > self.tail_bound {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Tail bound for blocks with potentials in `[a_n^{-1}, a_n]` over `|beta| <= r`:
/// each factor lies in `[a_n^{-|beta|}, a_n^{|beta|}]`.
pub fn tail_bound_from_bases(bases: &[f64], r: f64) -> f64 {
    r * bases.iter().map(|&a| ln(a)).sum::<f64>()
}

/// Brute-force conformality defect over every configuration indicator.
pub fn check_conformality(
    system: &TruncatedProductSystem,
    measure: &ProbVector,
    beta: f64,
    generators: &[Generator],
    tol: f64,
) -> Result<ConformalityReport> {
    conformality_defect_raw(system, measure.weights(), beta, generators, tol)
}

/// As [`check_conformality`] on raw, possibly unnormalised, weights.
pub fn conformality_defect_raw(
    system: &TruncatedProductSystem,
    m: &[f64],
    beta: f64,
    generators: &[Generator],
    tol: f64,
) -> Result<ConformalityReport> {
    check_beta(beta)?;
    let n = system.num_configurations();
    if m.len() != n {
        return Err(Error::invalid(format!(
            "measure has {} entries, truncation has {n} configurations",
            m.len()
        )));
    }
    for (gi, g) in generators.iter().enumerate() {
        match system.blocks.get(g.block) {
            None => {
                return Err(Error::UnsupportedGenerator {
                    generator: gi,
                    reason: format!("block {} outside the {} retained blocks", g.block, system.blocks.len()),
                })
            }
            Some(b) if g.element >= b.order() => {
                return Err(Error::UnsupportedGenerator {
                    generator: gi,
                    reason: format!("element {} outside block of order {}", g.element, b.order()),
                })
            }
            _ => {}
        }
    }
    let k = system.blocks.len();
    let mut cfg = vec![0; k];
    let mut max_defect: f64 = 0.0;
    for g in generators {
        let blk = &system.blocks[g.block];
        let ginv = blk.group().inv(g.element);
        for c in 0..n {
            system.decode(c, &mut cfg);
            // x = g^{-1} c; the indicator of c pulled back along g is the indicator of x
            let orig = cfg[g.block];
            cfg[g.block] = blk.group().mul(ginv, orig);
            let x = system.encode(&cfg);
            let om = blk.omega(g.element, cfg[g.block]);
            cfg[g.block] = orig;
            let lhs = exp(beta * om) * m[x];
            max_defect = math::max(max_defect, abs(lhs - m[c]));
        }
    }
    Ok(ConformalityReport {
        max_defect,
        pass: max_defect <= tol,
        configurations: n,
        generators: generators.len(),
    })
}

/// Real function of finitely many coordinates of a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderFunction {
    window: Vec<usize>,
    radices: Vec<usize>,
    table: Vec<f64>,
}

impl CylinderFunction {
    pub fn new(window: Vec<usize>, radices: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        if window.len() != radices.len() {
            return Err(Error::invalid("one radix per window coordinate"));
        }
        let size: usize = radices.iter().product();
        if table.len() != size {
            return Err(Error::invalid(format!("table needs {size} entries")));
        }
        Ok(CylinderFunction { window, radices, table })
    }

    /// Indicator of one configuration on the window.
    pub fn indicator(window: Vec<usize>, radices: Vec<usize>, cell: &[usize]) -> Result<Self> {
        let size: usize = radices.iter().product();
        let mut table = vec![0.0; size];
        let mut idx = 0;
        let mut stride = 1;
        for (c, r) in cell.iter().zip(&radices) {
            if c >= r {
                return Err(Error::invalid("cell value outside radix"));
            }
            idx += c * stride;
            stride *= r;
        }
        table[idx] = 1.0;
        Self::new(window, radices, table)
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    pub fn eval(&self, config: &[usize]) -> Result<f64> {
        let mut idx = 0;
        let mut stride = 1;
        for (&w, &r) in self.window.iter().zip(&self.radices) {
            let v = *config
                .get(w)
                .ok_or_else(|| Error::invalid("configuration shorter than window"))?;
            if v >= r {
                return Err(Error::invalid("configuration value outside radix"));
            }
            idx += v * stride;
            stride *= r;
        }
        Ok(self.table[idx])
    }

    pub fn sup_norm(&self) -> f64 {
        self.table.iter().fold(0.0, |a, &b| math::max(a, abs(b)))
    }
}

/// One text record per block: order, identity, table, base, weights, potential.
pub fn write_blocks(blocks: &[FiniteConformalBlock]) -> String {
    let mut s = String::new();
    for b in blocks {
        s.push_str("block\n");
        s.push_str(&format!("order {}\n", b.order()));
        s.push_str(&format!("identity {}\n", b.group().identity()));
        s.push_str("mul");
        for row in 0..b.order() {
            s.push_str(if row == 0 { " " } else { " ; " });
            let cells: Vec<String> = (0..b.order())
                .map(|c| format!("{}", b.group().mul(row, c)))
                .collect();
            s.push_str(&cells.join(" "));
        }
        s.push('\n');
        s.push_str(&format!("a {}\n", fmt_f64(b.base_a())));
        let w: Vec<String> = b.base_measure().weights().iter().map(|&x| fmt_f64(x)).collect();
        s.push_str(&format!("weights {}\n", w.join(" ")));
        let p: Vec<String> = b.potential().iter().map(|&x| fmt_f64(x)).collect();
        s.push_str(&format!("potential {}\n", p.join(" ")));
        s.push_str("end\n");
    }
    s
}

/// Fields of a block record seen so far: order, identity, table, a, weights, potential.
type PartialBlock = (Option<usize>, Option<usize>, Option<Vec<usize>>, Option<f64>, Option<Vec<f64>>, Option<Vec<f64>>);

pub fn parse_blocks(text: &str) -> Result<Vec<FiniteConformalBlock>> {
    let mut out = Vec::new();
    let mut cur: Option<PartialBlock> = None;
    for (ln0, raw) in text.lines().enumerate() {
        let line = ln0 + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (key, rest) = match t.split_once(' ') {
            Some((k, r)) => (k, r.trim()),
            None => (t, ""),
        };
        let perr = |msg: &str| Error::Parse { line, msg: String::from(msg) };
        match key {
            "block" => {
                if cur.is_some() {
                    return Err(perr("nested block record"));
                }
                cur = Some((None, None, None, None, None, None));
            }
            "end" => {
                let (o, id, mul, a, w, p) = cur.take().ok_or_else(|| perr("`end` outside record"))?;
                let o = o.ok_or_else(|| perr("missing order"))?;
                let g = FiniteGroupTable::from_table(
                    o,
                    mul.ok_or_else(|| perr("missing mul"))?,
                    id.ok_or_else(|| perr("missing identity"))?,
                )?;
                let pv = ProbVector::new(w.ok_or_else(|| perr("missing weights"))?)?;
                out.push(FiniteConformalBlock::new(
                    g,
                    pv,
                    p.ok_or_else(|| perr("missing potential"))?,
                    a.ok_or_else(|| perr("missing a"))?,
                )?);
            }
            _ => {
                let c = cur.as_mut().ok_or_else(|| perr("field outside record"))?;
                match key {
                    "order" => c.0 = Some(parse_usize(rest, line)?),
                    "identity" => c.1 = Some(parse_usize(rest, line)?),
                    "mul" => {
                        let mut v = Vec::new();
                        for tok in rest.split_whitespace().filter(|s| *s != ";") {
                            v.push(parse_usize(tok, line)?);
                        }
                        c.2 = Some(v);
                    }
                    "a" => c.3 = Some(parse_f64(rest, line)?),
                    "weights" => {
                        c.4 = Some(rest.split_whitespace().map(|s| parse_f64(s, line)).collect::<Result<_>>()?)
                    }
                    "potential" => {
                        c.5 = Some(rest.split_whitespace().map(|s| parse_f64(s, line)).collect::<Result<_>>()?)
                    }
                    other => return Err(Error::Parse { line, msg: format!("unknown field `{other}`") }),
                }
            }
        }
    }
    if cur.is_some() {
        return Err(Error::Parse { line: text.lines().count(), msg: String::from("unterminated block record") });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn third_block() -> FiniteConformalBlock {
        let g = FiniteGroupTable::cyclic(2).unwrap();
        let m = ProbVector::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        FiniteConformalBlock::flat(g, m).unwrap()
    }

    #[test]
    fn weights_at_zero_one_two() {
        let b = third_block();
        let w0 = conformal_weights(&b, 0.0).unwrap();
        assert!(abs(w0.weights()[0] - 0.5) < 1e-15);
        let w1 = conformal_weights(&b, 1.0).unwrap();
        assert!(abs(w1.weights()[0] - 1.0 / 3.0) < 1e-15);
        // (1/9)/(1/9+4/9) = 1/5
        let w2 = conformal_weights(&b, 2.0).unwrap();
        assert!(abs(w2.weights()[0] - 0.2) < 1e-15);
        assert!(abs(w2.weights()[1] - 0.8) < 1e-15);
    }

    #[test]
    fn non_finite_beta_rejected() {
        let b = third_block();
        assert!(matches!(conformal_weights(&b, f64::NAN), Err(Error::InvalidInput(_))));
        assert!(matches!(conformal_weights(&b, f64::INFINITY), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn integrate_hand_value() {
        let g = FiniteGroupTable::cyclic(2).unwrap();
        let m = ProbVector::uniform(2).unwrap();
        let b = FiniteConformalBlock::new(g, m, vec![2.0, 0.5], 2.0).unwrap();
        assert!(abs(integrate_potential(&b, 1.0).unwrap() - 1.25) < 1e-15);
        assert!(abs(integrate_potential(&b, 0.0).unwrap() - 1.0) < 1e-15);
    }

    #[test]
    fn cohomologous_hand_value() {
        let m = ProbVector::uniform(2).unwrap();
        let out = cohomologous_transform(&m, &[LN_2_, 0.0], 1.0).unwrap();
        assert!(abs(out.weights()[0] - 2.0 / 3.0) < 1e-15);
        let back = cohomologous_transform(&out, &[-LN_2_, 0.0], 1.0).unwrap();
        assert!(back.max_abs_diff(&m) < 1e-15);
    }
    const LN_2_: f64 = core::f64::consts::LN_2;

    #[test]
    fn prob_vector_tolerances() {
        assert!(ProbVector::new(vec![0.5, 0.5 + 5e-10]).is_ok());
        let p = ProbVector::new(vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!(abs(p.weights().iter().sum::<f64>() - 1.0) < 1e-15);
        assert!(ProbVector::new(vec![0.5, 0.5 + 1e-6]).is_err());
        assert!(ProbVector::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn group_axioms_detected() {
        // not associative: a "group" table with a broken row
        let mut t = FiniteGroupTable::cyclic(3).unwrap().table();
        t.swap(4, 5);
        assert!(FiniteGroupTable::from_table(3, t, 0).is_err());
        let d4 = FiniteGroupTable::dihedral(4).unwrap();
        assert_eq!(d4.order(), 8);
        // nonabelian
        let ab = (0..8).any(|x| (0..8).any(|y| d4.mul(x, y) != d4.mul(y, x)));
        assert!(ab);
    }

    #[test]
    fn unsupported_generator() {
        let sys = TruncatedProductSystem::new(vec![third_block()], 0.0).unwrap();
        let m = sys.conformal_measure(1.0).unwrap();
        let r = check_conformality(&sys, &m, 1.0, &[Generator { block: 3, element: 1 }], 1e-12);
        assert!(matches!(r, Err(Error::UnsupportedGenerator { .. })));
    }

    #[test]
    fn uniform_is_invariant_at_zero() {
        let g = FiniteGroupTable::dihedral(3).unwrap();
        let w = ProbVector::from_masses(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let blk = FiniteConformalBlock::flat(g, w).unwrap();
        let sys = TruncatedProductSystem::new(vec![blk.clone(), blk], 0.0).unwrap();
        let u = ProbVector::uniform(36).unwrap();
        let r = check_conformality(&sys, &u, 0.0, &sys.all_generators(), 1e-15).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn text_roundtrip_bit_exact() {
        let g = FiniteGroupTable::dihedral(3).unwrap();
        let w = ProbVector::from_masses(&[0.1, 0.7, 0.3, 1.1, 0.2, 0.9]).unwrap();
        let blk = FiniteConformalBlock::new(g, w, vec![1.5, 0.8, 1.0, 1.9, 0.6, 1.2], 2.0).unwrap();
        let s = write_blocks(&[blk.clone(), third_block()]);
        let back = parse_blocks(&s).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], blk);
        for (a, b) in back[0].base_measure().weights().iter().zip(blk.base_measure().weights()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn cylinder_ignores_outside() {
        let f = CylinderFunction::indicator(vec![1, 2], vec![2, 3], &[1, 2]).unwrap();
        assert_eq!(f.eval(&[0, 1, 2, 0]).unwrap(), 1.0);
        assert_eq!(f.eval(&[1, 1, 2, 1]).unwrap(), 1.0);
        assert_eq!(f.eval(&[1, 0, 2, 1]).unwrap(), 0.0);
    }
}
