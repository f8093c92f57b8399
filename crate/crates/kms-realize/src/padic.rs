//! Exact 2x2 integer matrices for the free subgroup `<g1, g2, h_n>` of
//! `SL(2, Z)` and its reductions to `SL(2, Z/p^N)`.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact integer matrix `(a b; c d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl Mat2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2 {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn identity() -> Self {
        Mat2::new(1, 0, 0, 1)
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.d.is_one() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2 {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self) -> Result<Mat2> {
        if !self.det().is_one() {
            return Err(Error::Domain(String::from("matrix does not have determinant 1")));
        }
        Ok(Mat2 {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        })
    }

    /// `self^n`, with negative `n` through the inverse.
    pub fn pow(&self, n: i64) -> Result<Mat2> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Mat2::identity();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq);
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn max_abs_entry(&self) -> BigInt {
        [&self.a, &self.b, &self.c, &self.d]
            .into_iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_default()
    }

    /// Entry-wise reduction into `[0, modulus)`.
    pub fn reduce(&self, modulus: u64) -> Mat2Mod {
        let m = BigInt::from(modulus);
        let r = |x: &BigInt| x.mod_floor(&m).to_u64().unwrap_or(0);
        Mat2Mod {
            modulus,
            e: [r(&self.a), r(&self.b), r(&self.c), r(&self.d)],
        }
    }

    fn to_small(&self) -> Option<[i128; 4]> {
        Some([
            self.a.to_i128()?,
            self.b.to_i128()?,
            self.c.to_i128()?,
            self.d.to_i128()?,
        ])
    }

    fn from_small(m: &[i128; 4]) -> Mat2 {
        Mat2 {
            a: m[0].into(),
            b: m[1].into(),
            c: m[2].into(),
            d: m[3].into(),
        }
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

/// Matrix with entries in `Z/modulus`, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mat2Mod {
    pub modulus: u64,
    pub e: [u64; 4],
}

impl Mat2Mod {
    pub fn identity(modulus: u64) -> Self {
        Mat2Mod {
            modulus,
            e: [1 % modulus, 0, 0, 1 % modulus],
        }
    }

    fn mm(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.modulus as u128) as u64
    }

    pub fn mul(&self, o: &Mat2Mod) -> Mat2Mod {
        let m = self.modulus;
        let [a, b, c, d] = self.e;
        let [p, q, r, s] = o.e;
        Mat2Mod {
            modulus: m,
            e: [
                (self.mm(a, p) + self.mm(b, r)) % m,
                (self.mm(a, q) + self.mm(b, s)) % m,
                (self.mm(c, p) + self.mm(d, r)) % m,
                (self.mm(c, q) + self.mm(d, s)) % m,
            ],
        }
    }

    pub fn det(&self) -> u64 {
        let m = self.modulus;
        let [a, b, c, d] = self.e;
        (self.mm(a, d) + m - self.mm(b, c)) % m
    }

    /// Inverse of a determinant-one residue matrix.
    pub fn inverse(&self) -> Mat2Mod {
        let m = self.modulus;
        let [a, b, c, d] = self.e;
        Mat2Mod {
            modulus: m,
            e: [d, (m - b) % m, (m - c) % m, a],
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat2Mod::identity(self.modulus)
    }
}

/// Named generator: `a`, `b`, `g1 = a^4`, `g2 = b^4`, or `h` with index `n`,
/// `h_n = (ab)^n ba (ab)^-n`.
pub fn generator(name: &str, n: Option<i64>) -> Result<Mat2> {
    let a = Mat2::new(1, 2, 0, 1);
    let b = Mat2::new(1, 0, 2, 1);
    match (name, n) {
        ("a", None) => Ok(a),
        ("b", None) => Ok(b),
        ("g1", None) => a.pow(4),
        ("g2", None) => b.pow(4),
        ("h", Some(n)) => {
            let ab = a.mul(&b);
            let conj = ab.pow(n)?;
            Ok(conj.mul(&b.mul(&a)).mul(&conj.inverse()?))
        }
        ("h", None) => Err(Error::invalid("generator h needs an index")),
        (other, _) => Err(Error::invalid(format!(
            "unknown generator `{other}` (expected a, b, g1, g2 or h)"
        ))),
    }
}

/// Letter of the free alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    G1,
    G2,
    H(i64),
}

impl Gen {
    pub fn matrix(self) -> Mat2 {
        // the names and indices here are always accepted
        match self {
            Gen::G1 => generator("g1", None),
            Gen::G2 => generator("g2", None),
            Gen::H(n) => generator("h", Some(n)),
        }
        .unwrap_or_else(|_| Mat2::identity())
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::G1 => write!(f, "g1"),
            Gen::G2 => write!(f, "g2"),
            Gen::H(n) => write!(f, "h{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: Gen, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    pub fn inv(self) -> Self {
        Letter {
            gen: self.gen,
            inverse: !self.inverse,
        }
    }
}

/// Word in the free alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FreeWord {
    letters: Vec<Letter>,
}

impl FreeWord {
    /// Freely reduces the input.
    pub fn new(letters: &[Letter]) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
        for &l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| w[0] != w[1].inv())
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", l.gen, if l.inverse { "^-1" } else { "" })?;
        }
        Ok(())
    }
}

/// Exact product of the letters, left to right.
pub fn eval_word(w: &FreeWord) -> Mat2 {
    let mut acc = Mat2::identity();
    for l in w.letters() {
        let m = l.gen.matrix();
        let m = if l.inverse {
            m.inverse().unwrap_or_else(|_| Mat2::identity())
        } else {
            m
        };
        acc = acc.mul(&m);
    }
    acc
}

/// Alphabet `{g1, g2, h_n : n in lo..=hi}` with inverses, inverse pairs adjacent.
pub fn alphabet(h_lo: i64, h_hi: i64) -> Vec<Letter> {
    let mut gens = vec![Gen::G1, Gen::G2];
    gens.extend((h_lo..=h_hi).map(Gen::H));
    gens.into_iter()
        .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreenessCertificate {
    pub max_len: usize,
    pub alphabet_size: usize,
    pub words_checked: u64,
    /// Words whose product left the 128-bit range and were finished in big integers.
    pub big_words: u64,
    /// Bit length of the largest entry seen.
    pub max_entry_bits: u64,
}

#[derive(Clone)]
enum Acc {
    Small([i128; 4]),
    Big(Mat2),
}

fn small_mul(x: &[i128; 4], y: &[i128; 4]) -> Option<[i128; 4]> {
    let dot = |p: i128, q: i128, r: i128, s: i128| p.checked_mul(q)?.checked_add(r.checked_mul(s)?);
    Some([
        dot(x[0], y[0], x[1], y[2])?,
        dot(x[0], y[1], x[1], y[3])?,
        dot(x[2], y[0], x[3], y[2])?,
        dot(x[2], y[1], x[3], y[3])?,
    ])
}

struct Walk<'a> {
    big: &'a [Mat2],
    small: &'a [Option<[i128; 4]>],
    max_len: usize,
    count: u64,
    big_words: u64,
    max_bits: u64,
    path: Vec<usize>,
}

impl Walk<'_> {
    fn visit(&mut self, acc: &Acc) -> core::result::Result<(), Vec<usize>> {
        self.count += 1;
        let (ident, bits) = match acc {
            Acc::Small(m) => (
                m == &[1, 0, 0, 1],
                m.iter().map(|x| 128 - x.unsigned_abs().leading_zeros() as u64).max().unwrap_or(0),
            ),
            Acc::Big(m) => {
                self.big_words += 1;
                (m.is_identity(), m.max_abs_entry().bits())
            }
        };
        self.max_bits = self.max_bits.max(bits);
        if ident {
            return Err(self.path.clone());
        }
        if self.path.len() == self.max_len {
            return Ok(());
        }
        let last = *self.path.last().unwrap_or(&usize::MAX);
        for i in 0..self.big.len() {
            if i == (last ^ 1) {
                continue;
            }
            let next = match acc {
                Acc::Small(m) => match self.small[i].as_ref().and_then(|l| small_mul(m, l)) {
                    Some(p) => Acc::Small(p),
                    None => Acc::Big(Mat2::from_small(m).mul(&self.big[i])),
                },
                Acc::Big(m) => Acc::Big(m.mul(&self.big[i])),
            };
            self.path.push(i);
            self.visit(&next)?;
            self.path.pop();
        }
        Ok(())
    }
}

fn walk_from(
    first: usize,
    big: &[Mat2],
    small: &[Option<[i128; 4]>],
    max_len: usize,
) -> core::result::Result<(u64, u64, u64), Vec<usize>> {
    let mut w = Walk {
        big,
        small,
        max_len,
        count: 0,
        big_words: 0,
        max_bits: 0,
        path: vec![first],
    };
    let start = match &small[first] {
        Some(m) => Acc::Small(*m),
        None => Acc::Big(big[first].clone()),
    };
    w.visit(&start)?;
    Ok((w.count, w.big_words, w.max_bits))
}

/// Evaluates every nonempty reduced word of length at most `max_len` over the
/// given alphabet exactly and fails on the first one equal to the identity.
/// The alphabet must list each letter next to its inverse, as [`alphabet`] does.
pub fn freeness_suite_over(letters: &[Letter], max_len: usize) -> Result<FreenessCertificate> {
    freeness_suite_threads(letters, max_len, 0)
}

/// As [`freeness_suite_over`] on at most `threads` workers (0 picks one per
/// first letter). The result does not depend on the thread count.
pub fn freeness_suite_threads(letters: &[Letter], max_len: usize, threads: usize) -> Result<FreenessCertificate> {
    if max_len > 10 {
        return Err(Error::SizeCap(format!("max_len {max_len} exceeds 10")));
    }
    if !letters.len().is_multiple_of(2) || letters.chunks(2).any(|p| p[0] != p[1].inv()) {
        return Err(Error::invalid("alphabet must list inverse pairs adjacently"));
    }
    let big: Vec<Mat2> = letters.iter().map(|l| eval_word(&FreeWord::new(&[*l]))).collect();
    let small: Vec<Option<[i128; 4]>> = big.iter().map(Mat2::to_small).collect();
    let mut cert = FreenessCertificate {
        max_len,
        alphabet_size: letters.len(),
        words_checked: 0,
        big_words: 0,
        max_entry_bits: 0,
    };
    if max_len == 0 {
        return Ok(cert);
    }
    let results = run_first_letters(&big, &small, max_len, threads);
    for r in results {
        match r {
            Ok((n, b, bits)) => {
                cert.words_checked += n;
                cert.big_words += b;
                cert.max_entry_bits = cert.max_entry_bits.max(bits);
            }
            Err(path) if path.is_empty() => {
                return Err(Error::Numeric(String::from("a word enumeration worker panicked")));
            }
            Err(path) => {
                let w = FreeWord::new(&path.iter().map(|&i| letters[i]).collect::<Vec<_>>());
                return Err(Error::FreenessViolation(format!("reduced word {w} evaluates to the identity")));
            }
        }
    }
    Ok(cert)
}

type WalkResult = core::result::Result<(u64, u64, u64), Vec<usize>>;

#[cfg(feature = "std")]
fn run_first_letters(big: &[Mat2], small: &[Option<[i128; 4]>], max_len: usize, threads: usize) -> Vec<WalkResult> {
    let n = big.len();
    let workers = if threads == 0 { n } else { threads.min(n) }.max(1);
    let mut out: Vec<Option<WalkResult>> = (0..n).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w..n)
                        .step_by(workers)
                        .map(|i| (i, walk_from(i, big, small, max_len)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            // a panicking worker leaves its letters unset and is reported below
            if let Ok(v) = h.join() {
                for (i, r) in v {
                    out[i] = Some(r);
                }
            }
        }
    });
    out.into_iter().map(|r| r.unwrap_or_else(|| Err(Vec::new()))).collect()
}

#[cfg(not(feature = "std"))]
fn run_first_letters(big: &[Mat2], small: &[Option<[i128; 4]>], max_len: usize, _threads: usize) -> Vec<WalkResult> {
    (0..big.len()).map(|i| walk_from(i, big, small, max_len)).collect()
}

/// [`freeness_suite_over`] on `{g1, g2, h_-2..h_2}`.
pub fn freeness_suite(max_len: usize) -> Result<FreenessCertificate> {
    freeness_suite_over(&alphabet(-2, 2), max_len)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClosureReport {
    pub p: u64,
    pub level: u32,
    pub order: u64,
    pub expected_order: u64,
    pub is_full: bool,
}

fn is_odd_prime(p: u64) -> bool {
    p > 2 && !p.is_multiple_of(2) && (3..).step_by(2).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// `|SL(2, Z/p^N)| = p^{3N} (1 - p^-2)`.
pub fn sl2_order(p: u64, level: u32) -> Option<u64> {
    p.checked_pow(3 * level - 2)?.checked_mul(p * p - 1)
}

const CLOSURE_CAP: u64 = 10_000_000;

fn closure_set(p: u64, level: u32, gens: &[Mat2]) -> Result<(u64, BTreeSet<Mat2Mod>)> {
    if !is_odd_prime(p) {
        return Err(Error::invalid(format!("{p} is not an odd prime")));
    }
    if level == 0 {
        return Err(Error::invalid("level must be at least 1"));
    }
    match p.checked_pow(3 * level) {
        Some(v) if v <= CLOSURE_CAP => {}
        _ => {
            return Err(Error::SizeCap(format!(
                "{p}^{} exceeds the closure cap {CLOSURE_CAP}",
                3 * level
            )))
        }
    }
    let modulus = p.pow(level);
    let mut step = Vec::new();
    for g in gens {
        if !g.det().is_one() {
            return Err(Error::Domain(format!("generator {g} is not in SL(2, Z)")));
        }
        let r = g.reduce(modulus);
        step.push(r);
        step.push(r.inverse());
    }
    let id = Mat2Mod::identity(modulus);
    let mut seen = BTreeSet::new();
    seen.insert(id);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for s in &step {
            let y = x.mul(s);
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    Ok((modulus, seen))
}

/// Order of the subgroup generated by the reductions of `gens` mod `p^level`.
pub fn subgroup_closure_mod(p: u64, level: u32, gens: &[Mat2]) -> Result<ClosureReport> {
    let (_, seen) = closure_set(p, level, gens)?;
    let order = seen.len() as u64;
    let expected_order = sl2_order(p, level).ok_or_else(|| Error::SizeCap(String::from("group order overflows")))?;
    if expected_order % order != 0 {
        return Err(Error::DensityDefect(format!(
            "closure order {order} does not divide {expected_order}"
        )));
    }
    Ok(ClosureReport {
        p,
        level,
        order,
        expected_order,
        is_full: order == expected_order,
    })
}

/// Elements of the closure in sorted order.
pub fn enumerate_closure_mod(p: u64, level: u32, gens: &[Mat2]) -> Result<Vec<Mat2Mod>> {
    Ok(closure_set(p, level, gens)?.1.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn named_generators() {
        assert_eq!(generator("g1", None).unwrap(), Mat2::new(1, 8, 0, 1));
        assert_eq!(generator("g2", None).unwrap(), Mat2::new(1, 0, 8, 1));
        assert_eq!(generator("h", Some(0)).unwrap(), Mat2::new(1, 2, 2, 5));
        let ab = generator("a", None).unwrap().mul(&generator("b", None).unwrap());
        assert_eq!(ab, Mat2::new(5, 2, 2, 1));
        assert!(generator("h", None).is_err());
        assert!(generator("c", None).is_err());
        for n in -4..=4 {
            assert!(generator("h", Some(n)).unwrap().det().is_one());
        }
    }

    #[test]
    fn words() {
        assert!(eval_word(&FreeWord::default()).is_identity());
        let g1 = Letter::new(Gen::G1, false);
        let g2 = Letter::new(Gen::G2, false);
        assert_eq!(eval_word(&FreeWord::new(&[g1, g2])), Mat2::new(65, 8, 8, 1));
        let w = FreeWord::new(&[g1, g2, g2.inv(), g1.inv()]);
        assert!(w.is_empty());
    }

    #[test]
    fn short_suites() {
        let c = freeness_suite(1).unwrap();
        assert_eq!(c.words_checked, 14);
        let c = freeness_suite_over(&alphabet(0, -1), 4).unwrap();
        assert_eq!(c.words_checked, 4 + 12 + 36 + 108);
        let c = freeness_suite_over(&alphabet(-1, 1), 6).unwrap();
        let expect: u64 = (1..=6).map(|l| 10 * 9u64.pow(l - 1)).sum();
        assert_eq!(c.words_checked, expect);
    }

    #[test]
    fn non_free_alphabet_is_caught() {
        // a duplicated letter makes g1 g1^-1 look reduced by index
        let a = Letter::new(Gen::G1, false);
        let letters = [a, a.inv(), a, a.inv()];
        assert!(matches!(freeness_suite_over(&letters, 2), Err(Error::FreenessViolation(_))));
    }

    #[test]
    fn closures() {
        let gens = [generator("g1", None).unwrap(), generator("g2", None).unwrap()];
        let r = subgroup_closure_mod(3, 1, &gens).unwrap();
        assert_eq!((r.order, r.expected_order, r.is_full), (24, 24, true));
        let r = subgroup_closure_mod(3, 2, &gens).unwrap();
        assert_eq!((r.order, r.is_full), (648, true));
        assert!(subgroup_closure_mod(2, 1, &gens).is_err());
        assert!(subgroup_closure_mod(9, 1, &gens).is_err());
        assert!(matches!(subgroup_closure_mod(3, 6, &gens), Err(Error::SizeCap(_))));
        let r = subgroup_closure_mod(5, 1, &gens[..1]).unwrap();
        assert_eq!(r.order, 5);
        assert!(!r.is_full);
    }

    fn letter_strategy() -> impl Strategy<Value = Letter> {
        (0usize..14).prop_map(|i| alphabet(-2, 2)[i])
    }

    proptest! {
        #[test]
        fn reduction_is_a_homomorphism(ls in proptest::collection::vec(letter_strategy(), 0..12), m in prop::sample::select(vec![3u64, 9, 25, 49, 27])) {
            let w = FreeWord::new(&ls);
            prop_assert!(w.is_reduced());
            let exact = eval_word(&w);
            prop_assert!(exact.det().is_one());
            let mut acc = Mat2Mod::identity(m);
            for l in w.letters() {
                let single = eval_word(&FreeWord::new(&[*l])).reduce(m);
                acc = acc.mul(&single);
            }
            prop_assert_eq!(exact.reduce(m), acc);
            prop_assert_eq!(acc.det(), 1 % m);
        }

        #[test]
        fn nonempty_reduced_words_are_nontrivial(ls in proptest::collection::vec(letter_strategy(), 1..10)) {
            let w = FreeWord::new(&ls);
            prop_assume!(!w.is_empty());
            prop_assert!(!eval_word(&w).is_identity());
        }
    }
}
