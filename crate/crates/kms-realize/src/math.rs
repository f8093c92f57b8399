//! Thin wrappers over `libm` plus log-domain accumulation helpers.

pub use libm::{atan, cos, exp, expm1, fabs as abs, floor, ceil, log as ln, log1p, pow, sin, sqrt, tanh};

pub const LN_2: f64 = core::f64::consts::LN_2;
pub const PI: f64 = core::f64::consts::PI;

#[inline]
pub fn max(a: f64, b: f64) -> f64 {
    if a >= b || b.is_nan() {
        a
    } else {
        b
    }
}

#[inline]
pub fn min(a: f64, b: f64) -> f64 {
    if a <= b || b.is_nan() {
        a
    } else {
        b
    }
}

/// `ln(sum(exp(x_i)))` with a max shift. Empty input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        m = max(m, x);
    }
    if m == f64::NEG_INFINITY {
        return m;
    }
    let mut s = 0.0;
    for &x in xs {
        s += exp(x - m);
    }
    m + ln(s)
}

/// Streaming log-sum-exp accumulator; rescales when a larger term arrives.
#[derive(Clone, Copy, Debug)]
pub struct LogAcc {
    m: f64,
    s: f64,
}

impl Default for LogAcc {
    fn default() -> Self {
        Self::new()
    }
}

impl LogAcc {
    pub const fn new() -> Self {
        LogAcc {
            m: f64::NEG_INFINITY,
            s: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.m {
            self.s += exp(x - self.m);
        } else {
            self.s = self.s * exp(self.m - x) + 1.0;
            self.m = x;
        }
    }

    pub fn merge(&mut self, other: LogAcc) {
        if other.m == f64::NEG_INFINITY {
            return;
        }
        if other.m <= self.m {
            self.s += other.s * exp(other.m - self.m);
        } else {
            self.s = self.s * exp(self.m - other.m) + other.s;
            self.m = other.m;
        }
    }

    pub fn value(&self) -> f64 {
        if self.m == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.m + ln(self.s)
        }
    }
}

/// `ln(exp(a) + exp(b))`.
#[inline]
pub fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = max(a, b);
    m + log1p(exp(min(a, b) - m))
}

/// `ln(exp(a) - exp(b))` for `a >= b`; `-inf` when equal.
#[inline]
pub fn ln_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + ln(-expm1(b - a))
}

/// Natural log of `n choose k` for every k, by the multiplicative recurrence.
pub fn ln_binomial_row(n: usize) -> alloc::vec::Vec<f64> {
    let mut row = alloc::vec::Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    row.push(0.0);
    for k in 1..=n {
        acc += ln((n + 1 - k) as f64) - ln(k as f64);
        row.push(acc);
    }
    // symmetrise to kill drift
    for k in 0..=n / 2 {
        let v = row[k];
        row[n - k] = v;
    }
    row
}

/// Uniform grid of `n >= 2` points on `[lo, hi]`, endpoints exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> alloc::vec::Vec<f64> {
    let mut v = alloc::vec::Vec::with_capacity(n);
    if n == 1 {
        v.push(lo);
        return v;
    }
    let h = (hi - lo) / (n - 1) as f64;
    for i in 0..n {
        v.push(if i + 1 == n { hi } else { lo + h * i as f64 });
    }
    v
}


/// Closed real interval used for cell enclosures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Self {
        Interval { lo: min(a, b), hi: max(a, b) }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval { lo: self.lo + o.lo, hi: self.hi + o.hi }
    }

    pub fn sub(self, o: Interval) -> Interval {
        Interval { lo: self.lo - o.hi, hi: self.hi - o.lo }
    }

    pub fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let mut lo = c[0];
        let mut hi = c[0];
        for &x in &c[1..] {
            lo = min(lo, x);
            hi = max(hi, x);
        }
        Interval { lo, hi }
    }

    pub fn scale(self, k: f64) -> Interval {
        Interval::new(self.lo * k, self.hi * k)
    }

    pub fn widen(self, r: f64) -> Interval {
        Interval { lo: self.lo - r, hi: self.hi + r }
    }

    /// Largest distance from `x` to a point of the interval.
    pub fn max_dev(self, x: f64) -> f64 {
        max(abs(self.hi - x), abs(x - self.lo))
    }

    /// `sup |a - b|` over `a` in self, `b` in other.
    pub fn max_abs_diff(self, o: Interval) -> f64 {
        max(abs(self.hi - o.lo), abs(o.hi - self.lo))
    }
}
