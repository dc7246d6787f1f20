//! Univariate rational polynomials, Sturm chains and real root isolation.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::rat::{fmt_rat, to_f64, Rat};

/// Dense univariate polynomial, coefficients from the constant term up.
/// Trailing zeros are never stored, so the zero polynomial is empty.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        Self::new(vec![c])
    }

    /// `a + b t`
    pub fn linear(a: Rat, b: Rat) -> Self {
        Self::new(vec![a, b])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| crate::rat::int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn eval(&self, t: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn sign_at(&self, t: &Rat) -> Ordering {
        self.eval(t).cmp(&Rat::zero())
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + to_f64(c))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rat::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn scale(&self, k: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Divides by the absolute value of the leading coefficient; keeps signs.
    pub fn normalized(&self) -> Self {
        match self.leading() {
            Some(lc) => self.scale(&(Rat::one() / lc.abs())),
            None => self.clone(),
        }
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lc) => self.scale(&(Rat::one() / lc)),
            None => self.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Rat::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Self::new(out)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lc = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Rat::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = &rem[k + dd] / &lc;
            if q.is_zero() {
                continue;
            }
            for (j, c) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &q * c;
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r.normalized();
        }
        a.monic()
    }

    /// `p / gcd(p, p')`, which has the same distinct roots with multiplicity one.
    pub fn squarefree(&self) -> Self {
        if self.degree().unwrap_or(0) <= 1 {
            return self.normalized();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.normalized();
        }
        self.div_rem(&g).0.normalized()
    }

    /// Strict upper bound on the absolute value of every real root.
    pub fn root_bound(&self) -> Rat {
        let Some(lc) = self.leading() else {
            return Rat::one();
        };
        let lc = lc.abs();
        let m = self.coeffs[..self.coeffs.len() - 1]
            .iter()
            .map(|c| c.abs() / &lc)
            .max()
            .unwrap_or_else(Rat::zero);
        m + Rat::from_integer(2.into())
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => fmt_rat(c),
                1 => format!("{}*t", fmt_rat(c)),
                _ => format!("{}*t^{}", fmt_rat(c), i),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Signed remainder sequence of a squarefree polynomial.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<UniPoly>,
}

impl SturmChain {
    /// `p` should be squarefree; the last element is then a nonzero constant.
    pub fn new(p: &UniPoly) -> Self {
        let mut chain = vec![p.clone()];
        if p.degree().unwrap_or(0) == 0 {
            return SturmChain { chain };
        }
        chain.push(p.derivative().normalized());
        loop {
            let n = chain.len();
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(r.neg().normalized());
        }
        SturmChain { chain }
    }

    pub fn polys(&self) -> &[UniPoly] {
        &self.chain
    }

    pub fn variations(&self, t: &Rat) -> usize {
        let mut count = 0;
        let mut last = Ordering::Equal;
        for p in &self.chain {
            let s = p.sign_at(t);
            if s == Ordering::Equal {
                continue;
            }
            if last != Ordering::Equal && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of distinct roots in the half-open interval `(a, b]`.
    pub fn count_roots(&self, a: &Rat, b: &Rat) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// A real root of a squarefree polynomial, either known exactly or pinned
/// inside an open interval `(lo, hi)` whose endpoints are not roots and
/// which contains no other root.
#[derive(Clone, Debug)]
pub struct RealRoot {
    poly: Arc<UniPoly>,
    lo: Rat,
    hi: Rat,
    exact: Option<Rat>,
}

impl RealRoot {
    pub fn exact(poly: Arc<UniPoly>, value: Rat) -> Self {
        RealRoot {
            poly,
            lo: value.clone(),
            hi: value.clone(),
            exact: Some(value),
        }
    }

    pub fn isolated(poly: Arc<UniPoly>, lo: Rat, hi: Rat) -> Self {
        debug_assert!(lo < hi);
        RealRoot {
            poly,
            lo,
            hi,
            exact: None,
        }
    }

    pub fn poly(&self) -> &UniPoly {
        &self.poly
    }

    pub fn lo(&self) -> &Rat {
        &self.lo
    }

    pub fn hi(&self) -> &Rat {
        &self.hi
    }

    pub fn exact_value(&self) -> Option<&Rat> {
        self.exact.as_ref()
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn approx(&self) -> f64 {
        match &self.exact {
            Some(v) => to_f64(v),
            None => (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0,
        }
    }

    /// Compares the root with a rational, shrinking the interval as a side effect.
    pub fn cmp_rat(&mut self, r: &Rat) -> Ordering {
        if let Some(v) = &self.exact {
            return v.cmp(r);
        }
        if r <= &self.lo {
            return Ordering::Greater;
        }
        if r >= &self.hi {
            return Ordering::Less;
        }
        let s = self.poly.sign_at(r);
        if s == Ordering::Equal {
            self.exact = Some(r.clone());
            self.lo = r.clone();
            self.hi = r.clone();
            return Ordering::Equal;
        }
        if s == self.poly.sign_at(&self.lo) {
            self.lo = r.clone();
            Ordering::Greater
        } else {
            self.hi = r.clone();
            Ordering::Less
        }
    }

    /// Halves the isolating interval.
    pub fn bisect(&mut self) {
        if self.exact.is_none() {
            let mid = (&self.lo + &self.hi) / Rat::from_integer(2.into());
            self.cmp_rat(&mid);
        }
    }

    pub fn refine_to(&mut self, width: &Rat) {
        while self.exact.is_none() && &self.width() > width {
            self.bisect();
        }
    }

    /// Exact comparison of two real algebraic numbers.
    pub fn cmp_root(&mut self, other: &mut RealRoot) -> Ordering {
        if let Some(v) = other.exact.clone() {
            return self.cmp_rat(&v);
        }
        if let Some(v) = self.exact.clone() {
            return other.cmp_rat(&v).reverse();
        }
        if self.hi <= other.lo {
            return Ordering::Less;
        }
        if other.hi <= self.lo {
            return Ordering::Greater;
        }
        // Overlapping intervals: equal iff the common factor changes sign on
        // the intersection. Its endpoints are non-roots of one of the two
        // polynomials, hence of the gcd.
        let g = self.poly.gcd(&other.poly);
        if g.degree().unwrap_or(0) >= 1 {
            let l = if self.lo > other.lo { &self.lo } else { &other.lo };
            let u = if self.hi < other.hi { &self.hi } else { &other.hi };
            let sl = g.sign_at(l);
            let su = g.sign_at(u);
            if sl != su && sl != Ordering::Equal && su != Ordering::Equal {
                return Ordering::Equal;
            }
        }
        loop {
            if self.width() >= other.width() {
                self.bisect();
            } else {
                other.bisect();
            }
            if self.exact.is_some() || other.exact.is_some() {
                return self.cmp_root(other);
            }
            if self.hi <= other.lo {
                return Ordering::Less;
            }
            if other.hi <= self.lo {
                return Ordering::Greater;
            }
        }
    }
}

/// Isolates every distinct real root of `p`. Roots come back sorted; each
/// is exact when it was hit by exact division, otherwise an open isolating
/// interval certified by Sturm counts.
pub fn isolate_roots(p: &UniPoly) -> Vec<RealRoot> {
    let q = Arc::new(p.squarefree());
    match q.degree() {
        None | Some(0) => return Vec::new(),
        Some(1) => {
            let c = &q.coeffs()[0];
            let b = &q.coeffs()[1];
            return vec![RealRoot::exact(q.clone(), -(c / b))];
        }
        Some(2) => {
            if let Some(roots) = rational_quadratic_roots(&q) {
                return roots.into_iter().map(|r| RealRoot::exact(q.clone(), r)).collect();
            }
        }
        _ => {}
    }
    let chain = SturmChain::new(&q);
    let b = q.root_bound();
    let a = -b.clone();
    let mut out = Vec::new();
    let total = chain.count_roots(&a, &b);
    isolate_in(&q, &chain, a, b, total, &mut out);
    out
}

fn rational_quadratic_roots(q: &UniPoly) -> Option<Vec<Rat>> {
    let (c, b, a) = (&q.coeffs()[0], &q.coeffs()[1], &q.coeffs()[2]);
    let disc = b * b - Rat::from_integer(4.into()) * a * c;
    if disc.is_negative() {
        return Some(Vec::new());
    }
    let root = rational_sqrt(&disc)?;
    let two_a = Rat::from_integer(2.into()) * a;
    let mut r = vec![(-b - &root) / &two_a, (-b + &root) / &two_a];
    r.sort();
    r.dedup();
    Some(r)
}

fn rational_sqrt(r: &Rat) -> Option<Rat> {
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rat::new(n, d))
}

fn isolate_in(
    q: &Arc<UniPoly>,
    chain: &SturmChain,
    a: Rat,
    b: Rat,
    count: usize,
    out: &mut Vec<RealRoot>,
) {
    if count == 0 {
        return;
    }
    if count == 1 {
        out.push(RealRoot::isolated(q.clone(), a, b));
        return;
    }
    let mid = (&a + &b) / Rat::from_integer(2.into());
    if q.sign_at(&mid) == Ordering::Equal {
        // Shrink a window around the exact root until it holds nothing else.
        let mut half = (&b - &a) / Rat::from_integer(4.into());
        loop {
            let l = &mid - &half;
            let u = &mid + &half;
            if q.sign_at(&l) != Ordering::Equal
                && q.sign_at(&u) != Ordering::Equal
                && chain.count_roots(&l, &u) == 1
            {
                let left = chain.count_roots(&a, &l);
                let right = chain.count_roots(&u, &b);
                isolate_in(q, chain, a, l, left, out);
                out.push(RealRoot::exact(q.clone(), mid));
                isolate_in(q, chain, u, b, right, out);
                return;
            }
            half /= Rat::from_integer(2.into());
        }
    }
    let left = chain.count_roots(&a, &mid);
    let right = count - left;
    isolate_in(q, chain, a, mid.clone(), left, out);
    isolate_in(q, chain, mid, b, right, out);
}
