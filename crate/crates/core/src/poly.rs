//! Sparse multivariate polynomials over the rationals.
//!
//! Variables are ordered as parameters `T1..Tm` followed by space
//! variables `x1..xn`; exponent vectors have length `m + n`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::matrix::Matrix;
use crate::rat::{common_denominator, fmt_rat, to_f64, Rat};
use crate::univariate::UniPoly;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    num_params: usize,
    num_vars: usize,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Polynomial {
    pub fn zero(num_params: usize, num_vars: usize) -> Self {
        Polynomial {
            num_params,
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_params: usize, num_vars: usize, c: Rat) -> Self {
        let mut p = Self::zero(num_params, num_vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; num_params + num_vars], c);
        }
        p
    }

    fn unit(num_params: usize, num_vars: usize, index: usize) -> Self {
        let mut e = vec![0; num_params + num_vars];
        e[index] = 1;
        let mut p = Self::zero(num_params, num_vars);
        p.terms.insert(e, Rat::one());
        p
    }

    /// The parameter `T_{k+1}` (zero-based `k`).
    pub fn param(num_params: usize, num_vars: usize, k: usize) -> Self {
        assert!(k < num_params);
        Self::unit(num_params, num_vars, k)
    }

    /// The space variable `x_{k+1}` (zero-based `k`).
    pub fn var(num_params: usize, num_vars: usize, k: usize) -> Self {
        assert!(k < num_vars);
        Self::unit(num_params, num_vars, num_params + k)
    }

    /// Builds from `(exponents, coefficient)` pairs, merging duplicates.
    pub fn from_terms(
        num_params: usize,
        num_vars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Rat)>,
    ) -> Self {
        let mut p = Self::zero(num_params, num_vars);
        for (e, c) in terms {
            assert_eq!(e.len(), num_params + num_vars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// True if no space variable occurs.
    pub fn is_param_only(&self) -> bool {
        self.terms
            .keys()
            .all(|e| e[self.num_params..].iter().all(|&k| k == 0))
    }

    pub fn uses_params(&self) -> bool {
        self.terms
            .keys()
            .any(|e| e[..self.num_params].iter().any(|&k| k > 0))
    }

    pub fn neg(&self) -> Self {
        let mut p = self.clone();
        for c in p.terms.values_mut() {
            *c = -c.clone();
        }
        p
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_shape(other);
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_shape(other);
        let mut p = Self::zero(self.num_params, self.num_vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.num_params, self.num_vars, Rat::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale(&self, k: &Rat) -> Self {
        if k.is_zero() {
            return Self::zero(self.num_params, self.num_vars);
        }
        let mut p = self.clone();
        for c in p.terms.values_mut() {
            *c *= k;
        }
        p
    }

    fn check_shape(&self, other: &Self) {
        assert!(
            self.num_params == other.num_params && self.num_vars == other.num_vars,
            "polynomial shape mismatch"
        );
    }

    /// Exact evaluation at parameters `t` and point `x`.
    pub fn eval(&self, t: &[Rat], x: &[Rat]) -> Rat {
        assert_eq!(t.len(), self.num_params);
        assert_eq!(x.len(), self.num_vars);
        let vals: Vec<&Rat> = t.iter().chain(x.iter()).collect();
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (v, &k) in vals.iter().zip(e) {
                if k > 0 {
                    term *= num_traits::pow((*v).clone(), k as usize);
                }
            }
            acc += term;
        }
        acc
    }

    /// Substitutes the parameters, leaving a polynomial in the space variables.
    pub fn specialize(&self, t: &[Rat]) -> Polynomial {
        assert_eq!(t.len(), self.num_params);
        let mut p = Self::zero(0, self.num_vars);
        for (e, c) in &self.terms {
            let mut coeff = c.clone();
            for (v, &k) in t.iter().zip(&e[..self.num_params]) {
                if k > 0 {
                    coeff *= num_traits::pow(v.clone(), k as usize);
                }
            }
            p.add_term(e[self.num_params..].to_vec(), coeff);
        }
        p
    }

    /// Reinterprets a polynomial over the parameters only as one with
    /// `num_vars` space variables (all unused).
    pub fn with_vars(&self, num_vars: usize) -> Polynomial {
        assert!(self.is_param_only());
        Self::from_terms(
            self.num_params,
            num_vars,
            self.terms.iter().map(|(e, c)| {
                let mut e2 = e[..self.num_params].to_vec();
                e2.extend(std::iter::repeat_n(0, num_vars));
                (e2, c.clone())
            }),
        )
    }

    /// Drops the (unused) space variables of a parameter-only polynomial.
    pub fn params_only(&self) -> Polynomial {
        assert!(self.is_param_only());
        Self::from_terms(
            self.num_params,
            0,
            self.terms
                .iter()
                .map(|(e, c)| (e[..self.num_params].to_vec(), c.clone())),
        )
    }

    /// Substitutes `x = M y` in the space variables.
    pub fn compose_linear(&self, m: &Matrix) -> Polynomial {
        let n = self.num_vars;
        assert!(m.rows() == n && m.cols() == n);
        let images: Vec<Polynomial> = (0..n)
            .map(|i| {
                let mut p = Self::zero(self.num_params, n);
                for j in 0..n {
                    p = p.add(&Self::var(self.num_params, n, j).scale(&m[(i, j)]));
                }
                p
            })
            .collect();
        let mut out = Self::zero(self.num_params, n);
        for (e, c) in &self.terms {
            let mut term = Self::constant(self.num_params, n, c.clone());
            let mut pe = e.clone();
            for k in &mut pe[self.num_params..] {
                *k = 0;
            }
            term = term.mul(&Self::from_terms(self.num_params, n, [(pe, Rat::one())]));
            for (i, &k) in e[self.num_params..].iter().enumerate() {
                if k > 0 {
                    term = term.mul(&images[i].pow(k));
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Restriction of a parameter-free polynomial to `x = a + t d`.
    pub fn restrict_to_line(&self, a: &[Rat], d: &[Rat]) -> UniPoly {
        assert_eq!(self.num_params, 0, "specialize parameters first");
        assert!(a.len() == self.num_vars && d.len() == self.num_vars);
        let mut cache: Vec<Vec<UniPoly>> = vec![vec![UniPoly::constant(Rat::one())]; self.num_vars];
        let mut out = UniPoly::zero();
        for (e, c) in &self.terms {
            let mut term = UniPoly::constant(c.clone());
            for (i, &k) in e.iter().enumerate() {
                let k = k as usize;
                if k == 0 {
                    continue;
                }
                while cache[i].len() <= k {
                    let next = cache[i]
                        .last()
                        .unwrap()
                        .mul(&UniPoly::linear(a[i].clone(), d[i].clone()));
                    cache[i].push(next);
                }
                term = term.mul(&cache[i][k]);
            }
            out = out.add(&term);
        }
        out
    }
}

/// Variable naming shared by the printer and the parser.
pub fn variable_name(num_params: usize, index: usize) -> String {
    if index < num_params {
        format!("T{}", index + 1)
    } else {
        format!("x{}", index - num_params + 1)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest total degree first; within a degree, variables before
        // parameters, each in descending lexicographic order.
        let m = self.num_params;
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(ea, _), (eb, _)| {
            let da: u32 = ea.iter().sum();
            let db: u32 = eb.iter().sum();
            db.cmp(&da)
                .then_with(|| eb[m..].cmp(&ea[m..]))
                .then_with(|| eb[..m].cmp(&ea[..m]))
        });
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mut factors: Vec<String> = Vec::new();
            for (idx, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(variable_name(self.num_params, idx)),
                    _ => factors.push(format!("{}^{}", variable_name(self.num_params, idx), k)),
                }
            }
            if factors.is_empty() {
                write!(f, "{}", fmt_rat(&mag))?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_rat(&mag), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

/// A parameter-free polynomial prepared for fast exact sign evaluation and
/// interval bounds.
#[derive(Clone, Debug)]
pub struct FiberPoly {
    poly: Polynomial,
    degree: u32,
    /// Coefficients scaled by a positive integer so they are all integral.
    int_terms: Vec<(Vec<u32>, BigInt)>,
    small_terms: Option<Vec<(Vec<u32>, i128)>>,
    float_terms: Vec<(Vec<u32>, f64)>,
}

impl FiberPoly {
    pub fn new(poly: Polynomial) -> Self {
        assert_eq!(poly.num_params(), 0);
        let den = common_denominator(poly.terms.values());
        let int_terms: Vec<(Vec<u32>, BigInt)> = poly
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), (c * Rat::from_integer(den.clone())).to_integer()))
            .collect();
        let small_terms = int_terms
            .iter()
            .map(|(e, c)| c.to_i128().map(|v| (e.clone(), v)))
            .collect();
        let float_terms = poly
            .terms
            .iter()
            .map(|(e, c)| (e.clone(), to_f64(c)))
            .collect();
        FiberPoly {
            degree: poly.total_degree(),
            poly,
            int_terms,
            small_terms,
            float_terms,
        }
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn num_vars(&self) -> usize {
        self.poly.num_vars()
    }

    /// Sign at the point `nums / den` (`den > 0`).
    pub fn sign_scaled(&self, nums: &[i64], den: i64) -> Ordering {
        debug_assert!(den > 0);
        if let Some(s) = self.sign_scaled_i128(nums, den) {
            return s;
        }
        let big: Vec<BigInt> = nums.iter().map(|&v| BigInt::from(v)).collect();
        self.sign_scaled_big(&big, &BigInt::from(den))
    }

    fn sign_scaled_i128(&self, nums: &[i64], den: i64) -> Option<Ordering> {
        let terms = self.small_terms.as_ref()?;
        let d = self.degree as usize;
        let mut den_pows = [0i128; 17];
        if d >= den_pows.len() {
            return None;
        }
        den_pows[0] = 1;
        for k in 1..=d {
            den_pows[k] = den_pows[k - 1].checked_mul(den as i128)?;
        }
        let mut acc: i128 = 0;
        for (e, c) in terms {
            let mut term = *c;
            let mut used = 0u32;
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                used += k;
                let base = nums[i] as i128;
                for _ in 0..k {
                    term = term.checked_mul(base)?;
                }
            }
            term = term.checked_mul(den_pows[(self.degree - used) as usize])?;
            acc = acc.checked_add(term)?;
        }
        Some(acc.cmp(&0))
    }

    /// Sign at `nums / den` with arbitrary-precision integers.
    pub fn sign_scaled_big(&self, nums: &[BigInt], den: &BigInt) -> Ordering {
        let d = self.degree as usize;
        let mut den_pows = vec![BigInt::one(); d + 1];
        for k in 1..=d {
            den_pows[k] = &den_pows[k - 1] * den;
        }
        let mut acc = BigInt::zero();
        for (e, c) in &self.int_terms {
            let mut term = c.clone();
            let mut used = 0u32;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    used += k;
                    term *= num_traits::pow(nums[i].clone(), k as usize);
                }
            }
            term *= &den_pows[(self.degree - used) as usize];
            acc += term;
        }
        acc.cmp(&BigInt::zero())
    }

    /// Exact sign at a rational point.
    pub fn sign_at(&self, x: &[Rat]) -> Ordering {
        let den = common_denominator(x.iter());
        let nums: Vec<BigInt> = x
            .iter()
            .map(|v| (v * Rat::from_integer(den.clone())).to_integer())
            .collect();
        if let (Some(d), Some(small)) = (
            den.to_i64(),
            nums.iter().map(|v| v.to_i64()).collect::<Option<Vec<i64>>>(),
        ) {
            return self.sign_scaled(&small, d);
        }
        self.sign_scaled_big(&nums, &den)
    }

    /// Conservative enclosure of the polynomial over a box.
    pub fn bound_on_box(&self, boxes: &[crate::interval::Interval]) -> crate::interval::Interval {
        crate::interval::eval_terms(&self.float_terms, boxes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn disk() -> Polynomial {
        let x1 = Polynomial::var(1, 2, 0);
        let x2 = Polynomial::var(1, 2, 1);
        let t = Polynomial::param(1, 2, 0);
        x1.pow(2).add(&x2.pow(2)).sub(&t.pow(2))
    }

    #[test]
    fn prints_in_parser_syntax() {
        assert_eq!(disk().to_string(), "x1^2 + x2^2 - T1^2");
        let p = Polynomial::var(0, 2, 0).scale(&rat(-3, 2)).add(&Polynomial::constant(0, 2, int(1)));
        assert_eq!(p.to_string(), "-3/2*x1 + 1");
    }

    #[test]
    fn specialize_and_evaluate() {
        let f = disk().specialize(&[int(2)]);
        assert_eq!(f.eval(&[], &[int(1), int(1)]), int(-2));
        assert_eq!(disk().eval(&[int(2)], &[int(2), int(1)]), int(1));
    }

    #[test]
    fn fast_sign_agrees_with_exact_evaluation() {
        let f = FiberPoly::new(disk().specialize(&[rat(7, 3)]));
        for (a, b, d) in [(1i64, 1i64, 1i64), (7, 0, 3), (-5, 9, 4), (3, -3, 2)] {
            let x = [rat(a, d), rat(b, d)];
            let exact = f.poly().eval(&[], &x).cmp(&Rat::zero());
            assert_eq!(f.sign_scaled(&[a, b], d), exact);
            assert_eq!(f.sign_at(&x), exact);
        }
    }

    #[test]
    fn line_restriction_matches_pointwise() {
        let f = disk().specialize(&[int(2)]);
        let u = f.restrict_to_line(&[int(0), int(3)], &[int(1), int(0)]);
        assert_eq!(u, UniPoly::from_i64(&[5, 0, 1]));
        let a = [rat(1, 3), rat(-2, 5)];
        let d = [rat(2, 7), int(1)];
        let u = f.restrict_to_line(&a, &d);
        for t in [int(0), rat(3, 4), int(-5)] {
            let x: Vec<Rat> = a.iter().zip(&d).map(|(ai, di)| ai + di * &t).collect();
            assert_eq!(u.eval(&t), f.eval(&[], &x));
        }
    }

    #[test]
    fn compose_linear_substitutes() {
        let f = disk();
        let m = Matrix::from_rows(vec![vec![int(2), int(1)], vec![int(0), int(3)]]);
        let g = f.compose_linear(&m);
        let y = [rat(1, 2), int(-1)];
        let x = m.mul_vec(&y);
        assert_eq!(g.eval(&[int(5)], &y), f.eval(&[int(5)], &x));
    }
}
