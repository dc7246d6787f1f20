//! Outward-padded floating point interval arithmetic, used only to prune
//! regions that are certainly inside or outside a fiber. Exact predicates
//! always have the last word.

use std::ops::{Add, Mul};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Three-valued truth for formulas evaluated over boxes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    False,
    True,
    Unknown,
}

impl Tri {
    pub fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::False, _) | (_, Tri::False) => Tri::False,
            (Tri::True, Tri::True) => Tri::True,
            _ => Tri::Unknown,
        }
    }

    pub fn or(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::True, _) | (_, Tri::True) => Tri::True,
            (Tri::False, Tri::False) => Tri::False,
            _ => Tri::Unknown,
        }
    }
}

const REL_PAD: f64 = 1e-9;

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || (lo.is_nan() || hi.is_nan()));
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }.padded()
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn magnitude(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Widens by a relative margin that dominates accumulated rounding.
    pub fn padded(self) -> Self {
        let m = self.magnitude();
        let pad = m * REL_PAD + f64::MIN_POSITIVE;
        Interval {
            lo: self.lo - pad,
            hi: self.hi + pad,
        }
    }

    pub fn powi(self, k: u32) -> Self {
        if k == 0 {
            return Interval::new(1.0, 1.0);
        }
        let a = self.lo.powi(k as i32);
        let b = self.hi.powi(k as i32);
        if k.is_multiple_of(2) && self.contains_zero() {
            Interval::new(0.0, a.max(b))
        } else {
            Interval::new(a.min(b), a.max(b))
        }
    }

    pub fn scale(self, c: f64) -> Self {
        let a = self.lo * c;
        let b = self.hi * c;
        Interval::new(a.min(b), a.max(b))
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }
}

/// Evaluates `sum c * x^e` over a box, padding the result.
pub fn eval_terms(terms: &[(Vec<u32>, f64)], boxes: &[Interval]) -> Interval {
    let mut acc = Interval::new(0.0, 0.0);
    for (e, c) in terms {
        let mut term = Interval::new(*c, *c);
        for (b, &k) in boxes.iter().zip(e) {
            if k > 0 {
                term = term * b.powi(k);
            }
        }
        acc = acc + term;
    }
    // Rounding errors scale with the sum of term magnitudes, not the result.
    let scale = terms
        .iter()
        .map(|(e, c)| {
            boxes
                .iter()
                .zip(e)
                .fold(c.abs(), |m, (b, &k)| m * b.magnitude().powi(k as i32))
        })
        .sum::<f64>();
    let pad = scale * REL_PAD + f64::MIN_POSITIVE;
    Interval::new(acc.lo - pad, acc.hi + pad)
}

/// Image of a box under `x = M y` where `M` is given in floating point.
pub fn linear_image(m: &[Vec<f64>], ys: &[Interval]) -> Vec<Interval> {
    m.iter()
        .map(|row| {
            let mut acc = Interval::new(0.0, 0.0);
            let mut scale = 0.0f64;
            for (&c, y) in row.iter().zip(ys) {
                acc = acc + y.scale(c);
                scale += c.abs() * y.magnitude();
            }
            // Pad by the term magnitudes so cancellation cannot hide error.
            let pad = (scale + acc.magnitude()) * REL_PAD + f64::MIN_POSITIVE;
            Interval::new(acc.lo - pad, acc.hi + pad)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_powers_straddling_zero() {
        let i = Interval::new(-2.0, 1.0).powi(2);
        assert_eq!((i.lo, i.hi), (0.0, 4.0));
        let o = Interval::new(-2.0, 1.0).powi(3);
        assert_eq!((o.lo, o.hi), (-8.0, 1.0));
    }

    #[test]
    fn polynomial_enclosure_contains_samples() {
        // x^2 + y^2 - 4 over [0.5,1] x [-1,3]
        let terms = vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], -4.0)];
        let b = [Interval::new(0.5, 1.0), Interval::new(-1.0, 3.0)];
        let r = eval_terms(&terms, &b);
        for &(x, y) in &[(0.5, 0.0), (1.0, 3.0), (0.7, -1.0)] {
            let v: f64 = x * x + y * y - 4.0;
            assert!(r.lo <= v && v <= r.hi);
        }
    }

    #[test]
    fn tri_logic() {
        assert_eq!(Tri::True.and(Tri::Unknown), Tri::Unknown);
        assert_eq!(Tri::False.and(Tri::Unknown), Tri::False);
        assert_eq!(Tri::True.or(Tri::Unknown), Tri::True);
        assert_eq!(Tri::False.or(Tri::False), Tri::False);
    }
}
