//! Exact lattice point counts in fibers.
//!
//! The lattice is rewritten in a triangular basis so that fixing the
//! coefficients level by level fixes the coordinates one at a time, with
//! exact integer ranges per level. Subtrees whose box provably misses the
//! fiber are skipped, and the innermost level is an axis-parallel line whose
//! lattice points are counted from its exact truth set.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::{Interval, Tri};
use crate::lattice::Lattice;
use crate::matrix::{hermite_rows, Matrix};
use crate::rat::{ceil, common_denominator, floor, to_f64, Rat};
use crate::semialg::{FamilySpec, Fiber};

/// Default cap on the number of candidate lattice points.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// The candidate cap: `LATCOUNT_BUDGET` if set to a positive integer,
/// otherwise [`DEFAULT_BUDGET`].
pub fn default_budget() -> u128 {
    std::env::var("LATCOUNT_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse::<u128>().ok())
        .filter(|&b| b > 0)
        .unwrap_or(DEFAULT_BUDGET)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CountReport {
    pub count: u64,
    /// Lattice points of the box lying on the lines that were examined.
    pub enumerated: u64,
    /// Counted points at which some leaf polynomial vanishes.
    pub boundary_hits: u64,
}

impl std::ops::Add for CountReport {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            count: self.count + o.count,
            enumerated: self.enumerated + o.enumerated,
            boundary_hits: self.boundary_hits + o.boundary_hits,
        }
    }
}

/// A basis of the lattice, with coordinates listed in enumeration order
/// `order[0], order[1], ...`, that is lower triangular in that order:
/// coordinate `order[i]` of basis vector `j` vanishes for `j > i`.
#[derive(Clone, Debug)]
pub struct TriangularBasis {
    order: Vec<usize>,
    /// `rows[i][j]` is coordinate `order[i]` of basis vector `j`, `j <= i`.
    rows: Vec<Vec<Rat>>,
}

impl TriangularBasis {
    pub fn new(l: &Lattice, order: Vec<usize>) -> Self {
        let n = l.dim();
        let b = l.basis();
        // Rows of P B, scaled to integers; hermite_rows of its transpose
        // gives U (D (PB)^T) = R, so (PB) U^T = R^T / D is lower triangular.
        let permuted: Vec<Vec<Rat>> = order.iter().map(|&i| b.row(i).to_vec()).collect();
        let d = common_denominator(permuted.iter().flatten());
        let dr = Rat::from_integer(d.clone());
        let transposed: Vec<Vec<BigInt>> = (0..n)
            .map(|j| (0..n).map(|i| (&permuted[i][j] * &dr).to_integer()).collect())
            .collect();
        let (_, r) = hermite_rows(&transposed);
        let rows = (0..n)
            .map(|i| (0..=i).map(|j| Rat::new(r[j][i].clone(), d.clone())).collect())
            .collect();
        Self { order, rows }
    }

    /// Enumeration from the last coordinate down to `x1`, which is innermost.
    pub fn standard(l: &Lattice) -> Self {
        Self::new(l, (0..l.dim()).rev().collect())
    }

    pub fn diagonal(&self, i: usize) -> &Rat {
        &self.rows[i][i]
    }

    /// The basis vectors in natural coordinates (columns).
    pub fn to_matrix(&self) -> Matrix {
        let n = self.order.len();
        let mut cols = vec![vec![Rat::zero(); n]; n];
        for (i, &axis) in self.order.iter().enumerate() {
            for j in 0..=i {
                cols[j][axis] = self.rows[i][j].clone();
            }
        }
        Matrix::from_cols(&cols)
    }

    /// An upper bound on the lattice points in `[-r, r]^n`: the product of
    /// the per-level coefficient range sizes.
    pub fn candidate_count(&self, r: &Rat) -> u128 {
        let two_r = r * Rat::from_integer(BigInt::from(2));
        let mut total: u128 = 1;
        for i in 0..self.rows.len() {
            let span = floor(&(&two_r / self.diagonal(i))) + BigInt::one();
            let s = span.to_u128().unwrap_or(u128::MAX);
            total = total.saturating_mul(s);
        }
        total
    }
}

struct Walker<'a> {
    fiber: &'a Fiber,
    basis: &'a TriangularBasis,
    radius: Rat,
    radius_box: Interval,
    pointwise: bool,
}

impl Walker<'_> {
    fn n(&self) -> usize {
        self.basis.order.len()
    }

    /// Integer range of coefficient `level` given the earlier coefficients.
    fn range(&self, level: usize, ks: &[BigInt]) -> (Rat, BigInt, BigInt) {
        let row = &self.basis.rows[level];
        let s: Rat = ks
            .iter()
            .zip(row)
            .fold(Rat::zero(), |acc, (k, l)| acc + l * Rat::from_integer(k.clone()));
        let d = &row[level];
        let lo = ceil(&((-&self.radius - &s) / d));
        let hi = floor(&((&self.radius - &s) / d));
        (s, lo, hi)
    }

    fn prune(&self, xs: &[Rat]) -> bool {
        let n = self.n();
        let mut boxes = vec![self.radius_box; n];
        for (i, x) in xs.iter().enumerate() {
            boxes[self.basis.order[i]] = Interval::point(to_f64(x)).padded();
        }
        self.fiber.tri_on_box(&boxes) == Tri::False
    }

    fn walk(&self, level: usize, ks: &mut Vec<BigInt>, xs: &mut Vec<Rat>) -> CountReport {
        let n = self.n();
        let (s, lo, hi) = self.range(level, ks);
        if lo > hi {
            return CountReport::default();
        }
        if level + 1 == n {
            return self.line(&s, &lo, &hi, xs);
        }
        let mut acc = CountReport::default();
        let d = self.basis.diagonal(level).clone();
        let mut k = lo;
        while k <= hi {
            let x = &s + &d * Rat::from_integer(k.clone());
            xs.push(x);
            if !self.prune(xs) {
                ks.push(k.clone());
                acc = acc + self.walk(level + 1, ks, xs);
                ks.pop();
            }
            xs.pop();
            k += 1;
        }
        acc
    }

    fn line(&self, s: &Rat, lo: &BigInt, hi: &BigInt, xs: &[Rat]) -> CountReport {
        let n = self.n();
        let axis = self.basis.order[n - 1];
        let step = self.basis.diagonal(n - 1);
        let points = (hi - lo + BigInt::one()).to_u64().expect("range fits in u64");
        // Fixed coordinates in natural order, skipping the free axis.
        let mut full = vec![Rat::zero(); n];
        for (i, x) in xs.iter().enumerate() {
            full[self.basis.order[i]] = x.clone();
        }
        if self.pointwise {
            let mut acc = CountReport {
                enumerated: points,
                ..Default::default()
            };
            let mut k = lo.clone();
            while &k <= hi {
                full[axis] = s + step * Rat::from_integer(k.clone());
                if self.fiber.contains(&full) {
                    acc.count += 1;
                    if self.fiber.on_some_boundary(&full) {
                        acc.boundary_hits += 1;
                    }
                }
                k += 1;
            }
            return acc;
        }
        let fixed: Vec<Rat> = (0..n).filter(|&i| i != axis).map(|i| full[i].clone()).collect();
        let restriction = self.fiber.restrict_to_axis_line(axis, &fixed);
        let mut truth = restriction.truth_set();
        let (count, boundary_hits) = truth.count_grid(s, step, &-&self.radius, &self.radius);
        CountReport {
            count,
            enumerated: points,
            boundary_hits,
        }
    }
}

fn run(l: &Lattice, f: &FamilySpec, t: &[Rat], budget: u128, pointwise: bool) -> Result<CountReport> {
    Error::check_dim(f.num_params(), t.len())?;
    Error::check_dim(f.num_vars(), l.dim())?;
    let fbox = f.fiber_box(t)?;
    let fiber = Arc::new(f.fiber(t)?);
    let basis = TriangularBasis::standard(l);
    let candidates = basis.candidate_count(&fbox.radius);
    if candidates > budget {
        return Err(Error::BudgetExceeded {
            candidates,
            cap: budget,
        });
    }
    let r = to_f64(&fbox.radius);
    let walker = Walker {
        fiber: &fiber,
        basis: &basis,
        radius: fbox.radius.clone(),
        radius_box: Interval::new(-r, r).padded(),
        pointwise,
    };
    if l.dim() == 1 {
        return Ok(walker.walk(0, &mut Vec::new(), &mut Vec::new()));
    }
    let (s, lo, hi) = walker.range(0, &[]);
    let d = basis.diagonal(0).clone();
    let ks: Vec<BigInt> = num_iter(&lo, &hi);
    let total = ks
        .par_iter()
        .map(|k| {
            let x = &s + &d * Rat::from_integer(k.clone());
            let mut xs = vec![x];
            if walker.prune(&xs) {
                return CountReport::default();
            }
            walker.walk(1, &mut vec![k.clone()], &mut xs)
        })
        .reduce(CountReport::default, |a, b| a + b);
    Ok(total)
}

fn num_iter(lo: &BigInt, hi: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut k = lo.clone();
    while &k <= hi {
        out.push(k.clone());
        k += 1;
    }
    out
}

/// `|L ∩ Z_T|` with the candidate cap from [`default_budget`].
pub fn count_points(l: &Lattice, f: &FamilySpec, t: &[Rat]) -> Result<CountReport> {
    count_points_with_budget(l, f, t, default_budget())
}

pub fn count_points_with_budget(
    l: &Lattice,
    f: &FamilySpec,
    t: &[Rat],
    budget: u128,
) -> Result<CountReport> {
    run(l, f, t, budget, false)
}

/// Same count, testing every lattice point of the box individually by
/// exact membership. Slow; used as a cross-check.
pub fn count_points_pointwise(
    l: &Lattice,
    f: &FamilySpec,
    t: &[Rat],
    budget: u128,
) -> Result<CountReport> {
    run(l, f, t, budget, true)
}

/// Every lattice point of the fiber, by pointwise membership over the box.
pub fn lattice_points(l: &Lattice, f: &FamilySpec, t: &[Rat], budget: u128) -> Result<Vec<Vec<Rat>>> {
    Error::check_dim(f.num_params(), t.len())?;
    Error::check_dim(f.num_vars(), l.dim())?;
    let fbox = f.fiber_box(t)?;
    let fiber = f.fiber(t)?;
    let basis = TriangularBasis::standard(l);
    let candidates = basis.candidate_count(&fbox.radius);
    if candidates > budget {
        return Err(Error::BudgetExceeded {
            candidates,
            cap: budget,
        });
    }
    let m = basis.to_matrix();
    let n = l.dim();
    let walker = Walker {
        fiber: &fiber,
        basis: &basis,
        radius: fbox.radius.clone(),
        radius_box: Interval::new(-1.0, 1.0),
        pointwise: true,
    };
    let mut out = Vec::new();
    let mut ks: Vec<BigInt> = Vec::with_capacity(n);
    fn rec(w: &Walker, m: &Matrix, ks: &mut Vec<BigInt>, out: &mut Vec<Vec<Rat>>) {
        let level = ks.len();
        let (_, lo, hi) = w.range(level, ks);
        let mut k = lo;
        while k <= hi {
            ks.push(k.clone());
            if ks.len() == w.n() {
                let x = m.mul_int_vec(ks);
                if w.fiber.contains(&x) {
                    out.push(x);
                }
            } else {
                rec(w, m, ks, out);
            }
            ks.pop();
            k += 1;
        }
    }
    rec(&walker, &m, &mut ks, &mut out);
    Ok(out)
}
