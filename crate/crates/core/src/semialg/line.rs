//! Exact truth sets of a family restricted to a line.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Formula, Relation};
use crate::error::{Error, Result};
use crate::rat::{ceil, floor, from_f64, Rat};
use crate::univariate::{isolate_roots, RealRoot, UniPoly};

/// Univariate images of every leaf along `x = a + t d`, plus the tree.
#[derive(Clone, Debug)]
pub struct LineRestriction {
    polys: Vec<UniPoly>,
    rels: Vec<Relation>,
    formula: Arc<Formula>,
}

/// One endpoint of a maximal truth run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Infinite,
    /// Index into [`TruthSet::roots`]; `closed` if the root itself is in the set.
    Root { index: usize, closed: bool },
}

/// Truth of the formula along the line: sorted distinct roots of all leaves,
/// truth at each root, and truth on each open gap between them.
#[derive(Clone, Debug)]
pub struct TruthSet {
    roots: Vec<RealRoot>,
    at_root: Vec<bool>,
    in_gap: Vec<bool>,
    /// Leaves whose restriction vanishes at the corresponding root.
    vanishing: Vec<Vec<usize>>,
    /// Some leaf restricts to the zero polynomial.
    has_null_leaf: bool,
}

impl LineRestriction {
    pub fn new(polys: Vec<UniPoly>, rels: Vec<Relation>, formula: Arc<Formula>) -> Self {
        LineRestriction { polys, rels, formula }
    }

    pub fn polys(&self) -> &[UniPoly] {
        &self.polys
    }

    pub fn relations(&self) -> &[Relation] {
        &self.rels
    }

    pub fn holds_at(&self, t: &Rat) -> bool {
        self.formula
            .eval(&mut |i| self.rels[i].holds(self.polys[i].sign_at(t)))
    }

    pub fn truth_set(&self) -> TruthSet {
        let mut roots: Vec<RealRoot> = Vec::new();
        let mut vanishing: Vec<Vec<usize>> = Vec::new();
        for (leaf, p) in self.polys.iter().enumerate() {
            if p.degree().unwrap_or(0) == 0 {
                continue;
            }
            for mut r in isolate_roots(p) {
                insert_root(&mut roots, &mut vanishing, &mut r, leaf);
            }
        }
        // Separate neighbours so every interval is disjoint from the others.
        let mut gap_points = Vec::with_capacity(roots.len() + 1);
        for k in 1..roots.len() {
            let (left, right) = roots.split_at_mut(k);
            gap_points.push(point_between(&mut left[k - 1], &mut right[0]));
        }
        let gap_points: Vec<Rat> = match (roots.first(), roots.last()) {
            (Some(first), Some(last)) => {
                let mut pts = Vec::with_capacity(roots.len() + 1);
                pts.push(lower_of(first) - Rat::one());
                pts.extend(gap_points);
                pts.push(upper_of(last) + Rat::one());
                pts
            }
            _ => vec![Rat::zero()],
        };
        let in_gap = gap_points.iter().map(|t| self.holds_at(t)).collect();
        let at_root = roots
            .iter()
            .zip(&vanishing)
            .map(|(root, zeros)| self.holds_at_root(root, zeros))
            .collect();
        TruthSet {
            roots,
            at_root,
            in_gap,
            vanishing,
            has_null_leaf: self.polys.iter().any(UniPoly::is_zero),
        }
    }

    fn holds_at_root(&self, root: &RealRoot, zeros: &[usize]) -> bool {
        // Intervals are pairwise disjoint, so a leaf that does not vanish at
        // the root has constant sign on the whole isolating interval.
        let probe = match root.exact_value() {
            Some(v) => v.clone(),
            None => (root.lo() + root.hi()) / Rat::from_integer(2.into()),
        };
        self.formula.eval(&mut |i| {
            let sign = if zeros.contains(&i) {
                Ordering::Equal
            } else {
                self.polys[i].sign_at(&probe)
            };
            self.rels[i].holds(sign)
        })
    }

    /// Number of maximal intervals (points count as intervals) on which the
    /// formula holds along the whole line.
    ///
    /// A line on which every leaf vanishes identically while the formula
    /// holds is reported as degenerate: the fiber would contain the line.
    pub fn intervals_on_line(&self) -> Result<usize> {
        if !self.polys.is_empty() && self.polys.iter().all(UniPoly::is_zero) {
            if self.holds_at(&Rat::zero()) {
                return Err(Error::DegenerateLine(
                    "every atom vanishes on the line and the formula holds everywhere".into(),
                ));
            }
            return Ok(0);
        }
        Ok(self.truth_set().run_count())
    }
}

fn lower_of(r: &RealRoot) -> Rat {
    r.exact_value().cloned().unwrap_or_else(|| r.lo().clone())
}

fn upper_of(r: &RealRoot) -> Rat {
    r.exact_value().cloned().unwrap_or_else(|| r.hi().clone())
}

fn insert_root(
    roots: &mut Vec<RealRoot>,
    vanishing: &mut Vec<Vec<usize>>,
    r: &mut RealRoot,
    leaf: usize,
) {
    let (mut lo, mut hi) = (0usize, roots.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        match r.cmp_root(&mut roots[mid]) {
            Ordering::Equal => {
                if !vanishing[mid].contains(&leaf) {
                    vanishing[mid].push(leaf);
                }
                // Keep the exact representation when one side has it.
                if roots[mid].exact_value().is_none() && r.exact_value().is_some() {
                    roots[mid] = r.clone();
                }
                return;
            }
            Ordering::Less => hi = mid,
            Ordering::Greater => lo = mid + 1,
        }
    }
    roots.insert(lo, r.clone());
    vanishing.insert(lo, vec![leaf]);
}

/// A rational strictly between two distinct sorted roots; leaves their
/// intervals disjoint.
fn point_between(left: &mut RealRoot, right: &mut RealRoot) -> Rat {
    loop {
        let u = upper_of(left);
        let l = lower_of(right);
        match u.cmp(&l) {
            Ordering::Less => return (u + l) / Rat::from_integer(2.into()),
            Ordering::Equal if left.exact_value().is_none() && right.exact_value().is_none() => {
                return u;
            }
            _ => {
                if left.exact_value().is_none() {
                    left.bisect();
                }
                if right.exact_value().is_none() {
                    right.bisect();
                }
            }
        }
    }
}

impl TruthSet {
    pub fn roots(&self) -> &[RealRoot] {
        &self.roots
    }

    pub fn is_empty(&self) -> bool {
        !self.in_gap.iter().chain(&self.at_root).any(|&b| b)
    }

    /// Holds everywhere on the line.
    pub fn is_everything(&self) -> bool {
        self.in_gap.iter().chain(&self.at_root).all(|&b| b)
    }

    /// Maximal runs as `(left, right)` endpoints, in increasing order.
    pub fn runs(&self) -> Vec<(Bound, Bound)> {
        // Walk gap0, root0, gap1, root1, ..., gapK.
        let k = self.roots.len();
        let mut runs = Vec::new();
        let mut start: Option<Bound> = None;
        for step in 0..=2 * k {
            let (truth, this_root) = if step % 2 == 0 {
                (self.in_gap[step / 2], None)
            } else {
                (self.at_root[step / 2], Some(step / 2))
            };
            match (truth, start) {
                (true, None) => {
                    start = Some(match this_root {
                        Some(index) => Bound::Root { index, closed: true },
                        None if step == 0 => Bound::Infinite,
                        None => Bound::Root {
                            index: step / 2 - 1,
                            closed: false,
                        },
                    });
                }
                (false, Some(s)) => {
                    let end = match this_root {
                        Some(index) => Bound::Root { index, closed: false },
                        None => Bound::Root {
                            index: step / 2 - 1,
                            closed: true,
                        },
                    };
                    runs.push((s, end));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, Bound::Infinite));
        }
        runs
    }

    pub fn run_count(&self) -> usize {
        self.runs().len()
    }

    /// Whether some `t` in `[a, b]` lies in the set.
    pub fn intersects(&mut self, a: &Rat, b: &Rat) -> bool {
        if a > b {
            return false;
        }
        for (l, r) in self.runs() {
            if self.above_left(&l, b) && self.below_right(&r, a) {
                return true;
            }
        }
        false
    }

    /// `b` is at or beyond the left end of a run whose left bound is `l`.
    fn above_left(&mut self, l: &Bound, b: &Rat) -> bool {
        match *l {
            Bound::Infinite => true,
            Bound::Root { index, closed } => match self.roots[index].cmp_rat(b) {
                Ordering::Less => true,
                Ordering::Equal => closed,
                Ordering::Greater => false,
            },
        }
    }

    fn below_right(&mut self, r: &Bound, a: &Rat) -> bool {
        match *r {
            Bound::Infinite => true,
            Bound::Root { index, closed } => match self.roots[index].cmp_rat(a) {
                Ordering::Greater => true,
                Ordering::Equal => closed,
                Ordering::Less => false,
            },
        }
    }

    /// Counts integers `k` with `origin + step * k` in the set and in
    /// `[a, b]`. Returns `(count, boundary_hits)` where boundary hits are
    /// counted points at which some leaf vanishes.
    pub fn count_grid(&mut self, origin: &Rat, step: &Rat, a: &Rat, b: &Rat) -> (u64, u64) {
        assert!(step.is_positive());
        let kmin = ceil(&((a - origin) / step));
        let kmax = floor(&((b - origin) / step));
        if kmin > kmax {
            return (0, 0);
        }
        let mut total = 0u64;
        for (l, r) in self.runs() {
            let lo = match l {
                Bound::Infinite => kmin.clone(),
                Bound::Root { index, closed } => {
                    self.first_index_after(index, closed, origin, step).max(kmin.clone())
                }
            };
            let hi = match r {
                Bound::Infinite => kmax.clone(),
                Bound::Root { index, closed } => {
                    self.last_index_before(index, closed, origin, step).min(kmax.clone())
                }
            };
            if lo <= hi {
                let c: BigInt = hi - lo + 1;
                total += u64::try_from(c).expect("count fits in u64");
            }
        }
        let mut hits = 0u64;
        if self.has_null_leaf {
            hits = total;
        } else {
            for i in 0..self.roots.len() {
                if !self.at_root[i] || self.vanishing[i].is_empty() {
                    continue;
                }
                if let Some(v) = self.roots[i].exact_value() {
                    let k = (v - origin) / step;
                    if k.is_integer() && v >= a && v <= b {
                        hits += 1;
                    }
                }
            }
        }
        (total, hits)
    }

    /// Smallest `k` with `origin + step k` inside the run starting at root `index`.
    fn first_index_after(&mut self, index: usize, closed: bool, origin: &Rat, step: &Rat) -> BigInt {
        let root = &mut self.roots[index];
        root.refine_to(step);
        let guess = from_f64(root.approx());
        let mut k = ceil(&((guess - origin) / step));
        let inside = |root: &mut RealRoot, k: &BigInt| {
            let p = origin + step * Rat::from_integer(k.clone());
            match root.cmp_rat(&p) {
                Ordering::Less => true,
                Ordering::Equal => closed,
                Ordering::Greater => false,
            }
        };
        while inside(root, &(&k - 1)) {
            k -= 1;
        }
        while !inside(root, &k) {
            k += 1;
        }
        k
    }

    fn last_index_before(&mut self, index: usize, closed: bool, origin: &Rat, step: &Rat) -> BigInt {
        let root = &mut self.roots[index];
        root.refine_to(step);
        let guess = from_f64(root.approx());
        let mut k = floor(&((guess - origin) / step));
        let inside = |root: &mut RealRoot, k: &BigInt| {
            let p = origin + step * Rat::from_integer(k.clone());
            match root.cmp_rat(&p) {
                Ordering::Greater => true,
                Ordering::Equal => closed,
                Ordering::Less => false,
            }
        };
        while inside(root, &(&k + 1)) {
            k += 1;
        }
        while !inside(root, &k) {
            k -= 1;
        }
        k
    }
}
