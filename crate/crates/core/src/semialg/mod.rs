//! Semialgebraic parameter families `Z ⊆ R^{m+n}` and their fibers.

mod line;
mod parse;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::interval::{Interval, Tri};
use crate::matrix::Matrix;
use crate::poly::{FiberPoly, Polynomial};
use crate::rat::{fmt_rat, to_f64, Rat};

pub use line::{Bound, LineRestriction, TruthSet};
pub use parse::{parse_family, parse_formula, parse_polynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `p <= 0`
    Le,
    /// `p < 0`
    Lt,
    /// `p = 0`
    Eq,
}

impl Relation {
    /// Truth of `p rel 0` given the sign of `p`.
    pub fn holds(self, sign: Ordering) -> bool {
        match self {
            Relation::Le => sign != Ordering::Greater,
            Relation::Lt => sign == Ordering::Less,
            Relation::Eq => sign == Ordering::Equal,
        }
    }

    pub fn on_interval(self, v: Interval) -> Tri {
        match self {
            Relation::Le if v.hi <= 0.0 => Tri::True,
            Relation::Le if v.lo > 0.0 => Tri::False,
            Relation::Lt if v.hi < 0.0 => Tri::True,
            Relation::Lt if v.lo >= 0.0 => Tri::False,
            Relation::Eq if !v.contains_zero() => Tri::False,
            _ => Tri::Unknown,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Eq => "=",
        }
    }
}

/// A sign condition `poly rel 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub poly: Polynomial,
    pub rel: Relation,
}

impl Atom {
    pub fn new(poly: Polynomial, rel: Relation) -> Self {
        Atom { poly, rel }
    }

    pub fn le(poly: Polynomial) -> Self {
        Self::new(poly, Relation::Le)
    }
}

/// Negation-free boolean tree over atom indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(usize),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn eval(&self, atom: &mut impl FnMut(usize) -> bool) -> bool {
        match self {
            Formula::Atom(i) => atom(*i),
            Formula::And(fs) => fs.iter().all(|f| f.eval(atom)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(atom)),
        }
    }

    pub fn eval_tri(&self, atom: &mut impl FnMut(usize) -> Tri) -> Tri {
        match self {
            Formula::Atom(i) => atom(*i),
            Formula::And(fs) => {
                let mut acc = Tri::True;
                for f in fs {
                    acc = acc.and(f.eval_tri(atom));
                    if acc == Tri::False {
                        break;
                    }
                }
                acc
            }
            Formula::Or(fs) => {
                let mut acc = Tri::False;
                for f in fs {
                    acc = acc.or(f.eval_tri(atom));
                    if acc == Tri::True {
                        break;
                    }
                }
                acc
            }
        }
    }

    /// Conjunction of atoms `0..n`.
    pub fn all_of(n: usize) -> Formula {
        Formula::And((0..n).map(Formula::Atom).collect())
    }

    fn max_atom(&self) -> Option<usize> {
        match self {
            Formula::Atom(i) => Some(*i),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().filter_map(Formula::max_atom).max(),
        }
    }

    fn shifted(&self, by: usize) -> Formula {
        match self {
            Formula::Atom(i) => Formula::Atom(i + by),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.shifted(by)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.shifted(by)).collect()),
        }
    }

    fn write(&self, atoms: &[Atom], out: &mut String) {
        match self {
            Formula::Atom(i) => {
                let a = &atoms[*i];
                out.push_str(&format!("({} {} 0)", a.poly, a.rel.symbol()));
            }
            Formula::And(fs) | Formula::Or(fs) => {
                let op = if matches!(self, Formula::And(_)) { " & " } else { " | " };
                out.push('(');
                for (k, f) in fs.iter().enumerate() {
                    if k > 0 {
                        out.push_str(op);
                    }
                    f.write(atoms, out);
                }
                out.push(')');
            }
        }
    }
}

/// A parameterized family: atoms, a boolean tree over them, and the declared
/// fiber radius `R(T)` with `Z_T ⊆ [-R(T), R(T)]^n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FamilySpec {
    num_params: usize,
    num_vars: usize,
    atoms: Vec<Atom>,
    formula: Formula,
    bound: Polynomial,
}

impl FamilySpec {
    /// `bound` must only involve parameters; it may be given with zero or
    /// `num_vars` space variables.
    pub fn new(
        num_params: usize,
        num_vars: usize,
        atoms: Vec<Atom>,
        formula: Formula,
        bound: Polynomial,
    ) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::InvalidInput("a family needs at least one space variable".into()));
        }
        for a in &atoms {
            if a.poly.num_params() != num_params || a.poly.num_vars() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_params + num_vars,
                    got: a.poly.num_params() + a.poly.num_vars(),
                });
            }
        }
        if formula.max_atom().is_some_and(|i| i >= atoms.len()) {
            return Err(Error::InvalidInput("formula references a missing atom".into()));
        }
        if bound.num_params() != num_params {
            return Err(Error::DimensionMismatch {
                expected: num_params,
                got: bound.num_params(),
            });
        }
        if !bound.is_param_only() {
            return Err(Error::InvalidInput("the bound R may only depend on parameters".into()));
        }
        let bound = if bound.num_vars() == 0 { bound } else { bound.params_only() };
        Ok(FamilySpec {
            num_params,
            num_vars,
            atoms,
            formula,
            bound,
        })
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn bound(&self) -> &Polynomial {
        &self.bound
    }

    pub fn radius(&self, t: &[Rat]) -> Result<Rat> {
        Error::check_dim(self.num_params, t.len())?;
        let r = self.bound.eval(t, &[]);
        if r.is_negative() {
            return Err(Error::InvalidInput(format!(
                "declared bound R(T) = {} is negative",
                fmt_rat(&r)
            )));
        }
        Ok(r)
    }

    /// Same family with the formula conjoined with extra atoms.
    pub fn conjoin(&self, extra: Vec<Atom>) -> Result<FamilySpec> {
        let base = self.atoms.len();
        let mut atoms = self.atoms.clone();
        let mut parts = vec![self.formula.clone()];
        for (k, a) in extra.into_iter().enumerate() {
            atoms.push(a);
            parts.push(Formula::Atom(base + k));
        }
        FamilySpec::new(
            self.num_params,
            self.num_vars,
            atoms,
            Formula::And(parts),
            self.bound.clone(),
        )
    }

    /// Union with another family over the same variables (atoms renumbered).
    pub fn union(&self, other: &FamilySpec, bound: Polynomial) -> Result<FamilySpec> {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let formula = Formula::Or(vec![
            self.formula.clone(),
            other.formula.shifted(self.atoms.len()),
        ]);
        FamilySpec::new(self.num_params, self.num_vars, atoms, formula, bound)
    }

    /// The family `{(T, y) : (T, M y) ∈ Z}`, i.e. every fiber mapped by
    /// `M^{-1}`. The bound is scaled by the max-row-sum norm of `M^{-1}`.
    pub fn transform_linear(&self, m: &Matrix) -> Result<FamilySpec> {
        Error::check_dim(self.num_vars, m.rows())?;
        let inv = m
            .inverse()
            .ok_or_else(|| Error::InvalidInput("singular transformation".into()))?;
        let norm = (0..inv.rows())
            .map(|i| inv.row(i).iter().map(Signed::abs).fold(Rat::zero(), |a, b| a + b))
            .max()
            .unwrap_or_else(Rat::one);
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.poly.compose_linear(m), a.rel))
            .collect();
        FamilySpec::new(
            self.num_params,
            self.num_vars,
            atoms,
            self.formula.clone(),
            self.bound.scale(&norm),
        )
    }

    pub fn fiber(&self, t: &[Rat]) -> Result<Fiber> {
        let radius = self.radius(t)?;
        let atoms = self
            .atoms
            .iter()
            .map(|a| FiberAtom {
                poly: FiberPoly::new(a.poly.specialize(t)),
                rel: a.rel,
            })
            .collect();
        Ok(Fiber {
            n: self.num_vars,
            atoms: Arc::new(atoms),
            formula: Arc::new(self.formula.clone()),
            radius_f64: to_f64(&radius),
            radius,
        })
    }

    pub fn fiber_membership(&self, t: &[Rat], x: &[Rat]) -> Result<bool> {
        Error::check_dim(self.num_params, t.len())?;
        Error::check_dim(self.num_vars, x.len())?;
        Ok(self.formula.eval(&mut |i| {
            let a = &self.atoms[i];
            a.rel.holds(a.poly.eval(t, x).cmp(&Rat::zero()))
        }))
    }

    /// Restriction to the axis-parallel line through `fixed` along `axis`
    /// (zero-based); `fixed` lists the other `n - 1` coordinates in order.
    pub fn restrict_to_axis_line(
        &self,
        t: &[Rat],
        axis: usize,
        fixed: &[Rat],
    ) -> Result<LineRestriction> {
        Error::check_dim(self.num_params, t.len())?;
        Error::check_dim(self.num_vars - 1, fixed.len())?;
        if axis >= self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: axis + 1,
            });
        }
        Ok(self.fiber(t)?.restrict_to_axis_line(axis, fixed))
    }

    /// The declared box, spot-checked by sampling just outside it.
    pub fn fiber_box(&self, t: &[Rat]) -> Result<FiberBox> {
        let fiber = self.fiber(t)?;
        fiber.check_bound(256)?;
        Ok(FiberBox {
            radius: fiber.radius.clone(),
            dim: self.num_vars,
        })
    }

    /// Serializes in the family-file format accepted by [`parse_family`].
    pub fn to_spec_text(&self) -> String {
        let mut formula = String::new();
        self.formula.write(&self.atoms, &mut formula);
        let bound = self.bound.with_vars(self.num_vars);
        format!(
            "params m={}\nvars   n={}\nbound  R = {}\nformula {}\n",
            self.num_params, self.num_vars, bound, formula
        )
    }
}

impl fmt::Debug for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FamilySpec({})", self.to_spec_text().replace('\n', "; "))
    }
}

/// Axis-aligned box `[-radius, radius]^dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberBox {
    pub radius: Rat,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct FiberAtom {
    pub poly: FiberPoly,
    pub rel: Relation,
}

/// A family specialized at one parameter value.
#[derive(Clone, Debug)]
pub struct Fiber {
    n: usize,
    atoms: Arc<Vec<FiberAtom>>,
    formula: Arc<Formula>,
    radius: Rat,
    radius_f64: f64,
}

impl Fiber {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> &Rat {
        &self.radius
    }

    pub fn radius_f64(&self) -> f64 {
        self.radius_f64
    }

    pub fn atoms(&self) -> &[FiberAtom] {
        &self.atoms
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        assert_eq!(x.len(), self.n);
        self.formula.eval(&mut |i| {
            let a = &self.atoms[i];
            a.rel.holds(a.poly.sign_at(x))
        })
    }

    /// Membership of the point `nums / den`, `den > 0`.
    pub fn contains_scaled(&self, nums: &[i64], den: i64) -> bool {
        self.formula.eval(&mut |i| {
            let a = &self.atoms[i];
            a.rel.holds(a.poly.sign_scaled(nums, den))
        })
    }

    /// Membership of `nums / den` with arbitrary-precision numerators.
    pub fn contains_scaled_big(&self, nums: &[BigInt], den: &BigInt) -> bool {
        self.formula.eval(&mut |i| {
            let a = &self.atoms[i];
            a.rel.holds(a.poly.sign_scaled_big(nums, den))
        })
    }

    /// The same fiber up to a null set: equality atoms on nonzero
    /// polynomials are replaced by `false`. Used for volumes only.
    pub fn without_equalities(&self) -> Fiber {
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                if a.rel == Relation::Eq && !a.poly.poly().is_zero() {
                    FiberAtom {
                        poly: FiberPoly::new(Polynomial::constant(0, self.n, Rat::one())),
                        rel: Relation::Le,
                    }
                } else {
                    a.clone()
                }
            })
            .collect();
        Fiber {
            atoms: Arc::new(atoms),
            ..self.clone()
        }
    }

    /// True if some leaf polynomial vanishes at `x`.
    pub fn on_some_boundary(&self, x: &[Rat]) -> bool {
        self.atoms
            .iter()
            .any(|a| a.poly.sign_at(x) == Ordering::Equal)
    }

    /// Certain truth over a box of points, or `Unknown`.
    pub fn tri_on_box(&self, boxes: &[Interval]) -> Tri {
        self.formula.eval_tri(&mut |i| {
            let a = &self.atoms[i];
            a.rel.on_interval(a.poly.bound_on_box(boxes))
        })
    }

    pub fn restrict_to_line(&self, a: &[Rat], d: &[Rat]) -> LineRestriction {
        let polys = self
            .atoms
            .iter()
            .map(|at| at.poly.poly().restrict_to_line(a, d))
            .collect();
        let rels = self.atoms.iter().map(|at| at.rel).collect();
        LineRestriction::new(polys, rels, self.formula.clone())
    }

    pub fn restrict_to_axis_line(&self, axis: usize, fixed: &[Rat]) -> LineRestriction {
        let mut a = Vec::with_capacity(self.n);
        let mut d = vec![Rat::zero(); self.n];
        let mut it = fixed.iter();
        for i in 0..self.n {
            if i == axis {
                a.push(Rat::zero());
            } else {
                a.push(it.next().expect("fixed coordinates").clone());
            }
        }
        d[axis] = Rat::one();
        self.restrict_to_line(&a, &d)
    }

    /// Samples points in the shell `R < |x|_inf <= 5R/4`; any member there
    /// contradicts the declared radius.
    pub fn check_bound(&self, samples: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b0c5);
        const DEN: i64 = 1 << 20;
        let r = &self.radius;
        if r.is_zero() {
            return Ok(());
        }
        for _ in 0..samples {
            let mut x: Vec<Rat> = (0..self.n)
                .map(|_| {
                    let k: i64 = rng.random_range(-(5 * DEN / 4)..=(5 * DEN / 4));
                    r * Rat::new(k.into(), DEN.into())
                })
                .collect();
            let axis = rng.random_range(0..self.n);
            let k: i64 = rng.random_range(DEN + 1..=(5 * DEN / 4));
            let sign = if rng.random_bool(0.5) { 1 } else { -1 };
            x[axis] = r * Rat::new((sign * k).into(), DEN.into());
            if self.contains(&x) {
                let pt: Vec<String> = x.iter().map(fmt_rat).collect();
                return Err(Error::BoundViolation(format!(
                    "point ({}) lies in the fiber but outside [-R, R]^n with R = {}",
                    pt.join(", "),
                    fmt_rat(r)
                )));
            }
        }
        Ok(())
    }
}
