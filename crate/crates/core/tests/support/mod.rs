//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use latcount::lattice::Lattice;
use latcount::matrix::Matrix;
use latcount::rat::{int, rat, Rat};
use latcount::semialg::{parse_family, FamilySpec};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `sum a_i x_i + b T1 + c` with small integer coefficients.
#[derive(Clone, Debug)]
pub struct Linear {
    pub a: Vec<i64>,
    pub b: i64,
    pub c: i64,
}

impl Linear {
    fn text(&self) -> String {
        let mut s: Vec<String> = self
            .a
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, v)| format!("{v}*x{}", i + 1))
            .collect();
        if self.b != 0 {
            s.push(format!("{}*T1", self.b));
        }
        s.push(self.c.to_string());
        s.join(" + ").replace("+ -", "- ")
    }
}

/// One leaf: a product of linear factors and root-free quadratics.
#[derive(Clone, Debug)]
pub struct Leaf {
    pub sign: i64,
    pub linear: Vec<Linear>,
    pub quadratic: Vec<usize>,
    pub rel: &'static str,
}

impl Leaf {
    pub fn degree(&self) -> usize {
        self.linear.len() + 2 * self.quadratic.len()
    }

    fn text(&self) -> String {
        let mut f: Vec<String> = self.linear.iter().map(|l| format!("({})", l.text())).collect();
        f.extend(self.quadratic.iter().map(|i| format!("(x{}^2 + 1)", i + 1)));
        format!("({}{} {} 0)", if self.sign < 0 { "-" } else { "" }, f.join("*"), self.rel)
    }
}

#[derive(Clone, Debug)]
pub enum Tree {
    Leaf(usize),
    And(Box<Tree>, Box<Tree>),
    Or(Box<Tree>, Box<Tree>),
}

impl Tree {
    pub fn eval(&self, leaf: &impl Fn(usize) -> bool) -> bool {
        match self {
            Tree::Leaf(i) => leaf(*i),
            Tree::And(a, b) => a.eval(leaf) && b.eval(leaf),
            Tree::Or(a, b) => a.eval(leaf) || b.eval(leaf),
        }
    }
}

/// A random family whose leaves factor into pieces with explicitly known
/// roots on every axis line.
#[derive(Clone, Debug)]
pub struct FactoredFamily {
    pub n: usize,
    pub leaves: Vec<Leaf>,
    pub tree: Tree,
    pub text: String,
    pub family: FamilySpec,
}

fn formula(rng: &mut ChaCha8Rng, leaves: &[String], first: usize) -> (String, Tree) {
    if leaves.len() == 1 {
        return (leaves[0].clone(), Tree::Leaf(first));
    }
    let split = rng.random_range(1..leaves.len());
    let and = rng.random_bool(0.5);
    let (l, lt) = formula(rng, &leaves[..split], first);
    let (r, rt) = formula(rng, &leaves[split..], first + split);
    let op = if and { "&" } else { "|" };
    let tree = if and { Tree::And(lt.into(), rt.into()) } else { Tree::Or(lt.into(), rt.into()) };
    (format!("({l} {op} {r})"), tree)
}

pub fn random_factored_family(rng: &mut ChaCha8Rng) -> FactoredFamily {
    let n = rng.random_range(2..=3);
    let count = rng.random_range(1..=3);
    let leaves: Vec<Leaf> = (0..count)
        .map(|_| {
            let quads = rng.random_range(0..=1);
            let lin = rng.random_range(1..=6 - 2 * quads);
            let linear = (0..lin)
                .map(|_| Linear {
                    a: (0..n).map(|_| rng.random_range(-3..=3)).collect(),
                    b: rng.random_range(-1..=1),
                    c: rng.random_range(-4..=4),
                })
                .collect();
            let quadratic = (0..quads).map(|_| rng.random_range(0..n)).collect();
            let rel = ["<=", "<", "="][rng.random_range(0..3)];
            Leaf {
                sign: if rng.random_bool(0.5) { 1 } else { -1 },
                linear,
                quadratic,
                rel,
            }
        })
        .collect();
    let texts: Vec<String> = leaves.iter().map(Leaf::text).collect();
    let (f, tree) = formula(rng, &texts, 0);
    let text = format!("params m=1\nvars n={n}\nbound R = 10\nformula {f}\n");
    let family = parse_family(&text).expect("generated family parses");
    FactoredFamily { n, leaves, tree, text, family }
}

/// Each linear factor restricted to the axis line, as `(slope, offset)`.
fn line_factors(f: &FactoredFamily, t: &Rat, axis: usize, fixed: &[Rat]) -> Vec<Vec<(i64, Rat)>> {
    let mut point = Vec::with_capacity(f.n);
    let mut it = fixed.iter();
    for i in 0..f.n {
        point.push(if i == axis { Rat::zero() } else { it.next().unwrap().clone() });
    }
    f.leaves
        .iter()
        .map(|leaf| {
            leaf.linear
                .iter()
                .map(|l| {
                    let rest: Rat = l.a.iter().zip(&point).map(|(&a, x)| int(a) * x).sum::<Rat>() + int(l.b) * t + int(l.c);
                    (l.a[axis], rest)
                })
                .collect()
        })
        .collect()
}

/// Every root of every leaf on the axis line, from the factor structure.
pub fn factor_roots(f: &FactoredFamily, t: &Rat, axis: usize, fixed: &[Rat]) -> Vec<Rat> {
    let mut roots: Vec<Rat> = line_factors(f, t, axis, fixed)
        .into_iter()
        .flatten()
        .filter(|(a, _)| *a != 0)
        .map(|(a, b)| -b / int(a))
        .collect();
    roots.sort();
    roots.dedup();
    roots
}

/// Maximal truth runs along the line, from membership at every root, every
/// gap midpoint, both tails, and `dense` equally spaced probes. Membership
/// comes from the sign of each linear factor, read off by comparing the
/// probe with the factor's root; no polynomial is expanded or evaluated.
pub fn dense_interval_oracle(f: &FactoredFamily, t: &Rat, axis: usize, fixed: &[Rat], dense: usize) -> usize {
    let factors = line_factors(f, t, axis, fixed);
    let roots = factor_roots(f, t, axis, fixed);
    let extent = roots.iter().map(|r| r.abs()).max().unwrap_or_else(Rat::zero) + int(2);
    let mut probes: Vec<Rat> = (0..=dense)
        .map(|k| -&extent + &extent * int(2) * rat(k as i64, dense as i64))
        .collect();
    probes.extend(roots.iter().cloned());
    probes.extend(roots.windows(2).map(|w| (&w[0] + &w[1]) / int(2)));
    probes.push(-&extent - int(1));
    probes.push(&extent + int(1));
    probes.sort();
    probes.dedup();
    let signed: Vec<Vec<(i64, Rat)>> = factors
        .iter()
        .map(|fs| fs.iter().map(|(a, b)| if *a == 0 { (0, b.clone()) } else { (a.signum(), -b / int(*a)) }).collect())
        .collect();
    let mut runs = 0;
    let mut prev = false;
    for p in &probes {
        let leaf = |i: usize| {
            let mut sign = f.leaves[i].sign;
            for (s, r) in &signed[i] {
                let factor = if *s == 0 {
                    if r.is_zero() { 0 } else if r.is_positive() { 1 } else { -1 }
                } else {
                    s * match p.cmp(r) {
                        std::cmp::Ordering::Less => -1,
                        std::cmp::Ordering::Equal => 0,
                        std::cmp::Ordering::Greater => 1,
                    }
                };
                sign *= factor;
            }
            match f.leaves[i].rel {
                "<=" => sign <= 0,
                "<" => sign < 0,
                _ => sign == 0,
            }
        };
        let now = f.tree.eval(&leaf);
        if now && !prev {
            runs += 1;
        }
        prev = now;
    }
    runs
}

pub fn random_rational(rng: &mut ChaCha8Rng, bound: i64) -> Rat {
    let q = rng.random_range(1..=7);
    rat(rng.random_range(-bound * q..=bound * q), q)
}

/// Successive minima of the lattice spanned by the columns of `b`, by
/// scanning coefficient vectors in `[-k, k]^3`.
pub fn brute_minima_3d(b: &[[i64; 3]; 3], k: i64) -> [i64; 3] {
    let mut vecs: Vec<([i64; 3], i64)> = Vec::new();
    for c0 in -k..=k {
        for c1 in -k..=k {
            for c2 in -k..=k {
                if (c0, c1, c2) == (0, 0, 0) {
                    continue;
                }
                let v = [0, 1, 2].map(|r| b[r][0] * c0 + b[r][1] * c1 + b[r][2] * c2);
                vecs.push((v, v.iter().map(|x| x * x).sum()));
            }
        }
    }
    let cross = |a: [i64; 3], b: [i64; 3]| [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let (w1, l1) = *vecs.iter().min_by_key(|v| v.1).unwrap();
    let (w2, l2) = *vecs.iter().filter(|v| cross(w1, v.0) != [0, 0, 0]).min_by_key(|v| v.1).unwrap();
    let normal = cross(w1, w2);
    let l3 = vecs
        .iter()
        .filter(|v| normal.iter().zip(&v.0).map(|(a, b)| a * b).sum::<i64>() != 0)
        .map(|v| v.1)
        .min()
        .unwrap();
    [l1, l2, l3]
}

pub fn random_int_basis(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> Vec<Vec<i64>> {
    loop {
        let b: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-bound..=bound)).collect()).collect();
        let m = Matrix::from_rows(b.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect());
        if !m.det().is_zero() {
            return b;
        }
    }
}

/// At least 100 lattices in dimensions 2 to 4: integer and rational random
/// bases, diagonal and sheared ones.
pub fn lattice_corpus() -> Vec<Lattice> {
    let mut rng = rng(2024);
    let mut out = Vec::new();
    for n in 2..=4 {
        out.push(Lattice::integer(n));
        out.push(Lattice::diagonal(&(1..=n as i64).map(int).collect::<Vec<_>>()).unwrap());
        out.push(Lattice::diagonal(&(0..n).map(|i| rat(1 + i as i64, 2)).collect::<Vec<_>>()).unwrap());
        for _ in 0..22 {
            let b = random_int_basis(&mut rng, n, 5);
            out.push(Lattice::new(Matrix::from_rows(b.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())).unwrap());
        }
        for _ in 0..10 {
            loop {
                let rows: Vec<Vec<Rat>> = (0..n).map(|_| (0..n).map(|_| random_rational(&mut rng, 3)).collect()).collect();
                let m = Matrix::from_rows(rows);
                if !m.det().is_zero() {
                    out.push(Lattice::new(m).unwrap());
                    break;
                }
            }
        }
    }
    out
}

/// Basis columns `(1, 0)` and `(s, 1)` with a random rational shear `s`.
pub fn sheared_lattice(seed: u64) -> Lattice {
    let mut rng = rng(seed);
    let q = rng.random_range(5..=31);
    let s = rat(rng.random_range(1..q), q);
    Lattice::from_columns(&[vec![int(1), int(0)], vec![s, int(1)]]).unwrap()
}

/// Volume of `{x in R^n : prod_{i in I} max(1,|x_i|) <= T for all I}` by
/// nested composite Simpson integration in `s = log |x_1|`.
pub fn weil_volume_nested(n: usize, t: f64, steps: usize) -> f64 {
    if t < 1.0 {
        return 0.0;
    }
    if n == 1 {
        return 2.0 * t;
    }
    // V_n(T) = 2 V_{n-1}(T) + 2 int_0^{log T} V_{n-1}(T e^{-s}) e^s ds
    let upper = t.ln();
    let h = upper / steps as f64;
    let g = |s: f64| weil_volume_nested(n - 1, (t * (-s).exp()).max(1.0), steps) * s.exp();
    let mut acc = g(0.0) + g(upper);
    for k in 1..steps {
        acc += g(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * weil_volume_nested(n - 1, t, steps) + 2.0 * acc * h / 3.0
}
