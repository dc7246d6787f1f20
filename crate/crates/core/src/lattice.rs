//! Full-rank lattices with exact rational bases: determinant, successive
//! minima, a Mahler basis with `|v_i| <= i * lambda_i`, the transform `Psi`
//! sending that basis to the standard one, and Minkowski's second theorem.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::{dot, hermite_rows, norm_sq, Matrix};
use crate::rat::{fmt_rat, parse_rat, to_f64, Rat};
use crate::volume::unit_ball_volume;

/// Largest dimension accepted by [`successive_minima`].
pub const MAX_MINIMA_DIM: usize = 6;

/// A lattice in `R^n`, stored by a basis whose columns are the basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    basis: Matrix,
}

impl Lattice {
    pub fn new(basis: Matrix) -> Result<Self> {
        if basis.rows() == 0 || basis.rows() != basis.cols() {
            return Err(Error::InvalidInput(format!(
                "lattice basis must be a nonempty square matrix, got {}x{}",
                basis.rows(),
                basis.cols()
            )));
        }
        if basis.det().is_zero() {
            return Err(Error::InvalidInput("lattice basis is singular".into()));
        }
        Ok(Self { basis })
    }

    pub fn from_columns(cols: &[Vec<Rat>]) -> Result<Self> {
        if cols.iter().any(|c| c.len() != cols.len()) {
            return Err(Error::InvalidInput("lattice basis must be square".into()));
        }
        Self::new(Matrix::from_cols(cols))
    }

    /// The standard lattice `Z^n`.
    pub fn integer(n: usize) -> Self {
        Self {
            basis: Matrix::identity(n),
        }
    }

    pub fn diagonal(values: &[Rat]) -> Result<Self> {
        Self::new(Matrix::diagonal(values))
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<Rat>> {
        self.basis.columns()
    }

    /// The lattice vector with integer coordinates `k` in this basis.
    pub fn point(&self, k: &[BigInt]) -> Vec<Rat> {
        self.basis.mul_int_vec(k)
    }

    /// Coordinates of `x` in this basis, if `x` lies in the lattice.
    pub fn coordinates(&self, x: &[Rat]) -> Option<Vec<BigInt>> {
        let inv = self.basis.inverse()?;
        inv.mul_vec(x)
            .into_iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.coordinates(x).is_some()
    }

    /// Whether `other` spans the same lattice.
    pub fn same_lattice(&self, other: &Lattice) -> bool {
        self.dim() == other.dim()
            && other.basis_vectors().iter().all(|v| self.contains(v))
            && self.basis_vectors().iter().all(|v| other.contains(v))
    }

    /// The `dim n` file format: a header line followed by the `n` rows of the
    /// basis matrix (so the columns are the basis vectors).
    pub fn to_spec_text(&self) -> String {
        let n = self.dim();
        let mut s = format!("dim {n}\n");
        for i in 0..n {
            let row: Vec<String> = self.basis.row(i).iter().map(fmt_rat).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Parses the lattice file format written by [`Lattice::to_spec_text`].
pub fn parse_lattice(text: &str) -> Result<Lattice> {
    let syntax = |line: usize, message: String| Error::Syntax {
        line,
        column: 1,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| syntax(1, "empty lattice file".into()))?;
    let n: usize = header
        .strip_prefix("dim")
        .and_then(|s| s.trim().trim_start_matches('=').trim().parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| syntax(hl, "expected 'dim <n>'".into()))?;
    let mut rows = Vec::with_capacity(n);
    for (ln, line) in lines {
        let row: Vec<Rat> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| parse_rat(s).map_err(|_| syntax(ln, format!("bad rational '{s}'"))))
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rows.len(),
        });
    }
    Lattice::new(Matrix::from_rows(rows))
}

/// `|det B|`.
pub fn determinant(l: &Lattice) -> Rat {
    l.basis.det().abs()
}

fn round_rat(x: &Rat) -> BigInt {
    (x + Rat::new(BigInt::one(), BigInt::from(2))).floor().to_integer()
}

fn gram_schmidt(b: &[Vec<Rat>]) -> (Vec<Vec<Rat>>, Vec<Vec<Rat>>, Vec<Rat>) {
    let n = b.len();
    let mut star: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut norms: Vec<Rat> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&b[i], &star[j]) / &norms[j];
            for (x, s) in v.iter_mut().zip(&star[j]) {
                *x -= &mu[i][j] * s;
            }
        }
        norms.push(norm_sq(&v));
        star.push(v);
    }
    (star, mu, norms)
}

/// LLL reduction with `delta = 3/4`. Returns the reduced vectors together
/// with their integer coordinates in the input basis.
pub fn lll(l: &Lattice) -> (Vec<Vec<Rat>>, Vec<Vec<BigInt>>) {
    let n = l.dim();
    let mut b = l.basis_vectors();
    let mut coeffs: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from((i == j) as i32)).collect())
        .collect();
    let delta = Rat::new(BigInt::from(3), BigInt::from(4));
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let (_, mu, _) = gram_schmidt(&b);
            let q = round_rat(&mu[k][j]);
            if q.is_zero() {
                continue;
            }
            let qr = Rat::from_integer(q.clone());
            let (bj, cj) = (b[j].clone(), coeffs[j].clone());
            for (x, y) in b[k].iter_mut().zip(&bj) {
                *x -= &qr * y;
            }
            for (x, y) in coeffs[k].iter_mut().zip(&cj) {
                *x -= &q * y;
            }
        }
        let (_, mu, norms) = gram_schmidt(&b);
        let m = &mu[k][k - 1];
        if norms[k] >= (&delta - m * m) * &norms[k - 1] {
            k += 1;
        } else {
            b.swap(k, k - 1);
            coeffs.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    (b, coeffs)
}

/// Successive minima with witnesses.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimaProfile {
    /// Exact squared minima `lambda_i^2`, nondecreasing.
    pub squared: Vec<Rat>,
    /// Witness vectors `u_i` with `|u_i|^2 = squared[i]`.
    pub witnesses: Vec<Vec<Rat>>,
    /// Integer coordinates of each witness in the lattice's own basis.
    pub coefficients: Vec<Vec<BigInt>>,
}

impl MinimaProfile {
    pub fn dim(&self) -> usize {
        self.squared.len()
    }

    /// `lambda_i` as doubles.
    pub fn minima(&self) -> Vec<f64> {
        self.squared.iter().map(sqrt_rat).collect()
    }

    /// `lambda_1 * ... * lambda_j`, with the empty product equal to 1.
    pub fn product(&self, j: usize) -> f64 {
        self.minima()[..j].iter().product()
    }
}

/// Square root of a nonnegative rational, rounded to a double.
pub fn sqrt_rat(q: &Rat) -> f64 {
    let (p, d) = (q.numer(), q.denom());
    if let (Some(pf), Some(df)) = (p.to_f64(), d.to_f64()) {
        if pf.is_finite() && df.is_finite() && pf < 9.0e15 && df < 9.0e15 {
            return (pf / df).sqrt();
        }
    }
    // Scale into integers first: sqrt(p/d) = sqrt(p * d * 4^k) / (d * 2^k).
    let k = 64u32;
    let scaled = (p * d) << (2 * k);
    let root = num_integer::Roots::sqrt(&scaled);
    to_f64(&Rat::new(root, d << k))
}

fn lex_cmp(a: &[BigInt], b: &[BigInt]) -> Ordering {
    a.iter().cmp(b.iter())
}

/// Enumerates all nonzero integer vectors `x` with `|sum x_i b_i|^2 <= r2`,
/// where `b` is a (reduced) basis. Fincke-Pohst with a floating-point
/// Cholesky factorization and a slack; callers re-check exactly.
fn short_vectors(b: &[Vec<Rat>], r2: &Rat) -> Vec<Vec<i64>> {
    let n = b.len();
    let g: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| to_f64(&dot(&b[i], &b[j]))).collect())
        .collect();
    // q[i][i] = diagonal, q[i][j] (j > i) = mu coefficients.
    let mut q = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i..n {
            let mut s = g[i][j];
            for k in 0..i {
                s -= q[k][i] * q[k][j] * q[k][k];
            }
            if i == j {
                q[i][i] = s;
            } else {
                q[i][j] = s / q[i][i];
            }
        }
    }
    let bound = to_f64(r2) * (1.0 + 1e-9) + 1e-300;
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    fn rec(
        level: usize,
        n: usize,
        q: &[Vec<f64>],
        remaining: f64,
        x: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        let center: f64 = -(level + 1..n).map(|j| q[level][j] * x[j] as f64).sum::<f64>();
        let span = (remaining.max(0.0) / q[level][level]).sqrt() * (1.0 + 1e-9) + 1e-9;
        let lo = (center - span).ceil() as i64;
        let hi = (center + span).floor() as i64;
        for v in lo..=hi {
            x[level] = v;
            let d = v as f64 - center;
            let used = q[level][level] * d * d;
            if used > remaining * (1.0 + 1e-9) + 1e-12 * remaining.abs().max(1e-300) {
                continue;
            }
            if level == 0 {
                if x.iter().any(|&c| c != 0) {
                    out.push(x.clone());
                }
            } else {
                rec(level - 1, n, q, remaining - used, x, out);
            }
        }
        x[level] = 0;
    }
    rec(n - 1, n, &q, bound, &mut x, &mut out);
    out
}

/// Exact successive minima by reduction followed by enumeration of every
/// lattice vector no longer than the longest reduced basis vector. Among
/// vectors of equal length the one whose coordinate vector (taken with a
/// negative leading entry) is lexicographically smallest wins; witnesses are
/// reported with a positive leading coordinate.
pub fn successive_minima(l: &Lattice) -> Result<MinimaProfile> {
    let n = l.dim();
    if n > MAX_MINIMA_DIM {
        return Err(Error::DimensionTooLarge {
            dim: n,
            limit: MAX_MINIMA_DIM,
        });
    }
    let (reduced, red_coeffs) = lll(l);
    let r2 = reduced.iter().map(|v| norm_sq(v)).max().expect("n >= 1");

    let mut cands: Vec<(Rat, Vec<BigInt>)> = short_vectors(&reduced, &r2)
        .into_iter()
        .filter_map(|x| {
            let c: Vec<BigInt> = (0..n)
                .map(|i| {
                    (0..n).fold(BigInt::zero(), |acc, k| acc + &red_coeffs[k][i] * x[k])
                })
                .collect();
            let leading_negative = c.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative());
            if !leading_negative {
                return None;
            }
            let len = norm_sq(&l.point(&c));
            (len <= r2).then_some((len, c))
        })
        .collect();
    cands.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));

    let mut squared = Vec::with_capacity(n);
    let mut coefficients: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    let mut echelon: Vec<Vec<Rat>> = Vec::new();
    for (len, c) in cands {
        if coefficients.len() == n {
            break;
        }
        let v: Vec<Rat> = c.iter().map(|x| Rat::from_integer(x.clone())).collect();
        if let Some(row) = reduce_against(&echelon, v) {
            echelon.push(row);
            squared.push(len);
            coefficients.push(c.into_iter().map(|x| -x).collect());
        }
    }
    if coefficients.len() != n {
        return Err(Error::Internal(
            "minima enumeration found fewer than n independent vectors".into(),
        ));
    }
    let witnesses = coefficients.iter().map(|c| l.point(c)).collect();
    Ok(MinimaProfile {
        squared,
        witnesses,
        coefficients,
    })
}

/// Reduces `v` against echelon rows; returns the remainder if nonzero.
fn reduce_against(echelon: &[Vec<Rat>], mut v: Vec<Rat>) -> Option<Vec<Rat>> {
    for row in echelon {
        let p = row.iter().position(|x| !x.is_zero()).expect("nonzero row");
        if !v[p].is_zero() {
            let f = &v[p] / &row[p];
            for (x, y) in v.iter_mut().zip(row) {
                *x -= &f * y;
            }
        }
    }
    v.iter().any(|x| !x.is_zero()).then_some(v)
}

/// A basis `v_1..v_n` of the lattice with `|v_i| <= i * lambda_i`, built
/// from the minima witnesses by saturation: `v_i` completes `v_1..v_{i-1}`
/// to a basis of the lattice points in `span(u_1..u_i)` and is then reduced
/// modulo `u_1..u_{i-1}`.
pub fn mahler_basis(l: &Lattice, minima: &MinimaProfile) -> Result<Lattice> {
    let n = l.dim();
    // C has the witness coordinates as columns; U C = R upper triangular,
    // so the columns a_k of A = U^{-1} satisfy u_i = sum_{k<=i} R_ki a_k.
    let c: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| minima.coefficients[j][i].clone()).collect())
        .collect();
    let (u, r) = hermite_rows(&c);
    let a = Matrix::from_int_rows(&u)
        .inverse()
        .ok_or_else(|| Error::Internal("witness transform is singular".into()))?;
    let b = l.basis();

    let mut coords: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 0..n {
        if r[i][i].is_one() {
            coords.push(minima.coefficients[i].clone());
            continue;
        }
        let ai: Vec<BigInt> = a.col(i).iter().map(|x| x.to_integer()).collect();
        let ai_vec = b.mul_int_vec(&ai);
        // Project onto span(u_1..u_{i-1}) in the witness basis and round.
        let gram: Vec<Vec<Rat>> = (0..i)
            .map(|p| (0..i).map(|q| dot(&minima.witnesses[p], &minima.witnesses[q])).collect())
            .collect();
        let rhs: Vec<Rat> = (0..i).map(|p| dot(&minima.witnesses[p], &ai_vec)).collect();
        let mu = solve(gram, rhs)?;
        let mut vi = ai;
        for (p, m) in mu.iter().enumerate() {
            let k = round_rat(m);
            for (x, w) in vi.iter_mut().zip(&minima.coefficients[p]) {
                *x -= &k * w;
            }
        }
        coords.push(vi);
    }

    let coeff_matrix = Matrix::from_cols(
        &coords
            .iter()
            .map(|c| c.iter().map(|x| Rat::from_integer(x.clone())).collect())
            .collect::<Vec<_>>(),
    );
    if coeff_matrix.det().abs() != Rat::one() {
        return Err(Error::Internal("Mahler basis is not unimodular".into()));
    }
    let vectors: Vec<Vec<Rat>> = coords.iter().map(|c| l.point(c)).collect();
    for (i, v) in vectors.iter().enumerate() {
        let k = Rat::from_integer(BigInt::from((i + 1) * (i + 1)));
        if norm_sq(v) > k * &minima.squared[i] {
            return Err(Error::Internal(format!(
                "Mahler bound fails for v_{}: |v|^2 = {} > {}^2 * {}",
                i + 1,
                fmt_rat(&norm_sq(v)),
                i + 1,
                fmt_rat(&minima.squared[i])
            )));
        }
    }
    Lattice::from_columns(&vectors)
}

fn solve(mut m: Vec<Vec<Rat>>, mut rhs: Vec<Rat>) -> Result<Vec<Rat>> {
    let n = rhs.len();
    for col in 0..n {
        let p = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| Error::Internal("singular Gram matrix".into()))?;
        m.swap(col, p);
        rhs.swap(col, p);
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = &m[r][col] / &m[col][col];
                let pivot_row = m[col].clone();
                for (x, y) in m[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
                let rc = rhs[col].clone();
                rhs[r] -= f * rc;
            }
        }
    }
    Ok((0..n).map(|i| &rhs[i] / &m[i][i]).collect())
}

/// The automorphism `Psi` with `Psi(v_i) = e_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiTransform {
    pub matrix: Matrix,
    /// Columns are the Mahler basis vectors.
    pub inverse: Matrix,
}

impl PsiTransform {
    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        self.matrix.mul_vec(x)
    }
}

pub fn psi_transform(l: &Lattice, mahler: &Lattice) -> Result<PsiTransform> {
    let inverse = mahler.basis().clone();
    let matrix = inverse
        .inverse()
        .ok_or_else(|| Error::Internal("Mahler basis is singular".into()))?;
    let det_psi = matrix.det().abs();
    if det_psi.recip() != determinant(l) {
        return Err(Error::Internal("|det Psi|^-1 differs from det Lambda".into()));
    }
    Ok(PsiTransform { matrix, inverse })
}

/// Minimum, Mahler basis and `Psi` of one lattice, computed together.
#[derive(Clone, Debug)]
pub struct LatticeProfile {
    pub lattice: Lattice,
    pub det: Rat,
    pub minima: MinimaProfile,
    pub mahler: Lattice,
    pub psi: PsiTransform,
}

impl LatticeProfile {
    pub fn new(l: &Lattice) -> Result<Self> {
        let minima = successive_minima(l)?;
        let mahler = mahler_basis(l, &minima)?;
        let psi = psi_transform(l, &mahler)?;
        Ok(Self {
            lattice: l.clone(),
            det: determinant(l),
            minima,
            mahler,
            psi,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sandwich {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub ok: bool,
}

/// `2^n det / n! <= lambda_1 ... lambda_n B_n <= 2^n det`.
pub fn minkowski_sandwich(l: &Lattice, minima: &MinimaProfile) -> Sandwich {
    let n = l.dim();
    let det = to_f64(&determinant(l));
    let upper = 2f64.powi(n as i32) * det;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let lower = upper / fact;
    let middle = minima.product(n) * unit_ball_volume(n);
    let tol = 1e-12;
    let ok = lower <= middle * (1.0 + tol) && middle <= upper * (1.0 + tol);
    Sandwich {
        lower,
        middle,
        upper,
        ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{int, rat};

    fn lat(cols: &[&[i64]]) -> Lattice {
        Lattice::from_columns(
            &cols
                .iter()
                .map(|c| c.iter().map(|&v| int(v)).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(determinant(&Lattice::integer(3)), int(1));
        assert_eq!(determinant(&Lattice::diagonal(&[int(2), int(3)]).unwrap()), int(6));
        assert_eq!(determinant(&lat(&[&[1, 0], &[1, 2]])), int(2));
    }

    #[test]
    fn singular_basis_rejected() {
        assert!(Lattice::from_columns(&[vec![int(1), int(2)], vec![int(2), int(4)]]).is_err());
    }

    #[test]
    fn minima_of_standard_and_diagonal_lattices() {
        let m = successive_minima(&Lattice::integer(3)).unwrap();
        assert_eq!(m.squared, vec![int(1); 3]);
        for (i, w) in m.witnesses.iter().enumerate() {
            for (j, x) in w.iter().enumerate() {
                assert_eq!(x.abs(), int((i == j) as i64));
            }
        }
        let d = successive_minima(&Lattice::diagonal(&[int(5), int(2)]).unwrap()).unwrap();
        assert_eq!(d.squared, vec![int(4), int(25)]);
        assert_eq!(d.minima(), vec![2.0, 5.0]);
    }

    #[test]
    fn minima_with_half_integer_basis() {
        // Basis (1,0), (1/2,1/2): shortest vectors have squared length 1/2.
        let l = Lattice::from_columns(&[vec![int(1), int(0)], vec![rat(1, 2), rat(1, 2)]]).unwrap();
        let m = successive_minima(&l).unwrap();
        assert_eq!(m.squared, vec![rat(1, 2), rat(1, 2)]);
        let v = mahler_basis(&l, &m).unwrap();
        assert!(l.same_lattice(&v));
    }

    #[test]
    fn mahler_basis_examples() {
        let z = Lattice::integer(3);
        let m = successive_minima(&z).unwrap();
        let v = mahler_basis(&z, &m).unwrap();
        assert_eq!(v.basis().det().abs(), int(1));
        let d = Lattice::diagonal(&[int(2), int(3)]).unwrap();
        let md = successive_minima(&d).unwrap();
        let vd = mahler_basis(&d, &md).unwrap();
        assert_eq!(vd.basis_vectors(), vec![vec![int(2), int(0)], vec![int(0), int(3)]]);
    }

    #[test]
    fn psi_examples() {
        let z = Lattice::integer(2);
        let p = LatticeProfile::new(&z).unwrap();
        assert_eq!(p.psi.matrix, Matrix::identity(2));
        let d = Lattice::diagonal(&[int(2), int(3)]).unwrap();
        let p = LatticeProfile::new(&d).unwrap();
        assert_eq!(p.psi.matrix, Matrix::diagonal(&[rat(1, 2), rat(1, 3)]));
    }

    #[test]
    fn saturation_needed_case() {
        // Z^4 together with (1/2,1/2,1/2,1/2): the unit vectors are valid
        // minima witnesses but span a sublattice of index 2.
        let h = vec![rat(1, 2); 4];
        let mut cols: Vec<Vec<Rat>> = (0..3)
            .map(|i| (0..4).map(|j| int((i == j) as i64)).collect())
            .collect();
        cols.push(h);
        let l = Lattice::from_columns(&cols).unwrap();
        let e4 = vec![BigInt::from(-1), BigInt::from(-1), BigInt::from(-1), BigInt::from(2)];
        let mut coefficients: Vec<Vec<BigInt>> = (0..3)
            .map(|i| (0..4).map(|j| BigInt::from((i == j) as i32)).collect())
            .collect();
        coefficients.push(e4);
        let witnesses = coefficients.iter().map(|c| l.point(c)).collect();
        let minima = MinimaProfile {
            squared: vec![int(1); 4],
            witnesses,
            coefficients,
        };
        let v = mahler_basis(&l, &minima).unwrap();
        assert!(l.same_lattice(&v));
        assert_eq!(norm_sq(&v.basis_vectors()[3]), int(1));

        let m = successive_minima(&l).unwrap();
        assert_eq!(m.squared, vec![int(1); 4]);
        let v = mahler_basis(&l, &m).unwrap();
        assert!(l.same_lattice(&v));
    }

    #[test]
    fn sandwich_examples() {
        let z = Lattice::integer(2);
        let s = minkowski_sandwich(&z, &successive_minima(&z).unwrap());
        assert!(s.ok);
        assert_eq!((s.lower, s.upper), (2.0, 4.0));
        assert!((s.middle - std::f64::consts::PI).abs() < 1e-15);
        let d = Lattice::diagonal(&[int(1), int(10)]).unwrap();
        let s = minkowski_sandwich(&d, &successive_minima(&d).unwrap());
        assert!(s.ok);
        assert_eq!((s.lower, s.upper), (20.0, 40.0));
    }

    #[test]
    fn dimension_limit() {
        assert!(matches!(
            successive_minima(&Lattice::integer(7)),
            Err(Error::DimensionTooLarge { dim: 7, .. })
        ));
    }

    #[test]
    fn lattice_file_round_trip() {
        let l = Lattice::from_columns(&[vec![int(1), int(0)], vec![rat(1, 2), rat(3, 2)]]).unwrap();
        let text = l.to_spec_text();
        assert_eq!(text, "dim 2\n1 1/2\n0 3/2\n");
        assert_eq!(parse_lattice(&text).unwrap(), l);
        assert!(matches!(parse_lattice("dim 2\n1 0\n"), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(parse_lattice("2\n"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn sqrt_of_large_rationals() {
        let q = Rat::new(BigInt::from(10).pow(40), BigInt::from(1));
        assert!((sqrt_rat(&q) - 1e20).abs() / 1e20 < 1e-15);
        assert_eq!(sqrt_rat(&rat(9, 4)), 1.5);
    }
}
