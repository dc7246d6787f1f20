//! Built-in families with closed-form oracles.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::rat::{floor, fmt_rat, int, parse_rat, Rat};
use crate::semialg::{parse_family, FamilySpec};

/// Where a closed form comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Elementary geometry (areas of discs, boxes, ...).
    Elementary,
    /// An exact integral evaluated by hand.
    ExactIntegral,
    /// A closed-form lattice point count for the sharpness construction.
    SharpnessCount,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Elementary => "elementary geometry",
            Provenance::ExactIntegral => "exact integral",
            Provenance::SharpnessCount => "sharpness closed form",
        })
    }
}

type VolumeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type CountFn = Arc<dyn Fn(&Rat) -> u64 + Send + Sync>;

#[derive(Clone)]
pub struct VolumeOracle {
    pub formula: String,
    pub provenance: Provenance,
    /// Valid for `T >= valid_from`.
    pub valid_from: f64,
    eval: VolumeFn,
}

impl VolumeOracle {
    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
}

/// An exact count, valid on the lattice named in `lattice`.
#[derive(Clone)]
pub struct CountOracle {
    pub formula: String,
    pub lattice: String,
    pub provenance: Provenance,
    eval: CountFn,
}

impl CountOracle {
    pub fn eval(&self, t: &Rat) -> u64 {
        (self.eval)(t)
    }
}

#[derive(Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub family: FamilySpec,
    pub volume: Option<VolumeOracle>,
    pub count: Option<CountOracle>,
    /// The Davenport constant where it is known exactly.
    pub davenport_h: Option<usize>,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry").field("name", &self.name).finish_non_exhaustive()
    }
}

fn family(n: usize, bound: &str, formula: &str) -> FamilySpec {
    parse_family(&format!("params m=1\nvars n={n}\nbound R = {bound}\nformula {formula}\n"))
        .expect("catalog family parses")
}

fn volume(formula: &str, provenance: Provenance, valid_from: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Option<VolumeOracle> {
    Some(VolumeOracle {
        formula: formula.into(),
        provenance,
        valid_from,
        eval: Arc::new(f),
    })
}

fn entry(name: &str, description: &str, fam: FamilySpec, vol: Option<VolumeOracle>, h: Option<usize>) -> CatalogEntry {
    CatalogEntry {
        name: name.into(),
        description: description.into(),
        family: fam,
        volume: vol,
        count: None,
        davenport_h: h,
    }
}

/// The closed ball of radius `T` in `R^n`.
pub fn ball(n: usize) -> FamilySpec {
    let sum: Vec<String> = (1..=n).map(|i| format!("x{i}^2")).collect();
    family(n, "T1", &format!("{} - T1^2 <= 0", sum.join(" + ")))
}

/// The cube `[0, T]^n`.
pub fn cube(n: usize) -> FamilySpec {
    let atoms: Vec<String> = (1..=n)
        .flat_map(|i| [format!("(-x{i} <= 0)"), format!("(x{i} - T1 <= 0)")])
        .collect();
    family(n, "T1", &atoms.join(" & "))
}

/// `prod_{i in I} x_i^2 - T^2 <= 0` for every subset `I` of `{1..n}`.
pub fn weil_height(n: usize) -> FamilySpec {
    let atoms: Vec<String> = (0u32..1 << n)
        .map(|mask| {
            let factors: Vec<String> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| format!("x{}^2", i + 1))
                .collect();
            let lead = if factors.is_empty() { "1".to_string() } else { factors.join("*") };
            format!("({lead} - T1^2 <= 0)")
        })
        .collect();
    family(n, "T1", &atoms.join(" & "))
}

/// The union over `j = 1..n-1` of `[0,T]^j x {0}^(n-j) + lambda_j e_j`,
/// for `T >= 0`.
pub fn sharpness(lambda: &[Rat]) -> Result<FamilySpec> {
    let n = lambda.len();
    if n < 2 {
        return Err(Error::InvalidInput("sharpness family needs n >= 2".into()));
    }
    if lambda.iter().any(|l| !l.is_positive()) {
        return Err(Error::InvalidInput("sharpness parameters must be positive".into()));
    }
    let pieces: Vec<String> = (1..n)
        .map(|j| {
            let mut atoms = vec!["(-T1 <= 0)".to_string()];
            for p in 1..j {
                atoms.push(format!("(-x{p} <= 0)"));
                atoms.push(format!("(x{p} - T1 <= 0)"));
            }
            let l = fmt_rat(&lambda[j - 1]);
            atoms.push(format!("({l} - x{j} <= 0)"));
            atoms.push(format!("(x{j} - T1 - {l} <= 0)"));
            for p in j + 1..=n {
                atoms.push(format!("(x{p} = 0)"));
            }
            format!("({})", atoms.join(" & "))
        })
        .collect();
    let max = lambda.iter().max().expect("n >= 2");
    Ok(family(n, &format!("T1 + {}", fmt_rat(max)), &pieces.join(" | ")))
}

/// `sum_{j=1}^{n-1} prod_{p<=j} (floor(T / lambda_p) + 1)` for `T >= 0`.
pub fn sharpness_count(t: &Rat, lambda: &[Rat]) -> u64 {
    if t.is_negative() {
        return 0;
    }
    let mut total = 0u64;
    let mut prod = 1u64;
    for l in &lambda[..lambda.len() - 1] {
        let f: BigInt = floor(&(t / l)) + BigInt::from(1);
        prod *= f.to_u64().expect("count fits in u64");
        total += prod;
    }
    total
}

pub fn sharpness_entry(lambda: &[Rat]) -> Result<CatalogEntry> {
    let n = lambda.len();
    let fam = sharpness(lambda)?;
    let ls: Vec<String> = lambda.iter().map(fmt_rat).collect();
    let lam = lambda.to_vec();
    Ok(CatalogEntry {
        name: format!("sharpness{n}"),
        description: format!(
            "union of [0,T]^j x 0^(n-j) + lambda_j e_j, j = 1..{}, lambda = ({})",
            n - 1,
            ls.join(", ")
        ),
        family: fam,
        volume: volume("0", Provenance::Elementary, 0.0, |_| 0.0),
        count: Some(CountOracle {
            formula: format!("sum_(j=1)^({}) prod_(p<=j) ([T/lambda_p] + 1)", n - 1),
            lattice: format!("diag({})", ls.join(", ")),
            provenance: Provenance::SharpnessCount,
            eval: Arc::new(move |t| sharpness_count(t, &lam)),
        }),
        davenport_h: None,
    })
}

fn box_entry(n: usize) -> CatalogEntry {
    let mut e = entry(
        &format!("box{n}"),
        &format!("the cube [0,T]^{n}"),
        cube(n),
        volume(&format!("T^{n}"), Provenance::Elementary, 0.0, move |t| t.powi(n as i32)),
        Some(1),
    );
    e.count = Some(CountOracle {
        formula: format!("([T] + 1)^{n}"),
        lattice: format!("Z^{n}"),
        provenance: Provenance::Elementary,
        eval: Arc::new(move |t| {
            if t.is_negative() {
                0
            } else {
                (floor(t) + BigInt::from(1)).to_u64().unwrap().pow(n as u32)
            }
        }),
    });
    e
}

/// Every built-in family, with the sharpness families at `lambda = (1,...,1)`.
pub fn catalog() -> Vec<CatalogEntry> {
    let mut out = vec![
        entry(
            "disk2d",
            "the disc x1^2 + x2^2 <= T^2",
            ball(2),
            volume("pi T^2", Provenance::Elementary, 0.0, |t| std::f64::consts::PI * t * t),
            Some(1),
        ),
        entry(
            "ball3d",
            "the ball x1^2 + x2^2 + x3^2 <= T^2",
            ball(3),
            volume("4/3 pi T^3", Provenance::Elementary, 0.0, |t| 4.0 / 3.0 * std::f64::consts::PI * t.powi(3)),
            Some(1),
        ),
        box_entry(2),
        box_entry(3),
        entry(
            "ellipse2d",
            "the ellipse x1^2/4 + x2^2 <= T^2",
            family(2, "2*T1", "1/4*x1^2 + x2^2 - T1^2 <= 0"),
            volume("2 pi T^2", Provenance::Elementary, 0.0, |t| 2.0 * std::f64::consts::PI * t * t),
            Some(1),
        ),
        entry(
            "annulus2d",
            "the annulus T^2/4 <= x1^2 + x2^2 <= T^2",
            family(2, "T1", "(x1^2 + x2^2 - T1^2 <= 0) & (1/4*T1^2 - x1^2 - x2^2 <= 0)"),
            volume("3/4 pi T^2", Provenance::Elementary, 0.0, |t| 0.75 * std::f64::consts::PI * t * t),
            Some(2),
        ),
        entry(
            "rotated-box2d",
            "the square |3x1 + 4x2|/5 <= T, |-4x1 + 3x2|/5 <= T",
            family(
                2,
                "7/5*T1",
                "(3*x1 + 4*x2 - 5*T1 <= 0) & (-3*x1 - 4*x2 - 5*T1 <= 0) & (-4*x1 + 3*x2 - 5*T1 <= 0) & (4*x1 - 3*x2 - 5*T1 <= 0)",
            ),
            volume("4 T^2", Provenance::Elementary, 0.0, |t| 4.0 * t * t),
            Some(1),
        ),
        entry(
            "weilheight2",
            "prod_(i in I) x_i^2 <= T^2 for all I in {1,2}",
            weil_height(2),
            volume("4 T log T + 4 T", Provenance::ExactIntegral, 1.0, |t| 4.0 * t * t.ln() + 4.0 * t),
            Some(1),
        ),
        entry(
            "weilheight3",
            "prod_(i in I) x_i^2 <= T^2 for all I in {1,2,3}",
            weil_height(3),
            volume(
                "8 T + 16 T log T + 4 T (log T)^2",
                Provenance::ExactIntegral,
                1.0,
                |t| {
                    let l = t.ln();
                    8.0 * t + 16.0 * t * l + 4.0 * t * l * l
                },
            ),
            Some(1),
        ),
    ];
    for n in 2..=4 {
        out.push(sharpness_entry(&vec![int(1); n]).expect("valid parameters"));
    }
    out
}

/// Looks up a catalog name. Sharpness families accept parameters as
/// `sharpness3:1/2,1,1`.
pub fn lookup(name: &str) -> Result<CatalogEntry> {
    if let Some((base, params)) = name.split_once(':') {
        let n: usize = base
            .strip_prefix("sharpness")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::InvalidInput(format!("unknown catalog family '{name}'")))?;
        let lambda: Vec<Rat> = params.split(',').map(parse_rat).collect::<Result<_>>()?;
        if lambda.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: lambda.len(),
            });
        }
        return sharpness_entry(&lambda);
    }
    catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::InvalidInput(format!("unknown catalog family '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn names_present() {
        let names: Vec<String> = catalog().into_iter().map(|e| e.name).collect();
        for want in [
            "disk2d", "box2", "box3", "ellipse2d", "annulus2d", "rotated-box2d", "weilheight2",
            "weilheight3", "sharpness2", "sharpness3", "sharpness4",
        ] {
            assert!(names.iter().any(|n| n == want), "{want}");
        }
    }

    #[test]
    fn sharpness_closed_form() {
        // T = 2, lambda = (1,1,1): 3 + 9.
        assert_eq!(sharpness_count(&int(2), &[int(1), int(1), int(1)]), 12);
        assert_eq!(sharpness_count(&rat(5, 2), &[rat(1, 2), int(1), int(1)]), 6 + 18);
        assert_eq!(sharpness_count(&int(0), &[int(1), int(2)]), 1);
    }

    #[test]
    fn sharpness_membership() {
        let f = sharpness(&[int(1), int(2), int(3)]).unwrap();
        let t = [int(2)];
        // Piece 1: x1 in [1, 3], x2 = x3 = 0.
        assert!(f.fiber_membership(&t, &[int(3), int(0), int(0)]).unwrap());
        assert!(!f.fiber_membership(&t, &[rat(1, 2), int(0), int(0)]).unwrap());
        // Piece 2: x1 in [0, 2], x2 in [2, 4], x3 = 0.
        assert!(f.fiber_membership(&t, &[int(0), int(4), int(0)]).unwrap());
        assert!(!f.fiber_membership(&t, &[int(0), int(4), int(1)]).unwrap());
        assert_eq!(f.radius(&t).unwrap(), int(5));
    }

    #[test]
    fn lookup_with_parameters() {
        let e = lookup("sharpness3:1/2,1,1").unwrap();
        assert_eq!(e.count.unwrap().eval(&int(1)), 3 + 6);
        assert!(lookup("nosuch").is_err());
        assert!(lookup("sharpness3:1,1").is_err());
    }

    #[test]
    fn weil_oracle_values() {
        let e = lookup("weilheight2").unwrap();
        let v = e.volume.unwrap();
        assert!((v.eval(1.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn families_round_trip_through_text() {
        for e in catalog() {
            let again = parse_family(&e.family.to_spec_text()).unwrap();
            assert_eq!(again.to_spec_text(), e.family.to_spec_text(), "{}", e.name);
        }
    }
}
