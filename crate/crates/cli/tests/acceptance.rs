//! Acceptance criteria, one pass/fail line each.
//!
//! Criterion 4 cannot pass for n = 3: the exact three-dimensional Weil
//! height volume is 8T + 16T log T + 4T (log T)^2, so its ratio to
//! 8T (log T)^2 tends to 1/2. The check runs as stated and its failure is
//! expected; any other failure fails the suite.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use latcount::catalog::{self, lookup, sharpness, sharpness_count};
use latcount::counting::{count_points, count_points_with_budget};
use latcount::davenport::intervals_on_line;
use latcount::estimate::{
    check_psi_v, error_budget_davenport, error_budget_main, verify_main_theorem, VerifyOptions,
};
use latcount::lattice::{minkowski_sandwich, successive_minima, Lattice, LatticeProfile};
use latcount::matrix::{norm_sq, Matrix};
use latcount::rat::{int, rat, to_f64, Rat};
use latcount::semialg::FamilySpec;
use latcount::volume::{fiber_volume, vj_prime_sampled, vj_sum, Method, VolumeOptions};
use rand::Rng;
use support::*;

const EXPECTED_FAILURES: &[usize] = &[4];

/// Four-dimensional sharpness sweeps reach `203^4` candidates, above the
/// default cap; the cap is raised, the count stays exact.
const SHARPNESS_BUDGET: u128 = 10_000_000_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn sharpness_lambdas(n: usize) -> Vec<Vec<Rat>> {
    let mut half = vec![int(1); n];
    half[0] = rat(1, 2);
    vec![vec![int(1); n], (1..=n as i64).map(int).collect(), half]
}

/// Twenty rationals in [0, 100], including both ends and values where
/// `T / lambda_p` is an integer.
fn sharpness_sweep() -> Vec<Rat> {
    let mut ts = vec![int(0), rat(1, 2), int(3), int(50), int(100)];
    let mut r = rng(31);
    while ts.len() < 20 {
        let q = [3, 7, 100][r.random_range(0..3)];
        ts.push(rat(r.random_range(0..=100 * q), q));
    }
    ts
}

fn criterion_1() -> Outcome {
    let mut checked = 0;
    for n in 2..=4 {
        for lambda in sharpness_lambdas(n) {
            let fam = sharpness(&lambda).unwrap();
            let l = Lattice::diagonal(&lambda).unwrap();
            for t in sharpness_sweep() {
                let got = count_points_with_budget(&l, &fam, std::slice::from_ref(&t), SHARPNESS_BUDGET).unwrap().count;
                let want = sharpness_count(&t, &lambda);
                if got != want {
                    return outcome(false, format!("n={n} lambda={lambda:?} T={t}: count {got}, closed form {want}"));
                }
                checked += 1;
            }
        }
    }
    outcome(true, format!("{checked} exact counts equal the closed form"))
}

fn sharpness_volume_options(n: usize) -> VolumeOptions {
    VolumeOptions {
        resolution: [10, 10, 8, 6][n - 1],
        inner_resolution: 6,
        ..Default::default()
    }
}

fn criterion_2() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for n in 2..=4 {
        let opts = sharpness_volume_options(n);
        for lambda in sharpness_lambdas(n) {
            let fam = sharpness(&lambda).unwrap();
            let l = Lattice::diagonal(&lambda).unwrap();
            let minima = successive_minima(&l).unwrap().minima();
            let det = to_f64(&lambda.iter().product::<Rat>());
            for t in sharpness_sweep() {
                let ts = std::slice::from_ref(&t);
                let count = count_points_with_budget(&l, &fam, ts, SHARPNESS_BUDGET).unwrap().count as f64;
                let vol = fiber_volume(&fam, ts, &opts).unwrap().estimate;
                let upper: Vec<f64> = (0..n).map(|j| vj_sum(&fam, ts, j, &opts).unwrap().upper()).collect();
                // Distance from the count to the bracket of possible main terms.
                let (lo, hi) = (vol.lower() / det, vol.upper() / det);
                let deviation_low = (lo - count).max(count - hi).max(0.0);
                let rhs = 2f64.powi(-(n as i32)) * error_budget_main(&upper, &minima);
                worst = worst.min(deviation_low / rhs);
                if deviation_low < rhs {
                    return outcome(false, format!("n={n} lambda={lambda:?} T={t}: deviation {deviation_low} < {rhs}"));
                }
                checked += 1;
            }
        }
    }
    outcome(true, format!("{checked} points, smallest deviation / (2^-n budget) = {worst:.4}"))
}

fn criterion_3() -> Outcome {
    let f = catalog::weil_height(2);
    let opts = VolumeOptions {
        method: Method::MonteCarlo,
        samples: 1_000_000,
        seed: 42,
        ..Default::default()
    };
    let mut parts = Vec::new();
    let mut pass = true;
    for t in [4.0f64, 16.0, 64.0] {
        let v = fiber_volume(&f, &[int(t as i64)], &opts).unwrap().estimate;
        let exact = 4.0 * t * t.ln() + 4.0 * t;
        let within = (v.value - exact).abs() <= v.error;
        let tight = v.error <= 0.015 * exact;
        pass &= within && tight;
        parts.push(format!("T={t}: {:.3} +- {:.3} vs {exact:.3} ({:.2}%)", v.value, v.error, 100.0 * v.error / exact));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_4() -> Outcome {
    let ts = [1e2, 1e3, 1e4];
    let exact2 = lookup("weilheight2").unwrap().volume.unwrap();
    let exact3 = lookup("weilheight3").unwrap().volume.unwrap();
    let r2: Vec<f64> = ts.iter().map(|&t| exact2.eval(t) / (4.0 * t * t.ln())).collect();
    let ok2 = (0.9..=1.2).contains(&r2[1]) && r2.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    // Exact n = 3 formula against nested integration, then the asymptotic check.
    let nested: Vec<f64> = ts.iter().map(|&t| weil_volume_nested(3, t, 600)).collect();
    let oracle_ok = ts.iter().zip(&nested).all(|(&t, &v)| (exact3.eval(t) - v).abs() <= 0.05 * v);
    let r3: Vec<f64> = ts.iter().zip(&nested).map(|(&t, &v)| v / (8.0 * t * t.ln().powi(2))).collect();
    let ok3 = (0.9..=1.2).contains(&r3[1]) && r3.windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs());
    outcome(
        ok2 && ok3 && oracle_ok,
        format!(
            "n=2 ratios {:.4} {:.4} {:.4} ({}); n=3 nested-integration oracle {} ratios {:.4} {:.4} {:.4} ({})",
            r2[0],
            r2[1],
            r2[2],
            if ok2 { "ok" } else { "fail" },
            if oracle_ok { "agrees" } else { "disagrees" },
            r3[0],
            r3[1],
            r3[2],
            if ok3 { "ok" } else { "fail: ratio tends to 1/2" }
        ),
    )
}

fn main_theorem_cases() -> Vec<(&'static str, FamilySpec)> {
    ["disk2d", "box2", "annulus2d", "weilheight2"]
        .into_iter()
        .map(|n| (n, lookup(n).unwrap().family))
        .collect()
}

fn lattices_2d() -> Vec<(&'static str, Lattice)> {
    vec![
        ("Z^2", Lattice::integer(2)),
        ("diag(2,3)", Lattice::diagonal(&[int(2), int(3)]).unwrap()),
        ("sheared", sheared_lattice(17)),
    ]
}

fn criterion_5() -> Outcome {
    let opts = VerifyOptions {
        diagnostics: false,
        ..Default::default()
    };
    let sparse: Vec<Rat> = (1..=25).map(|k| int(2 * k)).collect();
    let dense: Vec<Rat> = (2..=50).map(int).collect();
    let mut lines = Vec::new();
    let mut pass = true;
    for (fname, fam) in main_theorem_cases() {
        for (lname, l) in lattices_2d() {
            let (_, a) = verify_main_theorem(&l, &fam, &sparse, &opts).unwrap();
            let (_, b) = verify_main_theorem(&l, &fam, &dense, &opts).unwrap();
            let slack = 0.2 * a.c_fit + a.error_contribution.max(b.error_contribution);
            let ok = a.c_fit.is_finite() && b.c_fit.is_finite() && (b.c_fit - a.c_fit).abs() <= slack;
            pass &= ok;
            lines.push(format!(
                "{fname}/{lname} {:.4}->{:.4} (err {:.4}){}",
                a.c_fit,
                b.c_fit,
                a.error_contribution.max(b.error_contribution),
                if ok { "" } else { " unstable" }
            ));
        }
    }
    outcome(pass, format!("cFit 25 points -> 49 points: {}", lines.join(", ")))
}

fn criterion_6() -> Outcome {
    let mut r = rng(606);
    let mut agree = 0;
    let mut pairs = 0;
    let mut max_degree = 0;
    while pairs < 200 {
        let f = random_factored_family(&mut r);
        let t = random_rational(&mut r, 2);
        let axis = r.random_range(0..f.n);
        let fixed: Vec<Rat> = (1..f.n).map(|_| random_rational(&mut r, 3)).collect();
        let line = f.family.restrict_to_axis_line(std::slice::from_ref(&t), axis, &fixed).unwrap();
        // A line along which every leaf vanishes is reported as degenerate;
        // such pairs are redrawn.
        let Ok(got) = intervals_on_line(&line) else { continue };
        pairs += 1;
        max_degree = max_degree.max(f.leaves.iter().map(|l| l.degree()).max().unwrap());
        if got == dense_interval_oracle(&f, &t, axis, &fixed, 10_000) {
            agree += 1;
        }
    }
    outcome(agree == pairs, format!("{agree}/{pairs} pairs agree (leaf degree up to {max_degree})"))
}

fn criterion_7() -> Outcome {
    let mut r = rng(707);
    let mut agree = 0;
    for _ in 0..50 {
        let b = random_int_basis(&mut r, 3, 5);
        let arr = [0, 1, 2].map(|i| [b[i][0], b[i][1], b[i][2]]);
        let l = Lattice::new(Matrix::from_rows(b.iter().map(|row| row.iter().map(|&v| int(v)).collect()).collect())).unwrap();
        let got = successive_minima(&l).unwrap().squared;
        let want: Vec<Rat> = brute_minima_3d(&arr, 50).iter().map(|&v| int(v)).collect();
        if got == want {
            agree += 1;
        }
    }
    outcome(agree == 50, format!("{agree}/50 bases match brute force over [-50,50]^3"))
}

fn criterion_8() -> Outcome {
    let corpus = lattice_corpus();
    let mut sandwich_ok = 0;
    let mut mahler_ok = 0;
    for l in &corpus {
        let p = LatticeProfile::new(l).unwrap();
        if minkowski_sandwich(l, &p.minima).ok {
            sandwich_ok += 1;
        }
        let bound_ok = p
            .mahler
            .basis_vectors()
            .iter()
            .enumerate()
            .all(|(i, v)| norm_sq(v) <= int(((i + 1) * (i + 1)) as i64) * &p.minima.squared[i]);
        if bound_ok {
            mahler_ok += 1;
        }
    }
    let n = corpus.len();
    outcome(
        sandwich_ok == n && mahler_ok == n && n >= 100,
        format!("{n} lattices: sandwich {sandwich_ok}/{n}, Mahler bound {mahler_ok}/{n}"),
    )
}

fn criterion_9() -> Outcome {
    let corpus = lattice_corpus();
    let opts = VolumeOptions {
        resolution: 6,
        inner_resolution: 6,
        max_evaluations: 1 << 18,
        ..Default::default()
    };
    let mut checks = 0;
    let mut worst: f64 = 0.0;
    for l in &corpus {
        let n = l.dim();
        let p = LatticeProfile::new(l).unwrap();
        for fam in [catalog::ball(n), catalog::cube(n)] {
            for j in 1..n {
                let c = check_psi_v(&p, &fam, &[int(2)], j, &opts).unwrap();
                if !c.ok {
                    return outcome(false, format!("lattice {:?} j={j}: lhs {:?} rhs {:?}", l.basis(), c.lhs, c.rhs));
                }
                if c.rhs.value > 0.0 {
                    worst = worst.max(c.lhs.value / c.rhs.value);
                }
                checks += 1;
            }
        }
    }
    outcome(true, format!("{checks} checks, largest lhs/rhs = {worst:.4}"))
}

fn criterion_10() -> Outcome {
    let opts = VolumeOptions::default();
    let mut tightest: f64 = 0.0;
    let mut checks = 0;
    for name in ["disk2d", "box2", "rotated-box2d", "weilheight2"] {
        let fam = lookup(name).unwrap().family;
        for t in [1, 2, 4, 8, 16, 32] {
            let ts = [int(t)];
            let v1 = vj_sum(&fam, &ts, 1, &opts).unwrap();
            let s = vj_prime_sampled(&fam, &ts, 1, 512, &opts).unwrap();
            let ratio = s.max / v1.lower();
            tightest = tightest.max(ratio);
            if s.max > 4.0 * v1.lower() {
                return outcome(false, format!("{name} T={t}: sampled V'_1 {} > 4 V_1 = {}", s.max, 4.0 * v1.lower()));
            }
            checks += 1;
        }
    }
    outcome(true, format!("{checks} points, largest sampled V'_1 / V_1 = {tightest:.4}"))
}

fn criterion_11() -> Outcome {
    let fam = catalog::ball(2);
    let l = Lattice::integer(2);
    let opts = VolumeOptions::default();
    let mut worst: f64 = 0.0;
    for t in 1..=50 {
        let ts = [int(t)];
        let count = count_points(&l, &fam, &ts).unwrap().count as f64;
        let vol = fiber_volume(&fam, &ts, &opts).unwrap();
        let v1 = vj_sum(&fam, &ts, 1, &opts).unwrap();
        let budget = error_budget_davenport(1, &[1.0, v1.lower()]);
        for end in [vol.inner.unwrap(), vol.outer.unwrap()] {
            let dev = (count - end).abs();
            worst = worst.max(dev / budget);
            if dev > budget {
                return outcome(false, format!("T={t}: |{count} - {end}| > {budget}"));
            }
        }
    }
    outcome(true, format!("T = 1..50, largest deviation / budget = {worst:.4}"))
}

fn criterion_12() -> Outcome {
    let dir = std::env::temp_dir().join(format!("latcount-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str| {
        let out = dir.join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_latcount"))
            .args([
                "verify", "--catalog", "weilheight2", "--lattice", "1,3/7;0,1", "--sweep", "2:8:1", "--method", "mc",
                "--samples", "20000", "--rotations", "4", "--lines", "32", "--seed", "42", "--out",
            ])
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("first.csv"), run("second.csv"));
    outcome(a == b && !a.is_empty(), format!("{} bytes, identical: {}", a.len(), a == b))
}

#[test]
fn acceptance_criteria() {
    let criteria: [fn() -> Outcome; 12] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
        criterion_12,
    ];
    let mut failed = Vec::new();
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = c();
        let secs = start.elapsed().as_secs_f64();
        // Written past the test harness's capture so the lines always show.
        let line = format!("criterion {:2}: {} ({secs:.1}s) {}\n", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        std::io::stderr().write_all(line.as_bytes()).unwrap();
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert_eq!(failed, EXPECTED_FAILURES, "unexpected set of failing criteria");
}
