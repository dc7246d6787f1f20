use std::path::PathBuf;
use std::process::{Command, Output};

fn latcount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latcount"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("latcount-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn sharpness_count_prints_closed_form() {
    let o = latcount(&["count", "--catalog", "sharpness3", "--lattice", "diag(1,1,1)", "--T", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "12");
}

#[test]
fn missing_family_file_is_a_syntax_error() {
    let o = latcount(&["count", "--family", "/definitely/not/here.spec", "--T", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.starts_with("SyntaxError"), "{err}");
}

#[test]
fn malformed_family_reports_its_class() {
    let path = scratch("bad.spec");
    std::fs::write(&path, "params m=1\nvars n=2\nbound R = T1\nformula x1 ^ <= 0\n").unwrap();
    let o = latcount(&["count", "--family", path.to_str().unwrap(), "--T", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("SyntaxError"));

    std::fs::write(&path, "params m=1\nvars n=2\nbound R = T1\nformula x3 <= 0\n").unwrap();
    let o = latcount(&["count", "--family", path.to_str().unwrap(), "--T", "1"]);
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("ArityError"));
}

#[test]
fn lattice_dimension_must_match() {
    let o = latcount(&["count", "--catalog", "disk2d", "--lattice", "diag(1,1,1)", "--T", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("DimensionMismatch"));
}

#[test]
fn family_and_lattice_files() {
    let fam = scratch("disk.spec");
    std::fs::write(&fam, "# unit disc scaled by T\nparams m=1\nvars n=2\nbound R = T1\nformula x1^2 + x2^2 - T1^2 <= 0\n").unwrap();
    let lat = scratch("half.lat");
    std::fs::write(&lat, "dim 2\n1/2 0\n0 1/2\n").unwrap();
    let o = latcount(&["count", "--family", fam.to_str().unwrap(), "--lattice", lat.to_str().unwrap(), "--T", "1"]);
    assert!(o.status.success(), "{:?}", o);
    // Points of Z^2 in the disc of radius 2.
    assert_eq!(stdout(&o).trim(), "13");
}

#[test]
fn verify_sweep_rows_are_consistent() {
    let o = latcount(&[
        "verify", "--catalog", "disk2d", "--sweep", "1:20:1", "--rotations", "4", "--lines", "8", "--seed", "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 20);
    for r in &rows {
        let ratio: f64 = r[col("ratio_main")].parse().unwrap();
        let dev: f64 = r[col("deviation")].parse().unwrap();
        let budget: f64 = r[col("budget_main")].parse().unwrap();
        assert!(ratio.is_finite());
        assert!(((dev / budget) - ratio).abs() <= 1e-14 * ratio.abs().max(1e-300));
    }
}

#[test]
fn verify_output_is_byte_identical() {
    let a = scratch("a.csv");
    let b = scratch("b.csv");
    for out in [&a, &b] {
        let o = latcount(&[
            "verify", "--catalog", "annulus2d", "--lattice", "2,1;0,3", "--sweep", "2:6:1/2", "--rotations", "4",
            "--lines", "8", "--seed", "9", "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn volume_and_davenport_tables() {
    let o = latcount(&["volume", "--catalog", "box2", "--T", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let vol: f64 = row[4].parse().unwrap();
    let err: f64 = row[5].parse().unwrap();
    assert!((vol - 9.0).abs() <= err + 1e-12);

    let o = latcount(&["davenport", "--catalog", "annulus2d", "--T", "4", "--lines", "16"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "2");
}

#[test]
fn catalog_lists_required_families() {
    let o = latcount(&["catalog"]);
    let text = stdout(&o);
    for name in ["disk2d", "box2", "box3", "ellipse2d", "annulus2d", "weilheight2", "weilheight3", "sharpness2", "sharpness3", "sharpness4", "rotated-box2d"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{name},"))), "{name}");
    }
    let weil = text.lines().find(|l| l.starts_with("weilheight2,")).unwrap();
    assert!(weil.contains("4 T log T + 4 T"));
    let disk = text.lines().find(|l| l.starts_with("disk2d,")).unwrap();
    assert!(disk.contains("pi T^2"));
    let sharp = text.lines().find(|l| l.starts_with("sharpness3,")).unwrap();
    assert!(sharp.contains("prod_(p<=j) ([T/lambda_p] + 1)"));
}
