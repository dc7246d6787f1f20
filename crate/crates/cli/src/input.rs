use std::fmt;
use std::path::Path;

use latcount::catalog;
use latcount::lattice::{parse_lattice, Lattice};
use latcount::rat::{parse_rat, Rat};
use latcount::semialg::{parse_family, FamilySpec};

/// A failure reported as `Class: message` with exit status 2.
#[derive(Debug)]
pub struct CliError {
    pub class: &'static str,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.class, self.message)
    }
}

impl From<latcount::Error> for CliError {
    fn from(e: latcount::Error) -> Self {
        Self {
            class: e.class(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            class: "IoError",
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError {
        class: "SyntaxError",
        message: format!("cannot read {}: {e}", path.display()),
    })
}

/// A family from a spec file or the catalog, with a display name.
pub fn load_family(path: Option<&Path>, name: Option<&str>) -> CliResult<(String, FamilySpec)> {
    match (path, name) {
        (Some(p), None) => Ok((p.display().to_string(), parse_family(&read(p)?)?)),
        (None, Some(n)) => Ok((n.to_string(), catalog::lookup(n)?.family)),
        _ => Err(CliError {
            class: "InvalidInput",
            message: "give exactly one of --family and --catalog".into(),
        }),
    }
}

/// A lattice from a file, `Z` (the integer lattice), `diag(a,b,...)`, or
/// inline rows such as `1,1/2;0,1` (columns are basis vectors).
pub fn load_lattice(arg: Option<&str>, n: usize) -> CliResult<(String, Lattice)> {
    let Some(arg) = arg else {
        return Ok((format!("Z^{n}"), Lattice::integer(n)));
    };
    let lattice = if Path::new(arg).is_file() {
        parse_lattice(&read(Path::new(arg))?)?
    } else if arg == "Z" || arg == format!("Z^{n}") {
        Lattice::integer(n)
    } else if let Some(inner) = arg.strip_prefix("diag(").and_then(|s| s.strip_suffix(')')) {
        let values: Vec<Rat> = inner.split(',').map(parse_rat).collect::<Result<_, _>>()?;
        Lattice::diagonal(&values)?
    } else if arg.contains(',') || arg.contains(';') {
        let rows: Vec<&str> = arg.split(';').collect();
        let mut text = format!("dim {}\n", rows.len());
        for r in rows {
            text.push_str(&r.replace(',', " "));
            text.push('\n');
        }
        parse_lattice(&text)?
    } else {
        read(Path::new(arg))?;
        unreachable!("reading a missing lattice file fails")
    };
    if lattice.dim() != n {
        return Err(latcount::Error::DimensionMismatch {
            expected: n,
            got: lattice.dim(),
        }
        .into());
    }
    Ok((arg.to_string(), lattice))
}

/// `--T` values: comma-separated rationals, one per family parameter.
pub fn parse_params(text: &str, m: usize) -> CliResult<Vec<Rat>> {
    let t: Vec<Rat> = text.split(',').map(parse_rat).collect::<Result<_, _>>()?;
    if t.len() != m {
        return Err(latcount::Error::DimensionMismatch { expected: m, got: t.len() }.into());
    }
    Ok(t)
}
