//! `latcount`: lattice point counts, volumes, Davenport estimates and
//! verification sweeps for semialgebraic families.

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use latcount::catalog::catalog;
use latcount::counting::count_points;
use latcount::davenport::{estimate_h, DavenportOptions};
use latcount::estimate::{parse_sweep, verify_main_theorem, VerifyOptions};
use latcount::rat::Rat;
use latcount::semialg::FamilySpec;
use latcount::volume::{volume_report, Method, VolumeOptions};

use input::{load_family, load_lattice, parse_params, CliError, CliResult};
use output::{num, opt, params, Table};

#[derive(Parser)]
#[command(name = "latcount", version, about = "Lattice points in semialgebraic families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact lattice point counts.
    Count(Common),
    /// Fiber and projection volumes.
    Volume(Common),
    /// Sampled Davenport constant.
    Davenport(Common),
    /// Count versus volume with error budgets over a sweep.
    Verify(Common),
    /// List the built-in families.
    Catalog,
}

#[derive(Args)]
struct Common {
    /// Family spec file.
    #[arg(long)]
    family: Option<PathBuf>,
    /// Built-in family name, e.g. disk2d or sharpness3:1/2,1,1.
    #[arg(long)]
    catalog: Option<String>,
    /// Lattice file, `Z`, `diag(a,b,..)` or inline rows `a,b;c,d`.
    #[arg(long)]
    lattice: Option<String>,
    /// Parameter value(s), comma-separated rationals.
    #[arg(long = "T")]
    t: Option<String>,
    /// Sweep `start:end:step` or a comma-separated list.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, default_value = "grid")]
    method: String,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Grid cells per axis are 2^resolution.
    #[arg(long, default_value_t = 10)]
    resolution: u32,
    /// Cap on grid cells or samples per volume.
    #[arg(long, default_value_t = 1 << 24)]
    budget: u64,
    /// Random lines per axis for Davenport estimates.
    #[arg(long, default_value_t = 256)]
    lines: usize,
    /// Random frames for rotated projections.
    #[arg(long)]
    rotations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the Davenport and rotated-frame budgets in `verify`.
    #[arg(long)]
    no_diagnostics: bool,
    /// Output CSV path (standard output if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn family(&self) -> CliResult<(String, FamilySpec)> {
        load_family(self.family.as_deref(), self.catalog.as_deref())
    }

    fn points(&self, f: &FamilySpec) -> CliResult<Vec<Vec<Rat>>> {
        match (&self.t, &self.sweep) {
            (Some(t), None) => Ok(vec![parse_params(t, f.num_params())?]),
            (None, Some(s)) => {
                if f.num_params() != 1 {
                    return Err(latcount::Error::InvalidInput("sweeps need a one-parameter family".into()).into());
                }
                Ok(parse_sweep(s)?.into_iter().map(|t| vec![t]).collect())
            }
            _ => Err(CliError {
                class: "InvalidInput",
                message: "give exactly one of --T and --sweep".into(),
            }),
        }
    }

    fn volume_options(&self) -> CliResult<VolumeOptions> {
        Ok(VolumeOptions {
            method: self.method.parse::<Method>()?,
            samples: self.samples,
            resolution: self.resolution,
            max_evaluations: self.budget,
            seed: self.seed,
            ..Default::default()
        })
    }

    fn davenport_options(&self) -> DavenportOptions {
        DavenportOptions {
            lines_per_axis: self.lines,
            seed: self.seed,
            ..Default::default()
        }
    }
}

fn count(c: &Common) -> CliResult<()> {
    let (_, f) = c.family()?;
    let (_, l) = load_lattice(c.lattice.as_deref(), f.num_vars())?;
    let points = c.points(&f)?;
    if c.t.is_some() && c.out.is_none() {
        println!("{}", count_points(&l, &f, &points[0])?.count);
        return Ok(());
    }
    let header = ["T", "count", "enumerated", "boundary_hits"].map(String::from);
    let mut table = Table::create(c.out.as_deref(), &header)?;
    for t in &points {
        let r = count_points(&l, &f, t)?;
        table.row(&[params(t), r.count.to_string(), r.enumerated.to_string(), r.boundary_hits.to_string()])?;
    }
    Ok(table.finish()?)
}

fn set_name(set: &[usize]) -> String {
    set.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(".")
}

fn volume(c: &Common) -> CliResult<()> {
    let (_, f) = c.family()?;
    let n = f.num_vars();
    let opts = c.volume_options()?;
    let points = c.points(&f)?;
    let mut header: Vec<String> = ["T", "method", "samples", "resolution", "volume", "volume_err", "volume_inner", "volume_outer"]
        .map(String::from)
        .to_vec();
    header.extend((1..n).flat_map(|j| [format!("V_{j}"), format!("V_{j}_err")]));
    let sets: Vec<Vec<usize>> = (1..n).flat_map(|j| latcount::volume::index_sets(n, j)).collect();
    header.extend(sets.iter().flat_map(|s| [format!("P_{}", set_name(s)), format!("P_{}_err", set_name(s))]));
    header.push("seed".into());
    let mut table = Table::create(c.out.as_deref(), &header)?;
    for t in &points {
        let r = volume_report(&f, t, &opts)?;
        let mut row = vec![
            params(t),
            r.method.to_string(),
            r.samples.to_string(),
            r.resolution.to_string(),
            num(r.total.estimate.value),
            num(r.total.estimate.error),
            opt(r.total.inner.map(num)),
            opt(r.total.outer.map(num)),
        ];
        row.extend(r.vj[1..].iter().flat_map(|e| [num(e.value), num(e.error)]));
        row.extend(sets.iter().flat_map(|s| {
            let e = r.projections[s];
            [num(e.value), num(e.error)]
        }));
        row.push(r.seed.to_string());
        table.row(&row)?;
    }
    Ok(table.finish()?)
}

fn davenport(c: &Common) -> CliResult<()> {
    let (_, f) = c.family()?;
    let n = f.num_vars();
    let opts = c.davenport_options();
    let points = c.points(&f)?;
    let mut header: Vec<String> = ["T", "h_full", "h_overall", "lines_sampled"].map(String::from).to_vec();
    let keys: Vec<(Vec<usize>, usize)> = (1..n)
        .flat_map(|j| latcount::volume::index_sets(n, j))
        .flat_map(|s| s.clone().into_iter().map(move |a| (s.clone(), a)))
        .collect();
    header.extend(keys.iter().map(|(s, a)| format!("h_P_{}_x{}", set_name(s), a + 1)));
    header.push("seed".into());
    let mut table = Table::create(c.out.as_deref(), &header)?;
    for t in &points {
        let e = estimate_h(&f, t, &opts)?;
        let mut row = vec![params(t), e.h_full.to_string(), e.h_overall.to_string(), e.lines_sampled.to_string()];
        row.extend(keys.iter().map(|k| e.h_proj[k].to_string()));
        row.push(e.seed.to_string());
        table.row(&row)?;
    }
    Ok(table.finish()?)
}

fn verify(c: &Common) -> CliResult<()> {
    let (family_name, f) = c.family()?;
    let n = f.num_vars();
    let (lattice_name, l) = load_lattice(c.lattice.as_deref(), n)?;
    let sweep: Vec<Rat> = c.points(&f)?.into_iter().map(|mut t| t.remove(0)).collect();
    let opts = VerifyOptions {
        volume: c.volume_options()?,
        davenport: c.davenport_options(),
        rotations: c.rotations.unwrap_or(64),
        diagnostics: !c.no_diagnostics,
        ..Default::default()
    };
    let (reports, fit) = verify_main_theorem(&l, &f, &sweep, &opts)?;
    let mut header: Vec<String> = ["T", "count", "volume", "volume_err", "detLambda", "mainTerm", "deviation"]
        .map(String::from)
        .to_vec();
    header.extend((1..n).map(|j| format!("V_{j}")));
    header.extend((1..=n).map(|i| format!("lambda_{i}")));
    header.extend(
        ["budget_main", "budget_davenport", "budget_thunder", "h_full", "h_overall", "ratio_main", "seed"].map(String::from),
    );
    let mut table = Table::create(c.out.as_deref(), &header)?;
    for r in &reports {
        let mut row = vec![
            params(&r.t),
            r.count.to_string(),
            num(r.volume.estimate.value),
            num(r.volume.estimate.error),
            output::rat(&r.det),
            num(r.main_term),
            num(r.deviation),
        ];
        row.extend(r.vj[1..].iter().map(|e| num(e.value)));
        row.extend(r.minima.iter().map(|&x| num(x)));
        row.extend([
            num(r.budget_main),
            opt(r.budget_davenport.map(num)),
            opt(r.budget_thunder.map(num)),
            opt(r.h_full),
            opt(r.h_overall),
            num(r.ratio_main),
            r.seed.to_string(),
        ]);
        table.row(&row)?;
    }
    table.finish()?;
    eprintln!(
        "family {family_name} lattice {lattice_name}: c_fit {} over {} points, error-bar contribution {}, {} inconclusive",
        num(fit.c_fit),
        reports.len(),
        num(fit.error_contribution),
        fit.inconclusive.len()
    );
    Ok(())
}

fn list_catalog() -> CliResult<()> {
    let header = ["name", "n", "bound", "volume", "volume_source", "count", "count_lattice", "count_source", "davenport_h", "description"]
        .map(String::from);
    let mut table = Table::create(None, &header)?;
    for e in catalog() {
        let (vf, vp) = e
            .volume
            .as_ref()
            .map(|v| (v.formula.clone(), v.provenance.to_string()))
            .unwrap_or_default();
        let (cf, cl, cp) = e
            .count
            .as_ref()
            .map(|o| (o.formula.clone(), o.lattice.clone(), o.provenance.to_string()))
            .unwrap_or_default();
        table.row(&[
            e.name.clone(),
            e.family.num_vars().to_string(),
            e.family.bound().to_string(),
            vf,
            vp,
            cf,
            cl,
            cp,
            opt(e.davenport_h),
            e.description.clone(),
        ])?;
    }
    Ok(table.finish()?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Count(c) => count(c),
        Command::Volume(c) => volume(c),
        Command::Davenport(c) => davenport(c),
        Command::Verify(c) => verify(c),
        Command::Catalog => list_catalog(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
