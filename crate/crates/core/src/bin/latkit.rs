use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use latkit::catalog::{self, Verdict};
use latkit::glue;
use latkit::harness::{self, Format, SuiteOptions};
use latkit::json::{matrix_to_json, JsonRational, LatticeJson};
use latkit::linalg::int_rat;
use latkit::{pair_sum, Isometry, IsometrySpec, Lattice, LatticeError};

#[derive(Parser)]
#[command(name = "latkit", version, about = "Exact lattice toolkit for the pair-sum construction K = M + N")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Double4,
    Search,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Rebuild the fixture cases and compare with their recorded invariants.
    Reproduce {
        #[arg(long, default_value = "all")]
        section: String,
        #[arg(long, value_enum, default_value = "text")]
        format: OutFormat,
        #[arg(long)]
        jobs: Option<usize>,
        /// Also run the theorem suites and conjugation checks.
        #[arg(long)]
        suites: bool,
    },
    /// Pair-sum of a lattice and an isometry.
    Construct {
        /// Catalog name or lattice JSON file.
        #[arg(long)]
        lattice: String,
        /// Isometry spec as inline JSON or a file.
        #[arg(long)]
        isometry: String,
    },
    /// Identify a lattice against the catalog.
    Identify {
        #[arg(long)]
        lattice: String,
    },
    /// Smith invariants of the Gram matrix and the discriminant group.
    Smith {
        #[arg(long)]
        lattice: String,
    },
    /// Integral overlattices by doubling order-4 cosets or by search.
    Overlattice {
        #[arg(long)]
        lattice: String,
        #[arg(long, value_enum)]
        strategy: Strategy,
        /// Index for `search`; number of doublings for `double4`.
        #[arg(long)]
        index: Option<u64>,
    },
    /// Tensor product of two lattices.
    Tensor {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
}

/// Errors from user input map to exit code 2.
enum Failure {
    Usage(String),
    Run(String),
}

impl From<LatticeError> for Failure {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Parse(_) | LatticeError::Lookup(_) | LatticeError::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_text(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))
}

fn load_lattice(arg: &str) -> CliResult<Lattice> {
    if Path::new(arg).is_file() {
        let j: LatticeJson =
            serde_json::from_str(&read_text(arg)?).map_err(|e| Failure::Usage(format!("{arg}: {e}")))?;
        Ok(j.to_lattice()?)
    } else {
        Ok(catalog::parse(arg)?)
    }
}

fn load_spec(arg: &str) -> CliResult<IsometrySpec> {
    let text = if Path::new(arg).is_file() { read_text(arg)? } else { arg.to_string() };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("isometry spec: {e}")))
}

fn print_json<T: Serialize>(v: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Run(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn big_json(v: &[num_bigint::BigInt]) -> Vec<JsonRational> {
    v.iter().map(|d| JsonRational(int_rat(d))).collect()
}

fn lattice_summary(l: &Lattice) -> CliResult<serde_json::Value> {
    Ok(json!({
        "rank": l.rank(),
        "gram": matrix_to_json(l.gram()),
        "det": JsonRational(l.determinant()),
        "smith": big_json(&harness::smith_invariants(l)?),
        "even": l.is_even(),
    }))
}

fn reproduce(section: &str, format: OutFormat, jobs: Option<usize>, suites: bool) -> CliResult<ExitCode> {
    let cases = harness::load_fixtures()?;
    let selected = harness::select(&cases, section).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut report = harness::run_fixtures(&selected, jobs);
    if suites {
        let opts = SuiteOptions { jobs, ..SuiteOptions::default() };
        report = report.merge(harness::run_theorem_suites(&selected, opts));
    }
    let format = match format {
        OutFormat::Text => Format::Text,
        OutFormat::Json => Format::Json,
    };
    print!("{}", harness::emit_report(&report, format)?);
    if format == Format::Json {
        println!();
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn construct(lattice: &str, isometry: &str) -> CliResult<()> {
    let l = load_lattice(lattice)?;
    let h = Isometry::from_spec(&l, &load_spec(isometry)?)?;
    let ps = pair_sum(&l, &h)?;
    let mut out = lattice_summary(&ps.k)?;
    out["index"] = json!(JsonRational(int_rat(&ps.index_in_ambient)));
    out["basis"] = json!(matrix_to_json(ps.k.basis()));
    print_json(&out)
}

fn identify(lattice: &str) -> CliResult<()> {
    let l = load_lattice(lattice)?;
    let id = catalog::identify(&l)?;
    let verdict = match &id.verdict {
        Verdict::Named(n) => json!({"named": n}),
        Verdict::Rectangular(d) => json!({"rectangular": d.iter().cloned().map(JsonRational).collect::<Vec<_>>()}),
        Verdict::Unknown => json!("unknown"),
    };
    print_json(&json!({
        "verdict": verdict,
        "certificate": id.certificate.as_ref().map(matrix_to_json),
        "reference_gram": id.reference_gram.as_ref().map(matrix_to_json),
        "revalidated": id.revalidate(&l),
    }))
}

fn smith(lattice: &str) -> CliResult<()> {
    let l = load_lattice(lattice)?;
    let d = l.discriminant_group()?;
    let mut out = lattice_summary(&l)?;
    out["discriminant_orders"] = json!(big_json(&d.orders));
    print_json(&out)
}

fn overlattice(lattice: &str, strategy: Strategy, index: Option<u64>) -> CliResult<()> {
    let k = load_lattice(lattice)?;
    let results: Vec<Lattice> = match strategy {
        Strategy::Double4 => {
            let us = glue::doubling_vectors(&k, index.unwrap_or(1) as usize)?;
            glue::integral_overlattice_by_doubling(&k, &us)?.into_iter().map(|s| s.result).collect()
        }
        Strategy::Search => {
            let n = index.ok_or_else(|| Failure::Usage("--index is required for search".into()))?;
            glue::integral_overlattice_search(&k, n)?.into_iter().map(|p| p.result).collect()
        }
    };
    let out: Vec<serde_json::Value> = results
        .iter()
        .map(|h| {
            let mut v = lattice_summary(h)?;
            v["index"] = json!(JsonRational(int_rat(&h.index_of(&k)?)));
            Ok(v)
        })
        .collect::<CliResult<_>>()?;
    print_json(&out)
}

fn tensor(left: &str, right: &str) -> CliResult<()> {
    let t = load_lattice(left)?.tensor(&load_lattice(right)?);
    print_json(&LatticeJson::from_lattice(&t))
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Reproduce { section, format, jobs, suites } => return reproduce(&section, format, jobs, suites),
        Command::Construct { lattice, isometry } => construct(&lattice, &isometry)?,
        Command::Identify { lattice } => identify(&lattice)?,
        Command::Smith { lattice } => smith(&lattice)?,
        Command::Overlattice { lattice, strategy, index } => overlattice(&lattice, strategy, index)?,
        Command::Tensor { left, right } => tensor(&left, &right)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("latkit: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("latkit: {m}");
            ExitCode::from(1)
        }
    }
}
