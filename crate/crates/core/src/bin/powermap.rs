use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use powermap::catalog::{catalog_table, CATALOG_MAX_DEGREE};
use powermap::report::{
    analyze, lut_digest, parse_lut, write_ddt_csv, write_lut, AnalysisReport, MapDescriptor, Timings,
};
use powermap::spectra::{Sampling, SweepConfig};
use powermap::theorem_lab::{run_verification, VerifyConfig};
use powermap::{build_lut, FieldSpec};

/// Largest degree analyzed without `--deep`.
const SHALLOW_MAX_DEGREE: u32 = 16;

#[derive(Parser)]
#[command(name = "powermap", version, about = "Differential and Walsh analysis of power maps over GF(2^n)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze x^d on GF(2^n) or a function read from a LUT file.
    Analyze(AnalyzeArgs),
    /// Replay the differential and Walsh arguments for x^(2^(2k)+2^k+1).
    Verify(VerifyArgs),
    /// Measure the known 4-uniform permutation families.
    Catalog(CatalogArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Field degree, with --exp.
    #[arg(long, requires = "exp")]
    n: Option<u32>,
    /// Exponent d of x^d.
    #[arg(long, requires = "n", conflicts_with = "lut")]
    exp: Option<u64>,
    /// LUT file: `n=<degree> poly=<hex>` then 2^n hex values.
    #[arg(long, required_unless_present = "exp")]
    lut: Option<PathBuf>,
    /// Reduction polynomial in hex; defaults to the least irreducible one.
    #[arg(long, value_parser = parse_hex)]
    poly: Option<u32>,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Dump the full DDT as CSV here.
    #[arg(long)]
    ddt_csv: Option<PathBuf>,
    /// Write the function's LUT file here.
    #[arg(long)]
    write_lut: Option<PathBuf>,
    /// Allow degrees above 16.
    #[arg(long)]
    deep: bool,
    /// Sample this many rows of each sweep instead of all of them.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated k values.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    k: Vec<u32>,
    /// Sampled pairs per k; default exhaustive for k <= 2, 1000 otherwise.
    #[arg(long)]
    samples: Option<usize>,
    /// Check every gamma of trace 1, not only the least.
    #[arg(long)]
    all_gamma: bool,
    /// Required for k = 4.
    #[arg(long)]
    deep: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long, default_value_t = 12)]
    max_n: u32,
    /// Include the n = 10 and n = 16 rows.
    #[arg(long)]
    deep: bool,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_hex(s: &str) -> Result<u32, String> {
    u32::from_str_radix(s, 16).map_err(|e| format!("`{s}` is not hex: {e}"))
}

enum Failure {
    /// Bad input or environment; exit 2.
    Usage(String),
    /// A check was falsified; exit 1.
    Falsified,
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<(), Failure>) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    body(&mut out)?;
    out.flush()?;
    Ok(())
}

fn run_analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let (table, map) = match (&args.lut, args.n, args.exp) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let table = parse_lut(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            if let Some(p) = args.poly.filter(|&p| p != table.spec().poly()) {
                return Err(Failure::Usage(format!(
                    "--poly {p:x} disagrees with the file header poly={:x}",
                    table.spec().poly()
                )));
            }
            let map = MapDescriptor::Lut { lut_sha256: lut_digest(&table) };
            (table, map)
        }
        (None, Some(n), Some(d)) => {
            check_degree(n, args.deep)?;
            let spec = FieldSpec::new(n, args.poly)?;
            (build_lut(&spec, d), MapDescriptor::Exponent { exponent: d })
        }
        _ => return Err(Failure::Usage("give --n with --exp, or --lut".into())),
    };
    check_degree(table.spec().degree(), args.deep)?;
    let build_ms = start.elapsed().as_millis() as u64;

    let cfg = SweepConfig {
        threads: args.threads,
        deep: args.deep,
        sampling: args.samples.map(|count| Sampling { count, seed: args.seed }),
    };
    let report = analyze(&table, map, &cfg, build_ms)?;
    print!("{report}");
    if let Some(path) = &args.json {
        write_file(path, |out| Ok(out.write_all(report.to_json().as_bytes())?))?;
    }
    if let Some(path) = &args.write_lut {
        write_file(path, |out| Ok(write_lut(&table, out)?))?;
    }
    if let Some(path) = &args.ddt_csv {
        write_file(path, |out| Ok(write_ddt_csv(&table, args.threads, out)?))?;
    }
    Ok(())
}

fn check_degree(n: u32, deep: bool) -> Result<(), Failure> {
    if n > SHALLOW_MAX_DEGREE && !deep {
        return Err(Failure::Usage(format!(
            "n = {n} is above {SHALLOW_MAX_DEGREE}: a full sweep visits 2^(2n) entries; pass --deep to run it anyway"
        )));
    }
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    let cfg = VerifyConfig {
        ks: args.k,
        samples: args.samples,
        all_gamma: args.all_gamma,
        threads: args.threads,
        seed: args.seed,
        deep: args.deep,
    };
    let report = run_verification(&cfg)?;
    println!("{:>2}  {:<20} {:>6} {:>10} {:>8}", "k", "check", "gamma", "instances", "failures");
    for c in &report.checks {
        let gamma = c.gamma.map(|g| format!("{g:x}")).unwrap_or_else(|| "-".into());
        println!("{:>2}  {:<20} {:>6} {:>10} {:>8}", c.k, c.check, gamma, c.instances, c.failures);
    }
    if let Some(path) = &args.json {
        write_file(path, |out| {
            serde_json::to_writer_pretty(&mut *out, &report)?;
            Ok(writeln!(out)?)
        })?;
    }
    if report.all_passed {
        println!("all checks passed");
        return Ok(());
    }
    for c in report.checks.iter().filter(|c| !c.passed()) {
        eprintln!("{}", serde_json::to_string(&c.first_counterexample).expect("serializes"));
    }
    Err(Failure::Falsified)
}

fn run_catalog(args: CatalogArgs) -> Result<(), Failure> {
    if args.max_n > CATALOG_MAX_DEGREE {
        return Err(Failure::Usage(format!("--max-n is limited to {CATALOG_MAX_DEGREE}")));
    }
    let cfg = SweepConfig { threads: args.threads, deep: args.deep, sampling: None };
    let entries = catalog_table(args.max_n, &cfg)?;
    println!(
        "{:<16} {:>3} {:>6} {:>10} {:>10} {:>6} {:>6} {:>4} {:>6} {:>6}",
        "family", "n", "d", "conditions", "predicted", "delta", "perm", "gcd", "nl", "match"
    );
    let mut rows = Vec::new();
    let mut mismatches = 0;
    for e in &entries {
        let predicted = e.expected.map(|p| format!("4/{}", if p.is_permutation { "perm" } else { "-" }));
        let matched = e.matches_prediction();
        mismatches += usize::from(matched == Some(false));
        println!(
            "{:<16} {:>3} {:>6} {:>10} {:>10} {:>6} {:>6} {:>4} {:>6} {:>6}",
            e.family.family.to_string(),
            e.family.n,
            e.family.d,
            if e.conditions_met { "met" } else { "not met" },
            predicted.as_deref().unwrap_or("-"),
            e.measured.delta,
            e.measured.is_permutation,
            e.gcd_check.gcd,
            e.measured.nl,
            matched.map_or("-", |m| if m { "yes" } else { "NO" }),
        );
        let spec = FieldSpec::with_default_poly(e.family.n)?;
        let map = MapDescriptor::Family { family: e.family.family.to_string(), exponent: e.family.d };
        let report = AnalysisReport::new(&e.measured, &spec, map, Timings::default());
        rows.push(json!({
            "conditions_met": e.conditions_met,
            "expected": e.expected,
            "gcd": e.gcd_check.gcd,
            "report": report,
        }));
    }
    if let Some(path) = &args.json {
        write_file(path, |out| {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            Ok(writeln!(out)?)
        })?;
    }
    if mismatches > 0 {
        eprintln!("{mismatches} row(s) contradict their prediction");
        return Err(Failure::Falsified);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => run_analyze(a),
        Command::Verify(a) => run_verify(a),
        Command::Catalog(a) => run_catalog(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Falsified) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(io::stderr(), "error: {msg}");
            ExitCode::from(2)
        }
    }
}
