//! Command-line front end. Exit codes: 0 success, 2 cross-check failure,
//! 1 for every other error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::blaschke::BlaschkeProduct;
use crate::classifier::{self, CrossCheck};
use crate::config::ToolConfig;
use crate::error::{Error, Result};
use crate::partition::{self, Partition};
use crate::{commutant, polyroots, report, Cplx};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CROSS_CHECK: i32 = 2;
pub const THREADS_ENV: &str = "BLASCHKE_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "blaschke-lab",
    version,
    about = "Local-inverse monodromy and commutant dimensions of finite Blaschke products"
)]
struct Cli {
    /// JSON configuration document; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ProductArgs {
    /// Comma-separated `a+bi:mult` entries; `:mult` defaults to 1.
    #[arg(long, allow_hyphen_values = true)]
    zeros: String,
    /// Unimodular constant.
    #[arg(long = "const", default_value = "1", allow_hyphen_values = true)]
    constant: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full pipeline with table cross-check.
    Classify(ProductArgs),
    /// Labeled fiber, loop generators and monodromy partition.
    Monodromy(ProductArgs),
    /// Admissible partitions of Z_n.
    PartitionEnum {
        #[arg(long)]
        n: usize,
        /// Keep only partitions passing the order-6 double-decomposition filter.
        #[arg(long)]
        filter: bool,
    },
    /// Critical points, critical values and branch set.
    Critical(ProductArgs),
    /// Dirichlet commutant dimension.
    Dim(ProductArgs),
    /// Classify the order-6 table witnesses.
    CaseSuite,
}

/// Parses `[-+]?float([+-]float)?i?`; `position` is added to error offsets.
pub fn parse_complex(text: &str, position: usize) -> Result<Cplx> {
    let err = |offset: usize, message: String| Error::Parse { position: position + offset, message };
    if text.is_empty() {
        return Err(err(0, "empty complex literal".into()));
    }
    let bytes = text.as_bytes();
    let split = (1..bytes.len()).find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let real = |s: &str, offset: usize| -> Result<f64> {
        let value: f64 = s.parse().map_err(|_| err(offset, format!("malformed number {s:?}")))?;
        if !value.is_finite() {
            return Err(err(offset, format!("non-finite number {s:?}")));
        }
        Ok(value)
    };
    match split {
        Some(k) => {
            let imag =
                text[k..].strip_suffix('i').ok_or_else(|| err(text.len(), "imaginary part must end in 'i'".into()))?;
            if imag.len() == 1 {
                return Err(err(k, "missing imaginary magnitude".into()));
            }
            Ok(Cplx::new(real(&text[..k], 0)?, real(imag, k)?))
        }
        None => match text.strip_suffix('i') {
            Some(imag) if !imag.is_empty() && imag != "+" && imag != "-" => Ok(Cplx::new(0.0, real(imag, 0)?)),
            Some(_) => Err(err(0, "missing imaginary magnitude".into())),
            None => Ok(Cplx::new(real(text, 0)?, 0.0)),
        },
    }
}

/// Parses `a+bi:mult,a+bi:mult,...`.
pub fn parse_zeros(text: &str) -> Result<Vec<(Cplx, usize)>> {
    let mut zeros = Vec::new();
    let mut offset = 0;
    for entry in text.split(',') {
        let trimmed = entry.trim_start();
        let start = offset + entry.len() - trimmed.len();
        let trimmed = trimmed.trim_end();
        let (value, mult) = match trimmed.split_once(':') {
            Some((v, m)) => {
                let mult_pos = start + v.len() + 1;
                let mult = m.parse::<usize>().map_err(|_| Error::Parse {
                    position: mult_pos,
                    message: format!("malformed multiplicity {m:?}"),
                })?;
                (v, mult)
            }
            None => (trimmed, 1),
        };
        zeros.push((parse_complex(value, start)?, mult));
        offset += entry.len() + 1;
    }
    Ok(zeros)
}

pub fn parse_product(zeros: &str, constant: &str) -> Result<BlaschkeProduct> {
    BlaschkeProduct::new(&parse_zeros(zeros)?, parse_complex(constant, 0)?)
}

#[derive(Serialize)]
struct Flattened<'a, T: Serialize> {
    input: &'a BlaschkeProduct,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize)]
struct PartitionList {
    n: usize,
    filter: bool,
    count: usize,
    partitions: Vec<Partition>,
}

#[derive(Serialize)]
struct SuiteEntry {
    label: &'static str,
    input: BlaschkeProduct,
    expected_dim: usize,
    dirichlet_dim: usize,
    partition: Partition,
    theorem_case: Option<String>,
    pass: bool,
}

#[derive(Serialize)]
struct Suite {
    seed: u64,
    cases: Vec<SuiteEntry>,
    all_pass: bool,
}

/// Output document and exit code of one command.
pub struct Outcome {
    pub document: String,
    pub exit_code: i32,
}

fn load_config(path: Option<&PathBuf>) -> Result<ToolConfig> {
    match path {
        Some(p) => ToolConfig::from_json(&std::fs::read_to_string(p)?),
        None => Ok(ToolConfig::default()),
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = load_config(cli.config.as_ref())?;
    let ok = |name: &str, body: serde_json::Value| -> Result<Outcome> {
        let doc = report::document(name, &cfg, &body)?;
        Ok(Outcome { document: report::to_canonical_string(&doc), exit_code: EXIT_OK })
    };
    match &cli.command {
        Command::Classify(p) => {
            let b = parse_product(&p.zeros, &p.constant)?;
            let result = classifier::classify(&b, &cfg)?;
            let failed = matches!(result.cross_check, CrossCheck::Fail { .. });
            let mut outcome = ok("classify", serde_json::to_value(Flattened { input: &b, body: result })?)?;
            if failed {
                outcome.exit_code = EXIT_CROSS_CHECK;
            }
            Ok(outcome)
        }
        Command::Monodromy(p) => {
            let b = parse_product(&p.zeros, &p.constant)?;
            let result = crate::continuation::monodromy(&b, &cfg)?;
            ok("monodromy", serde_json::to_value(Flattened { input: &b, body: result })?)
        }
        Command::PartitionEnum { n, filter } => {
            let partitions = partition::enumerate_admissible(*n, *filter)?;
            ok(
                "partition-enum",
                serde_json::to_value(PartitionList { n: *n, filter: *filter, count: partitions.len(), partitions })?,
            )
        }
        Command::Critical(p) => {
            let b = parse_product(&p.zeros, &p.constant)?;
            let result = polyroots::analyze(&b, &cfg)?;
            ok("critical", serde_json::to_value(Flattened { input: &b, body: result })?)
        }
        Command::Dim(p) => {
            let b = parse_product(&p.zeros, &p.constant)?;
            let result = commutant::dirichlet_dim(&b, &cfg)?;
            ok("dim", serde_json::to_value(Flattened { input: &b, body: result })?)
        }
        Command::CaseSuite => {
            let cases = classifier::order6_case_suite(cfg.seed)?;
            let entries = cases
                .into_par_iter()
                .map(|case| {
                    let r = classifier::classify(&case.product, &cfg)?;
                    Ok(SuiteEntry {
                        label: case.label,
                        pass: r.dirichlet_dim == case.expected_dim,
                        expected_dim: case.expected_dim,
                        dirichlet_dim: r.dirichlet_dim,
                        partition: r.partition,
                        theorem_case: r.theorem_case,
                        input: case.product,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let all_pass = entries.iter().all(|e| e.pass);
            let mut outcome =
                ok("case-suite", serde_json::to_value(Suite { seed: cfg.seed, cases: entries, all_pass })?)?;
            if !all_pass {
                outcome.exit_code = EXIT_CROSS_CHECK;
            }
            Ok(outcome)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A pool built earlier in the same process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Runs one command and returns the report text and exit code. Usage errors
/// map to exit code 1; help and version requests to 0.
pub fn run_captured<I, T>(argv: I) -> (Outcome, Option<String>)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let fail = |message: String| (Outcome { document: String::new(), exit_code: EXIT_FAILURE }, Some(message));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            return (Outcome { document: e.to_string(), exit_code: EXIT_OK }, None);
        }
        Err(e) => return fail(e.to_string()),
    };
    if let Err(e) = configure_threads() {
        return fail(format!("error: {e}\n"));
    }
    match execute(&cli) {
        Ok(outcome) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &outcome.document) {
                    return fail(format!("error: {}\n", Error::from(e)));
                }
                let note = (outcome.exit_code == EXIT_CROSS_CHECK).then(|| "cross-check failed\n".to_string());
                return (Outcome { document: String::new(), exit_code: outcome.exit_code }, note);
            }
            let note = (outcome.exit_code == EXIT_CROSS_CHECK).then(|| "cross-check failed\n".to_string());
            (outcome, note)
        }
        Err(e) => fail(format!("error: {e}\n")),
    }
}

/// Entry point for the binary: prints the report and stderr messages.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (outcome, message) = run_captured(argv);
    if !outcome.document.is_empty() {
        let _ = std::io::stdout().write_all(outcome.document.as_bytes());
    }
    if let Some(m) = message {
        let _ = std::io::stderr().write_all(m.as_bytes());
    }
    outcome.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Cplx {
        Cplx::new(re, im)
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.5", 0).unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("-1", 0).unwrap(), c(-1.0, 0.0));
        assert_eq!(parse_complex("0.3-0.2i", 0).unwrap(), c(0.3, -0.2));
        assert_eq!(parse_complex("+1e-3+2.5E+1i", 0).unwrap(), c(1e-3, 25.0));
        assert_eq!(parse_complex("-0.4i", 0).unwrap(), c(0.0, -0.4));
    }

    #[test]
    fn malformed_literals_report_position() {
        for (text, pos) in [("0.3+0.2", 7), ("abc", 0), ("0.1+xi", 3), ("", 0), ("i", 0), ("0.1+i", 3), ("inf", 0)] {
            match parse_complex(text, 0) {
                Err(Error::Parse { position, .. }) => assert_eq!(position, pos, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        match parse_zeros("0:2, 0.5+0.1j:1") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 13),
            other => panic!("{other:?}"),
        }
        match parse_zeros("0:x") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_lists() {
        let z = parse_zeros("0:4, 0.5:1,0.1-0.2i").unwrap();
        assert_eq!(z, vec![(c(0.0, 0.0), 4), (c(0.5, 0.0), 1), (c(0.1, -0.2), 1)]);
    }

    #[test]
    fn exit_codes() {
        let (out, _) = run_captured(["blaschke-lab", "partition-enum", "--n", "5"]);
        assert_eq!(out.exit_code, EXIT_OK);
        let doc = report::parse(&out.document).unwrap();
        assert_eq!(doc["count"], 3);
        assert_eq!(run_captured(["blaschke-lab", "bogus"]).0.exit_code, EXIT_FAILURE);
        assert_eq!(run_captured(["blaschke-lab", "dim", "--zeros", "1.5:1"]).0.exit_code, EXIT_FAILURE);
        assert_eq!(run_captured(["blaschke-lab", "--help"]).0.exit_code, EXIT_OK);
    }
}
