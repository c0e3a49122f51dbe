//! `oligo` — build decorated groups from expressions, compute their exact
//! profile series, and verify everything against brute-force truncations.
//!
//! All results are UTF-8 JSON on standard output; diagnostics go to
//! standard error. Exit codes: 0 success, 1 validation failure, 2 parse
//! error, 3 verification mismatch, 4 resource cap exceeded.

mod expr;
mod json;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use oligo_core::blocksys;
use oligo_core::decorated::DecoratedGroup;
use oligo_core::oracle;
use oligo_core::poly::RationalFunction;
use oligo_core::series;
use oligo_core::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_MISMATCH: u8 = 3;
const EXIT_CAP: u8 = 4;

#[derive(Parser)]
#[command(
    name = "oligo",
    about = "Classification, series and brute-force verification of \
             permutation groups with decorated blocks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an expression and report constraint violations.
    Validate { expr: String },
    /// Hilbert series in Cohen-Macaulay presentation.
    Series { expr: String },
    /// Profile values 0..=n.
    Profile {
        expr: String,
        #[arg(long)]
        n: usize,
    },
    /// Algebraic dimension (and profile growth degree).
    Dimension { expr: String },
    /// Compare series coefficients with brute-force truncation counts.
    Verify {
        expr: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Tower of within-block groups of the k-fold truncation.
    Tower {
        expr: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
    },
    /// Recover a decorated datum from a finite group (JSON file with
    /// keys "degree" and "generators").
    Recognize {
        #[arg(long)]
        input: String,
        #[arg(long)]
        k: usize,
    },
    /// All block systems of the group generated by cycle strings.
    Blocks { gens: Vec<String> },
    /// Enumerate valid data up to isomorphism.
    Enumerate {
        #[arg(long)]
        max_domain: usize,
        #[arg(long)]
        max_order: u128,
    },
    /// Decorated-group JSON for an expression.
    Data { expr: String },
}

fn main() -> ExitCode {
    if let Ok(cap) = std::env::var("OLIGO_MAX_ORDER") {
        match cap.parse::<u64>() {
            Ok(v) => oligo_core::perm::set_element_cap(v),
            Err(_) => {
                eprintln!("OLIGO_MAX_ORDER must be an integer, got {cap:?}");
                return ExitCode::from(EXIT_PARSE);
            }
        }
    }
    if let Ok(cap) = std::env::var("OLIGO_MAX_DEGREE") {
        match cap.parse::<usize>() {
            Ok(v) => oracle::set_degree_cap(v),
            Err(_) => {
                eprintln!("OLIGO_MAX_DEGREE must be an integer, got {cap:?}");
                return ExitCode::from(EXIT_PARSE);
            }
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                Error::SizeLimit(_) => EXIT_CAP,
                _ => EXIT_VALIDATION,
            })
        }
    }
}

fn parse_expr(text: &str) -> Result<DecoratedGroup, ExitCode> {
    let ast = match expr::parse(text) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{e}");
            return Err(ExitCode::from(EXIT_PARSE));
        }
    };
    match expr::elaborate(&ast) {
        Ok(d) => Ok(d),
        Err(msg) => {
            eprintln!("{msg}");
            Err(ExitCode::from(EXIT_PARSE))
        }
    }
}

fn emit(v: &Value) {
    println!("{v}");
}

fn run(cmd: Command) -> Result<ExitCode, Error> {
    match cmd {
        Command::Validate { expr } => {
            let delta = match parse_expr(&expr) {
                Ok(d) => d,
                Err(code) => return Ok(code),
            };
            let violations = delta.validate();
            let ok = violations.is_empty();
            emit(&json!({
                "valid": ok,
                "violations": violations
                    .iter()
                    .map(|v| json!({"constraint": v.constraint, "block": v.block}))
                    .collect::<Vec<_>>(),
            }));
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VALIDATION)
            })
        }
        Command::Series { expr } => {
            let delta = match parse_expr(&expr) {
                Ok(d) => d,
                Err(code) => return Ok(code),
            };
            let form = series::hilbert_form(&delta)?;
            let reduced: RationalFunction = series::hilbert_series(&delta)?;
            emit(&json::series_json(
                &form,
                reduced.numerator().coeffs(),
                reduced.denominator().coeffs(),
            ));
            Ok(ExitCode::SUCCESS)
        }
        Command::Profile { expr, n } => {
            let delta = match parse_expr(&expr) {
                Ok(d) => d,
                Err(code) => return Ok(code),
            };
            let values = series::profile_values(&delta, n)?;
            emit(&json!({"profile": json::bigints_json(&values)}));
            Ok(ExitCode::SUCCESS)
        }
        Command::Dimension { expr } => {
            let delta = match parse_expr(&expr) {
                Ok(d) => d,
                Err(code) => return Ok(code),
            };
            emit(&json!({
                "dimension": series::algebraic_dimension(&delta)?,
                "growth": series::growth_rate(&delta)?,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { expr, k, n } => {
            let delta = match parse_expr(&expr) {
                Ok(d) => d,
                Err(code) => return Ok(code),
            };
            let start = Instant::now();
            let mut report = oracle::verify_profile(&delta, k, n)?;
            report.millis = start.elapsed().as_millis() as u64;
            let matched = report.matched;
            emit(&json::report_json(&report));
            Ok(if matched {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_MISMATCH)
            })
        }
        Command::Tower { expr, k, t } => {
            let delta = match parse_expr(&expr) {
                Ok(d) => d,
                Err(code) => return Ok(code),
            };
            let trunc = oracle::truncate(&delta, k)?;
            if trunc.copies.len() != 1 || !trunc.kernel.is_empty() {
                return Err(Error::Precondition(
                    "the tower needs a single replicated block and no kernel".into(),
                ));
            }
            let partition = blocksys::SetPartition::new(
                trunc.group.degree(),
                trunc.copies[0].clone(),
            )?;
            let levels = oracle::tower(&trunc.group, &partition, t)?;
            emit(&json!({
                "tower": levels
                    .iter()
                    .map(|h| json!({
                        "order": h.order().to_string().parse::<u64>().unwrap_or(u64::MAX),
                        "generators": json::group_to_json(h)["generators"].clone(),
                    }))
                    .collect::<Vec<_>>(),
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Recognize { input, k } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| Error::Precondition(format!("cannot read {input}: {e}")))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| Error::Precondition(format!("bad JSON in {input}: {e}")))?;
            let group = json::group_from_json(&value).map_err(Error::Precondition)?;
            let delta = oracle::recognize(&group, k)?;
            emit(&json::delta_to_json(&delta));
            Ok(ExitCode::SUCCESS)
        }
        Command::Blocks { gens } => {
            if gens.is_empty() {
                return Err(Error::Precondition("no generators given".into()));
            }
            let ast = expr::GroupExpr::Gens(gens);
            let group = expr::elaborate_finite(&ast).map_err(Error::Precondition)?;
            let systems = blocksys::all_block_systems(&group)?;
            emit(&json!({
                "degree": group.degree(),
                "systems": systems
                    .iter()
                    .map(|s| json!(s.blocks()))
                    .collect::<Vec<_>>(),
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate {
            max_domain,
            max_order,
        } => {
            let data = oligo_core::decorated::enumerate(max_domain, max_order)?;
            emit(&json!({
                "count": data.len(),
                "data": data.iter().map(json::delta_to_json).collect::<Vec<_>>(),
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Data { expr } => {
            let delta = match parse_expr(&expr) {
                Ok(d) => d,
                Err(code) => return Ok(code),
            };
            emit(&json::delta_to_json(&delta));
            Ok(ExitCode::SUCCESS)
        }
    }
}

// referenced by integration tests to build truncation input files
#[allow(dead_code)]
fn _group_json_schema_doc() -> &'static str {
    r#"{"degree": n, "generators": [[images...], ...]}"#
}
