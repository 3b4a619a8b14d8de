//! `fv`: translate formulas, evaluate them on structures and reduced
//! products, dump quotients, and run the check suites.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use fv_core::harness::{self, Caps};
use fv_core::io;
use fv_core::rational::format_rational;
use fv_core::reduced::{reduced_product, Family};
use fv_core::syntax::{parse, Signature};
use fv_core::translate::{certify, translate};

#[derive(Parser)]
#[command(name = "fv", version, about = "Determining sequences for continuous logic over reduced products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a restricted formula into its determining sequence.
    Translate {
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Signature JSON; defaults to P/1, f/2, c.
        #[arg(long)]
        sig: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Value of a sentence in a structure or in a family's reduced product.
    /// With `--family` and `--n`, prints the full certificate instead.
    Eval {
        #[arg(long)]
        formula: String,
        #[arg(long, conflicts_with = "family", required_unless_present = "family")]
        structure: Option<String>,
        #[arg(long)]
        family: Option<String>,
        /// Replaces the family's ideal (same ground set).
        #[arg(long, requires = "family")]
        ideal: Option<String>,
        #[arg(long, requires = "family")]
        n: Option<u32>,
        #[arg(long)]
        sig: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Dump the reduced product of a family with its class map.
    Rp {
        #[arg(long)]
        family: String,
        #[arg(long)]
        ideal: Option<String>,
        #[arg(long)]
        sig: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a check suite; exits 1 if any case fails.
    Check {
        /// atomic, fv, preservation, quotient, fubini, principal or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Battery depth; defaults to the configured maximum.
        #[arg(long)]
        depth: Option<usize>,
        /// TOML file overriding the resource caps.
        #[arg(long)]
        config: Option<String>,
        /// Write the full reports as JSON.
        #[arg(long)]
        out: Option<String>,
    },
    /// Prime divisibility pattern behind the many-theories construction.
    Demo {
        #[arg(long, value_delimiter = ',', default_value = "2,5,11")]
        xi: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "3,7,13")]
        eta: Vec<u64>,
        #[arg(long, default_value_t = 10)]
        horizon: usize,
        #[arg(long)]
        out: Option<String>,
    },
}

/// Bad input, reported with exit code 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn load_sig(path: Option<&str>) -> Result<Option<Arc<Signature>>, Usage> {
    path.map(|p| Ok(io::signature_from_json(&io::read_json(p)?)?)).transpose()
}

fn load_family(path: &str, ideal: Option<&str>, sig: Option<Arc<Signature>>) -> Result<Family, Usage> {
    let fam = io::family_from_json(&io::read_json(path)?, sig)?;
    match ideal {
        None => Ok(fam),
        Some(p) => {
            let ideal = io::ideal_from_json(&io::read_json(p)?)?;
            Ok(Family::new(ideal, fam.members().to_vec())?)
        }
    }
}

fn emit(text: &str, out: Option<&str>) -> Result<(), Usage> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")).map_err(|e| Usage(format!("{path}: {e}"))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values print")
}

/// Runs a command; `Ok(false)` means checks ran and something failed.
fn run(cmd: Command) -> Result<bool, Usage> {
    match cmd {
        Command::Translate { formula, n, sig, out } => {
            let sig = load_sig(sig.as_deref())?.unwrap_or_else(harness::default_signature);
            let f = parse(&formula, &sig)?;
            let ds = translate(&f, n)?;
            emit(&pretty(&serde_json::to_value(ds.to_output())?), out.as_deref())?;
            Ok(true)
        }
        Command::Eval { formula, structure, family, ideal, n, sig, out } => {
            let sig = load_sig(sig.as_deref())?;
            if let Some(path) = structure {
                let s = io::structure_from_json(&io::read_json(&path)?, sig)?;
                let f = parse(&formula, s.signature())?;
                emit(&format_rational(&s.eval_sentence(&f)?), out.as_deref())?;
                return Ok(true);
            }
            let fam = load_family(family.as_deref().expect("clap requires one"), ideal.as_deref(), sig)?;
            let f = parse(&formula, fam.signature())?;
            match n {
                None => {
                    let rp = reduced_product(&fam)?;
                    emit(&format_rational(&rp.eval_at(&f, &[])?), out.as_deref())?;
                    Ok(true)
                }
                Some(n) => {
                    let cert = certify(&f, n, &fam, &[])?;
                    emit(&pretty(&serde_json::to_value(&cert)?), out.as_deref())?;
                    Ok(cert.passed())
                }
            }
        }
        Command::Rp { family, ideal, sig, out } => {
            let fam = load_family(&family, ideal.as_deref(), load_sig(sig.as_deref())?)?;
            let rp = reduced_product(&fam)?;
            emit(&pretty(&io::reduced_product_to_json(&rp)), out.as_deref())?;
            Ok(true)
        }
        Command::Check { suite, seed, depth, config, out } => {
            let caps = match config {
                Some(p) => Caps::from_toml(&std::fs::read_to_string(&p).map_err(|e| Usage(format!("{p}: {e}")))?)?,
                None => Caps::default(),
            };
            let depth = depth.unwrap_or(caps.max_depth);
            let reports = harness::run_named(&caps, &suite, depth, seed)?;
            for r in &reports {
                println!("{}", r.summary());
                eprintln!("{}: {:.2?}", r.suite, r.elapsed);
            }
            if let Some(path) = out {
                emit(&pretty(&serde_json::to_value(&reports)?), Some(&path))?;
            }
            Ok(reports.iter().all(|r| r.passed()))
        }
        Command::Demo { xi, eta, horizon, out } => {
            let report = harness::demo_matrix_divisibility(&xi, &eta, horizon)?;
            let body = json!({ "holds": report.holds(), "report": report });
            emit(&pretty(&body), out.as_deref())?;
            Ok(report.holds())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(cli.command);
    eprintln!("elapsed: {:.2?}", start.elapsed());
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
