//! `lpuhf`: batch interface to the Lᵖ UHF toolkit.
//!
//! Loads systems, stage specs, and family recipes as JSON, runs norms and
//! diagnostics, and drives the lemma verification suites. Exit codes:
//! 0 success, 1 verification failure, 2 input error, 3 capacity.

mod report;
mod suites;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use lpuhf_core::criteria::{flip_witness, series_report_family, series_report_stages};
use lpuhf_core::error::{Error, Result};
use lpuhf_core::json::{
    mat_json, norm_interval_json, parse_exponent, parse_family, parse_mat, parse_stage_spec,
    parse_system, parse_system_lenient, series_report_json,
};
use lpuhf_core::perturbation::spatialize;
use lpuhf_core::spatial_check::{is_spatial_rep, SpatialRepCheck};

use report::Report;

#[derive(Parser)]
#[command(name = "lpuhf", version, about = "Finite-stage numerics for Lp UHF algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified operator norm of an element under a similarity system.
    Norm {
        /// System JSON file.
        system: PathBuf,
        /// Element JSON file: a square row-major matrix of [re, im] pairs.
        element: PathBuf,
        /// Exponent p, as a float or a rational "n/d".
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// The p-bound R of a similarity system.
    Pbound {
        /// System JSON file.
        system: PathBuf,
        /// Exponent p, as a float or a rational "n/d".
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// System file utilities.
    System {
        #[command(subcommand)]
        action: SystemAction,
    },
    /// Flip witness at a stage of a stage spec.
    Flip {
        /// Stage-spec JSON file.
        spec: PathBuf,
        /// Stage index.
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Series diagnostics for a family recipe or an explicit stage list.
    Classify {
        /// Family JSON file, or a stage-spec JSON file for hand-entered stages.
        input: PathBuf,
        /// Exponent p for family stages, as a float or a rational "n/d".
        #[arg(long, default_value = "2")]
        p: String,
        /// Prefix length for family stages.
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Stage dimension for family stages.
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Split a diagonal system as ψ = Ad(w)∘τ with τ spatial.
    Spatialize {
        /// System JSON file.
        system: PathBuf,
        /// Exponent p, as a float or a rational "n/d".
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// Check whether a system's representation is spatial.
    SpatialCheck {
        /// System JSON file.
        system: PathBuf,
        /// Exponent p, as a float or a rational "n/d".
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// Run lemma verification suites and emit a report.
    Verify {
        /// Suite selector: one suite name, "all", or "none".
        #[arg(long, default_value = "all")]
        suite: String,
        /// Seed for randomized corpora.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SystemAction {
    /// Load a system file and report its invariant violations.
    Validate {
        /// System JSON file.
        system: PathBuf,
    },
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Input(format!("{} is not valid JSON: {e}", path.display())))
}

fn exponent_arg(s: &str) -> Result<lpuhf_core::spaces::Exponent> {
    if s.contains('/') {
        parse_exponent(&Value::String(s.to_string()))
    } else {
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Input(format!("exponent \"{s}\" is not a number")))?;
        parse_exponent(&json!(v))
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Norm { system, element, p } => {
            let system = parse_system(&read_json(&system)?)?;
            let element = parse_mat(&read_json(&element)?, "element")?;
            let p = exponent_arg(&p)?;
            let interval = system.norm_ps(&element, &p)?;
            println!("{}", norm_interval_json(&interval));
            Ok(0)
        }
        Command::Pbound { system, p } => {
            let system = parse_system(&read_json(&system)?)?;
            let p = exponent_arg(&p)?;
            let interval = system.p_bound(&p)?;
            println!("{}", norm_interval_json(&interval));
            Ok(0)
        }
        Command::System { action: SystemAction::Validate { system } } => {
            let (_, violations) = parse_system_lenient(&read_json(&system)?)?;
            let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            println!(
                "{}",
                json!({"valid": list.is_empty(), "violations": list})
            );
            Ok(if list.is_empty() { 0 } else { 2 })
        }
        Command::Flip { spec, n } => {
            let spec = parse_stage_spec(&read_json(&spec)?)?;
            let witness = flip_witness(&spec, n)?;
            println!(
                "{}",
                json!({
                    "n": witness.n(),
                    "dim": witness.v().rows(),
                    "involution": "exact",
                    "norm": norm_interval_json(witness.norm()),
                })
            );
            Ok(0)
        }
        Command::Classify { input, p, n, d } => {
            let value = read_json(&input)?;
            let is_family = value
                .as_object()
                .is_some_and(|obj| obj.contains_key("family"));
            let report = if is_family {
                let recipe = parse_family(&value)?;
                let p = exponent_arg(&p)?;
                series_report_family(&recipe, d, &p, n)?
            } else {
                series_report_stages(&parse_stage_spec(&value)?)?
            };
            println!("{}", series_report_json(&report));
            Ok(0)
        }
        Command::Spatialize { system, p } => {
            let system = parse_system(&read_json(&system)?)?;
            let p = exponent_arg(&p)?;
            let result = spatialize(&system, &p)?;
            let [nw, nw1, nwi, nwi1] = result.w_norms();
            println!(
                "{}",
                json!({
                    "r": result.r(),
                    "residual_sup": result.residual_sup(),
                    "tau_spatial": true,
                    "w": mat_json(result.w()),
                    "w_norms": {
                        "w": nw,
                        "w_minus_one": nw1,
                        "w_inv": nwi,
                        "w_inv_minus_one": nwi1,
                    },
                })
            );
            Ok(0)
        }
        Command::SpatialCheck { system, p } => {
            let system = parse_system(&read_json(&system)?)?;
            let p = exponent_arg(&p)?;
            let units = suites::representation_units(&system)?;
            let verdict = is_spatial_rep(&units, system.d(), &p)?;
            match verdict {
                SpatialRepCheck::Spatial { partition } => {
                    let parts: Vec<Vec<usize>> = partition
                        .iter()
                        .map(|set| set.iter().copied().collect())
                        .collect();
                    println!("{}", json!({"spatial": true, "partition": parts}));
                }
                SpatialRepCheck::NotSpatial { reason } => {
                    println!("{}", json!({"spatial": false, "reason": reason}));
                }
            }
            Ok(0)
        }
        Command::Verify { suite, seed, out } => {
            let checks = suites::run(&suite, seed)?;
            let report = Report::new(&suite, seed, checks);
            let body = report.to_json().to_string();
            match out {
                Some(path) => {
                    fs::write(&path, format!("{body}\n")).map_err(|e| {
                        Error::Input(format!("cannot write {}: {e}", path.display()))
                    })?;
                    println!("{}", report.summary_line());
                }
                None => {
                    println!("{body}");
                    eprintln!("{}", report.summary_line());
                }
            }
            Ok(if report.all_pass() { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Capacity(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
