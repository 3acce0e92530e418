//! Batch command-line front end.
//!
//! Every subcommand prints one machine-parseable JSON object (with a
//! top-level `"schema": 1`) on stdout and diagnostics on stderr.  Exit
//! codes: 0 when all requested checks pass, 1 when a check fails, 2 for
//! usage or parameter errors.  Output is byte-identical across runs for
//! identical flags and seed.

use std::ffi::OsString;
use std::fs;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::constructions::{classify_case, construct_family, verify_construction, Group, PairFamily};
use crate::error::{Error, Result};
use crate::measures::FiniteDistribution;
use crate::padic::Automorphism;
use crate::quotient::induced_endomorphism;
use crate::ratio;
use crate::selftest;
use crate::symmetry::{
    check_pair_with_automorphism, enumerate_grid_solutions, monte_carlo_symmetry, normalize_case,
    DEFAULT_ENUMERATION_BUDGET,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "padic-heyde",
    about = "Exact symmetry-equation checking and counterexample constructions on p-adic quotients",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify an automorphism p^k c into its case.
    Classify(ClassifyArgs),
    /// Check the symmetry equation for a pair of distribution files.
    Check(CheckArgs),
    /// Build a named solution-pair family, optionally verifying it.
    Construct(ConstructArgs),
    /// Exhaustively enumerate grid solutions of the symmetry equation.
    Enumerate(EnumerateArgs),
    /// Seeded Monte Carlo estimate of the conditional-symmetry defect.
    Montecarlo(MontecarloArgs),
    /// Run the acceptance criteria.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Group: omega (p-adic numbers) or delta (p-adic integers).
    #[arg(long, default_value = "omega")]
    group: String,
    #[arg(long)]
    p: u64,
    /// Power of p in the automorphism (0 for delta).
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    k: i64,
    /// Unit digits c_0,c_1,... (comma separated; missing digits are 0).
    #[arg(long)]
    c: String,
}

#[derive(Args)]
struct CheckArgs {
    /// Path to the first distribution JSON file.
    #[arg(long)]
    dist1: String,
    /// Path to the second distribution JSON file.
    #[arg(long)]
    dist2: String,
    /// Power of p in the automorphism.
    #[arg(long = "alpha-k", default_value_t = 0, allow_negative_numbers = true)]
    alpha_k: i64,
    /// Unit digits of the automorphism (comma separated).
    #[arg(long = "alpha-c", default_value = "1")]
    alpha_c: String,
    /// Quotient level n.
    #[arg(long)]
    level: u32,
}

#[derive(Args)]
struct ConstructArgs {
    /// Family: 2i, 2ii, 2iii, 2iv, haar-pair or k1-pair.
    #[arg(long = "case")]
    case: String,
    #[arg(long)]
    p: u64,
    /// Power of p (defaults to the family's smallest admissible power).
    #[arg(long, allow_negative_numbers = true)]
    k: Option<i64>,
    /// Mixture weight in (0,1), as num/den.
    #[arg(long, default_value = "1/2")]
    a: String,
    /// Quotient level n (needs n >= |k|+1).
    #[arg(long)]
    level: u32,
    /// Unit digits for verification (defaults per family).
    #[arg(long)]
    c: Option<String>,
    /// Also verify the pair and fail on any broken sub-check.
    #[arg(long, default_value_t = false)]
    verify: bool,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    level: u32,
    /// Multiplier t of the induced endomorphism, as a residue mod p^level.
    #[arg(long)]
    t: u64,
    /// Grid denominator: probabilities are multiples of 1/d.
    #[arg(long)]
    d: u64,
    /// Cap on grid distributions per side.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
    budget: u128,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct MontecarloArgs {
    /// Build this family's pair instead of reading distribution files.
    #[arg(long = "case")]
    case: Option<String>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    k: Option<i64>,
    #[arg(long, default_value = "1/2")]
    a: String,
    #[arg(long)]
    dist1: Option<String>,
    #[arg(long)]
    dist2: Option<String>,
    /// Unit digits of the automorphism (comma separated).
    #[arg(long = "alpha-c")]
    alpha_c: Option<String>,
    /// Power of p in the automorphism.
    #[arg(long = "alpha-k", allow_negative_numbers = true)]
    alpha_k: Option<i64>,
    #[arg(long)]
    level: u32,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// RNG seed (required: runs must be reproducible).
    #[arg(long)]
    seed: u64,
    /// Optional pass threshold: exit 1 if the statistic reaches it.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run a single criterion instead of all nine.
    #[arg(long)]
    criterion: Option<u32>,
}

fn parse_digits(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidParameter(format!("bad digit list {s:?}")))
        })
        .collect()
}

fn parse_group(s: &str) -> Result<Group> {
    match s {
        "omega" => Ok(Group::Omega),
        "delta" => Ok(Group::Delta),
        other => Err(Error::InvalidParameter(format!(
            "group must be omega or delta, got {other:?}"
        ))),
    }
}

fn parse_weight(s: &str) -> Result<BigRational> {
    ratio::parse(s)
}

fn load_distribution(path: &str) -> Result<FiniteDistribution> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("cannot parse {path}: {e}")))
}

fn emit<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("serializable output"));
}

fn default_family_params(family: PairFamily, p: u64) -> (i64, Vec<u64>) {
    match family {
        PairFamily::Case2i => (0, vec![p - 1]),
        PairFamily::Case2ii => (0, vec![1, 1]),
        PairFamily::Case2iii => (1, vec![1]),
        PairFamily::Case2iv => (2, vec![1]),
        PairFamily::HaarPair => (0, vec![2]),
        PairFamily::K1Pair => (1, vec![1]),
    }
}

// ---------------------------------------------------------------------------
// Subcommand bodies (Ok(exit_code) on success, Err for parameter errors)
// ---------------------------------------------------------------------------

fn cmd_classify(args: &ClassifyArgs) -> Result<i32> {
    let group = parse_group(&args.group)?;
    let digits = parse_digits(&args.c)?;
    let label = classify_case(group, args.p, args.k, &digits)?;

    #[derive(Serialize)]
    struct Output {
        schema: u32,
        command: &'static str,
        params: Value,
        case: &'static str,
        degenerate_subcase: bool,
    }
    emit(&Output {
        schema: SCHEMA_VERSION,
        command: "classify",
        params: json!({"group": args.group, "p": args.p, "k": args.k, "c": digits}),
        case: label.case.as_str(),
        degenerate_subcase: label.degenerate_subcase,
    });
    Ok(0)
}

fn cmd_check(args: &CheckArgs) -> Result<i32> {
    let mu1 = load_distribution(&args.dist1)?;
    let mu2 = load_distribution(&args.dist2)?;
    let digits = parse_digits(&args.alpha_c)?;
    let precision = (args.level as usize).max(digits.len());
    let alpha = Automorphism::from_digits(mu1.p(), args.alpha_k, &digits, precision)?;
    let report = check_pair_with_automorphism(&mu1, &mu2, &alpha, args.level)?;

    #[derive(Serialize)]
    struct Output<'a> {
        schema: u32,
        command: &'static str,
        params: Value,
        #[serde(flatten)]
        report: &'a crate::symmetry::PairCheck,
    }
    let exit = if report.holds { 0 } else { 1 };
    emit(&Output {
        schema: SCHEMA_VERSION,
        command: "check",
        params: json!({
            "dist1": args.dist1, "dist2": args.dist2,
            "alpha_k": args.alpha_k, "alpha_c": digits, "level": args.level,
        }),
        report: &report,
    });
    Ok(exit)
}

fn cmd_construct(args: &ConstructArgs) -> Result<i32> {
    let family = PairFamily::parse(&args.case)?;
    let a = parse_weight(&args.a)?;
    let (default_k, default_c) = default_family_params(family, args.p);
    let k = args.k.unwrap_or(default_k);
    let c_digits = match &args.c {
        Some(s) => parse_digits(s)?,
        None => default_c,
    };

    let (mix1, mix2) = construct_family(family, args.p, k, &a, args.level)?;
    let verify = if args.verify {
        Some(verify_construction(family, args.p, k, &c_digits, &a, args.level)?)
    } else {
        None
    };

    #[derive(Serialize)]
    struct Output<'a> {
        schema: u32,
        command: &'static str,
        provenance: Value,
        mixture1: &'a crate::measures::SubgroupMixture,
        mixture2: &'a crate::measures::SubgroupMixture,
        mu1: FiniteDistribution,
        mu2: FiniteDistribution,
        #[serde(skip_serializing_if = "Option::is_none")]
        verify: Option<&'a crate::constructions::VerifyReport>,
    }
    let exit = match &verify {
        Some(report) if !report.passed => 1,
        _ => 0,
    };
    emit(&Output {
        schema: SCHEMA_VERSION,
        command: "construct",
        provenance: json!({
            "case": family.as_str(),
            "p": args.p,
            "k": k,
            "a": ratio::format(&a),
            "level": args.level,
            "paper_eq": family.tier_pattern(),
        }),
        mixture1: &mix1,
        mixture2: &mix2,
        mu1: mix1.to_distribution(),
        mu2: mix2.to_distribution(),
        verify: verify.as_ref(),
    });
    Ok(exit)
}

fn cmd_enumerate(args: &EnumerateArgs) -> Result<i32> {
    let result =
        enumerate_grid_solutions(args.p, args.level, args.t, args.d, args.budget, args.jobs)?;

    #[derive(Serialize)]
    struct Output<'a> {
        schema: u32,
        command: &'static str,
        params: Value,
        result: &'a crate::symmetry::EnumerationResult,
    }
    emit(&Output {
        schema: SCHEMA_VERSION,
        command: "enumerate",
        params: json!({
            "p": args.p, "level": args.level, "t": args.t, "d": args.d,
            "budget": args.budget, "jobs": args.jobs,
        }),
        result: &result,
    });
    Ok(0)
}

fn cmd_montecarlo(args: &MontecarloArgs) -> Result<i32> {
    let (mu1, mu2, t_residue, params) = if let Some(case) = &args.case {
        let family = PairFamily::parse(case)?;
        let p = args.p.ok_or_else(|| Error::InvalidParameter("--case needs --p".into()))?;
        let a = parse_weight(&args.a)?;
        let (default_k, default_c) = default_family_params(family, p);
        let k = args.k.unwrap_or(default_k);
        let digits = match &args.alpha_c {
            Some(s) => parse_digits(s)?,
            None => default_c,
        };
        let precision = (args.level as usize).max(digits.len());
        let alpha = Automorphism::from_digits(p, k, &digits, precision)?;
        let (normalized, swapped) = normalize_case(&alpha)?;
        let t = induced_endomorphism(&normalized, args.level)?;
        let (mix1, mix2) = construct_family(family, p, k, &a, args.level)?;
        let (mu1, mu2) = if swapped {
            (mix2.to_distribution(), mix1.to_distribution())
        } else {
            (mix1.to_distribution(), mix2.to_distribution())
        };
        let params = json!({
            "case": family.as_str(), "p": p, "k": k, "a": ratio::format(&a),
            "c": digits, "level": args.level, "t": t.t(),
            "samples": args.samples, "seed": args.seed,
        });
        (mu1, mu2, t, params)
    } else {
        let dist1 = args
            .dist1
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("need --case or --dist1/--dist2".into()))?;
        let dist2 = args
            .dist2
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("need --case or --dist1/--dist2".into()))?;
        let mu1 = load_distribution(dist1)?;
        let mu2 = load_distribution(dist2)?;
        let k = args.alpha_k.unwrap_or(0);
        let digits = match &args.alpha_c {
            Some(s) => parse_digits(s)?,
            None => vec![1],
        };
        let precision = (args.level as usize).max(digits.len());
        let alpha = Automorphism::from_digits(mu1.p(), k, &digits, precision)?;
        let (normalized, swapped) = normalize_case(&alpha)?;
        let t = induced_endomorphism(&normalized, args.level)?;
        let (mu1, mu2) = if swapped { (mu2, mu1) } else { (mu1, mu2) };
        let params = json!({
            "dist1": dist1, "dist2": dist2, "alpha_k": k, "alpha_c": digits,
            "level": args.level, "t": t.t(), "samples": args.samples, "seed": args.seed,
        });
        (mu1, mu2, t, params)
    };

    let statistic = monte_carlo_symmetry(&mu1, &mu2, &t_residue, args.samples, args.seed)?;

    #[derive(Serialize)]
    struct Output {
        schema: u32,
        command: &'static str,
        params: Value,
        statistic: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        threshold: Option<f64>,
        passed: bool,
    }
    let passed = args.threshold.map(|limit| statistic < limit).unwrap_or(true);
    emit(&Output {
        schema: SCHEMA_VERSION,
        command: "montecarlo",
        params,
        statistic,
        threshold: args.threshold,
        passed,
    });
    Ok(if passed { 0 } else { 1 })
}

fn cmd_selftest(args: &SelftestArgs) -> Result<i32> {
    let reports = match args.criterion {
        Some(id) => vec![selftest::run_criterion(id)
            .ok_or_else(|| Error::InvalidParameter(format!("no criterion {id}")))?],
        None => selftest::run_all(),
    };
    for report in &reports {
        eprintln!(
            "criterion {} ({}): {} in {} ms (limit {} ms)",
            report.id,
            report.name,
            if report.passed { "PASS" } else { "FAIL" },
            report.elapsed_ms,
            report.limit_ms
        );
    }
    let all_passed = reports.iter().all(|r| r.passed);

    #[derive(Serialize)]
    struct Output {
        schema: u32,
        command: &'static str,
        criteria: Vec<selftest::CriterionReport>,
        all_passed: bool,
    }
    emit(&Output {
        schema: SCHEMA_VERSION,
        command: "selftest",
        criteria: reports,
        all_passed,
    });
    Ok(if all_passed { 0 } else { 1 })
}

/// Parse and dispatch; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Classify(args) => cmd_classify(args),
        Command::Check(args) => cmd_check(args),
        Command::Construct(args) => cmd_construct(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Montecarlo(args) => cmd_montecarlo(args),
        Command::Selftest(args) => cmd_selftest(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    }
}
