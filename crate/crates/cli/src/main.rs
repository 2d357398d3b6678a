use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use kloo_cli::report::{mismatches, write_rows, Format, ReportRow};
use kloo_cli::suites::{run_suite, Grid, Suite};
use kloo_cli::{exit_code_for, EXIT_MISMATCH, EXIT_OK};
use kloo_core::arith::Modulus;
use kloo_core::ball::fixed_to_decimal;
use kloo_core::closed::{moment_closed, Validity};
use kloo_core::kloosterman::{kloosterman, negation_pairs, DEFAULT_PRECISION_BITS};
use kloo_core::moments::{moment_direct, moment_exact, Method};
use kloo_core::Result;

#[derive(Parser)]
#[command(
    name = "kloo",
    version,
    about = "Kloosterman sums, their power moments and the congruence counts behind them"
)]
struct Cli {
    /// Worker threads for sweeps (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate K(u, v; q).
    #[command(allow_negative_numbers = true)]
    Eval {
        u: i64,
        v: i64,
        q: u64,
        #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
        precision_bits: u32,
    },
    /// Compute S_n(q).
    Moment {
        n: u32,
        q: u64,
        #[arg(long, value_enum, default_value = "exact")]
        method: MomentMethod,
        #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
        precision_bits: u32,
    },
    /// Run a verification suite; exits 1 if any row mismatches.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        grid: Grid,
    },
    /// List pairs λ1 < λ2 with K(1, λ1; p^r) = -K(1, λ2; p^r) numerically.
    NegationSearch {
        p: u64,
        r: u32,
        #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
        precision_bits: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MomentMethod {
    Exact,
    Direct,
    Closed,
}

fn eval(u: i64, v: i64, q: u64, bits: u32, format: Format) -> Result<u8> {
    let k = kloosterman(u, v, &Modulus::new(q)?, bits)?;
    let text = match k.value.certify_integer() {
        Some(i) => i.to_string(),
        None => fixed_to_decimal(k.value.mid_raw(), k.value.bits(), 30),
    };
    let mut out = io::stdout().lock();
    let _ = match format {
        Format::Csv => writeln!(out, "{text}\terror ≤ {:.3e}", k.error_bound()),
        Format::Json => writeln!(
            out,
            "{}",
            json!({"u": u, "v": v, "q": q, "value": text, "error_bound": format!("{:.3e}", k.error_bound())})
        ),
    };
    Ok(EXIT_OK)
}

fn moment(n: u32, q: u64, method: MomentMethod, bits: u32, format: Format) -> Result<u8> {
    let m = Modulus::new(q)?;
    let closed = moment_closed(n, &m)?;
    let start = std::time::Instant::now();
    let (value, tag) = match method {
        MomentMethod::Exact => (moment_exact(n, &m)?.value, Method::ExactCount),
        MomentMethod::Direct => (moment_direct(n, &m, bits)?.value, Method::DirectFloat),
        MomentMethod::Closed => match &closed {
            Validity::Closed(v) => (v.clone(), Method::ClosedForm),
            Validity::OutsideValidity => {
                println!("S_{n}({q}): outside validity of every closed formula");
                return Ok(EXIT_OK);
            }
        },
    };
    let mut row = ReportRow::new(n, tag.as_str(), value).q(q);
    if let Some((p, r)) = m.as_prime_power() {
        row = row.p(p).r(r);
    }
    if let (Validity::Closed(c), false) = (&closed, matches!(method, MomentMethod::Closed)) {
        row = row.closed(c);
    }
    let row = row.elapsed(start.elapsed().as_millis() as u64);
    let code = if row.matched { EXIT_OK } else { EXIT_MISMATCH };
    write_rows(io::stdout().lock(), &[row], format).expect("stdout");
    Ok(code)
}

fn verify(suite: Suite, grid: &Grid, format: Format) -> Result<u8> {
    let rows = run_suite(suite, grid)?;
    write_rows(io::stdout().lock(), &rows, format).expect("stdout");
    let bad = mismatches(&rows);
    eprintln!("{} rows, {bad} mismatches", rows.len());
    Ok(if bad == 0 { EXIT_OK } else { EXIT_MISMATCH })
}

fn negation_search(p: u64, r: u32, bits: u32, format: Format) -> Result<u8> {
    let q = Modulus::prime_power(p, r)?;
    let pairs = negation_pairs(&q, bits)?;
    let mut out = io::stdout().lock();
    if format == Format::Csv {
        let _ = writeln!(out, "lambda1,lambda2,status");
    }
    for (a, b) in pairs {
        let _ = match format {
            Format::Csv => writeln!(out, "{a},{b},numerically-zero"),
            Format::Json => writeln!(
                out,
                "{}",
                json!({"lambda1": a, "lambda2": b, "status": "numerically-zero"})
            ),
        };
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .ok();
    }
    let f = cli.format;
    let result = match cli.command {
        Command::Eval {
            u,
            v,
            q,
            precision_bits,
        } => eval(u, v, q, precision_bits, f),
        Command::Moment {
            n,
            q,
            method,
            precision_bits,
        } => moment(n, q, method, precision_bits, f),
        Command::Verify { suite, grid } => verify(suite, &grid, f),
        Command::NegationSearch { p, r, precision_bits } => negation_search(p, r, precision_bits, f),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
