use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use thetaseries::eval::{evaluate, Subject};
use thetaseries::identities::IdentityId;
use thetaseries::suite::{run_suite, IdentityRecord, RunConfig};
use thetaseries::{Error, PrecisionContext};

/// Randomized high-precision verification of theta hypergeometric identities.
#[derive(Parser)]
#[command(name = "thetaseries", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one identity (or `all`) on random parameter draws
    Verify(VerifyArgs),
    /// Print the identity catalog
    List,
    /// Evaluate theta, qpfact, eseries or vseries at key=value arguments
    Eval {
        subject: String,
        #[arg(value_name = "KEY=VALUE")]
        args: Vec<String>,
        /// working precision in bits
        #[arg(long, default_value_t = thetaseries::precision::DEFAULT_PRECISION_BITS)]
        prec_bits: usize,
    },
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// identity id from `list`, or `all`
    identity: String,
    #[arg(long, default_value_t = 10)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = thetaseries::precision::DEFAULT_PRECISION_BITS)]
    prec_bits: usize,
    #[arg(long, default_value_t = thetaseries::precision::DEFAULT_TOLERANCE)]
    tol: f64,
    /// largest order n; trials cycle through 0..=K
    #[arg(long, value_name = "K")]
    n_max: Option<i64>,
    /// largest second order m (or expansion support)
    #[arg(long, value_name = "K")]
    m_max: Option<i64>,
    /// largest nome magnitude
    #[arg(long, value_name = "R")]
    p_max: Option<f64>,
    /// write the JSON report here (`-` for stdout)
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// worker threads (default: all cores)
    #[arg(long, value_name = "W")]
    workers: Option<usize>,
    /// leave wall time out of the report so reruns are byte-identical
    #[arg(long)]
    no_timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Verify(v) => verify(v),
        Command::List => {
            list();
            Ok(true)
        }
        Command::Eval {
            subject,
            args,
            prec_bits,
        } => eval(&subject, &args, prec_bits).map(|()| true),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = matches!(
                e.downcast_ref::<Error>(),
                Some(Error::InvalidConfig(_) | Error::UnknownIdentity(_) | Error::Parse(_))
            );
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn list() {
    let mut out = std::io::stdout().lock();
    for id in IdentityId::ALL {
        // a closed pipe (`| head`) just ends the listing
        if writeln!(out, "{:<16} {}", id.key(), id.description())
            .and_then(|()| writeln!(out, "{:<16} \"{}\"", "", id.anchor()))
            .is_err()
        {
            return;
        }
    }
}

fn eval(subject: &str, args: &[String], prec_bits: usize) -> anyhow::Result<()> {
    let ctx = PrecisionContext::with_bits(prec_bits)?;
    let subject: Subject = subject.parse()?;
    let v = evaluate(subject, args, &ctx)?;
    let (re, im) = v.to_decimal(None);
    println!("re = {re}");
    println!("im = {im}");
    Ok(())
}

fn verify(v: VerifyArgs) -> anyhow::Result<bool> {
    let mut cfg = RunConfig::new(&v.identity)?;
    cfg.trials = v.trials;
    cfg.seed = v.seed;
    cfg.precision_bits = v.prec_bits;
    cfg.tolerance = v.tol;
    cfg.n_range = v.n_max.map(|k| (0, k));
    cfg.m_range = v.m_max.map(|k| (0, k));
    if let Some(p) = v.p_max {
        cfg.domain = cfg.domain.with_nome_max(p)?;
    }
    cfg.workers = v.workers;

    let mut report = run_suite(&cfg)?;
    if v.no_timing {
        report = report.without_timing();
    }
    // keep stdout clean when the report goes there
    let to_stdout = v.json.as_deref().is_some_and(|p| p.as_os_str() == "-");
    let say = |line: String| {
        if to_stdout {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    };
    for r in &report.identities {
        say(summary(r));
    }
    let failed = report.identities.iter().filter(|r| !r.pass).count();
    let total = report.identities.len();
    say(match report.wall_seconds {
        Some(t) => format!("{}/{total} passed in {t:.2}s", total - failed),
        None => format!("{}/{total} passed", total - failed),
    });
    if let Some(path) = &v.json {
        let json = report.to_json();
        if path.as_os_str() == "-" {
            println!("{json}");
        } else {
            std::fs::write(path, json + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(report.pass)
}

fn summary(r: &IdentityRecord) -> String {
    let mut s = format!(
        "{:<16} {}  trials {:>4}  rejected {:>4}  max residual {}",
        r.id,
        if r.pass { "PASS" } else { "FAIL" },
        r.trials,
        r.rejected,
        short(&r.max_residual),
    );
    if let Some(e) = r.results.iter().find_map(|t| t.error.as_ref()) {
        s += &format!("  error: {e}");
    }
    let failed: Vec<&str> = r
        .results
        .iter()
        .flat_map(|t| t.failed_checks.iter().map(String::as_str))
        .collect();
    if let Some(c) = failed.first() {
        s += &format!("  failed check: {c}");
    }
    s
}

/// Leading digits of a decimal residual string; exponents beyond f64
/// range are kept verbatim.
fn short(x: &str) -> String {
    match x.parse::<f64>() {
        Ok(v) if v != 0.0 && v.is_finite() => format!("{v:.3e}"),
        _ => x.to_string(),
    }
}
