mod cache;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mhl_core::arithmetic::{
    alpha_of, beta_exceeds, beta_of, check_family_nm3, scan_family_nm4, BitNat, Family,
    FamilyRecord,
};
use mhl_core::monomial::{component_count, degree_count};
use mhl_core::steenrod::{
    classical_hit_quotient_dim, hit_component_subspace, hit_subspace, Limits,
};
use mhl_core::toplayer::{build_context, verify_all};
use mhl_core::Error;

use cache::SubspaceCache;

const EQUIVARIANCE_TRIALS: usize = 100;

#[derive(Parser)]
#[command(
    name = "mhl",
    version,
    about = "Hit-problem top-layer verification and α/β arithmetic"
)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Directory for cached hit subspaces.
    #[arg(long, env = "MHL_CACHE_DIR", global = true)]
    cache_dir: Option<PathBuf>,

    #[arg(long, default_value_t = 1 << 22, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    max_cols: u64,

    #[arg(long, default_value_t = 1 << 24, value_parser = clap::value_parser!(u64).range(1..), global = true)]
    max_rows: u64,

    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// β(d), α(d) and α(d + β(d)); d may be decimal or 2^a-b.
    Beta { d: String },
    /// Run every top-layer verifier at (n, k).
    VerifyParity { n: usize, k: usize },
    /// Dimensions of the degree-d hit subspace of N_n.
    HitDim {
        n: usize,
        d: usize,
        /// Restrict to the Λ^a component.
        #[arg(long)]
        component: Option<usize>,
    },
    /// Family records for r (nm4) or n (nm3) in lo..=hi.
    ScanFamily { kind: String, lo: u64, hi: u64 },
    /// dim QP_n^d with the β(d) > n vanishing check.
    ClassicalQdim { n: usize, d: usize },
}

/// What a command produced: a JSON document, a CSV table, text lines, and
/// whether every mathematical check held.
struct Report {
    json: Value,
    csv: Option<(Vec<String>, Vec<Vec<String>>)>,
    text: Vec<String>,
    ok: bool,
}

fn usage(msg: String) -> Error {
    Error::InvalidArgs(msg)
}

fn check_n(n: usize) -> mhl_core::Result<()> {
    if n == 0 || n > mhl_core::monomial::MAX_VARS {
        return Err(usage(format!(
            "n must be between 1 and {}, got {n}",
            mhl_core::monomial::MAX_VARS
        )));
    }
    Ok(())
}

fn cmd_beta(d: &str) -> mhl_core::Result<Report> {
    let d: BitNat = d.parse()?;
    if d.is_zero() {
        return Err(usage("β is defined for d >= 1".into()));
    }
    let beta = beta_of(&d)?;
    let alpha = alpha_of(&d);
    let alpha_shift = alpha_of(&(&d + beta));
    Ok(Report {
        json: json!({
            "command": "beta",
            "d": d,
            "alpha_d": alpha,
            "beta_d": beta,
            "alpha_d_plus_beta": alpha_shift,
        }),
        csv: None,
        text: vec![
            format!("d = {}", d.shorthand()),
            format!("alpha(d) = {alpha}"),
            format!("beta(d) = {beta}"),
            format!("alpha(d + {beta}) = {alpha_shift}"),
        ],
        ok: true,
    })
}

fn cmd_verify_parity(
    n: usize,
    k: usize,
    limits: &Limits,
    cache: Option<&SubspaceCache>,
    seed: u64,
) -> mhl_core::Result<Report> {
    check_n(n)?;
    let ctx = build_context(n, k, limits)?;
    let d = ctx.degree();
    let mut cached = false;
    if let Some(c) = cache {
        if let Some(s) = c.load(n, d, Some(k), ctx.component().len()) {
            ctx.set_hit_component(s)?;
            cached = true;
        }
    }
    let reports = verify_all(&ctx, seed, EQUIVARIANCE_TRIALS)?;
    if let (Some(c), false) = (cache, cached) {
        c.store(n, d, Some(k), ctx.hit_component()?)?;
    }
    let ok = reports.iter().all(|r| r.passed);
    let text = reports
        .iter()
        .map(|r| {
            let failed: Vec<&str> = r
                .checks
                .iter()
                .filter(|(_, &v)| !v)
                .map(|(k, _)| k.as_str())
                .collect();
            let verdict = if r.passed {
                "PASS".to_string()
            } else {
                format!("FAIL {failed:?}")
            };
            format!("({n},{k}) {}: {verdict}", r.check)
        })
        .chain(std::iter::once(format!(
            "({n},{k}) d = {d}: {}",
            if ok {
                "all checks hold"
            } else {
                "some checks failed"
            }
        )))
        .collect();
    Ok(Report {
        json: json!({
            "command": "verify-parity",
            "n": n,
            "k": k,
            "degree": d,
            "seed": seed,
            "passed": ok,
            "reports": reports,
        }),
        csv: None,
        text,
        ok,
    })
}

fn cmd_hit_dim(
    n: usize,
    d: usize,
    component: Option<usize>,
    limits: &Limits,
    cache: Option<&SubspaceCache>,
) -> mhl_core::Result<Report> {
    check_n(n)?;
    let ambient = match component {
        Some(a) => {
            if a > n || a > d || !(d - a).is_multiple_of(2) {
                0
            } else {
                component_count(n, a, ((d - a) / 2) as u64)
            }
        }
        None => degree_count(n, d),
    };
    limits.check_cols(ambient)?;
    let ambient = ambient as usize;
    let loaded = cache.and_then(|c| c.load(n, d, component, ambient));
    let hit = match loaded {
        Some(s) => s,
        None => {
            let s = match component {
                Some(a) => hit_component_subspace(n, d, a, limits)?,
                None => hit_subspace(n, d, limits)?,
            };
            if let Some(c) = cache {
                c.store(n, d, component, &s)?;
            }
            s
        }
    };
    let rank = hit.rank();
    let mut json = json!({
        "command": "hit-dim",
        "n": n,
        "d": d,
        "ambient": ambient,
        "hit_rank": rank,
        "quotient": ambient - rank,
    });
    if let Some(a) = component {
        json["component"] = json!(a);
    }
    let scope = component.map_or(String::new(), |a| format!(" (Λ^{a} component)"));
    Ok(Report {
        json,
        csv: None,
        text: vec![
            format!("n = {n}, d = {d}{scope}"),
            format!("ambient = {ambient}"),
            format!("hit = {rank}"),
            format!("quotient = {}", ambient - rank),
        ],
        ok: true,
    })
}

fn cmd_scan_family(kind: &str, lo: u64, hi: u64) -> mhl_core::Result<Report> {
    let family: Family = kind.parse()?;
    if lo > hi {
        return Err(usage(format!("empty range {lo}..{hi}")));
    }
    let records: Vec<FamilyRecord> = match family {
        Family::Nm4 => scan_family_nm4(lo, hi)?,
        Family::Nm3 => (lo..=hi)
            .map(check_family_nm3)
            .collect::<mhl_core::Result<_>>()?,
    };
    let ok = records.iter().all(|r| !r.contradiction);
    let text = records
        .iter()
        .map(|r| {
            let head = match r.r {
                Some(rv) => format!("r = {rv}, n = {}, k = {}", r.n, r.k),
                None => format!("n = {}, k = {}", r.n, r.k),
            };
            let d =
                r.d.as_ref()
                    .map_or("undefined".to_string(), BitNat::shorthand);
            format!(
                "{head}: d = {d}, alpha(d+n) = {}, beta(d) > n: {}, hypothesis: {}{}",
                r.alpha_d_plus_n,
                r.beta_exceeds_n,
                r.hypothesis_holds,
                if r.contradiction {
                    ", CONTRADICTION"
                } else {
                    ""
                }
            )
        })
        .collect();
    let header = FamilyRecord::CSV_HEADER
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = records.iter().map(FamilyRecord::csv_row).collect();
    Ok(Report {
        json: json!({
            "command": "scan-family",
            "family": family,
            "lo": lo,
            "hi": hi,
            "passed": ok,
            "records": records,
        }),
        csv: Some((header, rows)),
        text,
        ok,
    })
}

fn cmd_classical_qdim(n: usize, d: usize, limits: &Limits) -> mhl_core::Result<Report> {
    check_n(n)?;
    let dim = classical_hit_quotient_dim(n, d, limits)?;
    let beta = (d >= 1)
        .then(|| beta_of(&BitNat::from(d as u64)))
        .transpose()?;
    let exceeds = d >= 1 && beta_exceeds(&BitNat::from(d as u64), n as u64);
    let violation = exceeds && dim > 0;
    let mut text = vec![format!("dim QP_{n}^{d} = {dim}")];
    if let Some(b) = beta {
        text.push(format!("beta({d}) = {b}, beta(d) > n: {exceeds}"));
    }
    if violation {
        text.push("VIOLATION: beta(d) > n but the quotient is nonzero".into());
    }
    Ok(Report {
        json: json!({
            "command": "classical-qdim",
            "n": n,
            "d": d,
            "dim": dim,
            "beta_d": beta,
            "beta_exceeds_n": exceeds,
            "violation": violation,
        }),
        csv: None,
        text,
        ok: !violation,
    })
}

/// Flattens nested JSON into `(dotted.path, scalar)` pairs.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn emit(report: &Report, format: Format) -> io::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&report.json).map_err(io::Error::other)?;
            writeln!(out, "{text}")?;
        }
        Format::Text => {
            for line in &report.text {
                writeln!(out, "{line}")?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            match &report.csv {
                Some((header, rows)) => {
                    w.write_record(header)?;
                    for row in rows {
                        w.write_record(row)?;
                    }
                }
                None => {
                    let mut pairs = Vec::new();
                    flatten("", &report.json, &mut pairs);
                    w.write_record(["key", "value"])?;
                    for (k, v) in pairs {
                        w.write_record([k, v])?;
                    }
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit { .. } => 3,
        Error::DecompositionFailure(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let limits = Limits {
        max_cols: cli.max_cols as usize,
        max_rows: cli.max_rows as usize,
    };
    let cache = cli.cache_dir.as_deref().map(SubspaceCache::new);
    let result = match &cli.command {
        Command::Beta { d } => cmd_beta(d),
        Command::VerifyParity { n, k } => {
            cmd_verify_parity(*n, *k, &limits, cache.as_ref(), cli.seed)
        }
        Command::HitDim { n, d, component } => {
            cmd_hit_dim(*n, *d, *component, &limits, cache.as_ref())
        }
        Command::ScanFamily { kind, lo, hi } => cmd_scan_family(kind, *lo, *hi),
        Command::ClassicalQdim { n, d } => cmd_classical_qdim(*n, *d, &limits),
    };
    match result {
        Ok(report) => {
            if let Err(e) = emit(&report, cli.format) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
