//! `fraccol` command-line front end. Every subcommand is a thin wrapper
//! around library calls.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fraccol::collocation::{make_points, CollocationRule, PointFamily};
use fraccol::config::ProblemConfig;
use fraccol::report::{run_solve, solution_csv, spectrum_csv, to_json};
use fraccol::scan::{alpha_sweep, default_alpha_grid, scan, spectrum_sweep, with_threads, DEFAULT_M_MAX};
use fraccol::wellposed::{charpoly_subsets, spectrum_with, MAX_SUBSET_ORDER};
use fraccol::Classification;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] fraccol::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    /// The command ran but a certificate failed; the message is a summary.
    #[error("{0}")]
    Certificate(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_certificate_failure() => 1,
            CliError::Certificate(_) => 1,
            _ => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "fraccol", version, about = "Collocation time stepping for Caputo subdiffusion problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues of the collocation matrix M as CSV (or JSON for a .json path).
    Spectrum(SpectrumArgs),
    /// Spectrum scan over families, orders and fractional orders (JSON).
    Scan(ScanArgs),
    /// Coefficients of det(M_alpha - lambda W) (JSON).
    Charpoly(CharpolyArgs),
    /// Solves a problem described by a JSON config.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long)]
    m: usize,
    #[arg(long, conflicts_with = "alpha_sweep", required_unless_present = "alpha_sweep")]
    alpha: Option<f64>,
    /// Use n equispaced interior points of (0, 1).
    #[arg(long, value_name = "N")]
    alpha_sweep: Option<usize>,
    /// Family name or comma-separated abscissas ending in 1.
    #[arg(long, default_value = "chebyshev")]
    points: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    m_max: usize,
    /// Largest accepted --m-max.
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    m_cap: usize,
    #[arg(long, value_delimiter = ',', default_value = "chebyshev,equidistant,lobatto")]
    families: Vec<String>,
    /// Comma-separated alpha values; defaults to 0.05, 0.10, ..., 0.95.
    #[arg(long, value_delimiter = ',')]
    alpha_grid: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CharpolyArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value = "chebyshev")]
    points: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Writes `<prefix>.csv` and `<prefix>.json`.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads().and_then(|t| with_threads(t, || run(cli.command)).map_err(CliError::from)?);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fraccol: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// `FRACCOL_THREADS` caps the worker count of sweeps.
fn threads() -> CliResult<Option<usize>> {
    match std::env::var("FRACCOL_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("FRACCOL_THREADS must be a positive integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Charpoly(a) => cmd_charpoly(a),
        Command::Solve(a) => cmd_solve(a),
    }
}

fn parse_rule(points: &str, m: usize) -> CliResult<CollocationRule> {
    let rule = if points.contains(',') || points.trim().parse::<f64>().is_ok() {
        let theta = points
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(format!("--points: {e}")))?;
        CollocationRule::custom(theta).map_err(|e| CliError::Usage(e.to_string()))?
    } else {
        let family = parse_family(points)?;
        make_points(family, m).map_err(|e| CliError::Usage(e.to_string()))?
    };
    if rule.order() != m {
        return Err(CliError::Usage(format!("--m {m} but {} points given", rule.order())));
    }
    Ok(rule)
}

fn parse_family(name: &str) -> CliResult<PointFamily> {
    match name.parse::<PointFamily>() {
        Ok(PointFamily::Custom) | Err(_) => Err(CliError::Usage(format!("unknown point family '{name}'"))),
        Ok(f) => Ok(f),
    }
}

fn check_alpha(alpha: f64) -> CliResult<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("alpha must lie in (0, 1], got {alpha}")))
    }
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_spectrum(a: SpectrumArgs) -> CliResult<()> {
    if a.m == 0 {
        return Err(CliError::Usage("--m must be at least 1".into()));
    }
    let rule = parse_rule(&a.points, a.m)?;
    let cls = Classification::default();
    let alphas = match (a.alpha, a.alpha_sweep) {
        (Some(alpha), _) => vec![alpha],
        (None, Some(n)) if n > 0 => alpha_sweep(n),
        _ => return Err(CliError::Usage("--alpha-sweep must be positive".into())),
    };
    for &alpha in &alphas {
        check_alpha(alpha)?;
    }
    let reports = if rule.family() == PointFamily::Custom {
        alphas
            .iter()
            .map(|&alpha| spectrum_with(&rule, alpha, &cls))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        spectrum_sweep(rule.family(), a.m, &alphas, &cls)?
    };
    let json = a.out.as_deref().is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    let text = if json { to_json(&reports) } else { spectrum_csv(&reports, &cls) };
    write_output(a.out.as_deref(), &text)?;
    let bad = reports.iter().filter(|r| r.has_real_negative).count();
    if bad > 0 {
        return Err(CliError::Certificate(format!("{bad} spectra contain a real negative eigenvalue")));
    }
    Ok(())
}

fn cmd_scan(a: ScanArgs) -> CliResult<()> {
    let families = a.families.iter().map(|f| parse_family(f)).collect::<CliResult<Vec<_>>>()?;
    let alphas = a.alpha_grid.unwrap_or_else(default_alpha_grid);
    for &alpha in &alphas {
        check_alpha(alpha)?;
    }
    if a.m_max == 0 || a.m_max > a.m_cap {
        return Err(CliError::Usage(format!("--m-max must be in 1..={}", a.m_cap)));
    }
    let rep = scan(&families, a.m_max, &alphas, &Classification::default(), a.m_cap)?;
    write_output(a.out.as_deref(), &to_json(&rep))?;
    if !rep.no_real_negative() {
        return Err(CliError::Certificate("real negative eigenvalue found in the scan".into()));
    }
    Ok(())
}

fn cmd_charpoly(a: CharpolyArgs) -> CliResult<()> {
    if a.m == 0 || a.m > MAX_SUBSET_ORDER {
        return Err(CliError::Usage(format!("--m must be in 1..={MAX_SUBSET_ORDER}")));
    }
    check_alpha(a.alpha)?;
    let rule = parse_rule(&a.points, a.m)?;
    let rep = charpoly_subsets(&rule, a.alpha)?;
    write_output(a.out.as_deref(), &to_json(&rep))?;
    if !rep.all_positive {
        return Err(CliError::Certificate("some characteristic polynomial coefficient is not positive".into()));
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> CliResult<()> {
    let text = fs::read_to_string(&a.config).map_err(|source| CliError::Io {
        path: a.config.clone(),
        source,
    })?;
    let cfg = ProblemConfig::from_json(&text)?;
    let (problem, sol, report) = run_solve(&cfg)?;
    for w in &report.warnings {
        eprintln!("fraccol: warning: {w}");
    }
    let with_ext = |ext: &str| {
        let mut p = a.out.clone().into_os_string();
        p.push(ext);
        PathBuf::from(p)
    };
    write_output(Some(&with_ext(".csv")), &solution_csv(&sol, &problem))?;
    write_output(Some(&with_ext(".json")), &to_json(&report))?;
    Ok(())
}
