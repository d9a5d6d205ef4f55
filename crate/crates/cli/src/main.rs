//! Command line front end: `solve` runs configured domains end to end,
//! `check` evaluates the inequality suite on an external eigenvalue list,
//! `convergence` runs a refinement study, and `oracle` dumps closed-form
//! spectra.
//!
//! Exit codes: 0 when every non-advisory inequality row is satisfied and all
//! diagnostics residual trends pass, 2 on a violation, 1 on usage or IO
//! errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use beltrami::bounds::{Applicability, BoundReport};
use beltrami::harness::{
    self, all_pass, bounds_csv, check_spectrum, convergence_csv, fmt_float, parse_spectrum_csv,
    reports_json, run_config, spectrum_csv, Config,
};

#[derive(Parser)]
#[command(
    name = "beltrami",
    about = "Dirichlet spectra on immersed charts and universal eigenvalue inequality reports",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every domain of a config file and write CSV/JSON reports.
    Solve(SolveArgs),
    /// Evaluate the inequality suite on an external spectrum CSV.
    Check(CheckArgs),
    /// Refinement study: run the config domains at a fixed level count and
    /// print the convergence table.
    Convergence(ConvergenceArgs),
    /// Dump a closed-form reference spectrum as CSV.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Config file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for bounds.csv, convergence.csv, report.json and
    /// per-domain spectrum CSVs.
    #[arg(long)]
    out: PathBuf,
    /// Also write each domain's finest mesh as a plain-text dump.
    #[arg(long)]
    dump_mesh: bool,
    /// Also write the discrete eigenfunctions at the finest level as a
    /// plain-text table (recomputes the finest solve).
    #[arg(long)]
    dump_modes: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Spectrum CSV (`index,lambda`; plain one-per-line lists also work).
    #[arg(long)]
    spectrum: PathBuf,
    /// Intrinsic dimension n.
    #[arg(long)]
    n: usize,
    /// Curvature constant H0^2.
    #[arg(long, default_value_t = 0.0)]
    h0sq: f64,
    /// Treat the domain as a bounded piece of a minimal submanifold.
    #[arg(long)]
    minimal: bool,
    /// Largest k for the per-k rows.
    #[arg(long, default_value_t = 3)]
    kmax: usize,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Config file (JSON); refinement counts are overridden by --levels.
    #[arg(long)]
    config: PathBuf,
    /// Number of mesh levels per FEM domain.
    #[arg(long)]
    levels: usize,
}

#[derive(Args)]
struct OracleArgs {
    /// One of: rectangle, ball, hemisphere.
    #[arg(long)]
    domain: String,
    /// Ball dimension.
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Number of eigenvalues.
    #[arg(long)]
    count: usize,
    /// Rectangle side a (defaults to pi).
    #[arg(long)]
    a: Option<f64>,
    /// Rectangle side b (defaults to pi).
    #[arg(long)]
    b: Option<f64>,
}

fn print_bound_report(report: &BoundReport) {
    println!("inequality_id,k,l,lhs,rhs,margin,satisfied,applicability");
    for row in &report.rows {
        println!(
            "{},{},{},{},{},{},{},{}",
            row.inequality_id,
            row.k.map(|v| v.to_string()).unwrap_or_default(),
            row.l.map(|v| v.to_string()).unwrap_or_default(),
            fmt_float(row.lhs),
            fmt_float(row.rhs),
            fmt_float(row.margin),
            row.satisfied,
            match row.applicability {
                Applicability::Exact => "exact",
                Applicability::Advisory => "advisory",
            }
        );
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<u8, String> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let config = Config::from_json(&text).map_err(|e| e.to_string())?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| format!("cannot create {}: {e}", args.out.display()))?;
    let reports = run_config(&config);
    std::fs::write(args.out.join("bounds.csv"), bounds_csv(&reports)).map_err(|e| e.to_string())?;
    std::fs::write(args.out.join("convergence.csv"), convergence_csv(&reports))
        .map_err(|e| e.to_string())?;
    std::fs::write(
        args.out.join("report.json"),
        reports_json(&reports).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    for report in &reports {
        if let Some(level) = report.levels.last() {
            std::fs::write(
                args.out.join(format!("{}_spectrum.csv", report.domain_id)),
                spectrum_csv(&level.lambdas),
            )
            .map_err(|e| e.to_string())?;
        }
    }
    if args.dump_mesh || args.dump_modes {
        for spec in &config.domains {
            if spec.geometry.is_analytic() {
                continue;
            }
            let (chart, region) = spec
                .geometry
                .chart(&spec.domain_id)
                .map_err(|e| e.to_string())?;
            let h = spec.h.ok_or_else(|| "missing h".to_string())?;
            let mut mesh =
                beltrami::mesh::mesh_chart(&chart, region, h).map_err(|e| e.to_string())?;
            for _ in 0..spec.refinements {
                mesh = beltrami::mesh::refine(&mesh, &chart).map_err(|e| e.to_string())?;
            }
            if args.dump_mesh {
                std::fs::write(
                    args.out.join(format!("{}_mesh.txt", spec.domain_id)),
                    mesh.dump(chart.ambient_dim()),
                )
                .map_err(|e| e.to_string())?;
            }
            if args.dump_modes {
                let disc = beltrami::fem::Discretization::build(&mesh, &chart)
                    .map_err(|e| e.to_string())?;
                let m = spec.eigen_count.min(disc.sys.dim());
                let spectrum =
                    beltrami::eigensolve::solve_lowest(&disc.sys, m).map_err(|e| e.to_string())?;
                let mut text = String::from(
                    "# one row per interior vertex: mesh vertex index, then one column per mode\n",
                );
                for (i, &v) in disc.sys.interior_to_mesh.iter().enumerate() {
                    text.push_str(&v.to_string());
                    for c in 0..spectrum.modes.ncols() {
                        text.push(' ');
                        text.push_str(&fmt_float(spectrum.modes[(i, c)]));
                    }
                    text.push('\n');
                }
                std::fs::write(args.out.join(format!("{}_modes.txt", spec.domain_id)), text)
                    .map_err(|e| e.to_string())?;
            }
        }
    }
    for report in &reports {
        let exact_total = report
            .bounds
            .rows
            .iter()
            .filter(|r| r.applicability == Applicability::Exact)
            .count();
        let status = match &report.error {
            Some(e) => format!("ERROR: {e}"),
            None => format!(
                "{} exact rows, {} violated, {} ms",
                exact_total,
                report.bounds.violations().len(),
                report.timing_ms
            ),
        };
        println!("{}: {status}", report.domain_id);
    }
    let (ok, reasons) = all_pass(&reports);
    if ok {
        println!("verdict: PASS");
        Ok(0)
    } else {
        for r in &reasons {
            println!("violation: {r}");
        }
        println!("verdict: FAIL");
        Ok(2)
    }
}

fn cmd_check(args: &CheckArgs) -> Result<u8, String> {
    let text = std::fs::read_to_string(&args.spectrum)
        .map_err(|e| format!("cannot read {}: {e}", args.spectrum.display()))?;
    let lambdas = parse_spectrum_csv(&text).map_err(|e| e.to_string())?;
    let report = check_spectrum(lambdas, args.n, args.h0sq, args.minimal, args.kmax)
        .map_err(|e| e.to_string())?;
    print_bound_report(&report);
    if report.all_exact_satisfied() {
        println!("verdict: PASS");
        Ok(0)
    } else {
        for row in report.violations() {
            println!(
                "violation: {} (margin {})",
                row.inequality_id,
                fmt_float(row.margin)
            );
        }
        println!("verdict: FAIL");
        Ok(2)
    }
}

fn cmd_convergence(args: &ConvergenceArgs) -> Result<u8, String> {
    if args.levels < 1 {
        return Err("need at least one level".into());
    }
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("cannot read {}: {e}", args.config.display()))?;
    let mut config = Config::from_json(&text).map_err(|e| e.to_string())?;
    for spec in &mut config.domains {
        spec.refinements = args.levels - 1;
        spec.diagnostics_t.clear(); // pure eigenvalue study
    }
    let reports = run_config(&config);
    print!("{}", convergence_csv(&reports));
    let failed: Vec<&harness::RunReport> = reports.iter().filter(|r| r.error.is_some()).collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        for r in failed {
            eprintln!("{}: {}", r.domain_id, r.error.as_deref().unwrap_or(""));
        }
        Ok(2)
    }
}

fn cmd_oracle(args: &OracleArgs) -> Result<u8, String> {
    let pi = std::f64::consts::PI;
    let spectrum = match args.domain.as_str() {
        "rectangle" => beltrami::analytic::rectangle_spectrum(
            args.a.unwrap_or(pi),
            args.b.unwrap_or(pi),
            args.count,
        ),
        "ball" => beltrami::analytic::ball_spectrum(args.n, args.count),
        "hemisphere" => beltrami::analytic::hemisphere_spectrum(args.count),
        other => return Err(format!("unknown oracle domain '{other}'")),
    }
    .map_err(|e| e.to_string())?;
    print!("{}", spectrum_csv(&spectrum.lambdas));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems exit 1; --help/--version print and exit 0.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Check(args) => cmd_check(args),
        Command::Convergence(args) => cmd_convergence(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
