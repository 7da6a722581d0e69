mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use b2quad::exact::{solve_from, Trajectory};
use b2quad::odecheck::{compare, integrate, order_scan, OdeError};
use b2quad::structure::{verify, Scope, VerifyOptions};
use b2quad::systems::SystemId;
use b2quad::Validity;

use config::{read_json, RunConfig, ScanConfig};

#[derive(Parser)]
#[command(name = "b2quad", version, about = "Exact solutions of book-algebra Lie-Hamilton systems and their deformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Suppress informational messages on standard error.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the exact solution on the configured grid.
    Solve {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Check the bracket, compatibility, invariance and Poisson identities.
    Verify {
        /// `all` or a system id.
        #[arg(default_value = "all")]
        scope: String,
        #[arg(long, hide = true)]
        corrupt_jacobian: bool,
    },
    /// Compare the exact solution with an adaptive Runge-Kutta integration.
    Compare {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Error of the order-k truncations against the full deformed solution.
    OrderScan {
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
    /// List the catalog.
    ListSystems,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Io(String),
    Config(String),
    Accuracy(String),
    Failed,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Accuracy(_) | Failure::Failed => 4,
        }
    }
}

impl From<b2quad::Error> for Failure {
    fn from(e: b2quad::Error) -> Self {
        if e.is_accuracy() {
            Failure::Accuracy(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<OdeError> for Failure {
    fn from(e: OdeError) -> Self {
        b2quad::Error::from(e).into()
    }
}

/// What a command produced: its text and whether the validity interval was cut.
struct Report {
    text: String,
    truncated: Option<String>,
}

impl Report {
    fn done(text: String) -> Self {
        Report { text, truncated: None }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".validity.json");
    PathBuf::from(s)
}

fn truncation_note(v: &Validity) -> Option<String> {
    v.boundary.as_ref().filter(|_| v.is_truncated()).map(|b| {
        format!("validity truncated at t = {} ({}); requested end {}", b.t, b.reason, v.requested_end)
    })
}

fn solve(cli: &Cli, path: &Path) -> Result<Report, Failure> {
    let run = read_json::<RunConfig>(path).and_then(RunConfig::validate).map_err(Failure::Config)?;
    let quad = run.tolerances.quad();
    let traj = solve_from(run.system, &run.params, &run.coeffs, run.t0, &run.state, run.t_end, &quad)?;
    let validity = traj.validity().clone();
    let ts: Vec<f64> = run.grid.iter().copied().filter(|&t| validity.contains(t)).collect();
    let states = traj.eval_grid(&ts)?;
    let labels = traj.labels();
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => output::trajectory_csv(labels, &ts, &states),
        Format::Json => output::json(&json!({
            "system": run.system,
            "chart": traj.chart(),
            "labels": labels,
            "validity": validity,
            "t": ts,
            "states": states,
        })),
    };
    if let Some(out) = &cli.out {
        let side = json!({
            "system": run.system,
            "truncated": validity.is_truncated(),
            "validity": validity,
        });
        emit(Some(&sidecar_path(out)), &output::json(&side))?;
    }
    Ok(Report { text, truncated: truncation_note(&validity) })
}

fn compare_cmd(cli: &Cli, path: &Path) -> Result<Report, Failure> {
    let run = read_json::<RunConfig>(path).and_then(RunConfig::validate).map_err(Failure::Config)?;
    let tol = run.tolerances;
    let exact = solve_from(run.system, &run.params, &run.coeffs, run.t0, &run.state, run.t_end, &tol.quad())?;
    let sys = b2quad::systems::system(run.system, &run.params, &run.coeffs).map_err(b2quad::Error::from)?;
    let num = integrate(&sys, run.t0, &run.state, run.t_end, &tol.ode())?;
    let c = compare(&exact, &num, &run.grid)?;
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Csv => output::csv(
            &["component", "max_error"],
            c.labels.iter().zip(&c.max_error).map(|(l, e)| vec![l.clone(), output::real(*e)]),
        ),
        Format::Json => {
            let per: serde_json::Map<String, serde_json::Value> =
                c.labels.iter().zip(&c.max_error).map(|(l, e)| (l.clone(), json!(e))).collect();
            output::json(&json!({
                "system": run.system,
                "max_error": per,
                "max_error_overall": c.max(),
                "grid": run.grid.len(),
                "points": c.points,
                "skipped": c.skipped,
                "tolerances": {
                    "quad_abs": tol.quad_abs,
                    "quad_rel": tol.quad_rel,
                    "ode_rel": tol.ode_rel,
                    "ode_abs": tol.ode_abs,
                },
                "exact_validity": exact.validity(),
                "numeric_validity": num.validity(),
                "rk45_steps": {"accepted": num.accepted_steps(), "rejected": num.rejected_steps()},
            }))
        }
    };
    let truncated = truncation_note(exact.validity()).or_else(|| truncation_note(num.validity()));
    Ok(Report { text, truncated })
}

fn verify_cmd(cli: &Cli, scope: &str, corrupt: bool) -> Result<Report, Failure> {
    let scope = if scope == "all" {
        Scope::All
    } else {
        Scope::System(scope.parse::<SystemId>().map_err(|e| Failure::Config(e.to_string()))?)
    };
    let opts = VerifyOptions {
        corrupt_jacobians: corrupt,
        ..Default::default()
    };
    let reports = verify(scope, &opts);
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.identity.clone(),
                r.points.to_string(),
                format!("{:.3e}", r.max_residual),
                format!("{:.0e}", r.tolerance),
                if r.pass { "PASS" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    let header = ["identity", "points", "max_residual", "tolerance", "result"];
    let text = match cli.format {
        None => output::table(&header, &rows),
        Some(Format::Csv) => output::csv(
            &header,
            reports.iter().map(|r| {
                vec![
                    format!("\"{}\"", r.identity.replace('"', "\"\"")),
                    r.points.to_string(),
                    output::real(r.max_residual),
                    output::real(r.tolerance),
                    if r.pass { "PASS" } else { "FAIL" }.to_string(),
                ]
            }),
        ),
        Some(Format::Json) => output::json(&reports),
    };
    emit(cli.out.as_deref(), &text)?;
    if reports.iter().all(|r| r.pass) {
        Ok(Report::done(String::new()))
    } else {
        Err(Failure::Failed)
    }
}

fn order_scan_cmd(cli: &Cli, path: Option<&Path>) -> Result<Report, Failure> {
    let cfg = match path {
        Some(p) => read_json::<ScanConfig>(p).map_err(Failure::Config)?,
        None => ScanConfig::default(),
    };
    let scan = cfg.validate().map_err(Failure::Config)?;
    let mut results = Vec::new();
    for &k in &scan.ks {
        results.push(order_scan(k, &scan.zs, &scan.setup)?);
    }
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Csv => output::csv(
            &["k", "z", "max_error"],
            results.iter().flat_map(|s| {
                s.z.iter()
                    .zip(&s.errors)
                    .map(|(z, e)| vec![s.k.to_string(), output::real(*z), output::real(*e)])
                    .collect::<Vec<_>>()
            }),
        ),
        Format::Json => {
            let slopes: serde_json::Map<String, serde_json::Value> =
                results.iter().map(|s| (s.k.to_string(), json!(s.slope))).collect();
            output::json(&json!({ "z": scan.zs, "slopes": slopes, "scans": results }))
        }
    };
    Ok(Report::done(text))
}

#[derive(Serialize)]
struct SystemInfo {
    id: SystemId,
    dim: usize,
    state: &'static [&'static str],
    coefficients: [&'static str; 2],
    params: &'static [&'static str],
}

fn list_systems(cli: &Cli) -> Result<Report, Failure> {
    let info: Vec<SystemInfo> = SystemId::ALL
        .iter()
        .map(|&id| {
            let (a, b) = id.coefficient_names();
            SystemInfo {
                id,
                dim: id.dim(),
                state: id.labels(),
                coefficients: [a, b],
                params: id.required_params(),
            }
        })
        .collect();
    let header = ["id", "dim", "state", "coefficients", "params"];
    let cells = |s: &SystemInfo, sep: &str| {
        vec![
            s.id.to_string(),
            s.dim.to_string(),
            s.state.join(sep),
            s.coefficients.join(sep),
            s.params.join(sep),
        ]
    };
    let text = match cli.format {
        None => output::table(&header, &info.iter().map(|s| cells(s, ",")).collect::<Vec<_>>()),
        Some(Format::Csv) => output::csv(&header, info.iter().map(|s| cells(s, " "))),
        Some(Format::Json) => output::json(&info),
    };
    Ok(Report::done(text))
}

fn run(cli: &Cli) -> Result<Option<String>, Failure> {
    let report = match &cli.command {
        Command::Solve { config } => solve(cli, config)?,
        Command::Compare { config } => compare_cmd(cli, config)?,
        Command::OrderScan { config } => order_scan_cmd(cli, config.as_deref())?,
        Command::ListSystems => list_systems(cli)?,
        Command::Verify { scope, corrupt_jacobian } => return verify_cmd(cli, scope, *corrupt_jacobian).map(|_| None),
    };
    emit(cli.out.as_deref(), &report.text)?;
    Ok(report.truncated)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(note)) => {
            if !cli.quiet {
                eprintln!("warning: {note}");
            }
            ExitCode::from(3)
        }
        Err(f) => {
            match &f {
                Failure::Io(m) | Failure::Config(m) | Failure::Accuracy(m) => eprintln!("error: {m}"),
                Failure::Failed => {
                    if !cli.quiet {
                        eprintln!("error: verification failed");
                    }
                }
            }
            ExitCode::from(f.code())
        }
    }
}
