use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use zaremba::fem::{hierarchy_for, transition_corners};
use zaremba::hypotheses::Classification;
use zaremba::mesh::Mesh;
use zaremba::scenario::{self, emit_report, Format, Report, ReportFile, ScenarioConfig, ScenarioKind, Verdict};

#[derive(Parser)]
#[command(name = "zaremba", version, about = "Eigenvalue inequalities for the mixed Dirichlet-Neumann Laplacian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Angle and monotonicity hypotheses for a partition
    Check(Args),
    /// One refinement study for a Dirichlet set
    Solve(Args),
    /// Compare the two Dirichlet choices of a partition
    Compare(Args),
    /// Run comparisons over a domain family grid
    Sweep(Args),
    /// Evaluate the curvature integral identity for a manufactured function
    Identity(Args),
    /// Dirichlet-set inclusion monotonicity
    Inclusion(Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(clap::Args)]
struct Args {
    /// scenario config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// output directory; without it the report goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// report formats, comma separated
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
    /// coarsest mesh size
    #[arg(long)]
    h0: Option<f64>,
    /// total number of mesh levels
    #[arg(long)]
    levels: Option<usize>,
    /// eigensolver residual tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// grade meshes toward Dirichlet-Neumann transition corners
    #[arg(long, value_enum)]
    grading: Option<OnOff>,
    /// expected verdict or classification; a mismatch exits with status 2
    #[arg(long)]
    expect: Option<String>,
    /// write the finest mesh in the plain-text dump format
    #[arg(long)]
    dump_mesh: Option<PathBuf>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("ZAREMBA_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("ZAREMBA_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("ZAREMBA_THREADS must be at least 1".into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    Ok(())
}

fn load(args: &Args) -> Result<ScenarioConfig, String> {
    let mut cfg = ScenarioConfig::load(&args.config).map_err(|e| e.to_string())?;
    if let Some(h0) = args.h0 {
        cfg.solver.h0 = h0;
    }
    if let Some(levels) = args.levels {
        cfg.solver.levels = levels;
    }
    if let Some(tol) = args.tol {
        cfg.solver.tol = tol;
    }
    if let Some(g) = args.grading {
        cfg.solver.grading = matches!(g, OnOff::On);
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn require_kind(cfg: &ScenarioConfig, kind: ScenarioKind) -> Result<(), String> {
    match cfg.kind {
        Some(k) if k != kind => Err(format!("config `{}` is of kind {:?}, not {:?}", cfg.name, k, kind)),
        _ => Ok(()),
    }
}

fn classification_name(c: Classification) -> String {
    serde_json::to_value(c).unwrap().as_str().unwrap().to_string()
}

/// Whether a report outcome matches `expect`: a verdict, a classification, or PASS/FAIL.
fn outcome_matches(report: &Report, expect: &str) -> Result<bool, String> {
    let is_classification = ["COMPLEMENTARY", "MONOTONE_REMAINDER", "NONE"].contains(&expect);
    let is_verdict = [Verdict::VerifiedStrict, Verdict::EqualWithinTol, Verdict::Inconclusive].iter().any(|v| v.name() == expect);
    let compare = |c: &scenario::ComparisonReport| {
        if is_classification {
            classification_name(c.hypotheses.classification) == expect
        } else {
            c.verdict.name() == expect
        }
    };
    match report {
        Report::Check(r) if is_classification => Ok(classification_name(r.hypotheses.classification) == expect),
        Report::Compare(r) if is_classification || is_verdict => Ok(compare(r)),
        Report::Sweep(r) if is_classification || is_verdict => Ok(r.points.iter().all(|p| p.report.as_ref().is_some_and(&compare))),
        Report::Inclusion(r) if is_verdict => Ok(r.verdict.name() == expect),
        Report::Identity(r) if expect == "PASS" || expect == "FAIL" => Ok(r.pass == (expect == "PASS")),
        _ => Err(format!("--expect {expect} does not apply to this subcommand")),
    }
}

/// Finest mesh of the family a subcommand solves on.
fn finest_mesh(cfg: &ScenarioConfig, dirichlet_sets: &[&[usize]], levels: usize) -> Result<Mesh, String> {
    let boundary = cfg.boundary().map_err(|e| e.to_string())?;
    let corners = transition_corners(&boundary, dirichlet_sets);
    let mut solver = cfg.solver.clone();
    solver.levels = levels;
    let mut meshes = hierarchy_for(&boundary, &solver, &corners).map_err(|e| e.to_string())?;
    Ok(meshes.pop().unwrap())
}

fn summary(report: &Report) -> String {
    match report {
        Report::Check(r) => format!(
            "check {}: classification {}, angle margin {:.6} rad, monotone {}",
            r.name,
            classification_name(r.hypotheses.classification),
            r.hypotheses.angle_check.margin,
            r.hypotheses.monotonicity.pass
        ),
        Report::Solve(r) => format!(
            "solve {}: lambda {:.10} (error estimate {:.3e}){}",
            r.name,
            r.study.best_lambda(),
            r.study.error_estimate(),
            r.relative_error.map_or(String::new(), |e| format!(", relative error {e:.3e}"))
        ),
        Report::Compare(r) => format!(
            "compare {}: lambda(gamma) {:.8}, lambda(gamma') {:.8}, margin {:.3e}, bound {:.3e}, classification {}, verdict {}",
            r.name,
            r.study_gamma.best_lambda(),
            r.study_gamma_prime.best_lambda(),
            r.margin,
            r.bound,
            classification_name(r.hypotheses.classification),
            r.verdict.name()
        ),
        Report::Sweep(r) => {
            let ok = r.points.iter().filter(|p| p.report.is_some()).count();
            let strict = r.points.iter().filter(|p| p.report.as_ref().is_some_and(|c| c.verdict == Verdict::VerifiedStrict)).count();
            format!("sweep {}: {} points, {} solved, {} VERIFIED_STRICT", r.name, r.points.len(), ok, strict)
        }
        Report::Identity(r) => format!(
            "identity {}: mixed {:.12}, cross {:.12}, curvature {:.12}, residual {:.3e}, {}",
            r.name,
            r.breakdown.term_mixed,
            r.breakdown.term_cross,
            r.breakdown.term_curv,
            r.breakdown.residual,
            if r.pass { "PASS" } else { "FAIL" }
        ),
        Report::Inclusion(r) => format!(
            "inclusion {}: monotone on every level {}, margin {:.3e}, bound {:.3e}, verdict {}",
            r.name,
            r.monotone_every_level,
            r.margin,
            r.bound,
            r.verdict.name()
        ),
    }
}

fn run(command: Command) -> Result<bool, String> {
    let (args, report) = match command {
        Command::Check(a) => {
            let cfg = load(&a)?;
            let r = scenario::check_config(&cfg).map_err(|e| e.to_string())?;
            if let Some(path) = &a.dump_mesh {
                let p = cfg.partition_spec().map_err(|e| e.to_string())?;
                write_mesh(path, &finest_mesh(&cfg, &[&p.gamma, &[p.gamma_prime]], 1)?)?;
            }
            (a, Report::Check(r))
        }
        Command::Solve(a) => {
            let cfg = load(&a)?;
            let (r, meshes) = scenario::solve_config(&cfg).map_err(|e| e.to_string())?;
            if let Some(path) = &a.dump_mesh {
                write_mesh(path, meshes.last().unwrap())?;
            }
            (a, Report::Solve(r))
        }
        Command::Compare(a) => {
            let cfg = load(&a)?;
            require_kind(&cfg, ScenarioKind::Compare)?;
            let r = scenario::compare_config(&cfg).map_err(|e| e.to_string())?;
            if let Some(path) = &a.dump_mesh {
                write_mesh(path, &finest_mesh(&cfg, &[&r.gamma, &[r.gamma_prime]], cfg.solver.levels)?)?;
            }
            (a, Report::Compare(r))
        }
        Command::Sweep(a) => {
            let cfg = load(&a)?;
            require_kind(&cfg, ScenarioKind::Sweep)?;
            if a.dump_mesh.is_some() {
                return Err("--dump-mesh is not available for sweeps".into());
            }
            (a, Report::Sweep(scenario::run_sweep(&cfg).map_err(|e| e.to_string())?))
        }
        Command::Identity(a) => {
            let cfg = load(&a)?;
            require_kind(&cfg, ScenarioKind::Identity)?;
            let r = scenario::run_identity(&cfg).map_err(|e| e.to_string())?;
            if let Some(path) = &a.dump_mesh {
                let boundary = cfg.boundary().map_err(|e| e.to_string())?;
                let h = cfg.identity.as_ref().and_then(|i| i.mesh_h).unwrap_or_else(|| (boundary.diameter() / 4.0).min(0.1));
                write_mesh(path, &zaremba::mesh::generate(&boundary, h, None).map_err(|e| e.to_string())?)?;
            }
            (a, Report::Identity(r))
        }
        Command::Inclusion(a) => {
            let cfg = load(&a)?;
            require_kind(&cfg, ScenarioKind::Inclusion)?;
            let r = scenario::run_inclusion(&cfg).map_err(|e| e.to_string())?;
            if let Some(path) = &a.dump_mesh {
                write_mesh(path, &finest_mesh(&cfg, &[&r.smaller, &r.larger], cfg.solver.levels)?)?;
            }
            (a, Report::Inclusion(r))
        }
    };
    let file = ReportFile::new(report);
    let formats = if args.format.is_empty() { vec![Format::Json] } else { args.format.clone() };
    match &args.out {
        Some(dir) => {
            for path in emit_report(&file, &formats, dir).map_err(|e| e.to_string())? {
                eprintln!("wrote {}", path.display());
            }
        }
        None => match formats.as_slice() {
            [Format::Json] => println!("{}", file.to_json()),
            [Format::Csv] => print!("{}", file.to_csv()),
            _ => return Err("without --out, choose exactly one of json or csv".into()),
        },
    }
    eprintln!("{}", summary(&file.report));
    match &args.expect {
        Some(e) => outcome_matches(&file.report, e),
        None => Ok(true),
    }
}

fn write_mesh(path: &PathBuf, mesh: &Mesh) -> Result<(), String> {
    let f = std::fs::File::create(path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    mesh.write_dump(std::io::BufWriter::new(f)).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("outcome does not match --expect");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
