//! Command-line front end.
//!
//! Every command reads one or more `.tfn` files and prints one JSON object
//! per file (JSON lines when several files are given). `graph` and
//! `aggregate` can print Graphviz instead, and `recession` prints the
//! recession function in the input syntax ahead of its JSON summary.
//!
//! Exit codes: 0 on success, 1 when `eigen` does not converge, 2 on input
//! or usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::SolverError;
use crate::fnmodel::{parse, PointAdd, TopicalFn};
use crate::graphs::{aggregate, associated_graph, dual_graph, is_indecomposable, syntactic_graph, Digraph};
use crate::recession::{recession, slice_bounded_certificate};
use crate::solver::{
    collatz_wielandt_upper, cycle_times, eigen_solve, membership, super_diameter_bound, DiameterBound, EigenOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "topical", version, about = "Eigenvectors, graphs and certificates for homogeneous monotone maps")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Residual target of the eigenvector solver.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Orbit length used by the solver and the cycle-time estimates.
    #[arg(long = "k-max", global = true, default_value_t = 10_000)]
    pub k_max: usize,
    /// Seed for every random sample.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print JSON (the default for every command).
    #[arg(long, global = true, conflicts_with = "dot")]
    pub json: bool,
    /// Print Graphviz DOT (`graph` and `aggregate` only).
    #[arg(long, global = true)]
    pub dot: bool,
    /// Number of input files processed in parallel.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Associated,
    Dual,
    Syntactic,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Associated, dual and syntactic graphs with strongly connected components.
    Graph {
        files: Vec<PathBuf>,
        /// Graph rendered by `--dot`.
        #[arg(long, value_enum, default_value_t = GraphKind::Associated)]
        which: GraphKind,
    },
    /// The aggregation tower up to its stable level.
    Aggregate { files: Vec<PathBuf> },
    /// Strong connectivity, indecomposability and syntactic convexity.
    Check { files: Vec<PathBuf> },
    /// Eigenvalue and eigenvector from a bounded orbit.
    Eigen { files: Vec<PathBuf> },
    /// Upper and lower cycle-time estimates.
    Cycletime { files: Vec<PathBuf> },
    /// Collatz-Wielandt upper bound from random samples.
    Cw {
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Recession function and slice-space certificate summary.
    Recession { files: Vec<PathBuf> },
    /// Slice-space boundedness certificate.
    SliceCert { files: Vec<PathBuf> },
    /// Bound on the Hilbert diameter of the super-eigenspace at level lambda.
    Diameter {
        files: Vec<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
    },
    /// Position of a point relative to the super-, sub- and slice spaces.
    Membership {
        files: Vec<PathBuf>,
        /// Comma-separated additive coordinates.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        point: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
    },
}

impl Command {
    fn files(&self) -> &[PathBuf] {
        match self {
            Command::Graph { files, .. }
            | Command::Aggregate { files }
            | Command::Check { files }
            | Command::Eigen { files }
            | Command::Cycletime { files }
            | Command::Cw { files, .. }
            | Command::Recession { files }
            | Command::SliceCert { files }
            | Command::Diameter { files, .. }
            | Command::Membership { files, .. } => files,
        }
    }

    fn allows_dot(&self) -> bool {
        matches!(self, Command::Graph { .. } | Command::Aggregate { .. })
    }
}

/// Output of one input file.
#[derive(Debug, Default)]
struct Outcome {
    stdout: String,
    stderr: String,
    code: i32,
}

impl Outcome {
    fn input_error(path: &Path, msg: impl std::fmt::Display) -> Self {
        Outcome {
            stdout: String::new(),
            stderr: format!("{}: {msg}\n", path.display()),
            code: EXIT_INPUT,
        }
    }
}

fn solver_error(path: &Path, e: SolverError) -> Outcome {
    let code = match e {
        SolverError::Model(_) | SolverError::InvalidArgument(_) | SolverError::Precondition { .. } => EXIT_INPUT,
        SolverError::NonFinite { .. } | SolverError::Bracket { .. } => EXIT_NOT_CONVERGED,
    };
    Outcome {
        stdout: String::new(),
        stderr: format!("{}: {e}\n", path.display()),
        code,
    }
}

fn load(path: &Path) -> Result<TopicalFn, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let f = parse(&text).map_err(|e| e.to_string())?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    Ok(match (f.name.clone(), name) {
        (None, Some(n)) => f.with_name(n),
        _ => f,
    })
}

fn json_line(path: &Path, mut body: Value) -> String {
    if let Value::Object(map) = &mut body {
        map.insert("file".into(), json!(path.display().to_string()));
    }
    let mut s = serde_json::to_string(&body).expect("serializable");
    s.push('\n');
    s
}

fn one_based(components: &[Vec<usize>]) -> Vec<Vec<usize>> {
    components.iter().map(|c| c.iter().map(|v| v + 1).collect()).collect()
}

fn graph_json(g: &Digraph) -> Value {
    let scc = g.scc();
    let mut v = g.to_json();
    v["scc"] = json!(one_based(&scc.components));
    v["strongly_connected"] = json!(g.is_strongly_connected());
    v
}

fn run_file(cmd: &Command, cfg: &RunConfig, path: &Path) -> Outcome {
    let f = match load(path) {
        Ok(f) => f,
        Err(e) => return Outcome::input_error(path, e),
    };
    let name = f.name.clone().unwrap_or_else(|| "f".into());
    let mut out = Outcome::default();
    match cmd {
        Command::Graph { which, .. } => {
            if cfg.dot {
                let (g, label) = match which {
                    GraphKind::Associated => (associated_graph(&f), "associated"),
                    GraphKind::Dual => (dual_graph(&f), "dual"),
                    GraphKind::Syntactic => (syntactic_graph(&f), "syntactic"),
                };
                out.stdout = g.to_dot(&format!("{name} {label}"));
            } else {
                let body = json!({
                    "dim": f.dim(),
                    "associated": graph_json(&associated_graph(&f)),
                    "dual": graph_json(&dual_graph(&f)),
                    "syntactic": graph_json(&syntactic_graph(&f)),
                });
                out.stdout = json_line(path, body);
            }
        }
        Command::Aggregate { .. } => {
            let tower = aggregate(&f);
            if cfg.dot {
                for (k, level) in tower.levels.iter().enumerate() {
                    out.stdout.push_str(&level.to_dot(&format!("{name} G{}", k + 1)));
                }
            } else {
                out.stdout = json_line(path, tower.to_json());
            }
        }
        Command::Check { .. } => {
            let res = is_indecomposable(&f);
            let verdict = match &res.witness {
                None => "indecomposable".to_string(),
                Some(w) => {
                    let fmt = |s: &[usize]| s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
                    format!("decomposable, witness I={{{}}} J={{{}}}", fmt(&w.i_set), fmt(&w.j_set))
                }
            };
            let body = json!({
                "strongly_connected": associated_graph(&f).is_strongly_connected(),
                "indecomposable": res.indecomposable,
                "stabilized_at": res.tower.stabilized_at(),
                "convex_syntactic": f.is_convex_syntactic(),
                "witness": res.witness.as_ref().map(|w| w.to_json()),
                "verdict": verdict,
            });
            out.stdout = json_line(path, body);
        }
        Command::Eigen { .. } => {
            let opts = EigenOptions {
                tol: cfg.tol,
                k_max: cfg.k_max,
                ..EigenOptions::default()
            };
            match eigen_solve(&f, &opts) {
                Ok(report) => {
                    out.stdout = json_line(path, report.to_json());
                    if !report.converged() {
                        out.code = EXIT_NOT_CONVERGED;
                        out.stderr = format!(
                            "{}: {}: no boundedness certificate at horizon k_max = {}\n",
                            path.display(),
                            report.status.as_str(),
                            cfg.k_max
                        );
                    }
                }
                Err(e) => return solver_error(path, e),
            }
        }
        Command::Cycletime { .. } => match cycle_times(&f, cfg.k_max) {
            Ok(ct) => {
                let (up, lo) = ct.estimates();
                let body = json!({
                    "k": ct.k,
                    "upper_at_k": ct.upper_at_k,
                    "lower_at_k": ct.lower_at_k,
                    "chi_upper_est": up,
                    "chi_lower_est": lo,
                });
                out.stdout = json_line(path, body);
            }
            Err(e) => return solver_error(path, e),
        },
        Command::Cw { samples, .. } => {
            let opts = EigenOptions {
                tol: cfg.tol,
                k_max: cfg.k_max,
                ..EigenOptions::default()
            };
            let anchors: Vec<PointAdd> = match eigen_solve(&f, &opts) {
                Ok(r) if r.converged() => vec![r.eigenvector],
                Ok(_) => Vec::new(),
                Err(e) => return solver_error(path, e),
            };
            match collatz_wielandt_upper(&f, *samples, cfg.seed, &anchors) {
                Ok(value) => {
                    let body = json!({
                        "cw_upper": value,
                        "samples": samples,
                        "seed": cfg.seed,
                        "eigenvector_anchor": !anchors.is_empty(),
                    });
                    out.stdout = json_line(path, body);
                }
                Err(e) => return solver_error(path, e),
            }
        }
        Command::Recession { .. } => {
            let rec = recession(&f);
            let cert = slice_bounded_certificate(&f, cfg.seed);
            let mut body = cert.to_json();
            body["numeric_agreement"] = json!(rec.numeric_agreement);
            if !cfg.json {
                out.stdout = rec.fhat.to_string();
                if !out.stdout.ends_with('\n') {
                    out.stdout.push('\n');
                }
            }
            out.stdout.push_str(&json_line(path, body));
        }
        Command::SliceCert { .. } => {
            let cert = slice_bounded_certificate(&f, cfg.seed);
            out.stdout = json_line(path, cert.to_json());
        }
        Command::Diameter { lambda, .. } => match super_diameter_bound(&f, *lambda) {
            Ok(DiameterBound::Bounded(b)) => {
                out.stdout = json_line(path, json!({"lambda": lambda, "bounded": true, "bound": b}));
            }
            Ok(DiameterBound::Unbounded) => {
                let body = json!({
                    "lambda": lambda,
                    "bounded": false,
                    "bound": null,
                    "reason": "associated graph is not strongly connected; no bound claimed",
                });
                out.stdout = json_line(path, body);
            }
            Err(e) => return solver_error(path, e),
        },
        Command::Membership { point, lambda, mu, .. } => {
            let x = match PointAdd::new(point.clone()) {
                Ok(x) => x,
                Err(e) => return Outcome::input_error(path, e),
            };
            match membership(&f, &x, *lambda, *mu) {
                Ok(m) => {
                    let mut body = serde_json::to_value(&m).expect("serializable");
                    body["lambda"] = json!(lambda);
                    body["mu"] = json!(mu);
                    out.stdout = json_line(path, body);
                }
                Err(e) => return solver_error(path, e),
            }
        }
    }
    out
}

fn validate(cli: &Cli) -> Result<(), String> {
    let cfg = &cli.config;
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err("--tol must be a positive number".into());
    }
    if cfg.k_max == 0 {
        return Err("--k-max must be at least 1".into());
    }
    if cfg.jobs == 0 {
        return Err("--jobs must be at least 1".into());
    }
    if cfg.dot && !cli.command.allows_dot() {
        return Err("--dot is only available for `graph` and `aggregate`".into());
    }
    if cli.command.files().is_empty() {
        return Err("no input files given".into());
    }
    Ok(())
}

/// Runs a parsed command line, writing results to `out` and diagnostics to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Err(msg) = validate(cli) {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_INPUT;
    }
    let files = cli.command.files();
    let jobs = cli.config.jobs.min(files.len());
    let mut outcomes: Vec<Option<Outcome>> = (0..files.len()).map(|_| None).collect();
    if jobs <= 1 {
        for (slot, path) in outcomes.iter_mut().zip(files) {
            *slot = Some(run_file(&cli.command, &cli.config, path));
        }
    } else {
        let chunk = files.len().div_ceil(jobs);
        std::thread::scope(|s| {
            for (slots, paths) in outcomes.chunks_mut(chunk).zip(files.chunks(chunk)) {
                s.spawn(move || {
                    for (slot, path) in slots.iter_mut().zip(paths) {
                        *slot = Some(run_file(&cli.command, &cli.config, path));
                    }
                });
            }
        });
    }
    let mut code = EXIT_OK;
    for o in outcomes.into_iter().flatten() {
        let _ = out.write_all(o.stdout.as_bytes());
        let _ = err.write_all(o.stderr.as_bytes());
        code = code.max(o.code);
    }
    if code != EXIT_OK && files.len() > 1 {
        let _ = writeln!(err, "exit status {code}");
    }
    code
}

/// Parses `args` (including the program name) and runs them.
pub fn run_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            code
        }
    }
}
