//! The `sldlab` command line: a JSON config in, a JSON report or CSV table out.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OutputFormat, Task};
use crate::dynamics::{evolve, state_derivative, GeneratorKind};
use crate::estimation::{scaling_experiment, uncertainty_run, EstimationResult, Model, ScalingTable};
use crate::golden::{run_suite, CheckResult, SuiteOptions};
use crate::operator::set_max_qubits;
use crate::report::{scaling_csv, to_json, Report};
use crate::search::search_optimal_state;
use crate::sld::{check_saturation, classical_fisher, cramer_rao_bound, quantum_fisher, LambdaStatus};
use crate::solver::{closed_form_solution, Provenance, Solution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sldlab", version, about = "Fisher information, optimal probes and Monte Carlo checks for fixed-readout qubit metrology")]
struct Cli {
    /// Worker threads for multi-start search and Monte Carlo trials (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the golden verification suite.
    Verify(VerifyArgs),
    /// Classical and quantum Fisher information of the configured probe.
    Fisher(RunArgs),
    /// Search for probe states that saturate the quantum bound.
    Solve(RunArgs),
    /// Monte Carlo maximum-likelihood uncertainty.
    Simulate(RunArgs),
    /// Fisher information and uncertainty against probe size.
    Scaling(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Config file; `-` or absent reads stdin.
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Only run checks whose id contains this string.
    #[arg(long)]
    filter: Option<String>,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `text` prints one line per check; `json` prints the report.
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Flip the sign of σ₂ in the single-qubit reference (exercises the suite).
    #[arg(long, hide = true)]
    corrupt_sigma2: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaOut {
    pub label: String,
    pub re: f64,
    pub im: f64,
    pub probability: f64,
    pub unconstrained: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherResult {
    pub n_qubits: usize,
    pub generator: GeneratorKind,
    pub x: f64,
    pub classical_fisher: f64,
    pub quantum_fisher: f64,
    pub saturated: bool,
    pub im_condition_max: f64,
    pub diagonal_residual: f64,
    pub inv_lambdas: Vec<LambdaOut>,
    /// 1/√(ν F) for the classical F; absent when F = 0.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionOut {
    pub qfi: f64,
    pub residual: f64,
    pub provenance: Provenance,
    pub inv_lambdas: Vec<LambdaOut>,
    /// Coefficients c_P of ρ = Σ c_P P with |c_P| > 1e-12.
    pub pauli: BTreeMap<String, f64>,
    /// Bloch vector, single qubit only.
    pub bloch: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub n_qubits: usize,
    pub generator: GeneratorKind,
    pub starts: usize,
    pub feasible_starts: usize,
    pub evaluations: usize,
    /// Known analytic solution for this generator and size, when one exists.
    pub closed_form: Option<SolutionOut>,
    pub solutions: Vec<SolutionOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub filter: Option<String>,
    pub passed: usize,
    pub failed: usize,
    pub errored: usize,
    pub checks: Vec<CheckResult>,
}

/// Error carrying the exit code.
struct Failure(i32, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_ERROR, e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

fn lambdas_out(spec: &crate::sld::LambdaSpectrum) -> Vec<LambdaOut> {
    spec.entries
        .iter()
        .map(|e| LambdaOut {
            label: e.label.clone(),
            re: e.value.re,
            im: e.value.im,
            probability: e.probability,
            unconstrained: e.status == LambdaStatus::Unconstrained,
        })
        .collect()
}

fn solution_out(s: &Solution) -> crate::Result<SolutionOut> {
    let pauli = s
        .state
        .pauli_expansion()?
        .terms()
        .iter()
        .filter(|(_, c)| c.abs() > 1e-12)
        .map(|(p, c)| (p.to_string(), *c))
        .collect();
    let bloch = if s.state.n_qubits() == 1 { Some(s.state.bloch_vector()?) } else { None };
    Ok(SolutionOut {
        qfi: s.qfi,
        residual: s.residual,
        provenance: s.provenance,
        inv_lambdas: lambdas_out(&s.inv_lambdas),
        pauli,
        bloch,
    })
}

struct Loaded {
    cfg: ExperimentConfig,
    base_dir: Option<PathBuf>,
}

fn load_config(path: Option<&Path>, stdin: &mut dyn Read, seed: Option<u64>) -> std::result::Result<Loaded, Failure> {
    let (text, base_dir) = match path {
        Some(p) if p != Path::new("-") => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure(EXIT_ERROR, format!("cannot read {}: {e}", p.display())))?;
            (text, p.parent().map(Path::to_path_buf))
        }
        _ => {
            let mut text = String::new();
            stdin.read_to_string(&mut text)?;
            (text, None)
        }
    };
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| Failure(EXIT_ERROR, e))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(Loaded { cfg, base_dir })
}

fn emit(body: &str, out: Option<&Path>, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| Failure(EXIT_ERROR, format!("cannot write {}: {e}", p.display()))),
        None => stdout.write_all(body.as_bytes()).map_err(Failure::from),
    }
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Outcome {
    let opts = SuiteOptions { sigma_y_sign: if args.corrupt_sigma2 { -1.0 } else { 1.0 } };
    let checks = run_suite(args.filter.as_deref(), &opts);
    if checks.is_empty() {
        return Err(Failure(EXIT_ERROR, format!("no check matches filter {:?}", args.filter.as_deref().unwrap_or(""))));
    }
    let errored = checks.iter().filter(|c| c.error.is_some()).count();
    let passed = checks.iter().filter(|c| c.passed).count();
    let result = VerifyResult { filter: args.filter.clone(), passed, failed: checks.len() - passed - errored, errored, checks };
    let json = to_json(&Report::new("verify", 0, None, &result))?;
    match args.format {
        FormatArg::Json => stdout.write_all(json.as_bytes())?,
        FormatArg::Text => {
            for c in &result.checks {
                writeln!(stdout, "{}", c.line())?;
            }
            writeln!(stdout, "{} passed, {} failed, {} errored", result.passed, result.failed, result.errored)?;
        }
        FormatArg::Csv => return Err(Failure(EXIT_ERROR, "verify does not produce CSV".into())),
    }
    if let Some(p) = &args.out {
        emit(&json, Some(p), stdout)?;
    }
    Ok(if result.errored > 0 {
        EXIT_ERROR
    } else if result.failed > 0 {
        EXIT_FAILED
    } else {
        EXIT_OK
    })
}

fn fisher(l: &Loaded) -> crate::Result<FisherResult> {
    let cfg = &l.cfg;
    let g = cfg.generator(cfg.n_qubits)?;
    let basis = cfg.readout.build(cfg.n_qubits)?;
    let rho = evolve(&cfg.initial_state(l.base_dir.as_deref())?, &g, cfg.x_true)?;
    let d = state_derivative(&g, &rho)?;
    let f = classical_fisher(&basis, &rho, &d)?;
    let sat = check_saturation(&basis, &rho, &d)?;
    Ok(FisherResult {
        n_qubits: cfg.n_qubits,
        generator: cfg.generator,
        x: cfg.x_true,
        classical_fisher: f,
        quantum_fisher: quantum_fisher(&rho, &d)?,
        saturated: sat.saturated,
        im_condition_max: sat.im_condition_max,
        diagonal_residual: sat.diagonal_residual,
        inv_lambdas: lambdas_out(&sat.spectrum),
        bound: cramer_rao_bound(f, cfg.shots).ok(),
    })
}

fn solve(l: &Loaded) -> crate::Result<SolveResult> {
    let cfg = &l.cfg;
    let g = cfg.generator(cfg.n_qubits)?;
    let basis = cfg.readout.build(cfg.n_qubits)?;
    let search = crate::search::SearchConfig {
        seed: cfg.seed,
        feasibility_tolerance: cfg.tolerances.solution_residual,
        ..cfg.search.clone()
    };
    let r = search_optimal_state(&g, &basis, cfg.n_qubits, &search)?;
    Ok(SolveResult {
        n_qubits: cfg.n_qubits,
        generator: cfg.generator,
        starts: r.starts,
        feasible_starts: r.feasible_starts,
        evaluations: r.evaluations,
        closed_form: closed_form_solution(cfg.generator, cfg.n_qubits).ok().map(|s| solution_out(&s)).transpose()?,
        solutions: r.solutions.iter().map(solution_out).collect::<crate::Result<_>>()?,
    })
}

fn simulate(l: &Loaded) -> crate::Result<EstimationResult> {
    let cfg = &l.cfg;
    let g = cfg.generator(cfg.n_qubits)?;
    let model = Model::new(g, cfg.initial_state(l.base_dir.as_deref())?, cfg.readout.build(cfg.n_qubits)?)?;
    uncertainty_run(&model, cfg.x_true, cfg.shots, cfg.trials, cfg.seed)
}

fn scaling(l: &Loaded) -> std::result::Result<ScalingTable, Failure> {
    let cfg = &l.cfg;
    let family = cfg.state_family().map_err(|e| Failure(EXIT_ERROR, e))?;
    Ok(scaling_experiment(&cfg.n_list, cfg.generator, family, cfg.readout, cfg.shots, cfg.trials, cfg.seed, cfg.x_true)?)
}

fn cmd_run(task: Task, args: &RunArgs, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Outcome {
    let mut loaded = load_config(args.config.as_deref(), stdin, args.seed)?;
    if loaded.cfg.task.is_some_and(|t| t != task) {
        return Err(Failure(
            EXIT_ERROR,
            format!("config field `task`: config is for `{}`, command is `{}`", loaded.cfg.task.unwrap().name(), task.name()),
        ));
    }
    match args.format {
        Some(FormatArg::Json) => loaded.cfg.output.format = OutputFormat::Json,
        Some(FormatArg::Csv) => loaded.cfg.output.format = OutputFormat::Csv,
        Some(FormatArg::Text) => return Err(Failure(EXIT_ERROR, "--format text is only available for verify".into())),
        None => {}
    }
    if let Some(p) = &args.out {
        loaded.cfg.output.path = Some(p.clone());
    }
    if loaded.cfg.output.format == OutputFormat::Csv && task != Task::Scaling {
        return Err(Failure(EXIT_ERROR, format!("config field `output.format`: `{}` only produces JSON", task.name())));
    }
    set_max_qubits(loaded.cfg.max_qubits);
    let cfg = loaded.cfg.clone();
    let seed = cfg.seed;
    let name = task.name();
    let body = match task {
        Task::Fisher => to_json(&Report::new(name, seed, Some(cfg.clone()), fisher(&loaded)?))?,
        Task::Solve => to_json(&Report::new(name, seed, Some(cfg.clone()), solve(&loaded)?))?,
        Task::Simulate => to_json(&Report::new(name, seed, Some(cfg.clone()), simulate(&loaded)?))?,
        Task::Scaling => {
            let table = scaling(&loaded)?;
            match cfg.output.format {
                OutputFormat::Csv => scaling_csv(&table),
                OutputFormat::Json => to_json(&Report::new(name, seed, Some(cfg.clone()), table))?,
            }
        }
        Task::Verify => unreachable!("verify has its own entry point"),
    };
    emit(&body, cfg.output.path.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    // Buffer the streams so the work can move onto a sized thread pool.
    let mut input = Vec::new();
    let needs_stdin = match &cli.command {
        Command::Verify(_) => false,
        Command::Fisher(a) | Command::Solve(a) | Command::Simulate(a) | Command::Scaling(a) => {
            a.config.as_deref().is_none_or(|p| p == Path::new("-"))
        }
    };
    if needs_stdin {
        if let Err(e) = stdin.read_to_end(&mut input) {
            let _ = writeln!(stderr, "sldlab: cannot read stdin: {e}");
            return EXIT_ERROR;
        }
    }
    let go = || {
        let mut out = Vec::new();
        let mut inp: &[u8] = &input;
        let r = match &cli.command {
            Command::Verify(a) => cmd_verify(a, &mut out),
            Command::Fisher(a) => cmd_run(Task::Fisher, a, &mut inp, &mut out),
            Command::Solve(a) => cmd_run(Task::Solve, a, &mut inp, &mut out),
            Command::Simulate(a) => cmd_run(Task::Simulate, a, &mut inp, &mut out),
            Command::Scaling(a) => cmd_run(Task::Scaling, a, &mut inp, &mut out),
        };
        (r, out)
    };
    let (outcome, out) = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(go),
            Err(e) => (Err(Failure(EXIT_ERROR, e.to_string())), Vec::new()),
        },
        None => go(),
    };
    if let Err(e) = stdout.write_all(&out).and_then(|_| stdout.flush()) {
        let _ = writeln!(stderr, "sldlab: cannot write output: {e}");
        return EXIT_ERROR;
    }
    match outcome {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "sldlab: {msg}");
            code
        }
    }
}
