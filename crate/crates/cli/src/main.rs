//! `shlin`: evaluate domain operations, run the analyzer, and run the
//! randomized verification suites.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 I/O error, 3 a suite
//! found a counterexample.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use shlin::analyzer::{analyze, diff, parse_goal, parse_program, AnalysisRequest, Element, Injection, Mode};
use shlin::analyzer::{DEFAULT_MAX_ITERATIONS, DEFAULT_OMEGA_CAP};
use shlin::oracle::{
    check_abstraction2, check_equivalences, run_correctness, run_optimality, Matchers, SuiteReport, TrialConfig,
};
use shlin::{match2_ref, Domain, ExistentialSubstitution, ShLin2, Var, VarSet};

use config::Config;

const REF_CAP: usize = 10;

#[derive(Parser, Debug)]
#[command(name = "shlin", version, about = "Sharing and linearity domains with abstract matching")]
struct Cli {
    /// File of `key = value` defaults; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply one domain operation to elements given inline or as @FILE.
    Eval(EvalArgs),
    /// Run the goal-dependent analysis.
    Analyze(AnalyzeArgs),
    /// Run the analysis with both backward modes and compare.
    Diff(ProgramArgs),
    /// Randomized correctness, optimality, or abstraction checks.
    Verify(VerifyArgs),
    /// Randomized equivalence of the alternative matcher formulations.
    Equiv(SuiteArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Op {
    /// Optimal abstract matching of the first operand against the second.
    Match,
    /// Reference 2-sharing matching by enumeration.
    MatchRef,
    /// Abstraction of an existential substitution.
    Alpha,
    /// Order test; prints true or false.
    Leq,
    Union,
    /// Projection onto `--onto`.
    Project,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    domain: Option<Domain>,
    #[arg(long, value_enum)]
    op: Op,
    /// Variables kept by `project`, e.g. `{x,z}`.
    #[arg(long)]
    onto: Option<String>,
    operands: Vec<String>,
}

#[derive(Args, Debug)]
struct ProgramArgs {
    #[arg(long, value_name = "FILE")]
    program: PathBuf,
    #[arg(long)]
    goal: String,
    /// Call pattern in the domain's textual form.
    #[arg(long)]
    call: String,
    #[arg(long)]
    domain: Option<Domain>,
    /// Forward, entry, or exit states to use instead of computed ones.
    #[arg(long, value_name = "FILE")]
    inject: Option<PathBuf>,
    /// Multiplicity cap for omega analyses.
    #[arg(long)]
    omega_cap: Option<u32>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    program: ProgramArgs,
    #[arg(long)]
    mode: Option<Mode>,
    /// Print the per-clause states of the top-level call.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    max_term_depth: Option<usize>,
    #[arg(long)]
    max_vars: Option<usize>,
    #[arg(long)]
    multiplicity_cap: Option<u32>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Correctness,
    Optimality,
    Abstraction,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Restrict to one domain; all domains otherwise.
    #[arg(long)]
    domain: Option<Domain>,
    #[command(flatten)]
    suite: SuiteArgs,
    /// Check deliberately broken matchers.
    #[arg(long, hide = true)]
    mutant: bool,
}

enum Failure {
    Usage(String),
    Io(String),
    Counterexample,
}

impl From<shlin::Error> for Failure {
    fn from(e: shlin::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn operand(text: &str) -> Result<String, Failure> {
    match text.strip_prefix('@') {
        Some(path) => Ok(read(Path::new(path))?.trim().to_string()),
        None => Ok(text.to_string()),
    }
}

fn parse_vars(text: &str) -> VarSet {
    text.trim()
        .trim_start_matches('{')
        .trim_end_matches('}')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Var::new)
        .collect()
}

fn print(json_out: bool, text: &str, value: Value) {
    if json_out {
        println!("{}", serde_json::to_string_pretty(&value).expect("json serializes"));
    } else {
        println!("{text}");
    }
}

fn eval(args: &EvalArgs, cfg: &Config, json_out: bool) -> Outcome {
    let domain = cfg.pick(args.domain, "domain", Domain::Omega)?;
    let arity = match args.op {
        Op::Alpha | Op::Project => 1,
        _ => 2,
    };
    if args.operands.len() != arity {
        return Err(Failure::Usage(format!(
            "{:?} takes {arity} operand(s), got {}",
            args.op,
            args.operands.len()
        )));
    }
    let texts = args.operands.iter().map(|s| operand(s)).collect::<Result<Vec<_>, _>>()?;
    let el = |i: usize| Element::parse(domain, &texts[i]);
    let result = match args.op {
        Op::Match => el(0)?.matching(&el(1)?)?.to_string(),
        Op::MatchRef => {
            if domain != Domain::Two {
                return Err(Failure::Usage("match-ref is defined for the two domain".to_string()));
            }
            let e1: ShLin2 = texts[0].parse()?;
            let e2: ShLin2 = texts[1].parse()?;
            match2_ref(&e1, &e2, REF_CAP)?.to_string()
        }
        Op::Alpha => {
            let c: ExistentialSubstitution = texts[0].parse()?;
            Element::alpha(domain, &c).to_string()
        }
        Op::Leq => el(0)?.leq(&el(1)?).to_string(),
        Op::Union => el(0)?.union(&el(1)?)?.to_string(),
        Op::Project => {
            let onto = args
                .onto
                .as_deref()
                .ok_or_else(|| Failure::Usage("project needs --onto".to_string()))?;
            el(0)?.project(&parse_vars(onto)).to_string()
        }
    };
    let op = args.op.to_possible_value().expect("no skipped variants");
    print(
        json_out,
        &result,
        json!({"domain": domain.name(), "op": op.get_name(), "result": result}),
    );
    Ok(())
}

fn request(args: &ProgramArgs, cfg: &Config, mode: Mode) -> Result<AnalysisRequest, Failure> {
    let domain = cfg.pick(args.domain, "domain", Domain::Omega)?;
    let program = parse_program(&read(&args.program)?)?;
    let goal = parse_goal(&args.goal)?;
    let call = Element::parse(domain, &args.call)?;
    let mut req = AnalysisRequest::new(program, goal, call, mode);
    req.omega_cap = cfg.pick(args.omega_cap, "omega-cap", DEFAULT_OMEGA_CAP)?;
    req.max_iterations = cfg.pick(args.max_iterations, "max-iterations", DEFAULT_MAX_ITERATIONS)?;
    if let Some(path) = &args.inject {
        req.injection = Injection::parse(domain, &read(path)?)?;
    }
    Ok(req)
}

fn run_analyze(args: &AnalyzeArgs, cfg: &Config, json_out: bool) -> Outcome {
    let mode = cfg.pick(args.mode, "mode", Mode::Matching)?;
    let req = request(&args.program, cfg, mode)?;
    let result = analyze(&req)?;
    let mut text = String::new();
    let mut trace = Vec::new();
    if args.trace {
        for t in &result.trace {
            let theta = t.theta.as_ref().map_or("fail".to_string(), |s| s.to_string());
            text.push_str(&format!(
                "clause {}: {}\n  theta   {theta}\n  call    {}\n  forward {}\n  entry   {}\n  exit    {}\n  answer  {}\n",
                t.clause, t.renamed, t.call, t.forward, t.entry, t.exit, t.answer
            ));
            trace.push(json!({
                "clause": t.clause,
                "renamed": t.renamed.to_string(),
                "theta": t.theta.as_ref().map(|s| s.to_string()),
                "call": t.call.to_string(),
                "forward": t.forward.to_string(),
                "entry": t.entry.to_string(),
                "exit": t.exit.to_string(),
                "answer": t.answer.to_string(),
            }));
        }
    }
    text.push_str(&result.answer.to_string());
    print(
        json_out,
        &text,
        json!({
            "domain": req.call.domain().name(),
            "mode": mode.name(),
            "answer": result.answer.to_string(),
            "iterations": result.iterations,
            "trace": trace,
        }),
    );
    Ok(())
}

fn run_diff(args: &ProgramArgs, cfg: &Config, json_out: bool) -> Outcome {
    let req = request(args, cfg, Mode::Matching)?;
    let d = diff(&req)?;
    let sharing: Vec<String> = d
        .sharing
        .iter()
        .map(|b| b.iter().map(Var::name).collect::<String>())
        .collect();
    let nonlinear: Vec<&str> = d.nonlinear.iter().map(Var::name).collect();
    let text = format!(
        "matching  {}\nmgu       {}\ngroups    {{{}}}\nsharing   {{{}}}\nnonlinear {{{}}}",
        d.matching,
        d.mgu,
        d.groups.join(", "),
        sharing.join(", "),
        nonlinear.join(",")
    );
    print(
        json_out,
        &text,
        json!({
            "domain": req.call.domain().name(),
            "matching": d.matching.to_string(),
            "mgu": d.mgu.to_string(),
            "groups": d.groups,
            "sharing": sharing,
            "nonlinear": nonlinear,
        }),
    );
    Ok(())
}

fn trial_config(args: &SuiteArgs, cfg: &Config) -> Result<TrialConfig, Failure> {
    let d = TrialConfig::default();
    let t = TrialConfig {
        seed: cfg.pick(args.seed, "seed", d.seed)?,
        trials: cfg.pick(args.trials, "trials", d.trials)?,
        max_term_depth: cfg.pick(args.max_term_depth, "max-term-depth", d.max_term_depth)?,
        max_vars: cfg.pick(args.max_vars, "max-vars", d.max_vars)?,
        multiplicity_cap: cfg.pick(args.multiplicity_cap, "multiplicity-cap", d.multiplicity_cap)?,
        jobs: cfg.pick(args.jobs, "jobs", d.jobs)?,
    };
    t.validate()?;
    Ok(t)
}

fn report(reports: &[SuiteReport], json_out: bool) -> Outcome {
    let ok = reports.iter().all(SuiteReport::ok);
    let text: String = reports.iter().map(SuiteReport::to_text).collect();
    let values: Vec<Value> = reports
        .iter()
        .map(|r| serde_json::to_value(r).expect("report serializes"))
        .collect();
    print(json_out, text.trim_end(), json!({"ok": ok, "reports": values}));
    if ok {
        Ok(())
    } else {
        Err(Failure::Counterexample)
    }
}

fn verify(args: &VerifyArgs, cfg: &Config, json_out: bool) -> Outcome {
    let trials = trial_config(&args.suite, cfg)?;
    let domains = match args.domain {
        Some(d) => vec![d],
        None => match cfg.pick(None, "domain", "all".to_string())?.as_str() {
            "all" => Domain::ALL.to_vec(),
            name => vec![name.parse::<Domain>()?],
        },
    };
    let matchers = if args.mutant {
        Matchers::mutant()
    } else {
        Matchers::standard()
    };
    let reports = match args.kind {
        Kind::Correctness => domains
            .iter()
            .map(|&d| run_correctness(d, &trials, &matchers))
            .collect::<Result<Vec<_>, _>>()?,
        Kind::Optimality => domains
            .iter()
            .map(|&d| run_optimality(d, &trials))
            .collect::<Result<Vec<_>, _>>()?,
        Kind::Abstraction => vec![check_abstraction2(&trials)?],
    };
    report(&reports, json_out)
}

fn equiv(args: &SuiteArgs, cfg: &Config, json_out: bool) -> Outcome {
    let trials = trial_config(args, cfg)?;
    report(&[check_equivalences(&trials)?], json_out)
}

fn run(cli: &Cli) -> Outcome {
    let cfg = match &cli.config {
        Some(path) => Config::parse(&read(path)?)?,
        None => Config::default(),
    };
    let json_out = cfg.flag(cli.json, "json")?;
    match &cli.command {
        Command::Eval(a) => eval(a, &cfg, json_out),
        Command::Analyze(a) => run_analyze(a, &cfg, json_out),
        Command::Diff(a) => run_diff(a, &cfg, json_out),
        Command::Verify(a) => verify(a, &cfg, json_out),
        Command::Equiv(a) => equiv(a, &cfg, json_out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Counterexample) => ExitCode::from(3),
    }
}
