//! Command-line front end. `main` only forwards to [`run`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::engine::{self, Convergence, EngineError, Method, SolveOptions};
use crate::expr::{parse_standalone, Expr};
use crate::model::Dtmc;
use crate::pctl::{self, bind, bind_formula, SourcedProperty};
use crate::prism::{build_dtmc, parse_model, BuildOptions};
use crate::report;
use crate::sim;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "basketcheck", version, about = "Probabilistic model checking for discrete-time Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Solution method for unbounded reachability.
    #[arg(long, global = true, env = "BASKETCHECK_ENGINE", default_value = "power")]
    engine: Method,

    /// Convergence threshold for iterative engines.
    #[arg(long, global = true, default_value_t = 1e-6)]
    epsilon: f64,

    #[arg(long = "max-iters", global = true, default_value_t = 1_000_000)]
    max_iters: u64,

    /// Measure convergence relative to the iterate instead of absolutely.
    #[arg(long, global = true)]
    relative: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Add a self-loop to states in which no command is enabled.
    #[arg(long = "fix-deadlocks", global = true)]
    fix_deadlocks: bool,

    /// Non-standard: choose uniformly among overlapping enabled commands.
    #[arg(long = "merge-uniform", global = true)]
    merge_uniform: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check properties against a model.
    Check(CheckArgs),
    /// Estimate a reachability probability by sampling paths.
    Simulate(SimulateArgs),
    /// Bounded-reachability probability as a function of the step bound.
    Curve(CurveArgs),
    /// Print the chain as a Graphviz digraph.
    Graph(ModelArg),
    /// Print a summary of the built chain.
    Info(ModelArg),
}

#[derive(Debug, Args)]
struct ModelArg {
    model: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["prop", "props"])))]
struct CheckArgs {
    model: PathBuf,
    /// Inline property text.
    #[arg(long)]
    prop: Option<String>,
    /// Properties file, one property per line.
    #[arg(long)]
    props: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["goal", "prop"])))]
struct TargetArgs {
    /// Goal state formula, e.g. `s=6`.
    #[arg(long)]
    goal: Option<String>,
    /// Property whose path target is the goal and whose filter, if any, is
    /// the start state.
    #[arg(long)]
    prop: Option<String>,
    /// Start state formula (must match exactly one state); defaults to the
    /// initial state.
    #[arg(long)]
    from: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    model: PathBuf,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long = "max-steps", default_value_t = sim::DEFAULT_MAX_STEPS)]
    max_steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct CurveArgs {
    model: PathBuf,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long = "k-max", default_value_t = 100)]
    k_max: u64,
    /// Emit an SVG line chart instead of CSV.
    #[arg(long)]
    svg: bool,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_ERROR,
            message: message.into(),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = match e {
            EngineError::NotConverged { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_ERROR,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Runs the tool with `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let mut buffer = Vec::new();
    let (code, errors) = match execute(&cli, &mut buffer) {
        Ok(errors) => (if errors.is_empty() { EXIT_OK } else { errors[0].code }, errors),
        Err(f) => (f.code, vec![f]),
    };
    for f in &errors {
        let _ = writeln!(stderr, "error: {}", f.message);
    }
    match &cli.output {
        Some(path) if !buffer.is_empty() => {
            if let Err(e) = fs::write(path, &buffer) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return EXIT_ERROR;
            }
        }
        _ => {
            let _ = stdout.write_all(&buffer);
        }
    }
    code
}

fn solve_options(cli: &Cli) -> Result<SolveOptions, Failure> {
    if cli.epsilon.is_nan() || cli.epsilon <= 0.0 {
        return Err(Failure::usage(format!("--epsilon must be positive, got {}", cli.epsilon)));
    }
    if cli.max_iters == 0 {
        return Err(Failure::usage("--max-iters must be at least 1"));
    }
    Ok(SolveOptions {
        method: cli.engine,
        epsilon: cli.epsilon,
        max_iterations: cli.max_iters,
        convergence: if cli.relative {
            Convergence::Relative
        } else {
            Convergence::Absolute
        },
    })
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &Path, options: BuildOptions) -> Result<Dtmc, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let ast = parse_model(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    build_dtmc(&ast, options).map_err(|e| format!("{}: {e}", path.display()))
}

fn model(cli: &Cli, path: &Path) -> Result<Dtmc, Failure> {
    load_model(
        path,
        BuildOptions {
            fix_deadlocks: cli.fix_deadlocks,
            merge_uniform: cli.merge_uniform,
        },
    )
    .map_err(Failure::usage)
}

/// Returns non-fatal per-property failures; output already written stays.
fn execute(cli: &Cli, out: &mut Vec<u8>) -> Result<Vec<Failure>, Failure> {
    match &cli.command {
        Command::Check(args) => cmd_check(cli, args, out),
        Command::Simulate(args) => cmd_simulate(cli, args, out).map(|_| Vec::new()),
        Command::Curve(args) => cmd_curve(cli, args, out).map(|_| Vec::new()),
        Command::Graph(args) => {
            let dtmc = model(cli, &args.model)?;
            out.extend_from_slice(dtmc.to_dot().as_bytes());
            Ok(Vec::new())
        }
        Command::Info(args) => {
            let dtmc = model(cli, &args.model)?;
            cmd_info(cli, &dtmc, out);
            Ok(Vec::new())
        }
    }
}

fn cmd_check(cli: &Cli, args: &CheckArgs, out: &mut Vec<u8>) -> Result<Vec<Failure>, Failure> {
    let options = solve_options(cli)?;
    let dtmc = model(cli, &args.model)?;
    let props: Vec<SourcedProperty> = match (&args.prop, &args.props) {
        (Some(text), _) => {
            let property = pctl::parse_property(text.trim())
                .map_err(|e| Failure::usage(format!("property: {e}")))?;
            vec![SourcedProperty {
                line: 1,
                text: text.trim().to_string(),
                property,
            }]
        }
        (None, Some(path)) => pctl::parse_properties_file(&read(path)?).map_err(|e| {
            Failure::usage(
                e.errors
                    .iter()
                    .map(|err| format!("{}: {err}", path.display()))
                    .collect::<Vec<_>>()
                    .join("\n"),
            )
        })?,
        (None, None) => return Err(Failure::usage("one of --prop or --props is required")),
    };
    let bound = props
        .iter()
        .map(|p| {
            bind(&p.property, &dtmc)
                .map(|b| b.with_text(&p.text))
                .map_err(|e| Failure::usage(format!("property on line {}: {e}", p.line)))
        })
        .collect::<Result<Vec<_>, _>>()?;

    // Independent properties run concurrently; output keeps input order.
    let results: Vec<_> = bound
        .par_iter()
        .map(|b| engine::check_property(&dtmc, b, &options))
        .collect();

    let mut failures = Vec::new();
    let mut json_results = Vec::new();
    if cli.format == Format::Csv {
        out.extend_from_slice(report::csv_header().as_bytes());
    }
    for (b, r) in bound.iter().zip(results) {
        match r {
            Ok(r) => match cli.format {
                Format::Text => out.extend_from_slice(report::text_report(&r).as_bytes()),
                Format::Csv => out.extend_from_slice(report::csv_row(&r).as_bytes()),
                Format::Json => json_results.push(report::json_result(&r)),
            },
            Err(e) => {
                let mut f = Failure::from(e);
                f.message = format!("{}: {}", b.text, f.message);
                failures.push(f);
            }
        }
    }
    if cli.format == Format::Json {
        let doc = json!({
            "model": args.model.display().to_string(),
            "options": options,
            "results": json_results,
        });
        out.extend_from_slice(serde_json::to_string_pretty(&doc).unwrap_or_default().as_bytes());
        out.push(b'\n');
    }
    // Non-convergence outranks other failures for the exit code.
    failures.sort_by_key(|f| std::cmp::Reverse(f.code));
    Ok(failures)
}

fn unique_state(dtmc: &Dtmc, formula: &Expr, what: &str) -> Result<usize, Failure> {
    let bound = bind_formula(formula, dtmc).map_err(|e| Failure::usage(format!("{what}: {e}")))?;
    let set = dtmc
        .satisfaction_set(&bound)
        .map_err(|e| Failure::usage(format!("{what}: {e}")))?;
    match set.to_vec()[..] {
        [s] => Ok(s),
        _ => Err(Failure::usage(format!(
            "{what} `{formula}` must match exactly one state, matches {}",
            set.len()
        ))),
    }
}

/// Goal set, start state and a display name for `--goal`/`--prop`/`--from`.
fn resolve_target(
    dtmc: &Dtmc,
    target: &TargetArgs,
) -> Result<(crate::model::StateSet, usize, String), Failure> {
    let (goal_expr, filter, name) = match (&target.goal, &target.prop) {
        (Some(g), _) => {
            let e = parse_standalone(g).map_err(|e| Failure::usage(format!("goal: {e}")))?;
            (e, None, format!("F ({g})"))
        }
        (None, Some(p)) => {
            let prop = pctl::parse_property(p).map_err(|e| Failure::usage(format!("property: {e}")))?;
            (prop.path.target().clone(), prop.filter.clone(), p.clone())
        }
        (None, None) => return Err(Failure::usage("one of --goal or --prop is required")),
    };
    let goal_bound = bind_formula(&goal_expr, dtmc).map_err(|e| Failure::usage(format!("goal: {e}")))?;
    let goal = dtmc
        .satisfaction_set(&goal_bound)
        .map_err(|e| Failure::usage(format!("goal: {e}")))?;
    let start = match (&target.from, filter) {
        (Some(f), _) => {
            let e = parse_standalone(f).map_err(|e| Failure::usage(format!("--from: {e}")))?;
            unique_state(dtmc, &e, "--from")?
        }
        (None, Some(filter)) => unique_state(dtmc, &filter, "filter")?,
        (None, None) => dtmc.init_state(),
    };
    Ok((goal, start, name))
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs, out: &mut Vec<u8>) -> Result<(), Failure> {
    if args.samples == 0 {
        return Err(Failure::usage("--samples must be at least 1"));
    }
    let dtmc = model(cli, &args.model)?;
    let (goal, start, name) = resolve_target(&dtmc, &args.target)?;
    let e = sim::estimate_reach(&dtmc, &goal, start, args.samples, args.max_steps, args.seed);
    let text = match cli.format {
        Format::Text => format!(
            "Simulation of {name} from state {start} ({})\n\
             Estimate: {}\n\
             95% confidence interval: [{}, {}]\n\
             Samples: {} (hits: {}, censored: {})\n\
             Seed: {}\n",
            dtmc.space().describe(start),
            report::format_probability(e.estimate),
            report::format_probability(e.low),
            report::format_probability(e.high),
            e.samples,
            e.hits,
            e.censored,
            e.seed,
        ),
        Format::Csv => format!(
            "estimate,low,high,hits,samples,censored,seed\n{},{},{},{},{},{},{}\n",
            e.estimate, e.low, e.high, e.hits, e.samples, e.censored, e.seed
        ),
        Format::Json => {
            let doc = json!({
                "target": name,
                "start": start,
                "max_steps": args.max_steps,
                "estimate": e,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap_or_default())
        }
    };
    out.extend_from_slice(text.as_bytes());
    Ok(())
}

fn cmd_curve(cli: &Cli, args: &CurveArgs, out: &mut Vec<u8>) -> Result<(), Failure> {
    let dtmc = model(cli, &args.model)?;
    let (goal, start, name) = resolve_target(&dtmc, &args.target)?;
    let points = engine::curve(&dtmc, &goal, start, args.k_max);
    let text = if args.svg {
        report::curve_svg(&points, &name)
    } else if cli.format == Format::Json {
        let rows: Vec<_> = points
            .iter()
            .map(|(k, p)| json!({"step": k, "probability": p}))
            .collect();
        format!("{}\n", serde_json::to_string_pretty(&rows).unwrap_or_default())
    } else {
        let mut s = String::from("step,probability\n");
        for (k, p) in &points {
            s.push_str(&format!("{k},{p}\n"));
        }
        s
    };
    out.extend_from_slice(text.as_bytes());
    Ok(())
}

fn cmd_info(cli: &Cli, dtmc: &Dtmc, out: &mut Vec<u8>) {
    let validation = match dtmc.validate() {
        Ok(()) => "ok".to_string(),
        Err(diags) => diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "),
    };
    let text = if cli.format == Format::Json {
        let doc = json!({
            "states": dtmc.num_states(),
            "transitions": dtmc.num_transitions(),
            "initial_state": dtmc.init_state(),
            "variables": dtmc.space().variables(),
            "labels": dtmc.labels().keys().collect::<Vec<_>>(),
            "validation": validation,
        });
        format!("{}\n", serde_json::to_string_pretty(&doc).unwrap_or_default())
    } else {
        let vars = dtmc
            .space()
            .variables()
            .iter()
            .map(|v| format!("{} : [{}..{}] init {}", v.name, v.low, v.high, v.init))
            .collect::<Vec<_>>()
            .join(", ");
        let labels = if dtmc.labels().is_empty() {
            "none".to_string()
        } else {
            dtmc.labels().keys().cloned().collect::<Vec<_>>().join(", ")
        };
        format!(
            "states: {}, transitions: {}\ninitial state: {} ({})\nvariables: {vars}\nlabels: {labels}\nvalidation: {validation}\n",
            dtmc.num_states(),
            dtmc.num_transitions(),
            dtmc.init_state(),
            dtmc.space().describe(dtmc.init_state()),
        )
    };
    out.extend_from_slice(text.as_bytes());
}
