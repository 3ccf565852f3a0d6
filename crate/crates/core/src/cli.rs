//! Command-line front end. [`dispatch`] parses arguments, runs one command
//! and returns the process exit code.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{call_of, check_bounded, check_reactivity_with, unfold, Verdict, DEFAULT_UNFOLD_DEPTH};
use crate::cps::{cps_program, CpsError, CpsOptions, CpsPause, DEFAULT_INDEX_LIMIT};
use crate::encodings::{encode_counter_machine, encode_pushdown, parse_counter_machine, parse_pushdown, MachineError};
use crate::equiv::{self, bisim_check, confluence_check, parse_proc_program, BisimResult, EquivError, EquivOptions, Mode, ProcDefs, Proc};
use crate::mealy::{self, mealy_to_program, mealy_trace_equiv, parse_mealy, print_mealy, program_to_mealy, MealyEquiv, MealyError};
use crate::semantics::{Execution, Policy, ReactiveProgram, RunConfig, RuntimeError, TraceStep, DEFAULT_FUEL};
use crate::syntax::{parse_program_with, print_program, print_thread, FreshNames, ParseOptions, PauseMode, ProgramError, Signal, SourceProgram};
use crate::tailcore::{check_tail_reactivity, parse_tail_program, print_tail_program, TailProgram};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REJECT: i32 = 2;
pub const EXIT_DISTINGUISHED: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;
pub const EXIT_RUNTIME: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "sl", version, about = "Synchronous language toolkit")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Thread reductions allowed per instant.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Number of instants to run.
    #[arg(long, global = true)]
    instants: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Scheduler::Deterministic)]
    scheduler: Scheduler,
    /// Seed for the random scheduler; drawn and printed when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// How source `pause` is read.
    #[arg(long, global = true, value_enum, default_value_t = PauseArg::Primitive)]
    pause: PauseArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scheduler {
    Deterministic,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PauseArg {
    Primitive,
    Table1,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PauseCps {
    Optimized,
    Naive,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Trace,
    Bounded,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a source program over an input trace.
    Run(RunArgs),
    /// Run a tail program over an input trace.
    RunTail(RunArgs),
    /// Read one line of inputs per instant from standard input.
    Step { file: PathBuf },
    /// Check that every instant terminates.
    CheckReactivity {
        file: PathBuf,
        /// Unfolding depth of equation bodies.
        #[arg(long, default_value_t = DEFAULT_UNFOLD_DEPTH)]
        depth: usize,
    },
    /// Check that evaluation contexts stay bounded.
    CheckBounded { file: PathBuf },
    /// Translate a source program to a tail program.
    Cps {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = PauseCps::Optimized)]
        pause_cps: PauseCps,
        /// Maximum number of generated equations.
        #[arg(long, default_value_t = DEFAULT_INDEX_LIMIT)]
        limit: usize,
    },
    /// Extract a Mealy machine from a tail (`.slt`) or source (`.sl`) program.
    ToMealy {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = mealy::DEFAULT_STATE_LIMIT)]
        limit: usize,
    },
    /// Compile a Mealy machine to a tail program.
    FromMealy {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare two Mealy machines.
    MealyEquiv { left: PathBuf, right: PathBuf },
    /// Compare two programs (`.sl`, `.slt` or `.proc`).
    Equiv {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Exploration depth for `--mode bounded`.
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = equiv::DEFAULT_STATE_LIMIT)]
        limit: usize,
        /// Decide `⇓L` by its own labelled search.
        #[arg(long)]
        labelled_suspension: bool,
    },
    /// Encode a counter machine (or a pushdown automaton) as a program.
    EncodeCm {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "halt")]
        halt_signal: String,
        /// Read the file as a one-symbol pushdown automaton.
        #[arg(long)]
        pushdown: bool,
    },
    /// Check one-step confluence on the reachable states of a program.
    ConfluenceTest {
        file: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = equiv::DEFAULT_STATE_LIMIT)]
        limit: usize,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    file: PathBuf,
    /// Trace file: one line of input names per instant.
    #[arg(long)]
    inputs: Option<PathBuf>,
}

/// Errors that end a command, with their exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}: {1}")]
    Io(PathBuf, io::Error),
    #[error("{0}: {1}")]
    Program(PathBuf, ProgramError),
    #[error("{0}: {1}")]
    Machine(PathBuf, MachineError),
    #[error(transparent)]
    Mealy(#[from] MealyError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Cps(#[from] CpsError),
    #[error(transparent)]
    Equiv(#[from] EquivError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(..) | CliError::Program(..) | CliError::Machine(..) | CliError::Usage(_) => EXIT_USAGE,
            CliError::Mealy(MealyError::StateExplosion(_)) => EXIT_RUNTIME,
            CliError::Mealy(_) => EXIT_USAGE,
            CliError::Runtime(_) | CliError::Cps(_) => EXIT_RUNTIME,
            CliError::Equiv(EquivError::UnboundIdentifier(_) | EquivError::Program(_)) => EXIT_USAGE,
            CliError::Equiv(_) => EXIT_RUNTIME,
        }
    }
}

/// Standard streams of one command.
pub struct Io<'a> {
    pub input: &'a mut dyn BufRead,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// Runs the command line `args` (program name first) on the process streams.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    dispatch_with(args, &mut Io { input: &mut input, out: &mut out, err: &mut err })
}

pub fn dispatch_with<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(io.err, "{text}");
            } else {
                let _ = write!(io.out, "{text}");
            }
            return code;
        }
    };
    match execute(&cli, io) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write_or_print(path: &Option<PathBuf>, text: &str, io: &mut Io<'_>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(p.clone(), e)),
        None => io.out.write_all(text.as_bytes()).map_err(|e| CliError::Io("<stdout>".into(), e)),
    }
}

fn emit_json<T: Serialize>(value: &T, io: &mut Io<'_>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(io.out, "{text}").map_err(|e| CliError::Io("<stdout>".into(), e))
}

/// One line of a trace file: space-separated signal names, blank for none.
pub fn parse_trace_line(line: &str) -> BTreeSet<Signal> {
    line.split_whitespace().map(Signal::named).collect()
}

pub fn parse_trace(text: &str) -> Vec<BTreeSet<Signal>> {
    text.lines().map(parse_trace_line).collect()
}

fn is_source(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "sl")
}

fn is_proc(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "proc")
}

impl Global {
    fn parse_options(&self) -> ParseOptions {
        ParseOptions { pause: match self.pause {
            PauseArg::Primitive => PauseMode::Primitive,
            PauseArg::Table1 => PauseMode::Table1,
        } }
    }

    fn source(&self, path: &Path) -> Result<SourceProgram, CliError> {
        parse_program_with(&read(path)?, self.parse_options()).map_err(|e| CliError::Program(path.to_path_buf(), e))
    }

    /// Tail program from a `.slt` file, or the CPS image of a `.sl` file.
    fn tail(&self, path: &Path) -> Result<TailProgram, CliError> {
        if is_source(path) {
            Ok(cps_program(&self.source(path)?, CpsOptions::default())?.program)
        } else {
            parse_tail_program(&read(path)?).map_err(|e| CliError::Program(path.to_path_buf(), e))
        }
    }

    fn proc(&self, path: &Path) -> Result<(Proc, ProcDefs), CliError> {
        if is_proc(path) {
            parse_proc_program(&read(path)?).map_err(|e| CliError::Program(path.to_path_buf(), e))
        } else {
            Ok(equiv::program_to_proc(&self.tail(path)?))
        }
    }

    fn run_config(&self, io: &mut Io<'_>) -> RunConfig {
        let policy = match self.scheduler {
            Scheduler::Deterministic => Policy::Deterministic,
            Scheduler::Random => {
                let seed = self.seed.unwrap_or_else(rand::random);
                let _ = writeln!(io.err, "seed: {seed}");
                Policy::Random { seed }
            }
        };
        RunConfig { policy, fuel: self.fuel }
    }
}

fn execute(cli: &Cli, io: &mut Io<'_>) -> Result<i32, CliError> {
    let g = &cli.global;
    if g.seed.is_some() && matches!(g.scheduler, Scheduler::Deterministic) {
        return Err(CliError::Usage("--seed needs --scheduler random".into()));
    }
    match &cli.command {
        Command::Run(args) => {
            let p = g.source(&args.file)?;
            run_program(&p, args, g, io)
        }
        Command::RunTail(args) => {
            let p = g.tail(&args.file)?;
            run_program(&p, args, g, io)
        }
        Command::Step { file } => step(&g.source(file)?, g, io),
        Command::CheckReactivity { file, .. } if !is_source(file) => {
            let verdict = check_tail_reactivity(&g.tail(file)?);
            report_verdict(&verdict, g, io)
        }
        Command::CheckReactivity { file, depth } => {
            let p = g.source(file)?;
            let mut supply = FreshNames::starting_at(p.next_fresh_index());
            let calls: Vec<(String, String)> = p
                .defs
                .values()
                .map(|d| (d.id.to_string(), call_of(&unfold(&d.body, &p.defs, *depth, &mut supply)).to_string()))
                .collect();
            let verdict = check_reactivity_with(&p, *depth);
            if g.format == Format::Json {
                emit_json(&serde_json::json!({ "verdict": verdict, "calls": calls }), io)?;
            } else {
                for (id, c) in &calls {
                    writeln!(io.out, "call {id} = {c}").map_err(stdout_error)?;
                }
                writeln!(io.out, "{verdict}").map_err(stdout_error)?;
            }
            Ok(verdict_code(&verdict))
        }
        Command::CheckBounded { file } => {
            let verdict = check_bounded(&g.source(file)?);
            report_verdict(&verdict, g, io)
        }
        Command::Cps { file, output, pause_cps, limit } => {
            let pause = match pause_cps {
                PauseCps::Optimized => CpsPause::Optimized,
                PauseCps::Naive => CpsPause::Naive,
            };
            let out = cps_program(&g.source(file)?, CpsOptions { pause, limit: *limit })?;
            let text = out.to_text().map_err(|e| CliError::Program(file.clone(), e))?;
            write_or_print(output, &text, io)?;
            Ok(EXIT_OK)
        }
        Command::ToMealy { file, output, limit } => {
            let m = program_to_mealy(&g.tail(file)?, *limit)?;
            write_or_print(output, &print_mealy(&m), io)?;
            Ok(EXIT_OK)
        }
        Command::FromMealy { file, output } => {
            let m = parse_mealy(&read(file)?)?;
            let text = print_tail_program(&mealy_to_program(&m)).map_err(|e| CliError::Program(file.clone(), e))?;
            write_or_print(output, &text, io)?;
            Ok(EXIT_OK)
        }
        Command::MealyEquiv { left, right } => {
            let a = parse_mealy(&read(left)?)?;
            let b = parse_mealy(&read(right)?)?;
            match mealy_trace_equiv(&a, &b)? {
                MealyEquiv::Equivalent => {
                    writeln!(io.out, "equivalent").map_err(stdout_error)?;
                    Ok(EXIT_OK)
                }
                MealyEquiv::Witness(word) => {
                    let (oa, ob) = (a.run(&word), b.run(&word));
                    writeln!(io.out, "distinguished").map_err(stdout_error)?;
                    for (k, x) in word.iter().enumerate() {
                        let set = |m: u32| format!("{{{}}}", mealy::indices(m).iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","));
                        writeln!(io.out, "instant {}: I={} left O={} right O={}", k + 1, set(*x), set(oa[k]), set(ob[k]))
                            .map_err(stdout_error)?;
                    }
                    Ok(EXIT_DISTINGUISHED)
                }
            }
        }
        Command::Equiv { left, right, mode, depth, limit, labelled_suspension } => {
            let (p, pdefs) = g.proc(left)?;
            let (q, qdefs) = g.proc(right)?;
            let (p, q, defs) = join_defs(p, pdefs, q, qdefs);
            let mode = match mode {
                ModeArg::Exact => Mode::Exact,
                ModeArg::Trace => Mode::Trace,
                ModeArg::Bounded => Mode::Bounded(*depth),
            };
            let opts = EquivOptions { limit: *limit, labelled_suspension: *labelled_suspension };
            let result = bisim_check(&p, &q, &defs, mode, &opts)?;
            if g.format == Format::Json {
                emit_json(&result, io)?;
            } else {
                match &result {
                    BisimResult::Equivalent => writeln!(io.out, "equivalent"),
                    BisimResult::Distinguished(w) => write!(io.out, "distinguished\n{w}"),
                    BisimResult::Inconclusive(k) => writeln!(io.out, "inconclusive at depth {k}"),
                }
                .map_err(stdout_error)?;
            }
            Ok(match result {
                BisimResult::Equivalent => EXIT_OK,
                BisimResult::Distinguished(_) => EXIT_DISTINGUISHED,
                BisimResult::Inconclusive(_) => EXIT_INCONCLUSIVE,
            })
        }
        Command::EncodeCm { file, output, halt_signal, pushdown } => {
            let text = read(file)?;
            let machine_err = |e| CliError::Machine(file.clone(), e);
            let program = if *pushdown {
                encode_pushdown(&parse_pushdown(&text).map_err(machine_err)?, halt_signal)
            } else {
                encode_counter_machine(&parse_counter_machine(&text).map_err(machine_err)?, halt_signal)
            }
            .map_err(|e| CliError::Program(file.clone(), e))?;
            let text = print_program(&program).map_err(|e| CliError::Program(file.clone(), e))?;
            write_or_print(output, &text, io)?;
            Ok(EXIT_OK)
        }
        Command::ConfluenceTest { file, depth, limit } => {
            let (p, defs) = g.proc(file)?;
            let report = confluence_check(&p, &defs, *depth, *limit)?;
            if g.format == Format::Json {
                emit_json(&report, io)?;
            } else {
                writeln!(
                    io.out,
                    "states {} pairs {} {} violations {}",
                    report.states,
                    report.pairs,
                    if report.complete { "complete" } else { "truncated" },
                    report.violations.len()
                )
                .map_err(stdout_error)?;
                for v in &report.violations {
                    writeln!(io.out, "{}: {} | {} | {}", v.kind, v.state, v.first, v.second.as_deref().unwrap_or("-")).map_err(stdout_error)?;
                }
            }
            Ok(if report.ok() { EXIT_OK } else { EXIT_REJECT })
        }
    }
}

fn stdout_error(e: io::Error) -> CliError {
    CliError::Io("<stdout>".into(), e)
}

fn verdict_code(v: &Verdict) -> i32 {
    if v.is_accept() {
        EXIT_OK
    } else {
        EXIT_REJECT
    }
}

fn report_verdict(v: &Verdict, g: &Global, io: &mut Io<'_>) -> Result<i32, CliError> {
    if g.format == Format::Json {
        emit_json(v, io)?;
    } else {
        writeln!(io.out, "{v}").map_err(stdout_error)?;
    }
    Ok(verdict_code(v))
}

/// Both sides share one definition table; clashing names on the right are
/// renamed.
fn join_defs(p: Proc, mut pdefs: ProcDefs, q: Proc, qdefs: ProcDefs) -> (Proc, Proc, ProcDefs) {
    let clash: Vec<_> = qdefs.keys().filter(|k| pdefs.get(*k).is_some_and(|d| Some(d) != qdefs.get(*k))).cloned().collect();
    if clash.is_empty() {
        pdefs.extend(qdefs);
        return (p, q, pdefs);
    }
    let renamed = equiv::rename_calls(&q, &qdefs, "r_");
    pdefs.extend(renamed.1);
    (p, renamed.0, pdefs)
}

fn run_program<P: ReactiveProgram>(p: &P, args: &RunArgs, g: &Global, io: &mut Io<'_>) -> Result<i32, CliError>
where
    P::Thread: Clone,
{
    let mut trace = match &args.inputs {
        Some(path) => parse_trace(&read(path)?),
        None => Vec::new(),
    };
    let n = g.instants.unwrap_or(if args.inputs.is_some() { trace.len() } else { 1 });
    trace.resize(n, BTreeSet::new());
    let config = g.run_config(io);
    let mut exec = Execution::new(p, &config);
    let mut steps: Vec<TraceStep> = Vec::new();
    for inputs in &trace {
        let step = match exec.react(inputs) {
            Ok((step, _)) => step,
            Err(e) => {
                flush_trace(&steps, g, io)?;
                return Err(e.into());
            }
        };
        if g.format == Format::Text {
            writeln!(io.out, "{step}").map_err(stdout_error)?;
        }
        steps.push(step);
    }
    if g.format == Format::Json {
        emit_json(&steps, io)?;
    }
    Ok(EXIT_OK)
}

fn flush_trace(steps: &[TraceStep], g: &Global, io: &mut Io<'_>) -> Result<(), CliError> {
    if g.format == Format::Json {
        emit_json(&steps, io)?;
    }
    Ok(())
}

fn step(p: &SourceProgram, g: &Global, io: &mut Io<'_>) -> Result<i32, CliError> {
    let config = g.run_config(io);
    let mut exec = Execution::new(p, &config);
    let mut line = String::new();
    while g.instants.is_none_or(|n| exec.instant() < n) {
        line.clear();
        if io.input.read_line(&mut line).map_err(|e| CliError::Io("<stdin>".into(), e))? == 0 {
            break;
        }
        let (step, _) = exec.react(&parse_trace_line(&line))?;
        let residual: Vec<String> = exec.canonical_residual().iter().map(print_thread).collect();
        if g.format == Format::Json {
            let value = serde_json::json!({ "inputs": step.inputs, "outputs": step.outputs, "residual": residual });
            writeln!(io.out, "{value}").map_err(stdout_error)?;
        } else {
            writeln!(io.out, "O={}", crate::semantics::fmt_set(&step.outputs)).map_err(stdout_error)?;
            writeln!(io.out, "residual: {}", if residual.is_empty() { "0".to_string() } else { residual.join(" | ") })
                .map_err(stdout_error)?;
        }
        io.out.flush().map_err(stdout_error)?;
    }
    Ok(EXIT_OK)
}
