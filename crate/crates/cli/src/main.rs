//! `redraft`: restructure class diagrams from the command line.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 incomplete
//! exploration, 3 internal error.

mod memory;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use redraft::io::{self, CaseSpec};
use redraft::{
    check_confluence, explore, normalize, ClassDiagram, Limits, Mode, Policy, StateSpace, TieHandling,
};

use crate::report::{render, Record, ReportFormat};

#[derive(Parser, Debug)]
#[command(
    name = "redraft",
    version,
    about = "Class diagram restructuring by graph rewriting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rewrite a diagram to its normal form.
    Transform(TransformArgs),
    /// Explore every rule order and report the state space.
    Explore(ExploreArgs),
    /// Explore and decide whether all rule orders meet.
    Confluence(ExploreArgs),
    /// Write a generated benchmark case.
    Generate(GenerateArgs),
    /// Normalize the benchmark presets and report timing and memory.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Xmi,
    Native,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Priority,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TiesArg {
    Det,
    Branch,
}

#[derive(Args, Debug)]
struct Common {
    /// Diagram format; inferred from file extensions when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write a structured report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Format of the report printed on stdout.
    #[arg(long, value_enum, default_value = "text")]
    report_format: ReportFormat,
}

#[derive(Args, Debug)]
struct TransformArgs {
    input: PathBuf,
    /// Where to write the normal form.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "priority")]
    policy: PolicyArg,
    /// Also write the normal form as Graphviz DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ExploreArgs {
    input: PathBuf,
    /// Which rules are offered at each state.
    #[arg(long, value_enum, default_value = "free")]
    policy: PolicyArg,
    /// Follow every offered step, or only the first.
    #[arg(long, value_enum, default_value = "branch")]
    ties: TiesArg,
    /// Stop after this many distinct states.
    #[arg(long, env = "REDRAFT_MAX_STATES", default_value_t = Limits::DEFAULT_MAX_STATES)]
    max_states: usize,
    /// Stop after this much wall-clock time.
    #[arg(long)]
    max_seconds: Option<f64>,
    /// Directory for final states (explore) or witnesses (confluence).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(subcommand)]
    case: GenerateCase,
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum GenerateCase {
    /// Subclasses sharing the same attributes under one root.
    Ladder {
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        attrs: usize,
        /// Leave out the common root class.
        #[arg(long)]
        no_root: bool,
    },
    /// Disjoint copies of a diagram file.
    Replicate {
        base: PathBuf,
        #[arg(long)]
        copies: usize,
    },
    /// A named benchmark preset.
    Preset { name: String },
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated presets; an empty string runs none.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "testcase1,testcase2,testcase3,testcase2_1000"
    )]
    presets: Vec<String>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    report_format: ReportFormat,
}

/// A failed run with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }

    fn internal(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 3,
            error: error.into(),
        }
    }
}

impl From<redraft::Error> for Failure {
    fn from(e: redraft::Error) -> Self {
        use redraft::Error::*;
        match e {
            Parse { .. } | DanglingRef(_) | UnsupportedElement(_) | DuplicateName(_) | Invalid(_) | Io(_) => {
                Failure::input(e)
            }
            _ => Failure::internal(e),
        }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Transform(args) => run_transform(&args),
        Command::Explore(args) => run_explore(&args, false),
        Command::Confluence(args) => run_explore(&args, true),
        Command::Generate(args) => run_generate(&args),
        Command::Bench(args) => run_bench(&args),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

fn format_of(path: &Path, explicit: Option<Format>) -> Result<Format, Failure> {
    if let Some(f) = explicit {
        return Ok(f);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("xmi") | Some("xml") => Ok(Format::Xmi),
        Some("native") => Ok(Format::Native),
        _ => Err(Failure::input(anyhow!(
            "cannot infer format of {}; pass --format",
            path.display()
        ))),
    }
}

fn check_output_path(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Failure::input(anyhow!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn read_diagram(path: &Path, format: Option<Format>) -> Result<ClassDiagram, Failure> {
    let format = format_of(path, format)?;
    let bytes = fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::input)?;
    let parsed = match format {
        Format::Xmi => io::parse_xmi(&bytes),
        Format::Native => io::parse_native(&bytes),
    };
    parsed.map_err(|e| {
        let Failure { code, error } = Failure::from(e);
        Failure {
            code,
            error: error.context(path.display().to_string()),
        }
    })
}

fn encode(d: &ClassDiagram, format: Format) -> Vec<u8> {
    match format {
        Format::Xmi => io::write_xmi(d),
        Format::Native => io::write_native(d),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::input)
}

fn emit(records: &[Record], common_report: Option<&Path>, format: ReportFormat) -> Result<(), Failure> {
    print!("{}", render(records, format));
    if let Some(path) = common_report {
        write_file(path, render(records, ReportFormat::Structured).as_bytes())?;
    }
    Ok(())
}

fn policy_of(policy: PolicyArg, ties: TiesArg) -> Policy {
    let mode = match policy {
        PolicyArg::Priority => Mode::Priority,
        PolicyArg::Free => Mode::Free,
    };
    let ties = match ties {
        TiesArg::Det => TieHandling::Deterministic,
        TiesArg::Branch => TieHandling::BranchAll,
    };
    Policy::new(mode, ties)
}

/// Peak resident set of this process so far, or `unknown`.
fn peak_rss_mb() -> String {
    memory::peak_rss_bytes().map_or_else(
        || "unknown".to_string(),
        |b| format!("{:.1}", b as f64 / 1048576.0),
    )
}

fn millis(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1000.0)
}

fn run_transform(args: &TransformArgs) -> Outcome {
    let out_format = match &args.output {
        Some(path) => {
            check_output_path(path)?;
            Some(format_of(path, args.common.format)?)
        }
        None => None,
    };
    if let Some(path) = &args.dot {
        check_output_path(path)?;
    }
    let input = read_diagram(&args.input, args.common.format)?;
    let start = Instant::now();
    let (normal, trace) = normalize(&input, &policy_of(args.policy, TiesArg::Det))?;
    let elapsed = start.elapsed();

    if let (Some(path), Some(format)) = (&args.output, out_format) {
        write_file(path, &encode(&normal, format))?;
    }
    if let Some(path) = &args.dot {
        write_file(path, io::export_dot(&normal).as_bytes())?;
    }
    let record = Record::new()
        .field("steps", trace.len())
        .field("properties_before", input.property_count())
        .field("properties_after", normal.property_count())
        .field(
            "property_delta",
            normal.property_count() as i64 - input.property_count() as i64,
        )
        .field("classes_after", normal.entity_count())
        .field("time_ms", millis(elapsed))
        .field("peak_rss_mb", peak_rss_mb());
    emit(
        &[record],
        args.common.report.as_deref(),
        args.common.report_format,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn space_record(space: &StateSpace) -> Record {
    Record::new()
        .field("states", space.stats.states)
        .field("transitions", space.stats.transitions)
        .field("finals", space.finals.len())
        .field("complete", if space.complete { "complete" } else { "incomplete" })
        .field("time_ms", millis(space.stats.elapsed))
}

fn run_explore(args: &ExploreArgs, confluence: bool) -> Outcome {
    if let Some(dir) = &args.output {
        if !dir.is_dir() {
            return Err(Failure::input(anyhow!("{} is not a directory", dir.display())));
        }
    }
    let max_time = match args.max_seconds {
        Some(s) if s.is_finite() && s >= 0.0 => Some(Duration::from_secs_f64(s)),
        Some(s) => return Err(Failure::input(anyhow!("bad --max-seconds {s}"))),
        None => None,
    };
    let input = read_diagram(&args.input, args.common.format)?;
    let limits = Limits {
        max_states: args.max_states,
        max_time,
    };
    let space = explore(&input, &policy_of(args.policy, args.ties), &limits)?;
    let mut record = space_record(&space);
    let out_format = args.common.format.unwrap_or(Format::Native);
    let ext = match out_format {
        Format::Xmi => "xmi",
        Format::Native => "native",
    };

    if !space.complete {
        emit(
            &[record],
            args.common.report.as_deref(),
            args.common.report_format,
        )?;
        eprintln!("exploration incomplete: limit reached");
        return Ok(ExitCode::from(2));
    }

    let written: Vec<&ClassDiagram> = if confluence {
        let verdict = check_confluence(&space)?;
        record = record.field("confluent", verdict.confluent);
        if let Some(dir) = &args.output {
            for (i, w) in verdict.witnesses.iter().enumerate() {
                write_file(
                    &dir.join(format!("witness{}.{ext}", i + 1)),
                    &encode(w, out_format),
                )?;
            }
        }
        Vec::new()
    } else {
        space.final_states().collect()
    };
    if let Some(dir) = &args.output {
        for (i, d) in written.iter().enumerate() {
            write_file(&dir.join(format!("final{}.{ext}", i + 1)), &encode(d, out_format))?;
        }
    }
    emit(
        &[record],
        args.common.report.as_deref(),
        args.common.report_format,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn run_generate(args: &GenerateArgs) -> Outcome {
    let format = match &args.output {
        Some(path) => {
            check_output_path(path)?;
            format_of(path, args.format)?
        }
        None => args.format.unwrap_or(Format::Native),
    };
    let d = match &args.case {
        GenerateCase::Ladder {
            classes,
            attrs,
            no_root,
        } => io::generate_case(&CaseSpec::PullUpLadder {
            classes: *classes,
            attrs_per_class: *attrs,
            with_root: !no_root,
        }),
        GenerateCase::Replicate { base, copies } => {
            let base = read_diagram(base, None)?;
            io::generate_case(&CaseSpec::replicate(base, *copies))
        }
        GenerateCase::Preset { name } => {
            io::preset(name).ok_or_else(|| Failure::input(anyhow!("unknown preset {name:?}")))?
        }
    };
    let bytes = encode(&d, format);
    match &args.output {
        Some(path) => write_file(path, &bytes)?,
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_bench(args: &BenchArgs) -> Outcome {
    let names: Vec<&str> = args
        .presets
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .collect();
    let mut cases = Vec::new();
    for name in &names {
        match io::preset(name) {
            Some(d) => cases.push((*name, d)),
            None => return Err(Failure::input(anyhow!("unknown preset {name:?}"))),
        }
    }
    if let Some(path) = &args.report {
        check_output_path(path)?;
    }
    let mut records = Vec::new();
    for (name, d) in cases {
        let start = Instant::now();
        let (normal, trace) = normalize(&d, &Policy::priority())
            .with_context(|| format!("preset {name}"))
            .map_err(Failure::internal)?;
        let elapsed = start.elapsed();
        if !redraft::validate(&normal).is_ok() {
            return Err(Failure::internal(anyhow!(
                "preset {name}: normal form failed validation"
            )));
        }
        records.push(
            Record::new()
                .field("preset", name)
                .field("classes", d.entity_count())
                .field("attributes", d.property_count())
                .field("size", d.size())
                .field("steps", trace.len())
                .field("size_after", normal.size())
                .field("seconds", format!("{:.3}", elapsed.as_secs_f64()))
                .field("peak_rss_mb", peak_rss_mb()),
        );
    }
    emit(&records, args.report.as_deref(), args.report_format)?;
    Ok(ExitCode::SUCCESS)
}
