//! The `contextual` command line tool.
//!
//! Every subcommand loads one model (a JSON file or the built-in `K(q)`
//! family), picks two dichotomous variables and writes a deterministic JSON
//! or CSV report. Exit codes: 0 on success, 1 on usage or validation errors,
//! 2 when `verify` finds a failing check.

pub mod reports;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};
use contextual_core::model_io::{kq_model, parse_model, to_canonical_string, Model};
use contextual_core::prob_core::parse_rational;
use contextual_core::{Error, Event};

use crate::reports::Report;

/// Environment variable holding the seed of the randomized checks in `verify`.
pub const SEED_VAR: &str = "CONTEXTUAL_SEED";

/// Seed used when the environment does not provide one.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "contextual", version, about = "Interference analysis of contextual probability models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Disturbance terms, interference coefficients and context classes
    Analyze(Common),
    /// Amplitudes, bases, image of the context family and phase differences
    Represent(RepresentArgs),
    /// Operator matrices, commutator, spectra and means
    Operators(Common),
    /// Classical and spectral distributions of a + b
    CompareDist(CompareArgs),
    /// Phases, state counts and distribution gaps across the K(q) family
    Sweep(SweepArgs),
    /// Run every consistency check on a model
    Verify(Common),
    /// Search for dispersion-free events
    DispersionFree(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Model file (JSON)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Use the built-in four-point model K(q) with this rational q
    #[arg(long, value_name = "Q")]
    kq: Option<String>,
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Common {
    #[command(flatten)]
    source: Source,
    /// Names of the two variables, conditioning variable first
    #[arg(long, default_value = "a,b")]
    vars: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct RepresentArgs {
    #[command(flatten)]
    common: Common,
    /// Reference context for the a-basis (comma-separated point ids); defaults to the whole space
    #[arg(long)]
    reference: Option<String>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    /// Context to examine (comma-separated point ids); defaults to every trigonometric context
    #[arg(long)]
    context: Option<String>,
    /// Map the classical support affinely onto the spectrum before comparing
    #[arg(long)]
    align: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated rationals in (0, 1/2)
    #[arg(long, default_value = "1/100,1/8,1/4,3/8,49/100")]
    q: String,
    #[command(flatten)]
    output: Output,
}

/// Failure of a command, with the exit code it maps to.
#[derive(Debug)]
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

fn load_model(source: &Source) -> Result<Model, Failure> {
    match (&source.model, &source.kq) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure(format!("cannot read model file `{}`: {e}", path.display())))?;
            parse_model(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
        }
        (None, Some(q)) => Ok(kq_model(&parse_rational(q)?)?),
        _ => Err(Failure("exactly one of --model and --kq is required".into())),
    }
}

fn parse_vars(model: &Model, vars: &str) -> Result<[String; 2], Failure> {
    let names: Vec<&str> = vars.split(',').map(str::trim).collect();
    if names.len() != 2 || names[0] == names[1] {
        return Err(Failure(format!("--vars needs two distinct names, got `{vars}`")));
    }
    for name in &names {
        model.variable(name)?;
    }
    Ok([names[0].to_string(), names[1].to_string()])
}

fn parse_event(model: &Model, ids: &str) -> Result<Event, Failure> {
    let ids: Vec<&str> = ids.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    Ok(model.space.event(&ids)?)
}

fn render(report: &Report, format: Format) -> Result<String, Failure> {
    match format {
        Format::Json => Ok(to_canonical_string(&report.json)),
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            writer.write_record(&report.header).map_err(|e| Failure(e.to_string()))?;
            for row in &report.rows {
                writer.write_record(row).map_err(|e| Failure(e.to_string()))?;
            }
            let bytes = writer.into_inner().map_err(|e| Failure(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Failure(e.to_string()))
        }
    }
}

fn emit(report: &Report, output: &Output, out: &mut dyn Write) -> Result<(), Failure> {
    let text = render(report, output.format)?;
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure(format!("cannot write `{}`: {e}", path.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure(format!("cannot write report: {e}"))),
    }
}

fn seed_from_env() -> Result<u64, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure(format!("{SEED_VAR} must be an unsigned integer, got `{s}`"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    let loaded = |common: &Common| -> Result<(Model, [String; 2]), Failure> {
        let model = load_model(&common.source)?;
        let vars = parse_vars(&model, &common.vars)?;
        Ok((model, vars))
    };
    match command {
        Command::Analyze(c) => {
            let (model, vars) = loaded(&c)?;
            emit(&reports::analyze_report(&model, &vars)?, &c.output, out)?;
        }
        Command::Represent(r) => {
            let (model, vars) = loaded(&r.common)?;
            let reference = match &r.reference {
                Some(ids) => parse_event(&model, ids)?,
                None => model.space.full_event(),
            };
            emit(&reports::represent_report(&model, &vars, &reference)?, &r.common.output, out)?;
        }
        Command::Operators(c) => {
            let (model, vars) = loaded(&c)?;
            emit(&reports::operators_report(&model, &vars)?, &c.output, out)?;
        }
        Command::CompareDist(d) => {
            let (model, vars) = loaded(&d.common)?;
            let context = d.context.as_deref().map(|ids| parse_event(&model, ids)).transpose()?;
            emit(&reports::compare_report(&model, &vars, context, d.align)?, &d.common.output, out)?;
        }
        Command::Sweep(s) => {
            let grid = s
                .q
                .split(',')
                .map(|q| parse_rational(q.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            emit(&reports::sweep_report(&grid)?, &s.output, out)?;
        }
        Command::Verify(c) => {
            let (model, vars) = loaded(&c)?;
            let seed = seed_from_env()?;
            let (report, passed) = verify::verify_report(&model, &vars, seed)?;
            emit(&report, &c.output, out)?;
            return Ok(if passed { 0 } else { 2 });
        }
        Command::DispersionFree(c) => {
            let (model, vars) = loaded(&c)?;
            emit(&reports::dispersion_report(&model, &vars)?, &c.output, out)?;
        }
    }
    Ok(0)
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let target: &mut dyn Write = if informational { out } else { err };
            let _ = write!(target, "{}", e.render());
            return if informational { 0 } else { 1 };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}
