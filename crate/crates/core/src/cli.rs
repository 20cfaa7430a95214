//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors. Data goes
//! to standard output (or `--output`), diagnostics to standard error.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{bench, BenchReport, ColumnsMode};
use crate::dataframe::Dataframe;
use crate::dfg::{dfg_iterate, dfg_mapreduce, dfg_shift_count, filter_cases, filter_events, most_frequent_activity};
use crate::edf::{write_edf, Compression, EdfReader, MAGIC};
use crate::error::Error;
use crate::eventlog::{dataframe_to_log, ingest_csv, stats, write_csv, CsvOptions};
use crate::generate::{generate, GenModel, GenSpec};
use crate::transforms;
use crate::value::{parse_timestamp, AttrValue, ColumnType};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pmframe", version, about = "Columnar event-log toolkit: conversion, filtering, DFG discovery, benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert between CSV and EDF1.
    Convert(ConvertArgs),
    /// Print `events,cases,variants,classes`.
    Info(InputArgs),
    /// Keep events (or whole cases) matching attribute values.
    Filter(FilterArgs),
    /// Discover the directly-follows graph.
    Dfg(DfgArgs),
    /// Generate a synthetic log.
    Gen(GenArgs),
    /// Benchmark load, filter and DFG on an EDF1 file.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV or EDF1 file (detected from the magic bytes).
    input: PathBuf,
    /// Case column of CSV input.
    #[arg(long, default_value = "case")]
    case_col: String,
    /// Activity column of CSV input.
    #[arg(long, default_value = "activity")]
    act_col: String,
    /// Timestamp column of CSV input.
    #[arg(long)]
    time_col: Option<String>,
    /// Stable-sort events by the timestamp column after loading.
    #[arg(long, requires = "time_col")]
    sort_by_time: bool,
    /// Load only these columns (comma-separated); case and activity are always kept.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Edf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Compress {
    None,
    Deflate,
}

impl From<Compress> for Compression {
    fn from(c: Compress) -> Self {
        match c {
            Compress::None => Compression::None,
            Compress::Deflate => Compression::Deflate,
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format; defaults to the other format for `convert`, EDF1 for
    /// `gen`, and the input format for `filter`.
    #[arg(long)]
    to: Option<Format>,
    /// EDF1 block compression.
    #[arg(long, value_enum, default_value = "deflate")]
    compress: Compress,
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Level {
    Event,
    Case,
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Attribute to filter on.
    #[arg(long, required_unless_present = "keep_top_activity")]
    attr: Option<String>,
    /// Allowed values (comma-separated).
    #[arg(long, value_delimiter = ',', conflicts_with = "keep_top_activity")]
    values: Option<Vec<String>>,
    /// Keep only the most frequent activity.
    #[arg(long, conflicts_with = "attr")]
    keep_top_activity: bool,
    #[arg(long, value_enum, default_value = "event")]
    level: Level,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Algo {
    Iterate,
    Mapreduce,
    Shift,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Csv,
}

#[derive(Debug, Args)]
struct DfgArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "shift")]
    algo: Algo,
    /// Map-reduce worker threads.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u16).range(1..))]
    workers: u16,
    /// Treat the input as already grouped by case (shift algorithm only).
    #[arg(long)]
    assume_sorted: bool,
    /// Graph output format.
    #[arg(long, value_enum, default_value = "csv")]
    out: GraphFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Model {
    #[value(name = "uniform_random")]
    UniformRandom,
    #[value(name = "sequential_with_noise")]
    SequentialWithNoise,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    cases: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    activities: u64,
    #[arg(long, default_value_t = 7.0)]
    mean_len: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "sequential_with_noise")]
    model: Model,
    /// Extra attribute columns (resource, amount, cost, ...).
    #[arg(long, default_value_t = 0)]
    extra_attrs: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ColumnsArg {
    All,
    Two,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// EDF1 file.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    columns: ColumnsArg,
    /// Repetitions per timing (at least 3 are always run).
    #[arg(long, default_value_t = 3)]
    repeat: usize,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(Error::Io(e))
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<S: AsRef<str>>(argv: &[S]) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(AsRef::as_ref)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Convert(a) => convert(a),
        Command::Info(a) => info(a),
        Command::Filter(a) => filter(a),
        Command::Dfg(a) => dfg(a),
        Command::Gen(a) => gen(a),
        Command::Bench(a) => run_bench(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn open_file(path: &Path) -> Result<File, Error> {
    File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn detect_format(path: &Path) -> Result<Format, Error> {
    let mut head = [0u8; 4];
    let mut f = open_file(path)?;
    let mut filled = 0;
    while filled < head.len() {
        match f.read(&mut head[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    Ok(if filled == 4 && head == MAGIC { Format::Edf } else { Format::Csv })
}

fn load(args: &InputArgs) -> Result<(Dataframe, Format), Failure> {
    let format = detect_format(&args.input)?;
    let cols: Option<Vec<&str>> = args.columns.as_ref().map(|c| c.iter().map(String::as_str).collect());
    let df = match format {
        Format::Edf => EdfReader::open(BufReader::new(open_file(&args.input)?))?.read(cols.as_deref())?,
        Format::Csv => {
            let mut opts = CsvOptions::new(&args.case_col, &args.act_col);
            if let Some(t) = &args.time_col {
                opts = opts.timestamp(t);
            }
            let df = ingest_csv(BufReader::new(open_file(&args.input)?), &opts)?;
            match &cols {
                Some(c) => df.select(c)?,
                None => df,
            }
        }
    };
    let df = match &args.time_col {
        Some(t) if args.sort_by_time => transforms::sort(&df, t)?.reset_index(),
        _ => df,
    };
    Ok((df, format))
}

fn sink(output: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match output {
        Some(path) => Box::new(io::BufWriter::new(File::create(path).map_err(|source| Error::File {
            path: path.clone(),
            source,
        })?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn emit(df: &Dataframe, format: Format, out: &OutputArgs) -> Result<(), Failure> {
    let mut w = sink(&out.output)?;
    match format {
        Format::Csv => write_csv(df, &mut w)?,
        Format::Edf => {
            write_edf(df, out.compress.into(), &mut w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn convert(args: ConvertArgs) -> Result<(), Failure> {
    let (df, format) = load(&args.input)?;
    let target = args.out.to.unwrap_or(match format {
        Format::Csv => Format::Edf,
        Format::Edf => Format::Csv,
    });
    emit(&df, target, &args.out)
}

fn info(args: InputArgs) -> Result<(), Failure> {
    let (df, _) = load(&args)?;
    println!("{}", stats(&df).to_csv_line());
    Ok(())
}

/// Parses command-line text as a value of the attribute's column type.
fn parse_value(text: &str, kind: ColumnType, attr: &str) -> Result<AttrValue, Failure> {
    let bad = || Failure::Usage(format!("`{text}` is not a valid {kind} value for `{attr}`"));
    Ok(match kind {
        ColumnType::Str => AttrValue::str(text),
        ColumnType::Int => AttrValue::Int(text.parse().map_err(|_| bad())?),
        ColumnType::Float => text
            .parse::<f64>()
            .ok()
            .and_then(|f| AttrValue::float(f).ok())
            .ok_or_else(bad)?,
        ColumnType::Timestamp => AttrValue::Timestamp(parse_timestamp(text).ok_or_else(bad)?),
        ColumnType::Object => text
            .parse::<i64>()
            .map(AttrValue::Int)
            .ok()
            .or_else(|| text.parse::<f64>().ok().and_then(|f| AttrValue::float(f).ok()))
            .unwrap_or_else(|| AttrValue::str(text)),
    })
}

fn filter(args: FilterArgs) -> Result<(), Failure> {
    let (df, format) = load(&args.input)?;
    let (attr, allowed): (String, HashSet<AttrValue>) = if args.keep_top_activity {
        (
            df.activity_column().to_string(),
            most_frequent_activity(&df).into_iter().collect(),
        )
    } else {
        let attr = args.attr.clone().expect("clap requires --attr");
        let values = args
            .values
            .as_ref()
            .ok_or_else(|| Failure::Usage("--values or --keep-top-activity is required".into()))?;
        let kind = df.column_type(&attr)?;
        let allowed = values
            .iter()
            .map(|v| parse_value(v, kind, &attr))
            .collect::<Result<_, _>>()?;
        (attr, allowed)
    };
    let out = match args.level {
        Level::Event => filter_events(&df, &attr, &allowed)?,
        Level::Case => filter_cases(&df, &attr, &allowed)?,
    };
    emit(&out, args.out.to.unwrap_or(format), &args.out)
}

fn dfg(args: DfgArgs) -> Result<(), Failure> {
    let (df, _) = load(&args.input)?;
    let graph = match args.algo {
        Algo::Iterate => dfg_iterate(&dataframe_to_log(&df)),
        Algo::Mapreduce => dfg_mapreduce(&df, args.workers as usize),
        Algo::Shift => dfg_shift_count(&df, args.assume_sorted)?,
    };
    let mut w = sink(&args.output)?;
    match args.out {
        GraphFormat::Dot => w.write_all(graph.to_dot().as_bytes())?,
        GraphFormat::Csv => graph.write_edge_csv(&mut w)?,
    }
    w.flush()?;
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), Failure> {
    let model = match args.model {
        Model::UniformRandom => GenModel::UniformRandom,
        Model::SequentialWithNoise => GenModel::SequentialWithNoise,
    };
    let spec = GenSpec::new(args.cases as usize, args.activities as usize, args.mean_len, args.seed)
        .model(model)
        .extra_attributes(args.extra_attrs);
    let df = generate(&spec)?;
    emit(&df, args.out.to.unwrap_or(Format::Edf), &args.out)
}

fn run_bench(args: BenchArgs) -> Result<(), Failure> {
    let mode = match args.columns {
        ColumnsArg::All => ColumnsMode::All,
        ColumnsArg::Two => ColumnsMode::Two,
    };
    let report = bench(&args.input, mode, args.repeat)?;
    println!("{}", BenchReport::CSV_HEADER);
    println!("{}", report.csv_row());
    eprint!("{}", report.human());
    Ok(())
}
