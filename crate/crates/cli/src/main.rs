//! `aitlab`: enumerate program tables and query estimates from the shell.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 I/O or malformed
//! files, 4 insufficient resources and other estimator errors.

mod tables;

use std::fmt::Display;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use aitlab::bayes::{BayesError, HypothesisSpace};
use aitlab::enumeration::{find_prefix_pair, halting_programs, PAIRWISE_PREFIX_CHECK_MAX_LEN};
use aitlab::infotheory::InfoError;
use aitlab::lz::{self, CorpusEntry, LzError};
use aitlab::predictor::write_report_csv;
use aitlab::{BitString, EnumParams, InfoLab, PredictiveModel};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use tables::parse_bits;

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Display) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }

    pub fn format(message: impl Display) -> Self {
        Failure {
            code: 3,
            message: message.to_string(),
        }
    }

    pub fn resources(message: impl Display) -> Self {
        Failure {
            code: 4,
            message: message.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::format(e)
    }
}

impl From<InfoError> for Failure {
    fn from(e: InfoError) -> Self {
        match e {
            InfoError::Config(c) => Failure::usage(c),
            other => Failure::resources(other),
        }
    }
}

impl From<LzError> for Failure {
    fn from(e: LzError) -> Self {
        match e {
            LzError::Io { .. } | LzError::CorpusFormat { .. } | LzError::EmptyCorpus(_) => {
                Failure::format(e)
            }
            other => Failure::resources(other),
        }
    }
}

impl From<BayesError> for Failure {
    fn from(e: BayesError) -> Self {
        match e {
            BayesError::Config { .. } | BayesError::Parse { .. } => Failure::format(e),
            other => Failure::resources(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "aitlab",
    version,
    about = "Resource-bounded algorithmic information experiments"
)]
struct Cli {
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for enumeration (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Directory for cached tables.
    #[arg(long, global = true, env = tables::CACHE_DIR_ENV)]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate all programs up to L bits and write the table.
    Enumerate {
        #[arg(long = "L")]
        max_len: u32,
        #[arg(long = "T")]
        step_budget: u64,
        /// Condition preloaded on the tape.
        #[arg(long, default_value = "", value_parser = parse_bits)]
        cond: BitString,
        /// Table file (default: a name keyed by L, T and cond in the cache directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Complexity, information and identity gaps for a pair of strings.
    Info {
        /// Unconditional table; its L and T apply to every conditional table.
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_parser = parse_bits, allow_hyphen_values = true)]
        x: BitString,
        #[arg(long, value_parser = parse_bits, allow_hyphen_values = true)]
        y: BitString,
        /// `auto` enumerates missing conditional tables; `cached` only reads them.
        #[arg(long, value_enum, default_value_t = CondTables::Auto)]
        cond_tables: CondTables,
    },
    /// Sequential next-bit prediction of a stream.
    Predict {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_parser = parse_bits, allow_hyphen_values = true)]
        stream: BitString,
    },
    /// Discrete Bayes updates over a hypothesis space.
    Bayes {
        /// JSON hypothesis space.
        #[arg(long)]
        space: PathBuf,
        /// Comma-separated evidence labels, applied in order.
        #[arg(long, value_delimiter = ',', required = true)]
        evidence: Vec<String>,
    },
    /// Compression estimates.
    Lz {
        #[command(subcommand)]
        op: LzOp,
    },
    /// Re-verify every invariant of a table file.
    Check {
        #[arg(long)]
        table: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CondTables {
    Auto,
    Cached,
}

#[derive(Debug, Subcommand)]
enum LzOp {
    /// Code length of x in bits.
    Cost {
        #[arg(long, value_parser = parse_bits, allow_hyphen_values = true)]
        x: BitString,
        /// Prime the dictionary with y first.
        #[arg(long, value_parser = parse_bits, allow_hyphen_values = true)]
        given: Option<BitString>,
    },
    /// Information in y about x, and the reverse.
    Info {
        #[arg(long, value_parser = parse_bits, allow_hyphen_values = true)]
        x: BitString,
        #[arg(long, value_parser = parse_bits, allow_hyphen_values = true)]
        y: BitString,
    },
    /// Normalized compression distance, both concatenation orders.
    Ncd {
        #[arg(long, value_parser = parse_bits, allow_hyphen_values = true)]
        x: BitString,
        #[arg(long, value_parser = parse_bits, allow_hyphen_values = true)]
        y: BitString,
    },
    /// Pairwise distance matrix of a corpus.
    Matrix {
        /// Directory of 0/1 text files (default: the built-in corpus).
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Symmetry of the information estimate over all corpus pairs.
    Symmetry {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 0.25)]
        threshold: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("aitlab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.workers == Some(0) {
        return Err(Failure::usage("--workers must be at least 1"));
    }
    let ctx = Context {
        format: cli.format,
        workers: cli.workers,
        cache_dir: cli.cache_dir,
    };
    match cli.command {
        Command::Enumerate {
            max_len,
            step_budget,
            cond,
            out,
        } => enumerate_cmd(&ctx, max_len, step_budget, cond, out),
        Command::Info {
            table,
            x,
            y,
            cond_tables,
        } => info_cmd(&ctx, &table, &x, &y, cond_tables),
        Command::Predict { table, stream } => predict_cmd(&ctx, &table, &stream),
        Command::Bayes { space, evidence } => bayes_cmd(&ctx, &space, &evidence),
        Command::Lz { op } => lz_cmd(&ctx, op),
        Command::Check { table } => check_cmd(&ctx, &table),
    }
}

struct Context {
    format: Option<Format>,
    workers: Option<usize>,
    cache_dir: Option<PathBuf>,
}

impl Context {
    fn format(&self, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(Failure::usage(format!(
                "--format {} is not supported here",
                f.to_possible_value()
                    .map(|v| v.get_name().to_owned())
                    .unwrap_or_default()
            )))
        }
    }
}

fn print_json(value: &serde_json::Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(Failure::format)?;
    writeln!(out)?;
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("report types serialize")
}

fn enumerate_cmd(
    ctx: &Context,
    max_len: u32,
    step_budget: u64,
    cond: BitString,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let format = ctx.format(Format::Text, &[Format::Text, Format::Json])?;
    let params = EnumParams::new(max_len, step_budget, cond).map_err(Failure::usage)?;
    let path = out.unwrap_or_else(|| {
        tables::default_dir(ctx.cache_dir.as_deref()).join(tables::cache_file_name(&params))
    });
    let start = Instant::now();
    let table = tables::run_enumeration(&params, ctx.workers)?;
    let seconds = start.elapsed().as_secs_f64();
    tables::save(&table, &path)?;
    let total = table.total_mass();
    match format {
        Format::Json => print_json(&json!({
            "params": to_json(&params),
            "table": path.display().to_string(),
            "outputs": table.len(),
            "total_mass": total.to_string(),
            "total_mass_value": total.value(),
            "wall_seconds": seconds,
        })),
        _ => {
            println!("table {}", path.display());
            println!(
                "L={} T={} cond={} isa={}",
                params.max_len,
                params.step_budget,
                params.condition.to_dash_string(),
                params.isa_version
            );
            println!("outputs {}", table.len());
            println!("total mass {total} ({:.9})", total.value());
            println!("wall time {seconds:.3}s");
            Ok(())
        }
    }
}

fn info_cmd(
    ctx: &Context,
    table_path: &Path,
    x: &BitString,
    y: &BitString,
    cond_tables: CondTables,
) -> Result<(), Failure> {
    let format = ctx.format(Format::Json, &[Format::Json, Format::Text])?;
    let main = tables::load(table_path)?;
    if !main.params().condition.is_empty() {
        return Err(Failure::usage(format!(
            "{} is conditional (cond={}); info needs the unconditional table",
            table_path.display(),
            main.params().condition.to_dash_string()
        )));
    }
    let params = main.params().clone();
    let lab = InfoLab::from_params(&params);
    lab.insert(main)?;

    // Conditional tables live beside the main table unless a cache
    // directory is given.
    let dir = ctx.cache_dir.clone().unwrap_or_else(|| {
        table_path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf)
    });
    for cond in [x, y] {
        if !lab.has_table(cond) {
            let p = params.with_condition(cond.clone());
            lab.insert(tables::conditional(
                &dir,
                &p,
                cond_tables == CondTables::Auto,
                ctx.workers,
            )?)?;
        }
    }

    let report = lab.report(x, y)?;
    match format {
        Format::Json => print_json(&to_json(&report)),
        _ => {
            if let serde_json::Value::Object(map) = to_json(&report) {
                for (k, v) in map {
                    println!("{k} {v}");
                }
            }
            Ok(())
        }
    }
}

fn predict_cmd(ctx: &Context, table_path: &Path, stream: &BitString) -> Result<(), Failure> {
    let format = ctx.format(Format::Csv, &[Format::Csv, Format::Json])?;
    let model = PredictiveModel::new(tables::load(table_path)?);
    let records = model.sequential_report(stream);
    match format {
        Format::Json => print_json(&json!({
            "params": to_json(model.table().params()),
            "stream": stream.to_string(),
            "steps": to_json(&records),
        })),
        _ => Ok(write_report_csv(&records, io::stdout().lock())?),
    }
}

fn bayes_cmd(ctx: &Context, space_path: &Path, evidence: &[String]) -> Result<(), Failure> {
    let format = ctx.format(Format::Json, &[Format::Json, Format::Csv])?;
    let text = std::fs::read_to_string(space_path)
        .map_err(|e| Failure::format(format!("{}: {e}", space_path.display())))?;
    let space = HypothesisSpace::from_json(&text)
        .map_err(|e| Failure::format(format!("{}: {e}", space_path.display())))?;
    let steps = space.sequential_update(evidence)?;
    match format {
        Format::Csv => {
            let mut out = io::stdout().lock();
            writeln!(
                out,
                "step,evidence,hypothesis,posterior,manifestation,marginal"
            )?;
            for (i, s) in steps.iter().enumerate() {
                for (h, name) in space.hypotheses().iter().enumerate() {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        i + 1,
                        s.evidence,
                        name,
                        s.posterior[h],
                        s.manifestation[h],
                        s.marginal
                    )?;
                }
            }
            Ok(())
        }
        _ => print_json(&json!({
            "hypotheses": space.hypotheses(),
            "prior": space.prior(),
            "steps": to_json(&steps),
        })),
    }
}

fn corpus(dir: Option<&Path>) -> Result<Vec<CorpusEntry>, Failure> {
    match dir {
        Some(d) => Ok(lz::read_corpus_dir(d)?),
        None => Ok(lz::builtin_corpus()),
    }
}

fn lz_cmd(ctx: &Context, op: LzOp) -> Result<(), Failure> {
    match op {
        LzOp::Cost { x, given } => {
            let format = ctx.format(Format::Text, &[Format::Text, Format::Json])?;
            let cost = match &given {
                Some(y) => lz::lz_cost_cond(&x, y),
                None => lz::lz_cost(&x),
            };
            if format == Format::Json {
                return print_json(&json!({ "cost": cost, "bits": x.len() }));
            }
            println!("{cost}");
            Ok(())
        }
        LzOp::Info { x, y } => {
            let format = ctx.format(Format::Text, &[Format::Text, Format::Json])?;
            let yx = lz::lz_info(&x, &y);
            let xy = lz::lz_info(&y, &x);
            let asym = lz::normalized_asymmetry(yx, xy);
            if format == Format::Json {
                return print_json(&json!({
                    "info_y_to_x": yx,
                    "info_x_to_y": xy,
                    "asymmetry": asym,
                }));
            }
            println!("info_y_to_x {yx}");
            println!("info_x_to_y {xy}");
            println!("asymmetry {asym}");
            Ok(())
        }
        LzOp::Ncd { x, y } => {
            let format = ctx.format(Format::Text, &[Format::Text, Format::Json])?;
            let xy = lz::ncd(&x, &y)?;
            let yx = lz::ncd(&y, &x)?;
            if format == Format::Json {
                return print_json(&json!({ "ncd_xy": xy, "ncd_yx": yx }));
            }
            println!("ncd_xy {xy}");
            println!("ncd_yx {yx}");
            Ok(())
        }
        LzOp::Matrix { corpus: dir } => {
            let format = ctx.format(Format::Csv, &[Format::Csv, Format::Json])?;
            let entries = corpus(dir.as_deref())?;
            let matrix = lz::distance_matrix(&entries);
            if format == Format::Json {
                let names: Vec<&str> = entries.iter().map(|e| e.name.as_str()).collect();
                return print_json(&json!({ "names": names, "ncd": matrix }));
            }
            Ok(lz::write_matrix_csv(
                &entries,
                &matrix,
                io::stdout().lock(),
            )?)
        }
        LzOp::Symmetry {
            corpus: dir,
            threshold,
        } => {
            let format = ctx.format(Format::Text, &[Format::Text, Format::Json])?;
            let entries = corpus(dir.as_deref())?;
            let summary = lz::corpus_symmetry(&entries, threshold);
            if format == Format::Json {
                return print_json(&to_json(&summary));
            }
            for p in &summary.pairs {
                println!(
                    "{} {} info_y_to_x={} info_x_to_y={} asymmetry={:.4}",
                    p.x, p.y, p.info_y_to_x, p.info_x_to_y, p.asymmetry
                );
            }
            println!(
                "within {} : {:.4}",
                summary.threshold, summary.within_threshold
            );
            Ok(())
        }
    }
}

fn check_cmd(ctx: &Context, table_path: &Path) -> Result<(), Failure> {
    ctx.format(Format::Text, &[Format::Text])?;
    let table = aitlab::enumeration::load_unchecked(table_path)
        .map_err(|e| tables::table_failure(table_path, e))?;
    let fail = |what: &str, e: &dyn Display| {
        Failure::format(format!(
            "{}: {what} check failed: {e}",
            table_path.display()
        ))
    };
    table.params().validate().map_err(|e| fail("params", &e))?;
    table.verify_kraft().map_err(|e| fail("kraft", &e))?;
    let prefix = if table.params().max_len <= PAIRWISE_PREFIX_CHECK_MAX_LEN {
        let programs: Vec<BitString> = halting_programs(table.params())
            .into_iter()
            .map(|h| h.program)
            .collect();
        if let Some((shorter, longer)) = find_prefix_pair(&programs) {
            return Err(fail(
                "prefixfree",
                &format!("{shorter} is a proper prefix of {longer}"),
            ));
        }
        "ok"
    } else {
        "skipped"
    };
    table
        .verify_witnesses()
        .map_err(|e| fail("witnesses", &e))?;
    println!("kraft=ok prefixfree={prefix} witnesses=ok");
    Ok(())
}
