//! The `ddr` command line. [`run`] parses arguments and returns the process
//! exit code: 0 on success, 1 on data errors, 2 on usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ddr_core::bench::run_bench;
use ddr_core::dataset::{build_dataset, compute_stats, read_labeled, split_corpus, BuildOptions, DatasetStats};
use ddr_core::eval::{evaluate, EvalReport, Prediction};
use ddr_core::format::{load_index_file, save_index_file};
use ddr_core::lexical::LexicalRetriever;
use ddr_core::library::{read_library_file, LibraryFormat};
use ddr_core::synth::synthetic_library;
use ddr_core::{par, DependencyIndex, Execution, Extractor};
use ddr_service::{GeneratorConfig, ServiceConfig};

#[derive(Parser, Debug)]
#[command(name = "ddr", version, about = "Library dependency index, labeling and evaluation tools")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build or inspect a dependency index.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Verify candidate identifiers against an index.
    Verify(VerifyArgs),
    /// Extract and verify dependencies from formal code.
    Extract(ExtractArgs),
    /// Label, summarize and split corpora.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Score predicted dependencies against gold labels.
    Eval(EvalArgs),
    /// Time index build and batch verification.
    Bench(BenchArgs),
    /// Run the HTTP verification service.
    Serve(ServeArgs),
}

#[derive(Subcommand, Debug)]
enum IndexCommand {
    Build {
        #[arg(long)]
        library: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Auto)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    Info {
        #[arg(long)]
        index: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Auto,
    Jsonl,
    Text,
}

impl From<Format> for LibraryFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Auto => LibraryFormat::Auto,
            Format::Jsonl => LibraryFormat::JsonLines,
            Format::Text => LibraryFormat::PlainText,
        }
    }
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    index: PathBuf,
    /// One candidate per line, or a JSON array. `-` reads stdin.
    #[arg(long)]
    candidates: String,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(long)]
    index: PathBuf,
    /// Formal code file, `-` for stdin.
    #[arg(long)]
    code: String,
    /// Keyword list replacing the built-in Lean 4 keywords.
    #[arg(long)]
    keywords: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum DatasetCommand {
    Build(DatasetBuildArgs),
    Stats {
        #[arg(long)]
        labeled: PathBuf,
        #[arg(long)]
        pretty: bool,
    },
    Split {
        #[arg(long)]
        labeled: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args, Debug)]
struct DatasetBuildArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write the run report here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    keep_formal: bool,
    /// Fail on the first malformed corpus line.
    #[arg(long)]
    strict: bool,
    /// Worker threads; 1 runs sequentially, 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    keywords: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Predictions as JSON Lines `{id, dependencies}`.
    #[arg(long, required_unless_present = "lexical_library")]
    pred: Option<PathBuf>,
    #[arg(long)]
    gold: PathBuf,
    /// Write per-sample scores as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    pretty: bool,
    /// Score a lexical-overlap baseline over this library instead of `--pred`.
    #[arg(long, conflicts_with = "pred")]
    lexical_library: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    top_k: usize,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    library: Option<PathBuf>,
    /// Generate a seeded synthetic library of this many identifiers.
    #[arg(long)]
    synthetic: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    queries: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also time the linear-scan matcher.
    #[arg(long)]
    compare: bool,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, env = "DDR_INDEX_PATH")]
    index: PathBuf,
    #[arg(long, env = "DDR_BIND_ADDR", default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    #[arg(long, env = "DDR_GENERATOR_URL", conflicts_with = "stub_mapping")]
    generator_url: Option<String>,
    /// Environment variable holding the generator API key.
    #[arg(long, env = "DDR_GENERATOR_API_KEY_ENV")]
    api_key_env: Option<String>,
    #[arg(long, env = "DDR_TIMEOUT_MS", default_value_t = 30_000)]
    timeout_ms: u64,
    #[arg(long, default_value_t = 2)]
    max_retries: u32,
    #[arg(long)]
    prompt_template: Option<PathBuf>,
    /// JSON object of candidate lists keyed by statement id or text.
    #[arg(long)]
    stub_mapping: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    generator_concurrency: usize,
    /// Bearer token required by the reload endpoint.
    #[arg(long, env = "DDR_RELOAD_TOKEN")]
    token: Option<String>,
    #[arg(long)]
    keywords: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Index(IndexCommand::Build { library, format, out }) => index_build(&library, format.into(), &out),
        Command::Index(IndexCommand::Info { index }) => print_json(&load(&index)?.info()),
        Command::Verify(a) => verify(&a),
        Command::Extract(a) => extract(&a),
        Command::Dataset(DatasetCommand::Build(a)) => dataset_build(&a),
        Command::Dataset(DatasetCommand::Stats { labeled, pretty }) => dataset_stats(&labeled, pretty),
        Command::Dataset(DatasetCommand::Split { labeled, seed, out_dir }) => dataset_split(&labeled, seed, &out_dir),
        Command::Eval(a) => eval(&a),
        Command::Bench(a) => bench(&a),
        Command::Serve(a) => serve(a),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn load(path: &Path) -> Result<DependencyIndex> {
    load_index_file(path).with_context(|| format!("loading index {}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn read_input(source: &str) -> Result<String> {
    let mut text = String::new();
    if source == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(source).with_context(|| format!("reading {source}"))?;
    }
    Ok(text)
}

fn extractor(keywords: Option<&Path>) -> Result<Extractor> {
    match keywords {
        Some(p) => Extractor::from_keyword_file(p).with_context(|| format!("reading keywords {}", p.display())),
        None => Ok(Extractor::default()),
    }
}

fn execution(jobs: usize) -> Execution {
    if jobs == 1 {
        return Execution::Sequential;
    }
    if jobs > 1 {
        if let Err(e) = par::configure_threads(jobs) {
            log::warn!("could not size worker pool: {e}");
        }
    }
    Execution::Parallel.effective()
}

fn index_build(library: &Path, format: LibraryFormat, out: &Path) -> Result<()> {
    let items = read_library_file(library, format).with_context(|| format!("reading library {}", library.display()))?;
    let (index, duplicates) = DependencyIndex::build_reporting(items)?;
    if !duplicates.is_empty() {
        eprintln!("warning: {} duplicate identifiers ignored", duplicates.len());
    }
    save_index_file(&index, out).with_context(|| format!("writing {}", out.display()))?;
    print_json(&index.info())
}

/// Candidates from a JSON array or one per nonblank line.
pub fn parse_candidates(text: &str) -> Result<Vec<String>> {
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(text).context("candidate JSON array");
    }
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

fn verify(a: &VerifyArgs) -> Result<()> {
    let index = load(&a.index)?;
    let candidates = parse_candidates(&read_input(&a.candidates)?)?;
    let mut results = Vec::with_capacity(candidates.len());
    for (i, r) in index.verify_batch(&candidates).into_iter().enumerate() {
        match r {
            Ok(m) => results.push(m),
            Err(e) => bail!("candidate {}: {e}", i + 1),
        }
    }
    print_json(&results)
}

fn extract(a: &ExtractArgs) -> Result<()> {
    let index = load(&a.index)?;
    let extractor = extractor(a.keywords.as_deref())?;
    let code = read_input(&a.code)?;
    let cs = extractor.extract_candidates(&code);
    let deps = ddr_core::extract::resolve_dependencies(&index, &cs);
    print_json(&serde_json::json!({
        "candidates": cs.candidates,
        "dependencies": deps.dependencies,
        "dropped": deps.dropped,
    }))
}

fn dataset_build(a: &DatasetBuildArgs) -> Result<()> {
    let index = load(&a.index)?;
    let extractor = extractor(a.keywords.as_deref())?;
    let opts = BuildOptions {
        keep_formal: a.keep_formal,
        strict: a.strict,
        execution: execution(a.jobs),
        ..BuildOptions::default()
    };
    let corpus = open(&a.corpus)?;
    // Write beside the target and rename, so a failed run leaves no partial output.
    let mut partial = a.out.clone().into_os_string();
    partial.push(".partial");
    let partial = PathBuf::from(partial);
    let out = BufWriter::new(File::create(&partial).with_context(|| format!("creating {}", partial.display()))?);
    let outcome = match build_dataset(&index, &extractor, corpus, out, &opts) {
        Ok(o) => o,
        Err(e) => {
            let _ = std::fs::remove_file(&partial);
            return Err(e.into());
        }
    };
    std::fs::rename(&partial, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    for e in &outcome.errors {
        eprintln!("skipped {e}");
    }
    if let Some(path) = &a.report {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(f, &outcome.report)?;
    }
    print_json(&outcome.report)
}

fn stats_table(stats: &DatasetStats) -> String {
    let mut s = format!("{:>5} {:>8} {:>12} {:>13}\n", "diff", "num", "depend_rate", "depend_length");
    for l in &stats.levels {
        s += &format!("{:>5} {:>8} {:>12.4} {:>13.4}\n", l.difficulty, l.num, l.depend_rate, l.depend_length);
    }
    s
}

fn dataset_stats(labeled: &Path, pretty: bool) -> Result<()> {
    let samples = read_labeled(open(labeled)?)?;
    let stats = compute_stats(&samples);
    if pretty {
        print!("{}", stats_table(&stats));
        Ok(())
    } else {
        print_json(&stats)
    }
}

fn write_jsonl<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn dataset_split(labeled: &Path, seed: u64, out_dir: &Path) -> Result<()> {
    let samples = read_labeled(open(labeled)?)?;
    let split = split_corpus(samples, seed);
    std::fs::create_dir_all(out_dir)?;
    write_jsonl(&out_dir.join("train.jsonl"), &split.train)?;
    let mut sizes = serde_json::Map::new();
    for t in &split.tests {
        write_jsonl(&out_dir.join(format!("{}.jsonl", t.name)), &t.samples)?;
        sizes.insert(t.name.to_string(), t.samples.len().into());
    }
    for w in &split.warnings {
        eprintln!("warning: {w}");
    }
    print_json(&serde_json::json!({
        "seed": seed,
        "train": split.train.len(),
        "tests": sizes,
        "warnings": split.warnings,
    }))
}

fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let mut preds = Vec::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        preds.push(serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), n + 1))?);
    }
    Ok(preds)
}

fn write_scores_csv(path: &Path, report: &EvalReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for s in &report.per_sample {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    let gold = read_labeled(open(&a.gold)?)?;
    let preds = match (&a.pred, &a.lexical_library) {
        (Some(p), _) => read_predictions(p)?,
        (None, Some(lib)) => {
            let items = read_library_file(lib, LibraryFormat::Auto)?;
            let retriever = LexicalRetriever::new(&items);
            gold.iter()
                .map(|g| Prediction {
                    id: g.id.clone(),
                    dependencies: retriever.retrieve(&g.informal_statement, a.top_k).into_iter().map(|h| h.fqn).collect(),
                })
                .collect()
        }
        (None, None) => bail!("either --pred or --lexical-library is required"),
    };
    let report = evaluate(&preds, &gold)?;
    if let Some(path) = &a.csv {
        write_scores_csv(path, &report)?;
    }
    if report.missing_predictions > 0 {
        eprintln!("warning: {} gold samples had no prediction", report.missing_predictions);
    }
    if a.pretty {
        println!("{:>9} {:>8} {:>8}", "", "mean", "std");
        println!("{:>9} {:>8.4} {:>8.4}", "precision", report.mean.precision, report.std.precision);
        println!("{:>9} {:>8.4} {:>8.4}", "recall", report.mean.recall, report.std.recall);
        println!("{:>9} {:>8.4} {:>8.4}", "f1", report.mean.f1, report.std.f1);
        println!("n = {}", report.n);
        Ok(())
    } else {
        print_json(&report)
    }
}

fn bench(a: &BenchArgs) -> Result<()> {
    if a.queries == 0 {
        bail!("--queries must be at least 1");
    }
    let items = match (&a.library, a.synthetic) {
        (Some(p), _) => read_library_file(p, LibraryFormat::Auto)?,
        (None, Some(n)) => synthetic_library(n, a.seed),
        (None, None) => bail!("either --library or --synthetic is required"),
    };
    let report = run_bench(items, a.queries, a.seed, a.compare, execution(a.jobs))?;
    print_json(&report)
}

fn serve(a: ServeArgs) -> Result<()> {
    let generator = match (&a.generator_url, &a.stub_mapping) {
        (Some(url), _) => {
            let mut g = GeneratorConfig::http(url.clone());
            g.api_key_env = a.api_key_env.clone();
            g.prompt_template_path = a.prompt_template.clone();
            g.timeout = Duration::from_millis(a.timeout_ms);
            g.max_retries = a.max_retries;
            Some(g)
        }
        (None, Some(path)) => Some(GeneratorConfig::stub(path.clone())),
        (None, None) => None,
    };
    let config = ServiceConfig {
        index_path: a.index,
        bind: a.bind,
        generator,
        keywords_path: a.keywords,
        generator_concurrency: a.generator_concurrency,
        token: a.token,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(ddr_service::serve(config))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidates_from_lines_or_json() {
        assert_eq!(parse_candidates("Nat.sqrt\n\n  sqrt \n").unwrap(), vec!["Nat.sqrt", "sqrt"]);
        assert_eq!(parse_candidates(r#"["a.b", "c"]"#).unwrap(), vec!["a.b", "c"]);
        assert!(parse_candidates("[oops").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["ddr", "frobnicate"]), 2);
        assert_eq!(run(["ddr", "verify"]), 2);
        assert_eq!(run(["ddr", "bench", "--library", "a", "--synthetic", "3"]), 2);
    }

    #[test]
    fn missing_files_exit_1() {
        assert_eq!(run(["ddr", "index", "info", "--index", "/nonexistent/idx.bin"]), 1);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run(["ddr", "--help"]), 0);
    }

    #[test]
    fn pretty_stats_has_a_row_per_level() {
        let stats = compute_stats(&[]);
        assert_eq!(stats_table(&stats).lines().count(), 11);
    }
}
