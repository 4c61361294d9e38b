use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dimatch::corpus::{compare, corpus_digraph, pattern_suite, rng};
use dimatch::oracle::enumerate_bruteforce;
use dimatch::{plan, run, DataGraph, Error, ExecConfig, InclusionClosure, MatchMode, MatchResult, PatternGraph};

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(name = "dimatch", version, about = "Directed subgraph matching with pattern reduction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Count,
    Enumerate,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Count or list embeddings of a pattern in a data graph.
    Match {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long, value_enum, default_value = "count")]
        mode: Mode,
        /// Also report embeddings divided by the pattern's automorphism count.
        #[arg(long)]
        occurrences: bool,
        #[arg(long, value_enum, default_value = "on")]
        reduction: Toggle,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Stats file; stats go to stderr when omitted.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Embedding file for enumerate mode; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Re-check shortcut leaves and trail undo (slow).
        #[arg(long)]
        verify: bool,
        /// Fail once enumeration exceeds this many embeddings.
        #[arg(long)]
        max_embeddings: Option<u64>,
    },
    /// Print the inclusion closure and the match plan of a pattern.
    Plan {
        pattern: PathBuf,
        #[arg(long, value_enum, default_value = "on")]
        reduction: Toggle,
    },
    /// Count embeddings by brute force.
    Oracle { graph: PathBuf, pattern: PathBuf },
    /// Compare engine and oracle on seeded random instances.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        graphs: usize,
        /// Random patterns added to the fixed ones.
        #[arg(long, default_value_t = 5)]
        patterns: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
}

/// A failure with its exit code and message.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    fn from_core(err: Error, file: Option<&Path>) -> Self {
        let code = match err {
            Error::Parse { .. } | Error::Plan(_) => EXIT_PARSE,
            Error::Capacity(_) => EXIT_CAPACITY,
            Error::Usage(_) | Error::Io(_) => EXIT_USAGE,
        };
        let message = match (&err, file) {
            (Error::Parse { line, message }, Some(f)) if *line > 0 => format!("{}:{line}: {message}", f.display()),
            (_, Some(f)) => format!("{}: {err}", f.display()),
            (_, None) => err.to_string(),
        };
        Self { code, message }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> CliResult<DataGraph> {
    DataGraph::load_bytes(&read(path)?).map_err(|e| Failure::from_core(e, Some(path)))
}

fn load_pattern(path: &Path) -> CliResult<PatternGraph> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::new(EXIT_PARSE, format!("{}: not UTF-8 text", path.display())))?;
    PatternGraph::parse(&text).map_err(|e| Failure::from_core(e, Some(path)))
}

/// Writes `contents` to `path` through a sibling temp file so a failed run
/// never leaves a partial file behind.
fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let fail = |e: std::io::Error| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display()));
    fs::write(&tmp, contents).map_err(fail)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        fail(e)
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_match(
    graph_path: &Path,
    pattern_path: &Path,
    mode: Mode,
    occurrences: bool,
    reduction: Toggle,
    threads: usize,
    stats_path: Option<&Path>,
    output: Option<&Path>,
    verify: bool,
    max_embeddings: Option<u64>,
) -> CliResult<String> {
    if threads == 0 {
        return Err(Failure::new(EXIT_USAGE, "--threads must be at least 1"));
    }
    if output.is_some() && matches!(mode, Mode::Count) {
        return Err(Failure::new(EXIT_USAGE, "--output requires --mode enumerate"));
    }
    let pattern = load_pattern(pattern_path)?;
    let graph = load_graph(graph_path)?;
    let pl = plan(&pattern, reduction == Toggle::On).map_err(|e| Failure::from_core(e, Some(pattern_path)))?;
    let config = ExecConfig {
        mode: match mode {
            Mode::Count => MatchMode::Count,
            Mode::Enumerate => MatchMode::Enumerate,
        },
        threads,
        occurrences,
        shadow_check: verify,
        verify_trail: verify,
        max_embeddings,
    };
    let result = run(&pl, &pattern, &graph, &config).map_err(|e| Failure::from_core(e, None))?;

    let mut stdout = format!("embeddings={}\n", result.embedding_count);
    if occurrences {
        match result.occurrence_count {
            Some(o) => stdout.push_str(&format!("occurrences={o}\n")),
            None => eprintln!("occurrences unavailable: pattern too large for automorphism counting"),
        }
    }
    if config.mode == MatchMode::Enumerate {
        let listing: String =
            result.embeddings.iter().map(|m| MatchResult::format_embedding(&pattern, &graph, m) + "\n").collect();
        match output {
            Some(path) => write_file(path, &listing)?,
            None => stdout.push_str(&listing),
        }
    }
    let stats = result.stats.to_string();
    match stats_path {
        Some(path) => write_file(path, &stats)?,
        None => eprint!("{stats}"),
    }
    Ok(stdout)
}

fn cmd_plan(pattern_path: &Path, reduction: Toggle) -> CliResult<String> {
    let pattern = load_pattern(pattern_path)?;
    let closure = if reduction == Toggle::On { InclusionClosure::compute(&pattern) } else { InclusionClosure::empty() };
    let pl = plan(&pattern, reduction == Toggle::On).map_err(|e| Failure::from_core(e, Some(pattern_path)))?;
    let mut out = String::from("CLOSURE\n");
    out.push_str(&closure.dump(&pattern));
    if closure.is_truncated() {
        out.push_str("TRUNCATED\n");
    }
    out.push_str(&pl.dump(&pattern));
    Ok(out)
}

fn cmd_oracle(graph_path: &Path, pattern_path: &Path) -> CliResult<String> {
    let pattern = load_pattern(pattern_path)?;
    let graph = load_graph(graph_path)?;
    let r = enumerate_bruteforce(&graph, &pattern, false).map_err(|e| Failure::from_core(e, None))?;
    Ok(format!("oracle_embeddings={}\n", r.embedding_count))
}

fn cmd_fuzz(seed: u64, graphs: usize, patterns: usize, threads: usize) -> CliResult<String> {
    if threads == 0 {
        return Err(Failure::new(EXIT_USAGE, "--threads must be at least 1"));
    }
    let mut r = rng(seed);
    let suite = pattern_suite(&mut r, patterns);
    let mut out = String::new();
    let (mut instances, mut mismatches) = (0, 0);
    for i in 0..graphs {
        let g = corpus_digraph(&mut r);
        for p in &suite {
            instances += 1;
            let c = compare(&g, p, threads).map_err(|e| Failure::from_core(e, None))?;
            if !c.agrees() {
                mismatches += 1;
                out.push_str(&format!(
                    "MISMATCH graph={i} pattern=[{}] oracle={} reduced={} unreduced={} shadow_mismatches={} removed_reads={}\n",
                    p.to_string().trim().replace('\n', ";"),
                    c.oracle,
                    c.reduced,
                    c.unreduced,
                    c.shadow_mismatches,
                    c.removed_edge_adjacency_reads
                ));
            }
        }
    }
    out.push_str(&format!("fuzz seed={seed} instances={instances} mismatches={mismatches}\n"));
    if mismatches > 0 {
        print!("{out}");
        return Err(Failure::new(EXIT_MISMATCH, format!("{mismatches} mismatching instances")));
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Match {
            graph,
            pattern,
            mode,
            occurrences,
            reduction,
            threads,
            stats,
            output,
            verify,
            max_embeddings,
        } => cmd_match(
            &graph,
            &pattern,
            mode,
            occurrences,
            reduction,
            threads,
            stats.as_deref(),
            output.as_deref(),
            verify,
            max_embeddings,
        ),
        Command::Plan { pattern, reduction } => cmd_plan(&pattern, reduction),
        Command::Oracle { graph, pattern } => cmd_oracle(&graph, &pattern),
        Command::Fuzz { seed, graphs, patterns, threads } => cmd_fuzz(seed, graphs, patterns, threads),
    };
    match result {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
