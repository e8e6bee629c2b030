//! Corpus evaluation from the command line.
//!
//! Exit codes: 0 on success, 1 when the run completed but some songs
//! could not be evaluated (empty reference), 2 on configuration or
//! input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use lyreval::corpus::{load_corpus, run_evaluation, EvalOptions, PostprocessStep};
use lyreval::report::{emit_csv, emit_json, write_plot_data, EvaluationRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_step(raw: &str) -> Result<PostprocessStep, String> {
    raw.parse()
}

/// Scores hypothesis lyrics against references and reports word,
/// punctuation, and line/section formatting error metrics.
#[derive(Debug, Parser)]
#[command(name = "lyreval", version, about)]
struct Cli {
    /// Directory of reference lyric files
    #[arg(long, value_name = "DIR")]
    reference: PathBuf,

    /// Directory of hypothesis files
    #[arg(long, value_name = "DIR")]
    hypothesis: PathBuf,

    /// CSV pairing manifest with header
    /// song_id,language,reference_path,hypothesis_path; relative paths
    /// resolve against the respective directories
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,

    /// Evaluate only songs with this language code
    #[arg(long, value_name = "CODE")]
    language_filter: Option<String>,

    /// Hypothesis transform steps applied in order, comma separated:
    /// lines, strip, capitalize
    #[arg(long, value_delimiter = ',', value_name = "STEPS", value_parser = parse_step)]
    postprocess: Vec<PostprocessStep>,

    /// Treat hypothesis files as JSON segment lists instead of text
    #[arg(long)]
    segments_json: bool,

    /// Normalize reference texts from classical-poem punctuation to
    /// lyric formatting conventions
    #[arg(long)]
    swd: bool,

    /// Attach formatting lint findings to each song report
    #[arg(long)]
    lint: bool,

    /// Include per-song rows in CSV output
    #[arg(long)]
    per_song: bool,

    /// Report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Directory to write plot-ready CSV tables into
    #[arg(long, value_name = "DIR")]
    plot_data: Option<PathBuf>,

    /// Worker threads (default: all cores)
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    parallel: Option<u32>,

    /// Skip songs with no hypothesis file instead of scoring them as
    /// fully deleted
    #[arg(long)]
    skip_missing: bool,

    /// Write the report to this file instead of stdout
    #[arg(short, long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn timestamp() -> String {
    // Overridable so scripted runs can produce byte-identical reports.
    std::env::var("LYREVAL_TIMESTAMP")
        .unwrap_or_else(|_| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

fn warn(run: &EvaluationRun) {
    for path in &run.unpaired_hypotheses {
        eprintln!("warning: hypothesis file without reference: {path}");
    }
    for song in &run.songs {
        if let Some(reason) = &song.unevaluable_reason {
            eprintln!("warning: {}: not evaluable: {reason}", song.song_id);
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let options = EvalOptions {
        postprocess: cli.postprocess,
        segments_json: cli.segments_json,
        swd: cli.swd,
        lint: cli.lint,
        skip_missing: cli.skip_missing,
        per_song: cli.per_song,
        language_filter: cli.language_filter,
        parallel: cli.parallel.map(|n| n as usize),
    };

    let corpus = load_corpus(&cli.reference, &cli.hypothesis, cli.manifest.as_deref())
        .map_err(|e| e.to_string())?;

    let run = run_evaluation(&corpus, &options, env!("CARGO_PKG_VERSION"), &timestamp())
        .map_err(|e| e.to_string())?;

    let rendered = match cli.format {
        Format::Json => emit_json(&run),
        Format::Csv => emit_csv(&run),
    };
    match &cli.output {
        Some(path) => {
            std::fs::write(path, &rendered).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => print!("{rendered}"),
    }

    if let Some(dir) = &cli.plot_data {
        write_plot_data(&run, dir).map_err(|e| e.to_string())?;
    }

    warn(&run);
    Ok(if run.unevaluable_count() > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
