//! Corpus discovery, pairing, and parallel evaluation.
//!
//! A corpus is a reference directory and a hypothesis directory holding
//! `.txt` files at matching relative paths (`en/song.txt` against
//! `en/song.txt`). Pairing can also come from an explicit CSV manifest.
//! Each pair is scored with [`crate::metrics::evaluate_pair`] after
//! normalization and the configured transforms; songs whose reference
//! has no words are reported as unevaluable rather than dropped, and a
//! missing hypothesis scores as an empty one (WER 1.0) unless skipped.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{self, PairMetrics};
use crate::postprocess::{
    capitalize_lines, lint_lyrics, segments_from_json, segments_to_lines,
    strip_line_end_punctuation, swd_normalize, LintFinding, SegmentsError,
};
use crate::report::EvaluationRun;
use crate::tokenizer::{normalize_punctuation, tokenize};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    Encoding { path: PathBuf, offset: usize },
    #[error("{path}: {source}")]
    Segments {
        path: PathBuf,
        source: SegmentsError,
    },
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("duplicate song id {song_id:?} in manifest")]
    DuplicateSongId { song_id: String },
    #[error("no reference/hypothesis pairs to evaluate")]
    NoPairs,
}

impl CorpusError {
    fn io(path: &Path, source: std::io::Error) -> CorpusError {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One reference/hypothesis pairing. `hypothesis_path` is `None` when
/// no hypothesis file exists for the reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub song_id: String,
    pub language: String,
    pub reference_path: PathBuf,
    pub hypothesis_path: Option<PathBuf>,
}

/// The paired corpus, plus hypothesis files that matched no reference
/// (reported, never silently dropped).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
    pub unpaired_hypotheses: Vec<PathBuf>,
}

/// Hypothesis-side transform steps, applied in the order given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostprocessStep {
    /// Join segment texts into lines. Segment input is joined at load
    /// time, so this is a no-op for plain text; it exists to keep the
    /// canonical `lines,strip,capitalize` pipeline spelling valid.
    Lines,
    Strip,
    Capitalize,
}

impl FromStr for PostprocessStep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lines" => Ok(PostprocessStep::Lines),
            "strip" => Ok(PostprocessStep::Strip),
            "capitalize" => Ok(PostprocessStep::Capitalize),
            other => Err(format!(
                "unknown postprocess step {other:?} (expected lines, strip, or capitalize)"
            )),
        }
    }
}

impl fmt::Display for PostprocessStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PostprocessStep::Lines => "lines",
            PostprocessStep::Strip => "strip",
            PostprocessStep::Capitalize => "capitalize",
        })
    }
}

/// Evaluation configuration; echoed verbatim into reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Hypothesis transforms, in application order.
    pub postprocess: Vec<PostprocessStep>,
    /// Hypothesis files are JSON segment lists, not plain text.
    pub segments_json: bool,
    /// Apply the poem normalization to the reference side.
    pub swd: bool,
    /// Attach formatting lint findings for each hypothesis.
    pub lint: bool,
    /// Drop entries with no hypothesis instead of scoring them empty.
    pub skip_missing: bool,
    /// Include per-song rows in CSV output and plot data.
    pub per_song: bool,
    pub language_filter: Option<String>,
    /// Worker count; `None` uses all cores.
    pub parallel: Option<usize>,
}

/// Per-song entry of an evaluation run. `metrics` is `None` exactly
/// when `unevaluable_reason` says why the song could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SongReport {
    pub song_id: String,
    pub language: String,
    pub missing_hypothesis: bool,
    pub unevaluable_reason: Option<String>,
    pub metrics: Option<PairMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lint: Option<Vec<LintFinding>>,
}

/// Is the first path component a plausible language code (two or three
/// ASCII letters)?
fn language_from_relative_path(rel: &Path) -> String {
    let first = rel.components().next();
    if let Some(std::path::Component::Normal(part)) = first {
        if rel.components().count() > 1 {
            if let Some(s) = part.to_str() {
                if (2..=3).contains(&s.len()) && s.bytes().all(|b| b.is_ascii_alphabetic()) {
                    return s.to_ascii_lowercase();
                }
            }
        }
    }
    "und".to_string()
}

fn song_id_from_relative_path(rel: &Path) -> String {
    let no_ext = rel.with_extension("");
    no_ext
        .components()
        .filter_map(|c| c.as_os_str().to_str())
        .collect::<Vec<_>>()
        .join("/")
}

fn walk_txt_files(root: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            match e.into_io_error() {
                Some(io) => CorpusError::Io { path, source: io },
                None => CorpusError::Io {
                    path,
                    source: std::io::Error::other("filesystem loop"),
                },
            }
        })?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "txt") {
            let rel = entry
                .path()
                .strip_prefix(root)
                .expect("walked path under root")
                .to_path_buf();
            files.push(rel);
        }
    }
    files.sort();
    Ok(files)
}

/// Pairs reference and hypothesis files.
///
/// Without a manifest, every `.txt` under `reference_root` is an entry;
/// its hypothesis is the same relative path under `hypothesis_root`,
/// and its language comes from the first directory component when that
/// looks like a language code. With a manifest (CSV with header
/// `song_id,language,reference_path,hypothesis_path`), entries come
/// from its rows; relative paths resolve against the respective roots.
pub fn load_corpus(
    reference_root: &Path,
    hypothesis_root: &Path,
    manifest: Option<&Path>,
) -> Result<CorpusManifest, CorpusError> {
    for root in [reference_root, hypothesis_root] {
        if !root.is_dir() {
            return Err(CorpusError::io(
                root,
                std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
            ));
        }
    }
    match manifest {
        Some(path) => load_from_manifest(reference_root, hypothesis_root, path),
        None => discover(reference_root, hypothesis_root),
    }
}

fn discover(reference_root: &Path, hypothesis_root: &Path) -> Result<CorpusManifest, CorpusError> {
    let ref_files = walk_txt_files(reference_root)?;
    if ref_files.is_empty() {
        return Err(CorpusError::NoPairs);
    }
    let ref_set: HashSet<&PathBuf> = ref_files.iter().collect();

    let entries = ref_files
        .iter()
        .map(|rel| {
            let hyp = hypothesis_root.join(rel);
            ManifestEntry {
                song_id: song_id_from_relative_path(rel),
                language: language_from_relative_path(rel),
                reference_path: reference_root.join(rel),
                hypothesis_path: hyp.is_file().then_some(hyp),
            }
        })
        .collect();

    let unpaired_hypotheses = walk_txt_files(hypothesis_root)?
        .into_iter()
        .filter(|rel| !ref_set.contains(rel))
        .map(|rel| hypothesis_root.join(rel))
        .collect();

    Ok(CorpusManifest {
        entries,
        unpaired_hypotheses,
    })
}

fn load_from_manifest(
    reference_root: &Path,
    hypothesis_root: &Path,
    manifest_path: &Path,
) -> Result<CorpusManifest, CorpusError> {
    let manifest_err = |message: String| CorpusError::Manifest {
        path: manifest_path.to_path_buf(),
        message,
    };

    let mut reader =
        csv::Reader::from_path(manifest_path).map_err(|e| manifest_err(e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| manifest_err(e.to_string()))?
        .clone();
    let expected = ["song_id", "language", "reference_path", "hypothesis_path"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(manifest_err(format!(
            "expected header song_id,language,reference_path,hypothesis_path, got {:?}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let resolve = |root: &Path, raw: &str| -> PathBuf {
        let p = Path::new(raw);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            root.join(p)
        }
    };

    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| manifest_err(e.to_string()))?;
        if record.len() != 4 {
            return Err(manifest_err(format!(
                "row {}: expected 4 fields, got {}",
                i + 2,
                record.len()
            )));
        }
        let song_id = record[0].trim().to_string();
        if song_id.is_empty() {
            return Err(manifest_err(format!("row {}: empty song_id", i + 2)));
        }
        if !seen.insert(song_id.clone()) {
            return Err(CorpusError::DuplicateSongId { song_id });
        }
        let language = match record[1].trim() {
            "" => "und".to_string(),
            code => code.to_string(),
        };
        let reference_path = resolve(reference_root, record[2].trim());
        if !reference_path.is_file() {
            return Err(CorpusError::io(
                &reference_path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "reference file not found"),
            ));
        }
        let hypothesis_path = match record[3].trim() {
            "" => None,
            raw => {
                let p = resolve(hypothesis_root, raw);
                p.is_file().then_some(p)
            }
        };
        entries.push(ManifestEntry {
            song_id,
            language,
            reference_path,
            hypothesis_path,
        });
    }
    if entries.is_empty() {
        return Err(CorpusError::NoPairs);
    }
    Ok(CorpusManifest {
        entries,
        unpaired_hypotheses: Vec::new(),
    })
}

struct SongInput {
    song_id: String,
    language: String,
    reference_text: String,
    /// `None` when the hypothesis file is missing.
    hypothesis_text: Option<String>,
}

fn read_text(path: &Path) -> Result<String, CorpusError> {
    let bytes = std::fs::read(path).map_err(|e| CorpusError::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| CorpusError::Encoding {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })
}

fn read_song(entry: &ManifestEntry, options: &EvalOptions) -> Result<SongInput, CorpusError> {
    let reference_text = read_text(&entry.reference_path)?;
    let hypothesis_text = match &entry.hypothesis_path {
        None => None,
        Some(path) => {
            let raw = read_text(path)?;
            if options.segments_json {
                let segments =
                    segments_from_json(&raw).map_err(|source| CorpusError::Segments {
                        path: path.clone(),
                        source,
                    })?;
                Some(segments_to_lines(&segments))
            } else {
                Some(raw)
            }
        }
    };
    Ok(SongInput {
        song_id: entry.song_id.clone(),
        language: entry.language.clone(),
        reference_text,
        hypothesis_text,
    })
}

/// Scores one song. The reference is normalized (and poem-normalized
/// under `swd`); the hypothesis is normalized and run through the
/// configured transform steps. A song whose reference yields no word
/// tokens comes back unevaluable instead of erroring the run.
pub fn evaluate_song(
    song_id: &str,
    language: &str,
    reference_text: &str,
    hypothesis_text: Option<&str>,
    options: &EvalOptions,
) -> SongReport {
    let mut reference = normalize_punctuation(reference_text);
    if options.swd {
        reference = swd_normalize(&reference);
    }

    let missing_hypothesis = hypothesis_text.is_none();
    let mut hypothesis = normalize_punctuation(hypothesis_text.unwrap_or(""));
    for step in &options.postprocess {
        hypothesis = match step {
            PostprocessStep::Lines => hypothesis,
            PostprocessStep::Strip => strip_line_end_punctuation(&hypothesis),
            PostprocessStep::Capitalize => capitalize_lines(&hypothesis),
        };
    }

    let lint = options.lint.then(|| lint_lyrics(&hypothesis));
    let (metrics, unevaluable_reason) =
        match metrics::evaluate_pair(&tokenize(&reference), &tokenize(&hypothesis)) {
            Ok(m) => (Some(m), None),
            Err(e) => (None, Some(e.to_string())),
        };

    SongReport {
        song_id: song_id.to_string(),
        language: language.to_string(),
        missing_hypothesis,
        unevaluable_reason,
        metrics,
        lint,
    }
}

fn evaluate_inputs(inputs: &[SongInput], options: &EvalOptions) -> Vec<SongReport> {
    let score = |input: &SongInput| {
        evaluate_song(
            &input.song_id,
            &input.language,
            &input.reference_text,
            input.hypothesis_text.as_deref(),
            options,
        )
    };
    match options.parallel {
        Some(1) => inputs.iter().map(score).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("worker pool")
            .install(|| inputs.par_iter().map(score).collect()),
        None => inputs.par_iter().map(score).collect(),
    }
}

/// Evaluates a loaded corpus end to end: reads every file, scores songs
/// (in parallel), and aggregates overall and per-language metrics.
/// `version` and `timestamp` are echoed into the run for reporting.
pub fn run_evaluation(
    corpus: &CorpusManifest,
    options: &EvalOptions,
    version: &str,
    timestamp: &str,
) -> Result<EvaluationRun, CorpusError> {
    let mut entries: Vec<&ManifestEntry> = corpus.entries.iter().collect();
    if let Some(code) = &options.language_filter {
        entries.retain(|e| &e.language == code);
    }
    if options.skip_missing {
        entries.retain(|e| e.hypothesis_path.is_some());
    }
    if entries.is_empty() {
        return Err(CorpusError::NoPairs);
    }

    let inputs = entries
        .iter()
        .map(|e| read_song(e, options))
        .collect::<Result<Vec<_>, _>>()?;
    let songs = evaluate_inputs(&inputs, options);

    let mut by_language: BTreeMap<String, Vec<&PairMetrics>> = BTreeMap::new();
    for song in &songs {
        if let Some(m) = &song.metrics {
            by_language
                .entry(song.language.clone())
                .or_default()
                .push(m);
        }
    }
    let overall = metrics::aggregate(by_language.values().flatten().copied()).ok();
    let by_language = by_language
        .into_iter()
        .map(|(code, ms)| {
            let agg = metrics::aggregate(ms.iter().copied()).expect("non-empty group");
            (code, agg)
        })
        .collect();

    Ok(EvaluationRun {
        version: version.to_string(),
        timestamp: timestamp.to_string(),
        options: options.clone(),
        songs,
        by_language,
        overall,
        unpaired_hypotheses: corpus
            .unpaired_hypotheses
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
    })
}
