//! Report assembly and emission: JSON, CSV, and plot-ready tables.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, EvalOptions, SongReport};
use crate::metrics::{Aggregate, ConfusionLabel, Prf, TypePrfSet, WordOpFrequencies};
use crate::tokenizer::TokenType;

/// A complete evaluation run. Serializes to the JSON report; the field
/// order here is the report's key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRun {
    pub version: String,
    pub timestamp: String,
    pub options: EvalOptions,
    pub songs: Vec<SongReport>,
    pub by_language: BTreeMap<String, Aggregate>,
    /// `None` when no song could be evaluated.
    pub overall: Option<Aggregate>,
    pub unpaired_hypotheses: Vec<String>,
}

impl EvaluationRun {
    pub fn unevaluable_count(&self) -> usize {
        self.songs
            .iter()
            .filter(|s| s.unevaluable_reason.is_some())
            .count()
    }
}

pub fn emit_json(run: &EvaluationRun) -> String {
    let mut out = serde_json::to_string_pretty(run).expect("report serializes");
    out.push('\n');
    out
}

const UNDEFINED: &str = "—";

fn pct(value: f64) -> String {
    format!("{:.1}", value * 100.0)
}

fn pct_opt(value: Option<f64>) -> String {
    value.map(pct).unwrap_or_else(|| UNDEFINED.to_string())
}

fn prf_fields(prf: &Prf, row: &mut Vec<String>) {
    row.push(pct_opt(prf.precision));
    row.push(pct_opt(prf.recall));
    row.push(pct_opt(prf.f1));
}

fn metric_fields(ref_words: u64, wer: f64, wer_case: f64, prf: &TypePrfSet, row: &mut Vec<String>) {
    row.push(ref_words.to_string());
    row.push(pct(wer));
    row.push(pct(wer_case));
    for kind in [
        TokenType::Punct,
        TokenType::Paren,
        TokenType::LineBreak,
        TokenType::SectionBreak,
    ] {
        prf_fields(prf.get(kind), row);
    }
}

fn undefined_metric_fields(row: &mut Vec<String>) {
    for _ in 0..15 {
        row.push(UNDEFINED.to_string());
    }
}

fn song_status(song: &SongReport) -> &'static str {
    if song.unevaluable_reason.is_some() {
        "unevaluable"
    } else if song.missing_hypothesis {
        "missing_hypothesis"
    } else {
        "ok"
    }
}

/// Renders the run as CSV. Rates are percentages with one decimal;
/// undefined values print as a dash. Per-song rows appear only when
/// the run was configured with `per_song`.
pub fn emit_csv(run: &EvaluationRun) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());

    let mut header = vec![
        "row_type".to_string(),
        "id".to_string(),
        "language".to_string(),
        "status".to_string(),
        "songs".to_string(),
        "ref_words".to_string(),
        "wer".to_string(),
        "wer_case".to_string(),
    ];
    for kind in ["punct", "paren", "line_break", "section_break"] {
        for measure in ["p", "r", "f"] {
            header.push(format!("{kind}_{measure}"));
        }
    }
    writer.write_record(&header).expect("csv write");

    if run.options.per_song {
        for song in &run.songs {
            let mut row = vec![
                "song".to_string(),
                song.song_id.clone(),
                song.language.clone(),
                song_status(song).to_string(),
                "1".to_string(),
            ];
            match &song.metrics {
                Some(m) => {
                    metric_fields(m.counts.ref_words, m.wer, m.wer_case, &m.type_prf, &mut row)
                }
                None => undefined_metric_fields(&mut row),
            }
            writer.write_record(&row).expect("csv write");
        }
    }

    for (code, agg) in &run.by_language {
        let mut row = vec![
            "language".to_string(),
            code.clone(),
            code.clone(),
            "ok".to_string(),
            agg.songs.to_string(),
        ];
        metric_fields(
            agg.counts.ref_words,
            agg.wer,
            agg.wer_case,
            &agg.type_prf,
            &mut row,
        );
        writer.write_record(&row).expect("csv write");
    }

    if let Some(agg) = &run.overall {
        let mut row = vec![
            "overall".to_string(),
            "all".to_string(),
            String::new(),
            "ok".to_string(),
            agg.songs.to_string(),
        ];
        metric_fields(
            agg.counts.ref_words,
            agg.wer,
            agg.wer_case,
            &agg.type_prf,
            &mut row,
        );
        writer.write_record(&row).expect("csv write");
    }

    let bytes = writer.into_inner().expect("csv flush");
    String::from_utf8(bytes).expect("csv is utf-8")
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CorpusError> {
    std::fs::write(path, content).map_err(|e| io_err(path, e))
}

fn frequency_record(scope: &str, id: &str, f: &WordOpFrequencies) -> Vec<String> {
    vec![
        scope.to_string(),
        id.to_string(),
        f.hit.to_string(),
        f.case.to_string(),
        f.near.to_string(),
        f.sub.to_string(),
        f.ins.to_string(),
        f.del.to_string(),
    ]
}

/// Writes three plot-ready CSV tables into `dir`:
///
/// * `wer_by_song.csv` with one row per evaluated song,
/// * `word_op_frequencies.csv` with song, language, and overall rows,
/// * `type_confusion.csv` with language and overall confusion cells.
///
/// Numbers here are raw fractions (full precision), not percentages.
pub fn write_plot_data(run: &EvaluationRun, dir: &Path) -> Result<(), CorpusError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let mut wer = csv::Writer::from_writer(Vec::new());
    wer.write_record(["song_id", "language", "wer"])
        .expect("csv write");
    for song in &run.songs {
        if let Some(m) = &song.metrics {
            wer.write_record([
                song.song_id.as_str(),
                song.language.as_str(),
                &m.wer.to_string(),
            ])
            .expect("csv write");
        }
    }
    let bytes = wer.into_inner().expect("csv flush");
    write_file(
        &dir.join("wer_by_song.csv"),
        std::str::from_utf8(&bytes).expect("csv is utf-8"),
    )?;

    let mut ops = csv::Writer::from_writer(Vec::new());
    ops.write_record(["scope", "id", "hit", "case", "near", "sub", "ins", "del"])
        .expect("csv write");
    for song in &run.songs {
        if let Some(m) = &song.metrics {
            ops.write_record(frequency_record(
                "song",
                &song.song_id,
                &m.word_op_frequencies,
            ))
            .expect("csv write");
        }
    }
    for (code, agg) in &run.by_language {
        ops.write_record(frequency_record("language", code, &agg.word_op_frequencies))
            .expect("csv write");
    }
    if let Some(agg) = &run.overall {
        ops.write_record(frequency_record("overall", "all", &agg.word_op_frequencies))
            .expect("csv write");
    }
    let bytes = ops.into_inner().expect("csv flush");
    write_file(
        &dir.join("word_op_frequencies.csv"),
        std::str::from_utf8(&bytes).expect("csv is utf-8"),
    )?;

    let mut confusion = csv::Writer::from_writer(Vec::new());
    confusion
        .write_record(["scope", "id", "ref_label", "hyp_label", "count"])
        .expect("csv write");
    let mut confusion_rows = |scope: &str, id: &str, agg: &Aggregate| {
        for r in ConfusionLabel::ALL {
            for h in ConfusionLabel::ALL {
                confusion
                    .write_record([
                        scope,
                        id,
                        r.name(),
                        h.name(),
                        &agg.confusion.get(r, h).to_string(),
                    ])
                    .expect("csv write");
            }
        }
    };
    for (code, agg) in &run.by_language {
        confusion_rows("language", code, agg);
    }
    if let Some(agg) = &run.overall {
        confusion_rows("overall", "all", agg);
    }
    let bytes = confusion.into_inner().expect("csv flush");
    write_file(
        &dir.join("type_confusion.csv"),
        std::str::from_utf8(&bytes).expect("csv is utf-8"),
    )?;

    Ok(())
}
