//! Error metrics over aligned token sequences.
//!
//! Two alignments feed these metrics. A *word-only* alignment (non-word
//! tokens stripped, case-insensitive equality) drives WER, the
//! case-sensitive WER, and the word-operation breakdown. A *typed*
//! alignment over the full sequences (case-insensitive for words, exact
//! for marks, kind-only for breaks) drives the per-type counts,
//! precision/recall/F1, and the non-word confusion matrix.
//!
//! WER is `(S + D + I) / N` with `N` the reference word count, so it can
//! exceed 1. The case-sensitive variant adds `E_case / N`, where a case
//! error is a hit whose surface forms differ only in case. Per-type
//! precision is `H / (H + S + I)` and recall `H / (H + S + D)`; a
//! cross-type substitution counts as a deletion of the reference type
//! plus an insertion of the hypothesis type, so that each type's totals
//! stay conserved. Ratios with a zero denominator are undefined and stay
//! `None` (rendered as null/dash, never NaN).

use std::collections::HashMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::align::{align, EditKind, EditScript};
use crate::tokenizer::{strip_nonwords, Token, TokenSequence, TokenType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricError {
    /// The reference side has no word tokens, so `N = 0` and every
    /// word-level rate is undefined.
    #[error("reference contains no word tokens")]
    EmptyReference,
    /// Aggregation over an empty report set.
    #[error("no song reports to aggregate")]
    NoReports,
}

/// Hit/substitution/deletion/insertion tallies for one token type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OpCounts {
    pub hits: u64,
    pub substitutions: u64,
    pub deletions: u64,
    pub insertions: u64,
}

impl OpCounts {
    /// Equals the number of reference tokens of this type.
    pub fn ref_total(&self) -> u64 {
        self.hits + self.substitutions + self.deletions
    }

    /// Equals the number of hypothesis tokens of this type.
    pub fn hyp_total(&self) -> u64 {
        self.hits + self.substitutions + self.insertions
    }

    fn add(&mut self, other: &OpCounts) {
        self.hits += other.hits;
        self.substitutions += other.substitutions;
        self.deletions += other.deletions;
        self.insertions += other.insertions;
    }
}

/// Per-type edit tallies plus the word-level case-error count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TypeCounts {
    pub word: OpCounts,
    pub punct: OpCounts,
    pub paren: OpCounts,
    pub line_break: OpCounts,
    pub section_break: OpCounts,
    /// Word hits whose surface forms differ (case-only differences).
    pub case_errors: u64,
    /// Reference word count `N`; always `word.ref_total()`.
    pub ref_words: u64,
}

impl TypeCounts {
    pub fn row(&self, kind: TokenType) -> &OpCounts {
        match kind {
            TokenType::Word => &self.word,
            TokenType::Punct => &self.punct,
            TokenType::Paren => &self.paren,
            TokenType::LineBreak => &self.line_break,
            TokenType::SectionBreak => &self.section_break,
        }
    }

    fn row_mut(&mut self, kind: TokenType) -> &mut OpCounts {
        match kind {
            TokenType::Word => &mut self.word,
            TokenType::Punct => &mut self.punct,
            TokenType::Paren => &mut self.paren,
            TokenType::LineBreak => &mut self.line_break,
            TokenType::SectionBreak => &mut self.section_break,
        }
    }

    pub fn add(&mut self, other: &TypeCounts) {
        for kind in TokenType::ALL {
            self.row_mut(kind).add(other.row(kind));
        }
        self.case_errors += other.case_errors;
        self.ref_words += other.ref_words;
    }
}

/// Case-insensitive word equality (for word-only sequences).
pub fn token_eq_folded(a: &Token, b: &Token) -> bool {
    a.folded == b.folded
}

/// Typed equality: kinds must match; words compare case-folded, marks
/// compare exactly (so `(` never equals `)`), breaks match on kind alone.
pub fn token_eq_typed(a: &Token, b: &Token) -> bool {
    if a.kind != b.kind {
        return false;
    }
    match a.kind {
        TokenType::Word => a.folded == b.folded,
        TokenType::Punct | TokenType::Paren => a.original == b.original,
        TokenType::LineBreak | TokenType::SectionBreak => true,
    }
}

/// Tallies the script's operations by token type.
///
/// A substitution between same-type tokens increments that type's
/// `substitutions`; one across types becomes a deletion of the reference
/// type plus an insertion of the hypothesis type (two tallies for one
/// op). Case errors are counted over word-word hits. The script must
/// have been produced over exactly these sequences.
pub fn count_type_edits(
    script: &EditScript,
    reference: &TokenSequence,
    hypothesis: &TokenSequence,
) -> TypeCounts {
    let mut counts = TypeCounts::default();
    for op in &script.ops {
        match op.kind {
            EditKind::Hit => {
                let r = &reference.tokens[op.ref_index.expect("hit has ref index")];
                let h = &hypothesis.tokens[op.hyp_index.expect("hit has hyp index")];
                counts.row_mut(r.kind).hits += 1;
                if r.kind == TokenType::Word && r.original != h.original {
                    counts.case_errors += 1;
                }
            }
            EditKind::Substitution => {
                let r = &reference.tokens[op.ref_index.expect("sub has ref index")];
                let h = &hypothesis.tokens[op.hyp_index.expect("sub has hyp index")];
                if r.kind == h.kind {
                    counts.row_mut(r.kind).substitutions += 1;
                } else {
                    counts.row_mut(r.kind).deletions += 1;
                    counts.row_mut(h.kind).insertions += 1;
                }
            }
            EditKind::Deletion => {
                let r = &reference.tokens[op.ref_index.expect("del has ref index")];
                counts.row_mut(r.kind).deletions += 1;
            }
            EditKind::Insertion => {
                let h = &hypothesis.tokens[op.hyp_index.expect("ins has hyp index")];
                counts.row_mut(h.kind).insertions += 1;
            }
        }
    }
    counts.ref_words = counts.word.ref_total();
    counts
}

/// `(S + D + I) / N` over the word row. Unbounded above; errors when the
/// reference has no words.
pub fn word_error_rate(counts: &TypeCounts) -> Result<f64, MetricError> {
    if counts.ref_words == 0 {
        return Err(MetricError::EmptyReference);
    }
    let w = &counts.word;
    Ok((w.substitutions + w.deletions + w.insertions) as f64 / counts.ref_words as f64)
}

/// WER plus `E_case / N`: case-only mismatches become errors.
pub fn case_sensitive_wer(counts: &TypeCounts) -> Result<f64, MetricError> {
    Ok(word_error_rate(counts)? + counts.case_errors as f64 / counts.ref_words as f64)
}

/// Precision/recall/F1 for one token type; `None` marks an undefined
/// ratio (zero denominator, or F1 with an undefined side or P = R = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn prf_of(row: &OpCounts) -> Prf {
    let hits = row.hits as f64;
    let p_den = row.hyp_total();
    let r_den = row.ref_total();
    let precision = (p_den > 0).then(|| hits / p_den as f64);
    let recall = (r_den > 0).then(|| hits / r_den as f64);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    Prf {
        precision,
        recall,
        f1,
    }
}

pub fn precision_recall_f(counts: &TypeCounts, kind: TokenType) -> Prf {
    prf_of(counts.row(kind))
}

/// P/R/F1 for all five token types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypePrfSet {
    pub word: Prf,
    pub punct: Prf,
    pub paren: Prf,
    pub line_break: Prf,
    pub section_break: Prf,
}

impl TypePrfSet {
    pub fn from_counts(counts: &TypeCounts) -> TypePrfSet {
        TypePrfSet {
            word: prf_of(&counts.word),
            punct: prf_of(&counts.punct),
            paren: prf_of(&counts.paren),
            line_break: prf_of(&counts.line_break),
            section_break: prf_of(&counts.section_break),
        }
    }

    pub fn get(&self, kind: TokenType) -> &Prf {
        match kind {
            TokenType::Word => &self.word,
            TokenType::Punct => &self.punct,
            TokenType::Paren => &self.paren,
            TokenType::LineBreak => &self.line_break,
            TokenType::SectionBreak => &self.section_break,
        }
    }
}

/// Is a substituted word pair "nearly" right? After dropping
/// apostrophes from both sides, the codepoint edit distance must be at
/// most 2 and strictly less than half the longer word's length. Under
/// this rule an/and and gon'/gonna qualify; a/an and this/that do not.
pub fn classify_near_hit(reference_word: &str, hypothesis_word: &str) -> bool {
    let a: String = reference_word.chars().filter(|&c| c != '\'').collect();
    let b: String = hypothesis_word.chars().filter(|&c| c != '\'').collect();
    let distance = crate::align::char_distance(&a, &b);
    let longer = a.chars().count().max(b.chars().count());
    distance <= 2 && 2 * distance < longer
}

/// Word-level operation tallies split by severity: exact hits, case-only
/// hits, near substitutions, other substitutions, insertions, deletions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WordOpCounts {
    pub hit: u64,
    pub case: u64,
    pub near: u64,
    pub sub: u64,
    pub ins: u64,
    pub del: u64,
}

impl WordOpCounts {
    pub fn add(&mut self, other: &WordOpCounts) {
        self.hit += other.hit;
        self.case += other.case;
        self.near += other.near;
        self.sub += other.sub;
        self.ins += other.ins;
        self.del += other.del;
    }

    /// Fractions of the reference word count. `hit + case + near + sub +
    /// del` is exactly 1; WER is `near + sub + ins + del`.
    pub fn frequencies(&self, ref_words: u64) -> WordOpFrequencies {
        let n = ref_words as f64;
        WordOpFrequencies {
            hit: self.hit as f64 / n,
            case: self.case as f64 / n,
            near: self.near as f64 / n,
            sub: self.sub as f64 / n,
            ins: self.ins as f64 / n,
            del: self.del as f64 / n,
        }
    }
}

/// [`WordOpCounts`] normalized by the reference word count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordOpFrequencies {
    pub hit: f64,
    pub case: f64,
    pub near: f64,
    pub sub: f64,
    pub ins: f64,
    pub del: f64,
}

/// Classifies a word-only script's operations. Hits split into exact and
/// case-only; substitutions split by the near-hit rule.
pub fn word_op_counts(
    script: &EditScript,
    reference: &TokenSequence,
    hypothesis: &TokenSequence,
) -> WordOpCounts {
    let mut counts = WordOpCounts::default();
    for op in &script.ops {
        match op.kind {
            EditKind::Hit => {
                let r = &reference.tokens[op.ref_index.expect("hit has ref index")];
                let h = &hypothesis.tokens[op.hyp_index.expect("hit has hyp index")];
                if r.original == h.original {
                    counts.hit += 1;
                } else {
                    counts.case += 1;
                }
            }
            EditKind::Substitution => {
                let r = &reference.tokens[op.ref_index.expect("sub has ref index")];
                let h = &hypothesis.tokens[op.hyp_index.expect("sub has hyp index")];
                if classify_near_hit(&r.folded, &h.folded) {
                    counts.near += 1;
                } else {
                    counts.sub += 1;
                }
            }
            EditKind::Insertion => counts.ins += 1,
            EditKind::Deletion => counts.del += 1,
        }
    }
    counts
}

/// [`word_op_counts`] as fractions of the reference length.
pub fn word_op_frequencies(
    script: &EditScript,
    reference: &TokenSequence,
    hypothesis: &TokenSequence,
) -> Result<WordOpFrequencies, MetricError> {
    let n = reference.tokens.len() as u64;
    if n == 0 {
        return Err(MetricError::EmptyReference);
    }
    Ok(word_op_counts(script, reference, hypothesis).frequencies(n))
}

/// Row/column labels of the non-word confusion matrix. `Absent` covers
/// deletions (no hypothesis token), insertions (no reference token), and
/// the word side of word/non-word substitutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConfusionLabel {
    Punct,
    Paren,
    LineBreak,
    SectionBreak,
    Absent,
}

impl ConfusionLabel {
    pub const ALL: [ConfusionLabel; 5] = [
        ConfusionLabel::Punct,
        ConfusionLabel::Paren,
        ConfusionLabel::LineBreak,
        ConfusionLabel::SectionBreak,
        ConfusionLabel::Absent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConfusionLabel::Punct => "punct",
            ConfusionLabel::Paren => "paren",
            ConfusionLabel::LineBreak => "line_break",
            ConfusionLabel::SectionBreak => "section_break",
            ConfusionLabel::Absent => "absent",
        }
    }

    fn from_name(name: &str) -> Option<ConfusionLabel> {
        ConfusionLabel::ALL.into_iter().find(|l| l.name() == name)
    }

    fn index(self) -> usize {
        match self {
            ConfusionLabel::Punct => 0,
            ConfusionLabel::Paren => 1,
            ConfusionLabel::LineBreak => 2,
            ConfusionLabel::SectionBreak => 3,
            ConfusionLabel::Absent => 4,
        }
    }

    pub fn from_kind(kind: TokenType) -> Option<ConfusionLabel> {
        match kind {
            TokenType::Word => None,
            TokenType::Punct => Some(ConfusionLabel::Punct),
            TokenType::Paren => Some(ConfusionLabel::Paren),
            TokenType::LineBreak => Some(ConfusionLabel::LineBreak),
            TokenType::SectionBreak => Some(ConfusionLabel::SectionBreak),
        }
    }
}

/// Non-word confusion counts indexed (reference label, hypothesis
/// label). Word-word operations are excluded entirely; the
/// (absent, absent) cell is structurally zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    cells: [[u64; 5]; 5],
}

impl ConfusionMatrix {
    pub fn get(&self, reference: ConfusionLabel, hypothesis: ConfusionLabel) -> u64 {
        self.cells[reference.index()][hypothesis.index()]
    }

    fn bump(&mut self, reference: ConfusionLabel, hypothesis: ConfusionLabel) {
        self.cells[reference.index()][hypothesis.index()] += 1;
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for r in 0..5 {
            for h in 0..5 {
                self.cells[r][h] += other.cells[r][h];
            }
        }
    }

    /// Sum over the row; for a non-absent label this equals the number
    /// of reference tokens of that type.
    pub fn row_total(&self, reference: ConfusionLabel) -> u64 {
        self.cells[reference.index()].iter().sum()
    }

    /// Sum over the column; for a non-absent label this equals the
    /// number of hypothesis tokens of that type.
    pub fn column_total(&self, hypothesis: ConfusionLabel) -> u64 {
        (0..5).map(|r| self.cells[r][hypothesis.index()]).sum()
    }
}

impl Serialize for ConfusionMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;

        struct Row<'a>(&'a [u64; 5]);
        impl Serialize for Row<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(5))?;
                for label in ConfusionLabel::ALL {
                    map.serialize_entry(label.name(), &self.0[label.index()])?;
                }
                map.end()
            }
        }

        let mut map = serializer.serialize_map(Some(5))?;
        for label in ConfusionLabel::ALL {
            map.serialize_entry(label.name(), &Row(&self.cells[label.index()]))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ConfusionMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: HashMap<String, HashMap<String, u64>> = HashMap::deserialize(deserializer)?;
        let mut matrix = ConfusionMatrix::default();
        for (row_name, row) in raw {
            let r = ConfusionLabel::from_name(&row_name)
                .ok_or_else(|| D::Error::custom(format!("unknown label {row_name:?}")))?;
            for (col_name, value) in row {
                let h = ConfusionLabel::from_name(&col_name)
                    .ok_or_else(|| D::Error::custom(format!("unknown label {col_name:?}")))?;
                matrix.cells[r.index()][h.index()] = value;
            }
        }
        Ok(matrix)
    }
}

/// Builds the non-word confusion matrix from a typed script.
///
/// Hits and substitutions between non-word tokens land in (ref type,
/// hyp type). A substitution that pairs a non-word token with a word
/// counts as that token going to (or coming from) `Absent`, matching
/// how the type counts treat cross-type substitutions. Deletions map to
/// (type, `Absent`), insertions to (`Absent`, type).
pub fn confusion_matrix(
    script: &EditScript,
    reference: &TokenSequence,
    hypothesis: &TokenSequence,
) -> ConfusionMatrix {
    let mut matrix = ConfusionMatrix::default();
    for op in &script.ops {
        let ref_label = op
            .ref_index
            .and_then(|i| ConfusionLabel::from_kind(reference.tokens[i].kind));
        let hyp_label = op
            .hyp_index
            .and_then(|j| ConfusionLabel::from_kind(hypothesis.tokens[j].kind));
        match op.kind {
            EditKind::Hit | EditKind::Substitution => match (ref_label, hyp_label) {
                (Some(r), Some(h)) => matrix.bump(r, h),
                (Some(r), None) => matrix.bump(r, ConfusionLabel::Absent),
                (None, Some(h)) => matrix.bump(ConfusionLabel::Absent, h),
                (None, None) => {}
            },
            EditKind::Deletion => {
                if let Some(r) = ref_label {
                    matrix.bump(r, ConfusionLabel::Absent);
                }
            }
            EditKind::Insertion => {
                if let Some(h) = hyp_label {
                    matrix.bump(ConfusionLabel::Absent, h);
                }
            }
        }
    }
    matrix
}

/// Full metric bundle for one reference/hypothesis pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMetrics {
    pub counts: TypeCounts,
    pub wer: f64,
    pub wer_case: f64,
    pub type_prf: TypePrfSet,
    pub word_ops: WordOpCounts,
    pub word_op_frequencies: WordOpFrequencies,
    pub confusion: ConfusionMatrix,
}

fn intern(tag: u8, text: &str, table: &mut HashMap<(u8, String), u32>) -> u32 {
    let next = table.len() as u32;
    *table.entry((tag, text.to_string())).or_insert(next)
}

fn fold_ids(tokens: &[Token], table: &mut HashMap<(u8, String), u32>) -> Vec<u32> {
    tokens.iter().map(|t| intern(0, &t.folded, table)).collect()
}

fn typed_ids(tokens: &[Token], table: &mut HashMap<(u8, String), u32>) -> Vec<u32> {
    tokens
        .iter()
        .map(|t| match t.kind {
            TokenType::Word => intern(1, &t.folded, table),
            TokenType::Punct => intern(2, &t.original, table),
            TokenType::Paren => intern(3, &t.original, table),
            TokenType::LineBreak => intern(4, "", table),
            TokenType::SectionBreak => intern(5, "", table),
        })
        .collect()
}

/// Scores a tokenized hypothesis against a tokenized reference.
///
/// Runs both alignments (words are interned first, so the dynamic
/// program compares integers). The word row, case errors, and `N` come
/// from the word-only alignment; the non-word rows and the confusion
/// matrix come from the typed alignment.
pub fn evaluate_pair(
    reference: &TokenSequence,
    hypothesis: &TokenSequence,
) -> Result<PairMetrics, MetricError> {
    let ref_words = strip_nonwords(reference);
    let hyp_words = strip_nonwords(hypothesis);
    if ref_words.is_empty() {
        return Err(MetricError::EmptyReference);
    }

    let mut table = HashMap::new();
    let word_script = {
        let r = fold_ids(&ref_words.tokens, &mut table);
        let h = fold_ids(&hyp_words.tokens, &mut table);
        align(&r, &h, |a: &u32, b: &u32| a == b)
    };
    let typed_script = {
        let r = typed_ids(&reference.tokens, &mut table);
        let h = typed_ids(&hypothesis.tokens, &mut table);
        align(&r, &h, |a: &u32, b: &u32| a == b)
    };

    let word_counts = count_type_edits(&word_script, &ref_words, &hyp_words);
    let typed_counts = count_type_edits(&typed_script, reference, hypothesis);
    let counts = TypeCounts {
        word: word_counts.word,
        punct: typed_counts.punct,
        paren: typed_counts.paren,
        line_break: typed_counts.line_break,
        section_break: typed_counts.section_break,
        case_errors: word_counts.case_errors,
        ref_words: word_counts.ref_words,
    };

    let word_ops = word_op_counts(&word_script, &ref_words, &hyp_words);
    Ok(PairMetrics {
        wer: word_error_rate(&counts)?,
        wer_case: case_sensitive_wer(&counts)?,
        type_prf: TypePrfSet::from_counts(&counts),
        word_op_frequencies: word_ops.frequencies(counts.ref_words),
        word_ops,
        confusion: confusion_matrix(&typed_script, reference, hypothesis),
        counts,
    })
}

/// Micro-aggregated metrics over a set of songs: counts are summed and
/// every rate recomputed from the sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub songs: u64,
    pub counts: TypeCounts,
    pub wer: f64,
    pub wer_case: f64,
    pub type_prf: TypePrfSet,
    pub word_ops: WordOpCounts,
    pub word_op_frequencies: WordOpFrequencies,
    pub confusion: ConfusionMatrix,
}

pub fn aggregate<'a, I>(metrics: I) -> Result<Aggregate, MetricError>
where
    I: IntoIterator<Item = &'a PairMetrics>,
{
    let mut songs = 0u64;
    let mut counts = TypeCounts::default();
    let mut word_ops = WordOpCounts::default();
    let mut confusion = ConfusionMatrix::default();
    for m in metrics {
        songs += 1;
        counts.add(&m.counts);
        word_ops.add(&m.word_ops);
        confusion.add(&m.confusion);
    }
    if songs == 0 {
        return Err(MetricError::NoReports);
    }
    Ok(Aggregate {
        songs,
        wer: word_error_rate(&counts)?,
        wer_case: case_sensitive_wer(&counts)?,
        type_prf: TypePrfSet::from_counts(&counts),
        word_op_frequencies: word_ops.frequencies(counts.ref_words),
        counts,
        word_ops,
        confusion,
    })
}
