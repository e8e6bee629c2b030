//! Evaluation toolkit for automatic lyrics transcription.
//!
//! Song lyrics carry structure that plain word error rate ignores: line and
//! section breaks, punctuation, parenthesized background vocals, and
//! case conventions. This crate scores a transcript against a reference
//! while keeping all of that visible:
//!
//! - [`tokenizer`] normalizes typographic punctuation and splits text into
//!   word, punctuation, parenthesis, line-break, and section-break tokens;
//! - [`align`] computes minimum-edit-distance alignments (full matrix for
//!   typical song lengths, divide-and-conquer beyond a cell budget);
//! - [`metrics`] turns alignments into WER, case-sensitive WER, per-type
//!   precision/recall/F1, word-operation frequencies, and a confusion
//!   matrix over the non-word token types;
//! - [`postprocess`] holds the text transforms applied before scoring
//!   (segment joining, line-end punctuation stripping, capitalization,
//!   the poem-style normalization) plus a formatting linter;
//! - [`corpus`] and [`report`] pair reference/hypothesis directories,
//!   evaluate them in parallel, and emit JSON/CSV reports and plot data.

pub mod align;
pub mod corpus;
pub mod metrics;
pub mod postprocess;
pub mod report;
pub mod tokenizer;
