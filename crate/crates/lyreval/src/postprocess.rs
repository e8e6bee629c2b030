//! Text transforms applied around scoring, plus a formatting linter.
//!
//! Transcription systems emit timed segments and often terminal
//! punctuation that lyric conventions leave out. [`segments_to_lines`]
//! turns a segment list into one line per segment;
//! [`strip_line_end_punctuation`] removes unwanted trailing marks;
//! [`capitalize_lines`] uppercases each line's first letter. References
//! formatted as poems (punctuated sentences across lines) are adapted
//! with [`swd_normalize`], which rewrites `. ; : -` to commas, drops
//! line-end commas, and recapitalizes.
//!
//! [`lint_lyrics`] checks the statically verifiable formatting rules:
//! R2 (no double blank lines), R4 (lines start uppercase), R5 (no
//! trailing comma/period), R9 (balanced parentheses). The remaining
//! rules of the convention need audio or semantic context and are not
//! checked here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenizer::is_combining_mark;

/// One timed text segment from a transcription system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub end: Option<f64>,
    pub text: String,
}

#[derive(Debug, Error)]
pub enum SegmentsError {
    #[error("malformed segment list: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected a JSON array of segments or an object with a \"segments\" key")]
    Shape,
}

/// Parses a segment list from JSON: either a bare array or an object
/// carrying a `segments` array (the usual transcription dump shape).
pub fn segments_from_json(text: &str) -> Result<Vec<Segment>, SegmentsError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let list = match value {
        serde_json::Value::Array(_) => value,
        serde_json::Value::Object(ref map) => {
            map.get("segments").cloned().ok_or(SegmentsError::Shape)?
        }
        _ => return Err(SegmentsError::Shape),
    };
    Ok(serde_json::from_value(list)?)
}

/// One line per segment: text trimmed, empty segments dropped.
pub fn segments_to_lines(segments: &[Segment]) -> String {
    segments
        .iter()
        .map(|s| s.text.trim())
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Characters that may legitimately end a lyric line.
fn is_line_end_keeper(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c) || matches!(c, '!' | '?' | '\'' | '"' | '»')
}

/// Does the `)` at `chars[pos]` close a `(` earlier on the same line?
fn closes_balanced_group(chars: &[char], pos: usize) -> bool {
    let mut depth = 0u32;
    for &c in &chars[..pos] {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    depth > 0
}

/// Removes unwanted punctuation from line ends: everything that is not
/// a letter, digit, or one of `! ? ' " »` is stripped, repeatedly. A
/// closing parenthesis survives when it closes a balanced group on its
/// line (background vocals), unless `keep_balanced_parens` is false.
pub fn strip_line_end_punctuation_with(text: &str, keep_balanced_parens: bool) -> String {
    text.split('\n')
        .map(|line| strip_line(line, keep_balanced_parens))
        .collect::<Vec<_>>()
        .join("\n")
}

/// [`strip_line_end_punctuation_with`] keeping balanced parentheses.
pub fn strip_line_end_punctuation(text: &str) -> String {
    strip_line_end_punctuation_with(text, true)
}

fn strip_line(line: &str, keep_balanced_parens: bool) -> String {
    let mut chars: Vec<char> = line.chars().collect();
    while let Some(&c) = chars.last() {
        if c == ' ' || c == '\t' {
            chars.pop();
            continue;
        }
        if is_line_end_keeper(c)
            || (c == ')' && keep_balanced_parens && closes_balanced_group(&chars, chars.len() - 1))
        {
            break;
        }
        chars.pop();
    }
    chars.into_iter().collect()
}

/// The single-codepoint uppercase form of `c`, when one exists and
/// differs from `c`. Multi-codepoint expansions (ß → SS) are rejected
/// so capitalization never changes word identity.
fn simple_uppercase(c: char) -> Option<char> {
    let mut upper = c.to_uppercase();
    let first = upper.next()?;
    if upper.next().is_some() || first == c {
        None
    } else {
        Some(first)
    }
}

/// Uppercases the first letter of every line, skipping anything before
/// it (opening parens, guillemets, quotes, digits).
pub fn capitalize_lines(text: &str) -> String {
    text.split('\n')
        .map(capitalize_line)
        .collect::<Vec<_>>()
        .join("\n")
}

fn capitalize_line(line: &str) -> String {
    let Some((i, c)) = line.char_indices().find(|&(_, c)| c.is_alphabetic()) else {
        return line.to_string();
    };
    let Some(upper) = simple_uppercase(c) else {
        return line.to_string();
    };
    let mut out = String::with_capacity(line.len());
    out.push_str(&line[..i]);
    out.push(upper);
    out.push_str(&line[i + c.len_utf8()..]);
    out
}

/// Adapts poem-formatted lyrics to lyric conventions: the marks
/// `. ; : -` become commas (hyphens that are part of a word stay),
/// comma runs collapse, line-end commas go, and lines get
/// recapitalized.
pub fn swd_normalize(text: &str) -> String {
    let replaced = text
        .split('\n')
        .map(swd_line)
        .collect::<Vec<_>>()
        .join("\n");
    capitalize_lines(&replaced)
}

fn swd_line(line: &str) -> String {
    let chars: Vec<char> = line.chars().collect();
    let mut replaced = Vec::with_capacity(chars.len());
    for (i, &c) in chars.iter().enumerate() {
        let to_comma = match c {
            '.' | ';' | ':' => true,
            '-' => {
                let left = i > 0 && chars[i - 1].is_alphabetic();
                let right = chars.get(i + 1).is_some_and(|&n| n.is_alphabetic());
                !(left || right)
            }
            _ => false,
        };
        replaced.push(if to_comma { ',' } else { c });
    }

    // Collapse comma runs, including commas separated only by spaces.
    let mut out: Vec<char> = Vec::with_capacity(replaced.len());
    let mut i = 0;
    while i < replaced.len() {
        out.push(replaced[i]);
        if replaced[i] == ',' {
            let mut j = i + 1;
            loop {
                let mut k = j;
                while k < replaced.len() && (replaced[k] == ' ' || replaced[k] == '\t') {
                    k += 1;
                }
                if k < replaced.len() && replaced[k] == ',' {
                    j = k + 1;
                } else {
                    break;
                }
            }
            i = j;
        } else {
            i += 1;
        }
    }

    // Drop line-end commas and the whitespace around them.
    loop {
        match out.last() {
            Some(&c) if c == ' ' || c == '\t' || c == ',' => {
                out.pop();
            }
            _ => break,
        }
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LintRule {
    /// Two or more consecutive blank lines.
    #[serde(rename = "R2")]
    ConsecutiveBlankLines,
    /// A line starts with a lowercase letter.
    #[serde(rename = "R4")]
    LowercaseLineStart,
    /// A line ends with a comma or period.
    #[serde(rename = "R5")]
    TrailingCommaOrPeriod,
    /// Parentheses are unbalanced in the document.
    #[serde(rename = "R9")]
    UnbalancedParens,
}

impl LintRule {
    pub fn code(self) -> &'static str {
        match self {
            LintRule::ConsecutiveBlankLines => "R2",
            LintRule::LowercaseLineStart => "R4",
            LintRule::TrailingCommaOrPeriod => "R5",
            LintRule::UnbalancedParens => "R9",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintFinding {
    pub rule: LintRule,
    /// One-based line number in the normalized text.
    pub line: usize,
    pub message: String,
    pub severity: Severity,
}

impl std::fmt::Display for LintFinding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{} at line {}] {}",
            self.rule.code(),
            self.line,
            self.message
        )
    }
}

fn finding(rule: LintRule, line: usize, message: impl Into<String>) -> LintFinding {
    LintFinding {
        rule,
        line,
        message: message.into(),
        severity: Severity::Warning,
    }
}

/// Checks the statically verifiable formatting rules. Input is
/// normalized first (idempotent); line numbers are one-based into the
/// normalized text.
pub fn lint_lyrics(text: &str) -> Vec<LintFinding> {
    let normalized = crate::tokenizer::normalize_punctuation(text);
    let lines: Vec<&str> = normalized.split('\n').collect();
    let mut findings = Vec::new();

    // R2: runs of two or more blank lines (one finding per run).
    let mut run_start: Option<usize> = None;
    let mut run_len = 0usize;
    for (i, line) in lines.iter().chain(std::iter::once(&"end")).enumerate() {
        if i < lines.len() && line.is_empty() {
            run_start.get_or_insert(i);
            run_len += 1;
        } else {
            if let Some(start) = run_start {
                if run_len >= 2 {
                    findings.push(finding(
                        LintRule::ConsecutiveBlankLines,
                        start + 1,
                        format!("{run_len} consecutive blank lines"),
                    ));
                }
            }
            run_start = None;
            run_len = 0;
        }
    }

    for (i, line) in lines.iter().enumerate() {
        if let Some(c) = line.chars().find(|c| c.is_alphabetic()) {
            if c.is_lowercase() && simple_uppercase(c).is_some() {
                findings.push(finding(
                    LintRule::LowercaseLineStart,
                    i + 1,
                    format!("line starts with lowercase {c:?}"),
                ));
            }
        }
        if line.ends_with(',') || line.ends_with('.') {
            findings.push(finding(
                LintRule::TrailingCommaOrPeriod,
                i + 1,
                format!("line ends with {:?}", line.chars().last().unwrap()),
            ));
        }
    }

    // R9: one finding at the first unmatched parenthesis, if any.
    let mut open_lines: Vec<usize> = Vec::new();
    let mut unmatched: Option<(usize, char)> = None;
    'scan: for (i, line) in lines.iter().enumerate() {
        for c in line.chars() {
            match c {
                '(' => open_lines.push(i + 1),
                ')' if open_lines.pop().is_none() => {
                    unmatched = Some((i + 1, ')'));
                    break 'scan;
                }
                _ => {}
            }
        }
    }
    if unmatched.is_none() {
        if let Some(&line) = open_lines.first() {
            unmatched = Some((line, '('));
        }
    }
    if let Some((line, c)) = unmatched {
        findings.push(finding(
            LintRule::UnbalancedParens,
            line,
            format!("unbalanced {c:?}"),
        ));
    }

    findings.sort_by_key(|f| (f.line, f.rule));
    findings
}
