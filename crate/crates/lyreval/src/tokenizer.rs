//! Punctuation normalization and lyric tokenization.
//!
//! Text goes through [`normalize_punctuation`] first: line endings become
//! `\n`, typographic quotes/dashes/ellipses become their ASCII forms, and
//! whitespace runs collapse. [`tokenize`] then splits the normalized text
//! into five token kinds: words, punctuation marks, parentheses, line
//! breaks, and section breaks. Words keep apostrophes and hyphens that
//! touch a letter (`don't`, `'em`, `gon'`, `la-la-la`), so elisions stay
//! one token. Every other mark is one token per codepoint.
//!
//! Breaks are explicit tokens so that alignment can charge errors for
//! them: each newline ending a non-blank line yields a [`TokenType::LineBreak`],
//! and a run of one or more blank lines yields a single
//! [`TokenType::SectionBreak`] right after that line break. Leading and
//! trailing blank lines produce nothing.

use thiserror::Error;

/// Sentinel text of a line-break token. Contains a newline, so it can
/// never collide with word or punctuation text.
pub const LINE_BREAK_TEXT: &str = "\n";
/// Sentinel text of a section-break token.
pub const SECTION_BREAK_TEXT: &str = "\n\n";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenType {
    Word,
    Punct,
    Paren,
    LineBreak,
    SectionBreak,
}

impl TokenType {
    /// All five kinds, in a fixed order used by reports.
    pub const ALL: [TokenType; 5] = [
        TokenType::Word,
        TokenType::Punct,
        TokenType::Paren,
        TokenType::LineBreak,
        TokenType::SectionBreak,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Text as it appears in the normalized source (sentinel for breaks).
    pub original: String,
    /// Lowercased form; equals `original` for non-word tokens.
    pub folded: String,
    pub kind: TokenType,
    /// Zero-based line of the normalized text this token starts on.
    pub line_index: usize,
    /// Zero-based codepoint offset into the normalized text.
    pub char_offset: usize,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.kind == TokenType::Word
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<Token>,
    /// FNV-1a over the normalized text; stable across runs.
    pub source_hash: u64,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| t.is_word()).count()
    }
}

/// Input was not valid UTF-8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("invalid UTF-8 at byte offset {byte_offset}")]
pub struct EncodingError {
    pub byte_offset: usize,
}

/// Normalizes raw bytes, reporting the offset of the first invalid byte.
pub fn normalize_punctuation_bytes(bytes: &[u8]) -> Result<String, EncodingError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => Ok(normalize_punctuation(text)),
        Err(e) => Err(EncodingError {
            byte_offset: e.valid_up_to(),
        }),
    }
}

/// Canonicalizes punctuation and whitespace. Idempotent.
///
/// - `\r\n` and `\r` become `\n`;
/// - curly single quotes and the modifier apostrophe (U+2018, U+2019,
///   U+02BC) become `'`;
/// - curly double quotes (U+201C, U+201D, U+201E) become `"`;
/// - en and em dashes (U+2013, U+2014) become `-`;
/// - the ellipsis (U+2026) becomes `...`;
/// - every other whitespace codepoint (no-break and narrow spaces, tabs)
///   becomes a plain space;
/// - runs of spaces within a line collapse to one, and line edges are
///   trimmed.
///
/// Guillemets (`«`, `»`), letters, digits, and remaining punctuation pass
/// through unchanged.
pub fn normalize_punctuation(text: &str) -> String {
    let mut mapped = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\r' => {
                if chars.peek() == Some(&'\n') {
                    chars.next();
                }
                mapped.push('\n');
            }
            '\n' => mapped.push('\n'),
            '\u{2018}' | '\u{2019}' | '\u{02BC}' => mapped.push('\''),
            '\u{201C}' | '\u{201D}' | '\u{201E}' => mapped.push('"'),
            '\u{2013}' | '\u{2014}' => mapped.push('-'),
            '\u{2026}' => mapped.push_str("..."),
            c if c.is_whitespace() => mapped.push(' '),
            c => mapped.push(c),
        }
    }

    let lines: Vec<String> = mapped.split('\n').map(collapse_spaces).collect();
    lines.join("\n")
}

fn collapse_spaces(line: &str) -> String {
    let mut out = String::with_capacity(line.len());
    let mut pending_space = false;
    for c in line.chars() {
        if c == ' ' {
            pending_space = true;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
    }
    out
}

/// True for combining marks (the common combining blocks), which extend
/// the word they follow.
pub(crate) fn is_combining_mark(c: char) -> bool {
    matches!(c,
        '\u{0300}'..='\u{036F}'
        | '\u{1AB0}'..='\u{1AFF}'
        | '\u{1DC0}'..='\u{1DFF}'
        | '\u{20D0}'..='\u{20FF}'
        | '\u{FE20}'..='\u{FE2F}')
}

fn is_word_core(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c)
}

/// Is `chars[i]` part of a word token? Apostrophes and hyphens qualify
/// only when a letter sits directly on at least one side.
fn is_word_char(chars: &[char], i: usize) -> bool {
    let c = chars[i];
    if is_word_core(c) {
        return true;
    }
    if c == '\'' || c == '-' {
        let left = i > 0 && chars[i - 1].is_alphabetic();
        let right = chars.get(i + 1).is_some_and(|&n| n.is_alphabetic());
        return left || right;
    }
    false
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Splits text into typed tokens. Normalization is applied first (it is
/// idempotent, so already-normalized text is fine).
pub fn tokenize(text: &str) -> TokenSequence {
    let normalized = normalize_punctuation(text);
    let source_hash = fnv1a(normalized.as_bytes());

    let lines: Vec<&str> = normalized.split('\n').collect();
    let mut line_starts = Vec::with_capacity(lines.len());
    let mut offset = 0usize;
    for line in &lines {
        line_starts.push(offset);
        offset += line.chars().count() + 1;
    }

    let mut tokens = Vec::new();
    let Some(first) = lines.iter().position(|l| !l.is_empty()) else {
        return TokenSequence {
            tokens,
            source_hash,
        };
    };
    let last = lines.iter().rposition(|l| !l.is_empty()).unwrap();

    let mut prev_content: Option<usize> = None;
    let mut blank_run_start: Option<usize> = None;
    for i in first..=last {
        if lines[i].is_empty() {
            blank_run_start.get_or_insert(i);
            continue;
        }
        if let Some(p) = prev_content {
            tokens.push(Token {
                original: LINE_BREAK_TEXT.to_string(),
                folded: LINE_BREAK_TEXT.to_string(),
                kind: TokenType::LineBreak,
                line_index: p,
                char_offset: line_starts[p] + lines[p].chars().count(),
            });
            if let Some(b) = blank_run_start {
                tokens.push(Token {
                    original: SECTION_BREAK_TEXT.to_string(),
                    folded: SECTION_BREAK_TEXT.to_string(),
                    kind: TokenType::SectionBreak,
                    line_index: b,
                    char_offset: line_starts[b],
                });
            }
        }
        blank_run_start = None;
        tokenize_line(lines[i], i, line_starts[i], &mut tokens);
        prev_content = Some(i);
    }

    TokenSequence {
        tokens,
        source_hash,
    }
}

fn tokenize_line(line: &str, line_index: usize, line_start: usize, out: &mut Vec<Token>) {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == ' ' {
            i += 1;
            continue;
        }
        if is_word_char(&chars, i) {
            let start = i;
            while i < chars.len() && is_word_char(&chars, i) {
                i += 1;
            }
            let original: String = chars[start..i].iter().collect();
            out.push(Token {
                folded: original.to_lowercase(),
                original,
                kind: TokenType::Word,
                line_index,
                char_offset: line_start + start,
            });
        } else {
            let kind = if c == '(' || c == ')' {
                TokenType::Paren
            } else {
                TokenType::Punct
            };
            let text = c.to_string();
            out.push(Token {
                original: text.clone(),
                folded: text,
                kind,
                line_index,
                char_offset: line_start + i,
            });
            i += 1;
        }
    }
}

/// Keeps only the word tokens, preserving order and the source hash.
pub fn strip_nonwords(sequence: &TokenSequence) -> TokenSequence {
    TokenSequence {
        tokens: sequence
            .tokens
            .iter()
            .filter(|t| t.is_word())
            .cloned()
            .collect(),
        source_hash: sequence.source_hash,
    }
}
