//! Shared generators and oracles for the integration test suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

/// Small multilingual vocabulary exercising apostrophes, hyphens,
/// accents, and digits.
pub const WORDS: &[&str] = &[
    "love", "night", "singin'", "don't", "heart", "road", "la-la-la", "42", "gonna", "fire",
    "rain", "city", "étoile", "cœur", "straße", "señor", "corazón", "time", "home", "never",
    "always", "blue", "'em", "ain't", "shine", "gold", "river", "moon", "dream", "alone",
];

pub const MARKS: &[&str] = &[",", "!", "?", ".", ";", ":"];

pub fn pick<'a>(rng: &mut TestRng, items: &[&'a str]) -> &'a str {
    items[rng.random_range(0..items.len())]
}

fn lyric_line(rng: &mut TestRng) -> String {
    let mut parts: Vec<String> = (0..rng.random_range(1..=7))
        .map(|_| {
            let w = pick(rng, WORDS);
            if rng.random_bool(0.3) {
                let mut c = w.chars();
                match c.next() {
                    Some(first) => first.to_uppercase().collect::<String>() + c.as_str(),
                    None => w.to_string(),
                }
            } else {
                w.to_string()
            }
        })
        .collect();
    if rng.random_bool(0.25) {
        let i = rng.random_range(0..=parts.len());
        parts.insert(i, pick(rng, MARKS).to_string());
    }
    if rng.random_bool(0.2) {
        parts.push(format!("({})", pick(rng, WORDS)));
    }
    parts.join(" ")
}

/// Lyric-shaped text: stanzas of short lines separated by blank lines.
/// Always contains at least one word.
pub fn lyric_text(rng: &mut TestRng) -> String {
    let stanzas = rng.random_range(1..=4);
    let mut out = Vec::new();
    for s in 0..stanzas {
        if s > 0 {
            out.push(String::new());
        }
        for _ in 0..rng.random_range(1..=5) {
            out.push(lyric_line(rng));
        }
    }
    out.join("\n")
}

/// A plausible transcription of `reference`: words dropped, replaced,
/// perturbed, case-flipped; punctuation dropped or inserted; lines
/// merged; blank-line structure disturbed.
pub fn mutate_lyrics(rng: &mut TestRng, reference: &str) -> String {
    let mut lines = Vec::new();
    for line in reference.lines() {
        if line.is_empty() {
            if !rng.random_bool(0.3) {
                lines.push(String::new());
            }
            continue;
        }
        if rng.random_bool(0.08) {
            continue;
        }
        let mut words = Vec::new();
        for token in line.split_whitespace() {
            match rng.random_range(0..10) {
                0 => {}
                1 => words.push(pick(rng, WORDS).to_string()),
                2 => words.push(token.to_lowercase()),
                3 => {
                    let mut t = token.to_string();
                    t.push('s');
                    words.push(t);
                }
                4 => {
                    words.push(token.to_string());
                    words.push(pick(rng, WORDS).to_string());
                }
                _ => words.push(token.to_string()),
            }
        }
        let mut line = words.join(" ");
        line.retain(|c| c != ',' || rng.random_bool(0.5));
        if rng.random_bool(0.1) {
            match lines.last_mut() {
                Some(prev) if !prev.is_empty() => {
                    prev.push(' ');
                    prev.push_str(&line);
                    continue;
                }
                _ => {}
            }
        }
        lines.push(line);
    }
    lines.join("\n")
}

/// Poem-shaped text with sentence punctuation at line ends, list
/// separators, and dashes.
pub fn poem_text(rng: &mut TestRng) -> String {
    let mut out = Vec::new();
    for s in 0..rng.random_range(1..=3) {
        if s > 0 {
            out.push(String::new());
        }
        for _ in 0..rng.random_range(2..=6) {
            let mut line = Vec::new();
            for _ in 0..rng.random_range(1..=6) {
                line.push(pick(rng, WORDS).to_string());
                if rng.random_bool(0.2) {
                    line.push(pick(rng, &[",", ";", ":", "-", "..."]).to_string());
                }
            }
            let mut line = line.join(" ");
            if rng.random_bool(0.7) {
                line.push_str(pick(rng, &[".", ",", ";", ":", " -", "!", "?"]));
            }
            out.push(line);
        }
    }
    out.join("\n")
}

/// A song of roughly `approx_tokens` tokens (words, marks, and break
/// tokens all count).
pub fn synthetic_song(rng: &mut TestRng, approx_tokens: usize) -> String {
    let mut out = Vec::new();
    let mut tokens = 0;
    let mut lines_in_stanza = 0;
    while tokens < approx_tokens {
        if lines_in_stanza >= 6 && rng.random_bool(0.4) {
            out.push(String::new());
            lines_in_stanza = 0;
            tokens += 1;
        }
        let line = lyric_line(rng);
        tokens += line.split_whitespace().count() + 1;
        out.push(line);
        lines_in_stanza += 1;
    }
    out.join("\n")
}

/// Plain recursive edit distance, straight from the definition. No
/// memoization: exponential, only usable for short sequences.
pub fn oracle_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let diagonal = oracle_distance(&a[1..], &b[1..]) + usize::from(a[0] != b[0]);
    let deletion = oracle_distance(&a[1..], b) + 1;
    let insertion = oracle_distance(a, &b[1..]) + 1;
    diagonal.min(deletion).min(insertion)
}
