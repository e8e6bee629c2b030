//! Randomized invariant checks across the whole library.

mod common;

use common::{lyric_text, mutate_lyrics, poem_text, rng, WORDS};
use lyreval::align::{align, char_distance, EditKind};
use lyreval::metrics::{aggregate, classify_near_hit, evaluate_pair, ConfusionLabel, PairMetrics};
use lyreval::postprocess::{
    capitalize_lines, lint_lyrics, segments_to_lines, strip_line_end_punctuation, swd_normalize,
    LintRule, Segment,
};
use lyreval::tokenizer::{normalize_punctuation, tokenize, TokenType};
use proptest::prelude::*;

fn line_strategy() -> impl Strategy<Value = String> {
    (
        prop::collection::vec(prop::sample::select(WORDS), 1..6),
        prop::option::of(prop::sample::select(&[",", "!", "?", ".", "(", ")"])),
    )
        .prop_map(|(words, mark)| {
            let mut line = words.join(" ");
            if let Some(m) = mark {
                line.push(' ');
                line.push_str(m);
            }
            line
        })
}

fn text_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![3 => line_strategy(), 1 => Just(String::new())],
        1..16,
    )
    .prop_map(|lines| lines.join("\n"))
}

fn evaluated_pair(seed: u64) -> (String, String, PairMetrics) {
    let mut r = rng(seed);
    let reference = lyric_text(&mut r);
    let hypothesis = mutate_lyrics(&mut r, &reference);
    let metrics = evaluate_pair(&tokenize(&reference), &tokenize(&hypothesis))
        .expect("generated references always contain a word");
    (reference, hypothesis, metrics)
}

proptest! {
    #[test]
    fn normalization_is_idempotent(s in ".*") {
        let once = normalize_punctuation(&s);
        prop_assert_eq!(normalize_punctuation(&once), once);
    }

    #[test]
    fn tokenization_is_deterministic(s in text_strategy()) {
        prop_assert_eq!(tokenize(&s), tokenize(&s));
    }

    #[test]
    fn dense_text_has_k_minus_one_line_breaks(
        lines in prop::collection::vec(line_strategy(), 1..20)
    ) {
        let seq = tokenize(&lines.join("\n"));
        let line_breaks = seq.tokens.iter()
            .filter(|t| t.kind == TokenType::LineBreak).count();
        let section_breaks = seq.tokens.iter()
            .filter(|t| t.kind == TokenType::SectionBreak).count();
        prop_assert_eq!(line_breaks, lines.len() - 1);
        prop_assert_eq!(section_breaks, 0);
    }

    #[test]
    fn break_tokens_are_well_placed(s in text_strategy()) {
        let seq = tokenize(&s);
        let is_break = |k: TokenType| {
            k == TokenType::LineBreak || k == TokenType::SectionBreak
        };
        for (i, t) in seq.tokens.iter().enumerate() {
            if t.kind == TokenType::SectionBreak {
                prop_assert!(i > 0);
                prop_assert_eq!(seq.tokens[i - 1].kind, TokenType::LineBreak);
            }
        }
        if let Some(first) = seq.tokens.first() {
            prop_assert!(!is_break(first.kind));
        }
        if let Some(last) = seq.tokens.last() {
            prop_assert!(!is_break(last.kind));
        }
    }

    #[test]
    fn tokenization_drops_no_letters(s in text_strategy()) {
        let normalized = normalize_punctuation(&s);
        let seq = tokenize(&normalized);
        for (index, line) in normalized.lines().enumerate() {
            let in_line: usize = line.chars().filter(|c| c.is_alphabetic()).count();
            let in_tokens: usize = seq.tokens.iter()
                .filter(|t| t.line_index == index && !matches!(
                    t.kind, TokenType::LineBreak | TokenType::SectionBreak))
                .map(|t| t.original.chars().filter(|c| c.is_alphabetic()).count())
                .sum();
            prop_assert_eq!(in_tokens, in_line);
        }
    }

    #[test]
    fn token_shapes_hold(s in text_strategy()) {
        for t in &tokenize(&s).tokens {
            match t.kind {
                TokenType::Word => {
                    prop_assert!(t.original.chars().any(|c| c.is_alphanumeric()));
                    prop_assert_eq!(&t.folded, &t.original.to_lowercase());
                }
                TokenType::Punct => {
                    prop_assert_eq!(t.original.chars().count(), 1);
                    prop_assert!(t.original != "(" && t.original != ")");
                }
                TokenType::Paren => {
                    prop_assert!(t.original == "(" || t.original == ")");
                }
                TokenType::LineBreak => prop_assert_eq!(t.original.as_str(), "\n"),
                TokenType::SectionBreak => prop_assert_eq!(t.original.as_str(), "\n\n"),
            }
        }
    }

    #[test]
    fn alignment_cost_is_symmetric(
        a in prop::collection::vec(0u8..4, 0..32),
        b in prop::collection::vec(0u8..4, 0..32),
    ) {
        let ab = align(&a, &b, |x, y| x == y).cost;
        let ba = align(&b, &a, |x, y| x == y).cost;
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn alignment_cost_obeys_triangle_inequality(
        a in prop::collection::vec(0u8..4, 0..24),
        b in prop::collection::vec(0u8..4, 0..24),
        c in prop::collection::vec(0u8..4, 0..24),
    ) {
        let ab = align(&a, &b, |x, y| x == y).cost;
        let bc = align(&b, &c, |x, y| x == y).cost;
        let ac = align(&a, &c, |x, y| x == y).cost;
        prop_assert!(ac <= ab + bc);
    }

    #[test]
    fn alignment_scripts_are_well_formed(
        a in prop::collection::vec(0u8..4, 0..32),
        b in prop::collection::vec(0u8..4, 0..32),
    ) {
        let script = align(&a, &b, |x, y| x == y);
        let mut ref_next = 0usize;
        let mut hyp_next = 0usize;
        let mut non_hits = 0usize;
        for op in &script.ops {
            match op.kind {
                EditKind::Hit | EditKind::Substitution => {
                    prop_assert_eq!(op.ref_index, Some(ref_next));
                    prop_assert_eq!(op.hyp_index, Some(hyp_next));
                    let equal = a[ref_next] == b[hyp_next];
                    prop_assert_eq!(op.kind == EditKind::Hit, equal);
                    ref_next += 1;
                    hyp_next += 1;
                }
                EditKind::Deletion => {
                    prop_assert_eq!(op.ref_index, Some(ref_next));
                    prop_assert_eq!(op.hyp_index, None);
                    ref_next += 1;
                }
                EditKind::Insertion => {
                    prop_assert_eq!(op.ref_index, None);
                    prop_assert_eq!(op.hyp_index, Some(hyp_next));
                    hyp_next += 1;
                }
            }
            if op.kind != EditKind::Hit {
                non_hits += 1;
            }
        }
        prop_assert_eq!(ref_next, a.len());
        prop_assert_eq!(hyp_next, b.len());
        prop_assert_eq!(script.cost, non_hits);
    }

    #[test]
    fn char_distance_is_zero_iff_equal(a in ".{0,12}", b in ".{0,12}") {
        prop_assert_eq!(char_distance(&a, &b) == 0, a == b);
    }

    #[test]
    fn near_hit_is_symmetric(
        a in prop::sample::select(WORDS),
        b in prop::sample::select(WORDS),
    ) {
        prop_assert_eq!(classify_near_hit(a, b), classify_near_hit(b, a));
    }

    #[test]
    fn counting_conserves_token_totals(seed in any::<u64>()) {
        let (reference, hypothesis, m) = evaluated_pair(seed);
        let ref_seq = tokenize(&reference);
        let hyp_seq = tokenize(&hypothesis);
        for kind in TokenType::ALL {
            let row = m.counts.row(kind);
            let in_ref = ref_seq.tokens.iter().filter(|t| t.kind == kind).count() as u64;
            let in_hyp = hyp_seq.tokens.iter().filter(|t| t.kind == kind).count() as u64;
            prop_assert_eq!(row.ref_total(), in_ref, "ref row for {:?}", kind);
            prop_assert_eq!(row.hyp_total(), in_hyp, "hyp row for {:?}", kind);
        }
        prop_assert!(m.counts.case_errors <= m.counts.word.hits);
    }

    #[test]
    fn word_operation_identities_hold(seed in any::<u64>()) {
        let (_, _, m) = evaluated_pair(seed);
        let ops = &m.word_ops;
        let n = m.counts.ref_words;
        prop_assert_eq!(ops.hit + ops.case + ops.near + ops.sub + ops.del, n);
        prop_assert_eq!(
            ops.near + ops.sub + ops.ins + ops.del,
            m.counts.word.substitutions + m.counts.word.deletions
                + m.counts.word.insertions
        );
        prop_assert_eq!(ops.case, m.counts.case_errors);
        prop_assert_eq!(
            ops.hit + ops.case + ops.near + ops.sub + ops.ins,
            m.counts.word.hyp_total()
        );

        let f = &m.word_op_frequencies;
        let total = f.hit + f.case + f.near + f.sub + f.del;
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!((f.near + f.sub + f.ins + f.del - m.wer).abs() <= 1e-12);
        prop_assert!((m.wer_case - m.wer - f.case).abs() <= 1e-12);
    }

    #[test]
    fn confusion_marginals_match_type_totals(seed in any::<u64>()) {
        let (reference, hypothesis, m) = evaluated_pair(seed);
        let ref_seq = tokenize(&reference);
        let hyp_seq = tokenize(&hypothesis);
        prop_assert_eq!(
            m.confusion.get(ConfusionLabel::Absent, ConfusionLabel::Absent),
            0
        );
        for kind in [
            TokenType::Punct,
            TokenType::Paren,
            TokenType::LineBreak,
            TokenType::SectionBreak,
        ] {
            let label = ConfusionLabel::from_kind(kind).unwrap();
            let in_ref = ref_seq.tokens.iter().filter(|t| t.kind == kind).count() as u64;
            let in_hyp = hyp_seq.tokens.iter().filter(|t| t.kind == kind).count() as u64;
            prop_assert_eq!(m.confusion.row_total(label), in_ref);
            prop_assert_eq!(m.confusion.column_total(label), in_hyp);
        }
    }

    #[test]
    fn rates_are_fractions_and_ordered(seed in any::<u64>()) {
        let (_, _, m) = evaluated_pair(seed);
        prop_assert!(m.wer_case >= m.wer);
        prop_assert!(m.wer >= 0.0);
        for kind in TokenType::ALL {
            let prf = m.type_prf.get(kind);
            for v in [prf.precision, prf.recall, prf.f1].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if let (Some(p), Some(r), Some(f)) = (prf.precision, prf.recall, prf.f1) {
                prop_assert!(f <= p.max(r) + 1e-12);
                prop_assert!(f >= p.min(r) - 1e-12);
            }
        }
    }

    #[test]
    fn self_evaluation_is_perfect(seed in any::<u64>()) {
        let text = lyric_text(&mut rng(seed));
        let seq = tokenize(&text);
        let m = evaluate_pair(&seq, &seq).unwrap();
        prop_assert_eq!(m.wer, 0.0);
        prop_assert_eq!(m.wer_case, 0.0);
        for kind in TokenType::ALL {
            if let Some(f) = m.type_prf.get(kind).f1 {
                prop_assert_eq!(f, 1.0);
            }
        }
    }

    #[test]
    fn aggregation_is_order_independent(seed in any::<u64>()) {
        let reports: Vec<PairMetrics> = (0..4)
            .map(|i| evaluated_pair(seed.wrapping_add(i)).2)
            .collect();
        let forward = aggregate(reports.iter()).unwrap();
        let backward = aggregate(reports.iter().rev()).unwrap();
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn strip_and_capitalize_are_idempotent(s in ".*") {
        let normalized = normalize_punctuation(&s);
        let stripped = strip_line_end_punctuation(&normalized);
        prop_assert_eq!(strip_line_end_punctuation(&stripped), stripped);
        let capitalized = capitalize_lines(&normalized);
        prop_assert_eq!(capitalize_lines(&capitalized), capitalized);
    }

    #[test]
    fn poem_normalization_output_lints_clean(seed in any::<u64>()) {
        let poem = poem_text(&mut rng(seed));
        let out = swd_normalize(&normalize_punctuation(&poem));
        for finding in lint_lyrics(&out) {
            prop_assert!(
                finding.rule != LintRule::LowercaseLineStart
                    && finding.rule != LintRule::TrailingCommaOrPeriod,
                "swd output tripped {:?} on {:?}", finding.rule, out
            );
        }
    }

    #[test]
    fn capitalization_never_changes_wer(s in text_strategy()) {
        let normalized = normalize_punctuation(&s);
        let reference = tokenize(&normalized);
        let hypothesis = tokenize(&capitalize_lines(&normalized));
        if let Ok(m) = evaluate_pair(&reference, &hypothesis) {
            prop_assert_eq!(m.wer, 0.0);
        }
    }

    #[test]
    fn segment_lines_count_non_empty_segments(
        texts in prop::collection::vec("[ \\t]*[a-zA-Z ]{0,10}[ \\t]*", 0..8)
    ) {
        let segments: Vec<Segment> = texts.iter().map(|t| Segment {
            start: None,
            end: None,
            text: t.clone(),
        }).collect();
        let joined = segments_to_lines(&segments);
        let expected = texts.iter().filter(|t| !t.trim().is_empty()).count();
        let lines = if joined.is_empty() { 0 } else { joined.lines().count() };
        prop_assert_eq!(lines, expected);
    }
}
