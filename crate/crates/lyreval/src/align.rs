//! Minimum-edit-distance alignment with a deterministic traceback.
//!
//! [`align`] works over any slice and a caller-supplied equality
//! predicate, so the same routine serves word-only and fully typed token
//! sequences. All operations cost one unit and substitution is allowed
//! between any pair of items; the caller's predicate decides what counts
//! as a hit.
//!
//! Inputs whose cost matrix fits [`DEFAULT_CELL_BUDGET`] use a full
//! matrix with an explicit traceback; larger inputs fall back to a
//! divide-and-conquer (Hirschberg-style) pass that computes the same
//! minimal cost in linear memory.

/// Cost-matrix size (cells) up to which the full-matrix path is used.
pub const DEFAULT_CELL_BUDGET: usize = 25_000_000;

/// Matrix size at which divide-and-conquer stops recursing and solves
/// the subproblem directly.
const BASE_CELLS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EditKind {
    Hit,
    Substitution,
    Insertion,
    Deletion,
}

/// One step of an edit script. `ref_index` is absent for insertions,
/// `hyp_index` for deletions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EditOp {
    pub kind: EditKind,
    pub ref_index: Option<usize>,
    pub hyp_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
    pub cost: usize,
}

impl EditScript {
    /// Number of ops of the given kind.
    pub fn count(&self, kind: EditKind) -> usize {
        self.ops.iter().filter(|op| op.kind == kind).count()
    }
}

/// Aligns `hypothesis` to `reference`, minimizing unit-cost edits.
///
/// On cost ties the traceback prefers diagonal steps (hit or
/// substitution), then deletion, then insertion, scanning from the end
/// of the matrix; the result is fully deterministic for given inputs.
pub fn align<T, F>(reference: &[T], hypothesis: &[T], equal: F) -> EditScript
where
    F: Fn(&T, &T) -> bool,
{
    align_with_budget(reference, hypothesis, equal, DEFAULT_CELL_BUDGET)
}

/// [`align`] with an explicit cell budget for the full-matrix path.
pub fn align_with_budget<T, F>(
    reference: &[T],
    hypothesis: &[T],
    equal: F,
    cell_budget: usize,
) -> EditScript
where
    F: Fn(&T, &T) -> bool,
{
    let cells = (reference.len() + 1).saturating_mul(hypothesis.len() + 1);
    if reference.len() <= 1 || hypothesis.len() <= 1 || cells <= cell_budget {
        // One side of length <= 1 keeps the matrix at two rows or two
        // columns, which is already linear memory.
        return full_matrix_align(reference, hypothesis, &equal);
    }
    let mut ops = Vec::with_capacity(reference.len().max(hypothesis.len()));
    divide_and_conquer(reference, hypothesis, 0, 0, &equal, &mut ops);
    let cost = ops.iter().filter(|op| op.kind != EditKind::Hit).count();
    EditScript { ops, cost }
}

fn full_matrix_align<T, F>(a: &[T], b: &[T], equal: &F) -> EditScript
where
    F: Fn(&T, &T) -> bool,
{
    let (m, n) = (a.len(), b.len());
    let w = n + 1;
    let mut d = vec![0u32; (m + 1) * w];
    for (j, cell) in d.iter_mut().enumerate().take(w) {
        *cell = j as u32;
    }
    for i in 1..=m {
        d[i * w] = i as u32;
        for j in 1..=n {
            let sub = d[(i - 1) * w + j - 1] + u32::from(!equal(&a[i - 1], &b[j - 1]));
            let del = d[(i - 1) * w + j] + 1;
            let ins = d[i * w + j - 1] + 1;
            d[i * w + j] = sub.min(del).min(ins);
        }
    }

    let mut ops = Vec::with_capacity(m.max(n));
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let cur = d[i * w + j];
        if i > 0 && j > 0 {
            let hit = equal(&a[i - 1], &b[j - 1]);
            if d[(i - 1) * w + j - 1] + u32::from(!hit) == cur {
                ops.push(EditOp {
                    kind: if hit {
                        EditKind::Hit
                    } else {
                        EditKind::Substitution
                    },
                    ref_index: Some(i - 1),
                    hyp_index: Some(j - 1),
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[(i - 1) * w + j] + 1 == cur {
            ops.push(EditOp {
                kind: EditKind::Deletion,
                ref_index: Some(i - 1),
                hyp_index: None,
            });
            i -= 1;
            continue;
        }
        ops.push(EditOp {
            kind: EditKind::Insertion,
            ref_index: None,
            hyp_index: Some(j - 1),
        });
        j -= 1;
    }
    ops.reverse();
    EditScript {
        ops,
        cost: d[m * w + n] as usize,
    }
}

/// Edit-distance row: `out[j]` = distance between all of `a` and `b[..j]`.
fn cost_row<T, F>(a: &[T], b: &[T], equal: &F, reversed: bool) -> Vec<u32>
where
    F: Fn(&T, &T) -> bool,
{
    let n = b.len();
    let mut prev: Vec<u32> = (0..=n as u32).collect();
    let mut cur = vec![0u32; n + 1];
    for i in 1..=a.len() {
        cur[0] = i as u32;
        let ai = if reversed { &a[a.len() - i] } else { &a[i - 1] };
        for j in 1..=n {
            let bj = if reversed { &b[n - j] } else { &b[j - 1] };
            let sub = prev[j - 1] + u32::from(!equal(ai, bj));
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev
}

fn divide_and_conquer<T, F>(
    a: &[T],
    b: &[T],
    a_off: usize,
    b_off: usize,
    equal: &F,
    ops: &mut Vec<EditOp>,
) where
    F: Fn(&T, &T) -> bool,
{
    let cells = (a.len() + 1) * (b.len() + 1);
    if a.len() <= 1 || b.len() <= 1 || cells <= BASE_CELLS {
        let sub = full_matrix_align(a, b, equal);
        ops.extend(sub.ops.into_iter().map(|op| EditOp {
            kind: op.kind,
            ref_index: op.ref_index.map(|i| i + a_off),
            hyp_index: op.hyp_index.map(|j| j + b_off),
        }));
        return;
    }

    let mid = a.len() / 2;
    let fwd = cost_row(&a[..mid], b, equal, false);
    let bwd = cost_row(&a[mid..], b, equal, true);
    // bwd is over reversed slices: bwd[n - j] = dist(a[mid..], b[j..]).
    let n = b.len();
    let split = (0..=n)
        .min_by_key(|&j| fwd[j] + bwd[n - j])
        .expect("non-empty range");

    divide_and_conquer(&a[..mid], &b[..split], a_off, b_off, equal, ops);
    divide_and_conquer(
        &a[mid..],
        &b[split..],
        a_off + mid,
        b_off + split,
        equal,
        ops,
    );
}

/// Unit-cost Levenshtein distance over codepoints.
pub fn char_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
