//! Frame-synchronous greedy decoding and CTC collapse.

use crate::error::{Error, Result};
use crate::types::{LabelId, LabelStream, PosteriorStream};

/// How to resolve equal maxima within a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LowestId,
    HighestId,
}

/// Index of the largest score in `frame`. NaN entries never win.
#[inline]
pub fn argmax(frame: &[f32], tie_break: TieBreak) -> LabelId {
    let mut best = 0usize;
    let mut best_score = f32::NEG_INFINITY;
    let mut seen = false;
    for (i, &s) in frame.iter().enumerate() {
        let better = match tie_break {
            TieBreak::LowestId => s > best_score,
            TieBreak::HighestId => s >= best_score,
        };
        if better || (!seen && !s.is_nan()) {
            best = i;
            best_score = s;
            seen = true;
        }
    }
    best as LabelId
}

/// Per-step argmax over the stream. Works the same on probabilities and
/// on pre-softmax scores since softmax is monotone.
pub fn greedy_decode(stream: &PosteriorStream, tie_break: TieBreak) -> Result<LabelStream> {
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    let labels = stream.frames().map(|f| argmax(f, tie_break)).collect();
    LabelStream::new(labels, stream.blank_id(), stream.num_labels())
}

/// Merges consecutive repeats, then drops blanks.
pub fn ctc_collapse(labels: &[LabelId], blank_id: LabelId) -> Vec<LabelId> {
    let mut out = Vec::new();
    let mut prev = None;
    for &l in labels {
        if prev != Some(l) && l != blank_id {
            out.push(l);
        }
        prev = Some(l);
    }
    out
}

/// `ctc_collapse(labels).len()` without allocating.
pub fn collapsed_len(labels: &[LabelId], blank_id: LabelId) -> usize {
    let mut n = 0;
    let mut prev = None;
    for &l in labels {
        if prev != Some(l) && l != blank_id {
            n += 1;
        }
        prev = Some(l);
    }
    n
}
