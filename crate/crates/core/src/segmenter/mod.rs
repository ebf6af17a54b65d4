//! Blank-run segmentation of greedy CTC label streams.
//!
//! A run of at least `V` consecutive blanks between two non-blank labels
//! ends one segment and starts the next. Blank runs before the first or
//! after the last non-blank never produce segments. Each segment spans
//! `[r*k_first - r*m_s, r*k_last + r*m_e]` in feature frames, clipped to
//! the stream, and segments whose expanded spans share a frame are merged.
//!
//! [`segment_offline`] works on a complete label stream. [`OnlineSegmenter`]
//! makes the same decisions one step at a time; the segments carried by
//! its Close/Flush events, once merged, are identical to the offline
//! result.

mod offline;
mod online;

pub use offline::{segment_offline, segment_unmerged};
pub use online::{segment_online_events, segments_from_events, OnlineMode, OnlineSegmenter};

use crate::types::{Segment, SegmentEvent, SegmenterConfig};

/// Merges segments whose feature spans overlap or share an endpoint and
/// renumbers them from 1. Input must be sorted by start.
pub fn merge_overlapping(segments: Vec<Segment>) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::with_capacity(segments.len());
    for seg in segments {
        match out.last_mut() {
            Some(prev) if seg.t_start <= prev.t_end => absorb(prev, &seg),
            _ => out.push(seg),
        }
    }
    renumber(&mut out);
    out
}

fn absorb(prev: &mut Segment, next: &Segment) {
    prev.k_last_nonblank = next.k_last_nonblank;
    prev.t_end = prev.t_end.max(next.t_end);
    // Segments are separated by at least one blank, so the collapsed
    // transcripts simply concatenate.
    prev.n_tokens += next.n_tokens;
}

fn renumber(segments: &mut [Segment]) {
    for (i, s) in segments.iter_mut().enumerate() {
        s.index = i + 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthDecision {
    Keep,
    Reject,
}

/// Rejects a hypothesis whose output length is too short for its input:
/// `output_len / encoded_len <= alpha`. The boundary rejects.
pub fn min_length_filter(output_len: usize, encoded_len: usize, alpha: f64) -> LengthDecision {
    assert!(encoded_len >= 1, "encoded length must be positive");
    if output_len as f64 / encoded_len as f64 <= alpha {
        LengthDecision::Reject
    } else {
        LengthDecision::Keep
    }
}

fn keeps(seg: &Segment, cfg: &SegmenterConfig) -> bool {
    min_length_filter(
        seg.n_tokens,
        seg.encoded_len(cfg.subsample_factor),
        cfg.min_len_ratio,
    ) == LengthDecision::Keep
}

/// Drops segments failing [`min_length_filter`] and renumbers the rest.
///
/// The output length is the collapsed greedy transcript of the segment;
/// the encoded length is its margin-expanded span in subsampled steps.
pub fn filter_min_length(segments: Vec<Segment>, cfg: &SegmenterConfig) -> Vec<Segment> {
    let mut out: Vec<Segment> = segments.into_iter().filter(|s| keeps(s, cfg)).collect();
    renumber(&mut out);
    out
}

/// Turns online events into final segments as early as possible.
///
/// When `V >= m_s + m_e` two segments can never overlap, so each Close is
/// released immediately. Otherwise a closed segment is held until the
/// next Open shows whether it must be merged. Released segments have
/// passed the min-length filter and are numbered consecutively.
#[derive(Debug, Clone)]
pub struct SegmentAssembler {
    cfg: SegmenterConfig,
    total_frames: usize,
    held: Option<Segment>,
    released: usize,
}

impl SegmentAssembler {
    pub fn new(cfg: SegmenterConfig, total_frames: usize) -> Self {
        Self {
            cfg,
            total_frames,
            held: None,
            released: 0,
        }
    }

    pub fn push(&mut self, event: &SegmentEvent) -> Vec<Segment> {
        let mut ready = Vec::new();
        match *event {
            SegmentEvent::Open { t_start, .. } => {
                let t_start = t_start.min(self.total_frames.max(1));
                if let Some(held) = self.held {
                    if t_start > held.t_end {
                        self.held = None;
                        self.release(held, &mut ready);
                    }
                }
            }
            SegmentEvent::Close { segment, .. } | SegmentEvent::Flush { segment, .. } => {
                let tmax = self.total_frames.max(1);
                let mut seg = Segment {
                    t_start: segment.t_start.min(tmax),
                    t_end: segment.t_end.min(tmax),
                    ..segment
                };
                if let Some(mut held) = self.held.take() {
                    absorb(&mut held, &seg);
                    seg = held;
                }
                if self.cfg.margins_disjoint() {
                    self.release(seg, &mut ready);
                } else {
                    self.held = Some(seg);
                }
            }
        }
        ready
    }

    pub fn finish(&mut self) -> Vec<Segment> {
        let mut ready = Vec::new();
        if let Some(held) = self.held.take() {
            self.release(held, &mut ready);
        }
        ready
    }

    fn release(&mut self, mut seg: Segment, ready: &mut Vec<Segment>) {
        if keeps(&seg, &self.cfg) {
            self.released += 1;
            seg.index = self.released;
            ready.push(seg);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::types::{EventKind, LabelId, LabelStream};

    const B: LabelId = 0;
    const A: LabelId = 1;
    const BB: LabelId = 2;
    const C: LabelId = 3;

    fn example_labels() -> LabelStream {
        LabelStream::new(vec![B, B, A, A, B, BB, B, B, B, B, B, C, C, B], B, 4).unwrap()
    }

    fn example_cfg() -> SegmenterConfig {
        SegmenterConfig::new(4, 1, 2, 2, B, 0.0).unwrap()
    }

    fn spans(segs: &[Segment]) -> Vec<(usize, usize)> {
        segs.iter().map(|s| (s.t_start, s.t_end)).collect()
    }

    #[test]
    fn example_offline() {
        let segs = segment_offline(&example_labels(), &example_cfg(), 28).unwrap();
        assert_eq!(spans(&segs), vec![(4, 16), (22, 28)]);
        assert_eq!((segs[0].k_first_nonblank, segs[0].k_last_nonblank), (3, 6));
        assert_eq!(
            (segs[1].k_first_nonblank, segs[1].k_last_nonblank),
            (12, 13)
        );
        assert_eq!(segs[0].n_tokens, 2);
        assert_eq!(segs[1].n_tokens, 1);
    }

    #[test]
    fn example_online_trace() {
        let events = segment_online_events(example_labels().labels(), &example_cfg(), 28).unwrap();
        let summary: Vec<(EventKind, usize)> = events
            .iter()
            .map(|e| (e.kind(), e.emitted_at_step()))
            .collect();
        assert_eq!(
            summary,
            vec![
                (EventKind::Open, 3),
                (EventKind::Close, 10),
                (EventKind::Open, 12),
                (EventKind::Flush, 14),
            ]
        );
        assert!(matches!(events[0], SegmentEvent::Open { t_start: 4, .. }));
        assert_eq!(events[1].segment().unwrap().t_end, 16);
        assert!(matches!(events[2], SegmentEvent::Open { t_start: 22, .. }));
        assert_eq!(events[3].segment().unwrap().t_end, 28);
        let online = merge_overlapping(segments_from_events(&events, 28));
        assert_eq!(
            online,
            segment_offline(&example_labels(), &example_cfg(), 28).unwrap()
        );
    }

    #[test]
    fn all_blank_yields_nothing() {
        let labels = LabelStream::new(vec![B; 50], B, 3).unwrap();
        let cfg = SegmenterConfig::new(3, 2, 2, 4, B, 0.1).unwrap();
        assert!(segment_offline(&labels, &cfg, 200).unwrap().is_empty());
        assert!(segment_online_events(labels.labels(), &cfg, 200)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn no_blanks_single_segment() {
        let labels = LabelStream::new(vec![1, 2, 1, 1, 2, 2, 1, 2, 1, 2], B, 3).unwrap();
        let cfg = SegmenterConfig::new(5, 0, 0, 1, B, 0.0).unwrap();
        let segs = segment_offline(&labels, &cfg, 10).unwrap();
        assert_eq!(spans(&segs), vec![(1, 10)]);
    }

    #[test]
    fn onset_clips_to_first_frame() {
        let cfg = SegmenterConfig::new(4, 5, 0, 4, B, 0.0).unwrap();
        let mut seg = OnlineSegmenter::new(cfg).unwrap();
        let ev = seg.step(A).unwrap().unwrap();
        assert_eq!(
            ev,
            SegmentEvent::Open {
                step: 1,
                index: 1,
                k_first_nonblank: 1,
                t_start: 1
            }
        );
    }

    #[test]
    fn leading_and_trailing_blanks_never_segment() {
        let mut labels = vec![B; 40];
        labels[20] = A;
        let ls = LabelStream::new(labels, B, 2).unwrap();
        let cfg = SegmenterConfig::new(2, 0, 0, 1, B, 0.0).unwrap();
        let segs = segment_offline(&ls, &cfg, 40).unwrap();
        assert_eq!(spans(&segs), vec![(21, 21)]);
    }

    #[test]
    fn run_of_exactly_v_splits() {
        // A _ _ _ A with V = 3 splits, V = 4 does not
        let ls = LabelStream::new(vec![A, B, B, B, A], B, 2).unwrap();
        let split = SegmenterConfig::new(3, 0, 0, 1, B, 0.0).unwrap();
        let joined = SegmenterConfig::new(4, 0, 0, 1, B, 0.0).unwrap();
        assert_eq!(segment_offline(&ls, &split, 5).unwrap().len(), 2);
        assert_eq!(segment_offline(&ls, &joined, 5).unwrap().len(), 1);
    }

    #[test]
    fn overlapping_margins_merge() {
        // gap of 2 blanks, V = 2 splits, margins 2 + 2 > 2 re-join
        let ls = LabelStream::new(vec![A, A, B, B, C, C], B, 4).unwrap();
        let cfg = SegmenterConfig::new(2, 2, 2, 1, B, 0.0).unwrap();
        let raw = segment_unmerged(&ls, &cfg, 6).unwrap();
        assert_eq!(raw.len(), 2);
        let merged = segment_offline(&ls, &cfg, 6).unwrap();
        assert_eq!(spans(&merged), vec![(1, 6)]);
        assert_eq!(merged[0].k_first_nonblank, 1);
        assert_eq!(merged[0].k_last_nonblank, 6);
        assert_eq!(merged[0].n_tokens, 2);
    }

    #[test]
    fn adjacent_spans_stay_separate() {
        // t_end = 2, next t_start = 3 with r = 1
        let ls = LabelStream::new(vec![A, B, B, A], B, 2).unwrap();
        let cfg = SegmenterConfig::new(2, 1, 0, 1, B, 0.0).unwrap();
        let segs = segment_offline(&ls, &cfg, 4).unwrap();
        assert_eq!(spans(&segs), vec![(1, 1), (3, 4)]);
    }

    #[test]
    fn blank_id_out_of_range() {
        let ls = LabelStream::new(vec![0, 1], 0, 2).unwrap();
        let cfg = SegmenterConfig::new(2, 0, 0, 1, 5, 0.0).unwrap();
        assert!(matches!(
            segment_offline(&ls, &cfg, 2),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn ragged_tail_within_one_step() {
        let ls = LabelStream::new(vec![A, B, B], B, 2).unwrap();
        let cfg = SegmenterConfig::new(2, 0, 5, 4, B, 0.0).unwrap();
        assert_eq!(
            spans(&segment_offline(&ls, &cfg, 15).unwrap()),
            vec![(4, 15)]
        );
        assert_eq!(spans(&segment_offline(&ls, &cfg, 9).unwrap()), vec![(4, 9)]);
        assert!(segment_offline(&ls, &cfg, 16).is_err());
        assert!(segment_offline(&ls, &cfg, 8).is_err());
    }

    #[test]
    fn flush_cases() {
        let cfg = SegmenterConfig::new(4, 0, 1, 1, B, 0.0).unwrap();

        let mut seg = OnlineSegmenter::new(cfg).unwrap();
        seg.step(A).unwrap();
        assert_eq!(seg.mode(), OnlineMode::InSpeech);
        let ev = seg.finish(1).unwrap();
        assert_eq!(ev.kind(), EventKind::Flush);
        assert_eq!(ev.segment().unwrap().t_end, 1);

        let mut seg = OnlineSegmenter::new(cfg).unwrap();
        assert!(seg.finish(0).is_none());

        // blank run stops at V - 1
        let mut seg = OnlineSegmenter::new(cfg).unwrap();
        for l in [A, B, B, B] {
            assert!(seg
                .step(l)
                .unwrap()
                .is_none_or(|e| e.kind() == EventKind::Open));
        }
        assert_eq!(seg.mode(), OnlineMode::CountingBlanks);
        assert_eq!(seg.blank_run(), 3);
        let ev = seg.finish(4).unwrap();
        assert_eq!(ev.kind(), EventKind::Flush);
        assert_eq!(ev.segment().unwrap().t_end, 2);
    }

    #[test]
    fn step_after_finish_needs_reset() {
        let cfg = SegmenterConfig::new(2, 0, 0, 1, B, 0.0).unwrap();
        let mut seg = OnlineSegmenter::new(cfg).unwrap();
        seg.step(A).unwrap();
        seg.finish(1);
        assert!(matches!(seg.step(A), Err(Error::InvalidState(_))));
        seg.reset();
        assert_eq!(seg.k_current(), 0);
        assert!(seg.step(A).unwrap().is_some());
    }

    #[test]
    fn close_fires_v_steps_after_last_nonblank() {
        let cfg = SegmenterConfig::new(6, 1, 3, 2, B, 0.0).unwrap();
        let labels = [B, A, C, B, A, B, B, B, B, B, B, B, B];
        let events = segment_online_events(&labels, &cfg, 26).unwrap();
        let close = events
            .iter()
            .find(|e| e.kind() == EventKind::Close)
            .unwrap();
        assert_eq!(
            close.emitted_at_step() - close.segment().unwrap().k_last_nonblank,
            6
        );
    }

    #[test]
    fn min_length_examples() {
        assert_eq!(min_length_filter(3, 10, 0.1), LengthDecision::Keep);
        assert_eq!(min_length_filter(1, 20, 0.1), LengthDecision::Reject);
        assert_eq!(min_length_filter(2, 20, 0.1), LengthDecision::Reject);
        assert_eq!(min_length_filter(0, 1, 0.0), LengthDecision::Reject);
    }

    #[test]
    fn filter_drops_sparse_segments() {
        let mut labels = vec![B; 60];
        labels[5] = A;
        labels[30] = A;
        labels[31] = C;
        labels[32] = A;
        let ls = LabelStream::new(labels, B, 4).unwrap();
        let cfg = SegmenterConfig::new(10, 2, 2, 1, B, 0.1).unwrap();
        let segs = segment_offline(&ls, &cfg, 60).unwrap();
        assert_eq!(segs.len(), 2);
        let kept = filter_min_length(segs, &cfg);
        assert_eq!(kept.len(), 2);

        let wide = SegmenterConfig::new(10, 20, 20, 1, B, 0.1).unwrap();
        let segs = segment_offline(&ls, &wide, 60).unwrap();
        // merged span 1..=53 carries 4 tokens: 4 / 53 <= 0.1
        assert_eq!(segs.len(), 1);
        assert!(filter_min_length(segs, &wide).is_empty());
    }

    #[test]
    fn assembler_matches_offline() {
        for cfg in [
            example_cfg(),
            SegmenterConfig::new(2, 3, 3, 2, B, 0.0).unwrap(),
            SegmenterConfig::new(4, 1, 2, 2, B, 0.1).unwrap(),
        ] {
            let labels = example_labels();
            let expected = filter_min_length(segment_offline(&labels, &cfg, 28).unwrap(), &cfg);
            let mut asm = SegmentAssembler::new(cfg, 28);
            let mut got = Vec::new();
            for ev in segment_online_events(labels.labels(), &cfg, 28).unwrap() {
                got.extend(asm.push(&ev));
            }
            got.extend(asm.finish());
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn assembler_releases_on_close_when_disjoint() {
        let cfg = example_cfg();
        assert!(cfg.margins_disjoint());
        let mut asm = SegmentAssembler::new(cfg, 28);
        let events = segment_online_events(example_labels().labels(), &cfg, 28).unwrap();
        assert!(asm.push(&events[0]).is_empty());
        assert_eq!(asm.push(&events[1]).len(), 1);
    }
}
