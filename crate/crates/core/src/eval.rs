//! Frame-level segmentation metrics against a reference annotation.

use std::ops::Add;

use serde::Serialize;

use crate::simulate::{grid_span, ReferenceAnnotation};
use crate::types::Segment;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub frame_precision: f64,
    pub frame_recall: f64,
    pub frame_f1: f64,
    /// Mean absolute start/end offset over matched segment pairs, in
    /// frames. Zero when nothing matched.
    pub boundary_mae_frames: f64,
    pub n_hyp_segments: usize,
    pub n_ref_segments: usize,
    pub n_matched: usize,
    pub rtf: f64,
}

/// Additive frame and boundary tallies; reports over several files are
/// built by summing these.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrameCounts {
    pub hyp_frames: usize,
    pub ref_frames: usize,
    pub both_frames: usize,
    pub n_hyp_segments: usize,
    pub n_ref_segments: usize,
    pub n_matched: usize,
    pub boundary_abs_err: usize,
}

impl Add for FrameCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            hyp_frames: self.hyp_frames + o.hyp_frames,
            ref_frames: self.ref_frames + o.ref_frames,
            both_frames: self.both_frames + o.both_frames,
            n_hyp_segments: self.n_hyp_segments + o.n_hyp_segments,
            n_ref_segments: self.n_ref_segments + o.n_ref_segments,
            n_matched: self.n_matched + o.n_matched,
            boundary_abs_err: self.boundary_abs_err + o.boundary_abs_err,
        }
    }
}

fn ratio(num: usize, den: usize, other_empty: bool) -> f64 {
    if den == 0 {
        if other_empty {
            1.0
        } else {
            0.0
        }
    } else {
        num as f64 / den as f64
    }
}

impl FrameCounts {
    pub fn report(&self, rtf: f64) -> EvalReport {
        let precision = ratio(self.both_frames, self.hyp_frames, self.ref_frames == 0);
        let recall = ratio(self.both_frames, self.ref_frames, self.hyp_frames == 0);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        let mae = if self.n_matched == 0 {
            0.0
        } else {
            self.boundary_abs_err as f64 / (2 * self.n_matched) as f64
        };
        EvalReport {
            frame_precision: precision,
            frame_recall: recall,
            frame_f1: f1,
            boundary_mae_frames: mae,
            n_hyp_segments: self.n_hyp_segments,
            n_ref_segments: self.n_ref_segments,
            n_matched: self.n_matched,
            rtf,
        }
    }
}

/// Reference regions as segments on the frame grid: frame `t` sits at
/// `t * frame_shift_ms`, the same convention as [`Segment::start_sec`].
pub fn reference_segments(
    reference: &ReferenceAnnotation,
    frame_shift_ms: f64,
    total_frames: usize,
) -> Vec<Segment> {
    reference
        .speech_regions
        .iter()
        .filter_map(|&(s, e)| grid_span(s, e, frame_shift_ms, total_frames))
        .enumerate()
        .map(|(i, (lo, hi))| Segment {
            index: i + 1,
            k_first_nonblank: lo,
            k_last_nonblank: hi,
            t_start: lo,
            t_end: hi,
            n_tokens: 0,
        })
        .collect()
}

fn mask(segments: &[Segment], total_frames: usize) -> Vec<bool> {
    let mut m = vec![false; total_frames];
    for s in segments {
        let lo = s.t_start.max(1);
        let hi = s.t_end.min(total_frames);
        if lo <= hi {
            m[lo - 1..hi].fill(true);
        }
    }
    m
}

fn overlap(a: &Segment, b: &Segment) -> usize {
    let lo = a.t_start.max(b.t_start);
    let hi = a.t_end.min(b.t_end);
    (hi + 1).saturating_sub(lo)
}

/// Tallies hypothesis against reference segments on a common grid.
pub fn count_frames(hyp: &[Segment], reference: &[Segment], total_frames: usize) -> FrameCounts {
    let hm = mask(hyp, total_frames);
    let rm = mask(reference, total_frames);
    let mut counts = FrameCounts {
        n_hyp_segments: hyp.len(),
        n_ref_segments: reference.len(),
        ..Default::default()
    };
    for (&h, &r) in hm.iter().zip(&rm) {
        counts.hyp_frames += usize::from(h);
        counts.ref_frames += usize::from(r);
        counts.both_frames += usize::from(h && r);
    }

    // greedy one-to-one matching by largest overlap
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (i, h) in hyp.iter().enumerate() {
        for (j, r) in reference.iter().enumerate() {
            let o = overlap(h, r);
            if o > 0 {
                pairs.push((o, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut hyp_used = vec![false; hyp.len()];
    let mut ref_used = vec![false; reference.len()];
    for (_, i, j) in pairs {
        if hyp_used[i] || ref_used[j] {
            continue;
        }
        hyp_used[i] = true;
        ref_used[j] = true;
        counts.n_matched += 1;
        counts.boundary_abs_err += hyp[i].t_start.abs_diff(reference[j].t_start)
            + hyp[i].t_end.abs_diff(reference[j].t_end);
    }
    counts
}

pub fn evaluate(
    hyp: &[Segment],
    reference: &ReferenceAnnotation,
    frame_shift_ms: f64,
    total_frames: usize,
) -> EvalReport {
    let ref_segs = reference_segments(reference, frame_shift_ms, total_frames);
    count_frames(hyp, &ref_segs, total_frames).report(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg(t_start: usize, t_end: usize) -> Segment {
        Segment {
            index: 0,
            k_first_nonblank: t_start,
            k_last_nonblank: t_end,
            t_start,
            t_end,
            n_tokens: 0,
        }
    }

    fn reference() -> ReferenceAnnotation {
        ReferenceAnnotation::new(vec![(0.5, 0.99), (2.0, 2.39)], 3.0).unwrap()
    }

    #[test]
    fn reference_grid() {
        let r = reference_segments(&reference(), 10.0, 300);
        assert_eq!(
            r.iter().map(|s| (s.t_start, s.t_end)).collect::<Vec<_>>(),
            vec![(50, 99), (200, 239)]
        );
    }

    #[test]
    fn identity_is_perfect() {
        let hyp = reference_segments(&reference(), 10.0, 300);
        let rep = evaluate(&hyp, &reference(), 10.0, 300);
        assert_eq!(rep.frame_precision, 1.0);
        assert_eq!(rep.frame_recall, 1.0);
        assert_eq!(rep.frame_f1, 1.0);
        assert_eq!(rep.boundary_mae_frames, 0.0);
        assert_eq!(rep.n_matched, 2);
    }

    #[test]
    fn empty_hypothesis() {
        let rep = evaluate(&[], &reference(), 10.0, 300);
        assert_eq!(rep.frame_recall, 0.0);
        assert_eq!(rep.frame_precision, 0.0);
        assert_eq!(rep.frame_f1, 0.0);

        let none = ReferenceAnnotation::new(vec![], 3.0).unwrap();
        let rep = evaluate(&[], &none, 10.0, 300);
        assert_eq!(
            (rep.frame_precision, rep.frame_recall, rep.frame_f1),
            (1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn half_coverage() {
        // reference frames 50..=99 and 200..=239; cover the first half of each
        let hyp = [seg(50, 74), seg(200, 219)];
        let rep = evaluate(&hyp, &reference(), 10.0, 300);
        // oracle: count frames directly
        let ref_frames: Vec<usize> = (50..=99).chain(200..=239).collect();
        let hyp_frames: Vec<usize> = (50..=74).chain(200..=219).collect();
        let both = hyp_frames.iter().filter(|t| ref_frames.contains(t)).count();
        assert_eq!(both, 45);
        assert_eq!(rep.frame_precision, both as f64 / hyp_frames.len() as f64);
        assert_eq!(rep.frame_recall, both as f64 / ref_frames.len() as f64);
        assert_eq!(rep.frame_precision, 1.0);
        assert_eq!(rep.frame_recall, 0.5);
        // ends are off by 25 and 20 frames, starts exact
        assert_eq!(rep.boundary_mae_frames, 45.0 / 4.0);
    }

    #[test]
    fn greedy_matching_is_one_to_one() {
        let r = [seg(10, 30)];
        let h = [seg(5, 12), seg(14, 30)];
        let c = count_frames(&h, &r, 40);
        assert_eq!(c.n_matched, 1);
        assert_eq!(c.boundary_abs_err, 4);
    }

    #[test]
    fn counts_aggregate() {
        let a = count_frames(&[seg(1, 5)], &[seg(3, 8)], 10);
        let b = count_frames(&[seg(2, 2)], &[], 10);
        let sum = a + b;
        assert_eq!(sum.hyp_frames, 6);
        assert_eq!(sum.ref_frames, 6);
        assert_eq!(sum.both_frames, 3);
        assert_eq!(sum.report(0.0).frame_precision, 0.5);
    }

    fn disjoint_segments() -> impl Strategy<Value = (Vec<Segment>, usize)> {
        prop::collection::vec((0usize..10, 1usize..20), 0..12).prop_map(|parts| {
            let mut t = 0;
            let mut segs = Vec::new();
            for (gap, len) in parts {
                let s = t + gap + 1;
                let e = s + len - 1;
                segs.push(seg(s, e));
                t = e;
            }
            (segs, t + 5)
        })
    }

    proptest! {
        #[test]
        fn self_evaluation_is_perfect((segs, total) in disjoint_segments()) {
            let ann = ReferenceAnnotation::new(
                segs.iter().map(|s| (s.start_sec(10.0), s.end_sec(10.0))).collect(),
                total as f64 * 0.01,
            ).unwrap();
            let rep = evaluate(&segs, &ann, 10.0, total);
            prop_assert_eq!(rep.frame_f1, 1.0);
            prop_assert_eq!(rep.boundary_mae_frames, 0.0);
        }

        #[test]
        fn f1_is_harmonic_mean((h, th) in disjoint_segments(), (r, tr) in disjoint_segments()) {
            let total = th.max(tr);
            let rep = count_frames(&h, &r, total).report(0.0);
            let (p, rc) = (rep.frame_precision, rep.frame_recall);
            let expected = if p + rc == 0.0 { 0.0 } else { 2.0 * p * rc / (p + rc) };
            prop_assert!((rep.frame_f1 - expected).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&rep.frame_f1));
        }
    }
}
