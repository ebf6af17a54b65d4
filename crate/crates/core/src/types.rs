//! Domain types and index arithmetic shared by every module.
//!
//! Indices are 1-based throughout: subsampled step `k` maps to feature
//! frame `r * k`, so the subsampled grid is `{r, 2r, 3r, ...}`. Array
//! offsets only appear at the I/O boundary.

use crate::error::{Error, Result};

pub type LabelId = u32;

/// Tolerance on the row sum of a probability frame.
pub const ROW_SUM_TOLERANCE: f64 = 1e-4;

/// Feature-frame index of subsampled step `k` (both 1-based).
#[inline]
pub fn subsampled_to_feature_index(k: usize, r: usize) -> usize {
    k * r
}

/// Clamps `t` into `[t_min, t_max]`.
#[inline]
pub fn clip_to_stream(t: i64, t_min: usize, t_max: usize) -> usize {
    debug_assert!(t_min <= t_max);
    t.clamp(t_min as i64, t_max as i64) as usize
}

/// What the per-frame scores represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    /// Softmax output; each row sums to one.
    Probabilities,
    /// Pre-softmax logits or log-probabilities. Argmax is unaffected by
    /// normalization so these are decoded as-is.
    Scores,
}

/// Frame-level CTC outputs for one stream, one row per subsampled step.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorStream {
    num_labels: usize,
    blank_id: LabelId,
    frame_shift_ms: f32,
    subsample_factor: usize,
    kind: ScoreKind,
    data: Vec<f32>,
}

impl PosteriorStream {
    /// Builds a stream from row-major scores.
    ///
    /// `frame_shift_ms` is the raw feature frame shift (10 ms for typical
    /// filterbank front ends), not the duration of a subsampled step.
    pub fn new(
        num_labels: usize,
        blank_id: LabelId,
        frame_shift_ms: f32,
        subsample_factor: usize,
        kind: ScoreKind,
        data: Vec<f32>,
    ) -> Result<Self> {
        if num_labels == 0 {
            return Err(Error::InvalidStream("num_labels must be positive".into()));
        }
        if blank_id as usize >= num_labels {
            return Err(Error::InvalidConfig(format!(
                "blank id {blank_id} out of range for {num_labels} labels"
            )));
        }
        if !(frame_shift_ms.is_finite() && frame_shift_ms > 0.0) {
            return Err(Error::InvalidStream(format!(
                "frame shift must be positive, got {frame_shift_ms}"
            )));
        }
        if subsample_factor == 0 {
            return Err(Error::InvalidStream("subsample factor must be >= 1".into()));
        }
        if !data.len().is_multiple_of(num_labels) {
            return Err(Error::InvalidStream(format!(
                "{} scores is not a multiple of {num_labels} labels",
                data.len()
            )));
        }
        if kind == ScoreKind::Probabilities {
            for (row, frame) in data.chunks_exact(num_labels).enumerate() {
                if !frame.iter().all(|&p| (0.0..=1.0).contains(&p)) {
                    return Err(Error::InvalidStream(format!(
                        "frame {} has a probability outside [0, 1]",
                        row + 1
                    )));
                }
                let sum = row_sum(frame);
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return Err(Error::InvalidStream(format!(
                        "frame {} sums to {sum}",
                        row + 1
                    )));
                }
            }
        }
        Ok(Self {
            num_labels,
            blank_id,
            frame_shift_ms,
            subsample_factor,
            kind,
            data,
        })
    }

    /// Convenience constructor from one vector per frame.
    pub fn from_rows(
        rows: &[Vec<f32>],
        blank_id: LabelId,
        frame_shift_ms: f32,
        subsample_factor: usize,
        kind: ScoreKind,
    ) -> Result<Self> {
        let num_labels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != num_labels) {
            return Err(Error::InvalidStream("ragged frame vectors".into()));
        }
        let data = rows.concat();
        Self::new(
            num_labels,
            blank_id,
            frame_shift_ms,
            subsample_factor,
            kind,
            data,
        )
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn blank_id(&self) -> LabelId {
        self.blank_id
    }

    pub fn frame_shift_ms(&self) -> f32 {
        self.frame_shift_ms
    }

    pub fn subsample_factor(&self) -> usize {
        self.subsample_factor
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    /// Number of subsampled steps `K`.
    pub fn num_frames(&self) -> usize {
        self.data.len() / self.num_labels
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Feature frames covered by the subsampled steps, `r * K`.
    pub fn total_feature_frames(&self) -> usize {
        self.num_frames() * self.subsample_factor
    }

    /// Audio duration implied by `r * K` feature frames.
    pub fn duration_sec(&self) -> f64 {
        self.total_feature_frames() as f64 * f64::from(self.frame_shift_ms) / 1000.0
    }

    /// Scores of 0-based row `i`.
    pub fn frame(&self, i: usize) -> &[f32] {
        &self.data[i * self.num_labels..(i + 1) * self.num_labels]
    }

    pub fn frames(&self) -> std::slice::ChunksExact<'_, f32> {
        self.data.chunks_exact(self.num_labels)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

pub(crate) fn row_sum(frame: &[f32]) -> f64 {
    frame.iter().map(|&p| f64::from(p)).sum()
}

/// Greedy label sequence, one label per subsampled step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelStream {
    labels: Vec<LabelId>,
    blank_id: LabelId,
    num_labels: usize,
}

impl LabelStream {
    pub fn new(labels: Vec<LabelId>, blank_id: LabelId, num_labels: usize) -> Result<Self> {
        if blank_id as usize >= num_labels {
            return Err(Error::InvalidConfig(format!(
                "blank id {blank_id} out of range for {num_labels} labels"
            )));
        }
        if let Some(pos) = labels.iter().position(|&l| l as usize >= num_labels) {
            return Err(Error::InvalidStream(format!(
                "label {} at step {} out of range for {num_labels} labels",
                labels[pos],
                pos + 1
            )));
        }
        Ok(Self {
            labels,
            blank_id,
            num_labels,
        })
    }

    pub fn labels(&self) -> &[LabelId] {
        &self.labels
    }

    pub fn blank_id(&self) -> LabelId {
        self.blank_id
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    /// Subsampled length `K`.
    pub fn num_steps(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Label at 1-based step `k`.
    pub fn at(&self, k: usize) -> LabelId {
        self.labels[k - 1]
    }
}

/// Blank-run segmentation parameters. `V`, the onset margin and the
/// offset margin are all counted in subsampled steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmenterConfig {
    pub v_threshold: usize,
    pub onset_margin: usize,
    pub offset_margin: usize,
    pub subsample_factor: usize,
    pub blank_id: LabelId,
    pub min_len_ratio: f64,
}

impl Default for SegmenterConfig {
    /// `V = 16`, `m_s = 2`, `m_e = 3`, `r = 4`, `alpha = 0.1`.
    fn default() -> Self {
        Self {
            v_threshold: 16,
            onset_margin: 2,
            offset_margin: 3,
            subsample_factor: 4,
            blank_id: 0,
            min_len_ratio: 0.1,
        }
    }
}

impl SegmenterConfig {
    pub fn new(
        v_threshold: usize,
        onset_margin: usize,
        offset_margin: usize,
        subsample_factor: usize,
        blank_id: LabelId,
        min_len_ratio: f64,
    ) -> Result<Self> {
        let cfg = Self {
            v_threshold,
            onset_margin,
            offset_margin,
            subsample_factor,
            blank_id,
            min_len_ratio,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_threshold == 0 {
            return Err(Error::InvalidConfig("threshold V must be >= 1".into()));
        }
        if self.subsample_factor == 0 {
            return Err(Error::InvalidConfig("subsample factor must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.min_len_ratio) {
            return Err(Error::InvalidConfig(format!(
                "min length ratio must be in [0, 1), got {}",
                self.min_len_ratio
            )));
        }
        Ok(())
    }

    /// Shortest non-speech gap that splits segments, in feature frames.
    pub fn min_blank_feature_frames(&self) -> usize {
        self.v_threshold * self.subsample_factor
    }

    /// Shortest non-speech gap that splits segments, in milliseconds.
    pub fn min_blank_duration_ms(&self, frame_shift_ms: f64) -> f64 {
        self.min_blank_feature_frames() as f64 * frame_shift_ms
    }

    /// True when margin expansion can never make two segments overlap.
    pub fn margins_disjoint(&self) -> bool {
        self.v_threshold >= self.onset_margin + self.offset_margin
    }

    /// Feature-frame start of a segment whose first non-blank is at `k`.
    /// `None` leaves the upper bound open.
    pub(crate) fn expanded_start(&self, k_first: usize, total_frames: Option<usize>) -> usize {
        let r = self.subsample_factor as i64;
        let t = r * k_first as i64 - r * self.onset_margin as i64;
        match total_frames {
            Some(tmax) => clip_to_stream(t, 1, tmax.max(1)),
            None => t.max(1) as usize,
        }
    }

    /// Feature-frame end of a segment whose last non-blank is at `k`.
    /// `None` leaves the upper bound open.
    pub(crate) fn expanded_end(&self, k_last: usize, total_frames: Option<usize>) -> usize {
        let t = subsampled_to_feature_index(k_last + self.offset_margin, self.subsample_factor);
        match total_frames {
            Some(tmax) => clip_to_stream(t as i64, 1, tmax.max(1)),
            None => t,
        }
    }
}

/// One detected speech region.
///
/// `k_*` live on the subsampled grid, `t_*` on the feature-frame grid
/// after margin expansion and clipping. Both spans are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub index: usize,
    pub k_first_nonblank: usize,
    pub k_last_nonblank: usize,
    pub t_start: usize,
    pub t_end: usize,
    /// Length of the collapsed greedy transcript over
    /// `k_first_nonblank..=k_last_nonblank`.
    pub n_tokens: usize,
}

impl Segment {
    pub fn start_sec(&self, frame_shift_ms: f64) -> f64 {
        self.t_start as f64 * frame_shift_ms / 1000.0
    }

    pub fn end_sec(&self, frame_shift_ms: f64) -> f64 {
        self.t_end as f64 * frame_shift_ms / 1000.0
    }

    /// Number of feature frames in the expanded span.
    pub fn num_feature_frames(&self) -> usize {
        self.t_end + 1 - self.t_start
    }

    /// Length of the expanded span in subsampled steps (rounded up).
    pub fn encoded_len(&self, subsample_factor: usize) -> usize {
        self.num_feature_frames().div_ceil(subsample_factor)
    }
}

/// Decision emitted by the online segmenter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentEvent {
    /// First non-blank of a new segment seen at `step`. The start is
    /// retroactive: consumers keep `m_s * r` feature frames of lookback.
    Open {
        step: usize,
        index: usize,
        k_first_nonblank: usize,
        t_start: usize,
    },
    /// The blank run after the segment reached `V` at `step`.
    Close { step: usize, segment: Segment },
    /// End of stream reached while a segment was still open.
    Flush { step: usize, segment: Segment },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Open,
    Close,
    Flush,
}

impl SegmentEvent {
    pub fn kind(&self) -> EventKind {
        match self {
            SegmentEvent::Open { .. } => EventKind::Open,
            SegmentEvent::Close { .. } => EventKind::Close,
            SegmentEvent::Flush { .. } => EventKind::Flush,
        }
    }

    /// Subsampled step at which the decision fired.
    pub fn emitted_at_step(&self) -> usize {
        match *self {
            SegmentEvent::Open { step, .. }
            | SegmentEvent::Close { step, .. }
            | SegmentEvent::Flush { step, .. } => step,
        }
    }

    /// Completed segment carried by a Close or Flush.
    pub fn segment(&self) -> Option<&Segment> {
        match self {
            SegmentEvent::Open { .. } => None,
            SegmentEvent::Close { segment, .. } | SegmentEvent::Flush { segment, .. } => {
                Some(segment)
            }
        }
    }
}
