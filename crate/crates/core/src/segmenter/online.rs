use crate::error::{Error, Result};
use crate::types::{LabelId, Segment, SegmentEvent, SegmenterConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnlineMode {
    Idle,
    InSpeech,
    CountingBlanks,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    index: usize,
    k_first: usize,
    t_start: usize,
    n_tokens: usize,
}

/// Single-pass blank-run segmenter.
///
/// Feed one greedy label per subsampled step with [`step`](Self::step)
/// and call [`finish`](Self::finish) at end of stream. A segment is
/// closed exactly `V` steps after its last non-blank label; the reported
/// end still includes the offset margin, so a consumer cutting audio must
/// hold `m_e * r` feature frames past the decision point, plus `m_s * r`
/// frames of lookback for the retroactive start.
#[derive(Debug, Clone)]
pub struct OnlineSegmenter {
    cfg: SegmenterConfig,
    total_frames: Option<usize>,
    mode: OnlineMode,
    blank_run: usize,
    k_current: usize,
    k_last_nonblank: usize,
    prev_label: Option<LabelId>,
    pending: Option<Pending>,
    next_index: usize,
    finished: bool,
}

impl OnlineSegmenter {
    pub fn new(cfg: SegmenterConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            total_frames: None,
            mode: OnlineMode::Idle,
            blank_run: 0,
            k_current: 0,
            k_last_nonblank: 0,
            prev_label: None,
            pending: None,
            next_index: 1,
            finished: false,
        })
    }

    /// Known stream length in feature frames; enables upper clipping of
    /// Close events. Without it only Flush is clipped.
    pub fn with_total_frames(mut self, total_frames: usize) -> Self {
        self.total_frames = Some(total_frames);
        self
    }

    pub fn config(&self) -> &SegmenterConfig {
        &self.cfg
    }

    pub fn mode(&self) -> OnlineMode {
        self.mode
    }

    pub fn blank_run(&self) -> usize {
        self.blank_run
    }

    /// Number of labels consumed so far.
    pub fn k_current(&self) -> usize {
        self.k_current
    }

    pub fn k_last_nonblank(&self) -> Option<usize> {
        (self.k_last_nonblank > 0).then_some(self.k_last_nonblank)
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Feature frames a consumer must keep buffered to cut segments from
    /// live audio: onset lookback, the closing blank run and the offset
    /// margin.
    pub fn max_retained_feature_frames(&self) -> usize {
        let c = &self.cfg;
        (c.onset_margin + c.v_threshold + c.offset_margin) * c.subsample_factor
    }

    /// Clears all state, ready for a new stream.
    pub fn reset(&mut self) {
        *self = Self {
            total_frames: self.total_frames,
            ..Self::new(self.cfg).expect("config validated at construction")
        };
    }

    /// Consumes the label of the next subsampled step.
    pub fn step(&mut self, label: LabelId) -> Result<Option<SegmentEvent>> {
        if self.finished {
            return Err(Error::InvalidState(
                "step called after finish without reset",
            ));
        }
        self.k_current += 1;
        let k = self.k_current;
        let is_blank = label == self.cfg.blank_id;
        let prev = self.prev_label.replace(label);

        if !is_blank {
            self.k_last_nonblank = k;
            self.blank_run = 0;
            return Ok(match self.mode {
                OnlineMode::Idle => {
                    let t_start = self.cfg.expanded_start(k, self.total_frames);
                    let index = self.next_index;
                    self.next_index += 1;
                    self.pending = Some(Pending {
                        index,
                        k_first: k,
                        t_start,
                        n_tokens: 1,
                    });
                    self.mode = OnlineMode::InSpeech;
                    Some(SegmentEvent::Open {
                        step: k,
                        index,
                        k_first_nonblank: k,
                        t_start,
                    })
                }
                OnlineMode::InSpeech | OnlineMode::CountingBlanks => {
                    if prev != Some(label) {
                        if let Some(p) = self.pending.as_mut() {
                            p.n_tokens += 1;
                        }
                    }
                    self.mode = OnlineMode::InSpeech;
                    None
                }
            });
        }

        match self.mode {
            OnlineMode::Idle => Ok(None),
            OnlineMode::InSpeech | OnlineMode::CountingBlanks => {
                self.blank_run += 1;
                self.mode = OnlineMode::CountingBlanks;
                if self.blank_run < self.cfg.v_threshold {
                    return Ok(None);
                }
                let segment = self.take_pending(self.total_frames);
                self.mode = OnlineMode::Idle;
                self.blank_run = 0;
                Ok(Some(SegmentEvent::Close { step: k, segment }))
            }
        }
    }

    /// Ends the stream. An open segment is flushed with its end clipped
    /// to `total_frames`. Further `step` calls fail until `reset`.
    pub fn finish(&mut self, total_frames: usize) -> Option<SegmentEvent> {
        if self.finished {
            return None;
        }
        self.finished = true;
        if self.mode == OnlineMode::Idle {
            return None;
        }
        let mut segment = self.take_pending(Some(total_frames));
        segment.t_start = segment.t_start.min(total_frames.max(1));
        self.mode = OnlineMode::Idle;
        self.blank_run = 0;
        Some(SegmentEvent::Flush {
            step: self.k_current,
            segment,
        })
    }

    fn take_pending(&mut self, total_frames: Option<usize>) -> Segment {
        let p = self
            .pending
            .take()
            .expect("pending segment exists outside Idle");
        let t_end = self.cfg.expanded_end(self.k_last_nonblank, total_frames);
        Segment {
            index: p.index,
            k_first_nonblank: p.k_first,
            k_last_nonblank: self.k_last_nonblank,
            t_start: p.t_start.min(t_end),
            t_end,
            n_tokens: p.n_tokens,
        }
    }
}

/// Runs a whole label sequence through the online segmenter.
pub fn segment_online_events(
    labels: &[LabelId],
    cfg: &SegmenterConfig,
    total_frames: usize,
) -> Result<Vec<SegmentEvent>> {
    let mut seg = OnlineSegmenter::new(*cfg)?.with_total_frames(total_frames);
    let mut events = Vec::new();
    for &l in labels {
        events.extend(seg.step(l)?);
    }
    events.extend(seg.finish(total_frames));
    Ok(events)
}

/// Completed segments from an event log, clipped to `total_frames`
/// and not yet merged.
pub fn segments_from_events(events: &[SegmentEvent], total_frames: usize) -> Vec<Segment> {
    let tmax = total_frames.max(1);
    events
        .iter()
        .filter_map(SegmentEvent::segment)
        .map(|s| Segment {
            t_start: s.t_start.min(tmax),
            t_end: s.t_end.min(tmax),
            ..*s
        })
        .collect()
}
