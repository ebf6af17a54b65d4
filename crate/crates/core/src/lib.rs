//! Speech segmentation driven by frame-synchronous CTC label streams.
//!
//! A greedy (argmax) pass over CTC posteriors yields one label per
//! subsampled encoder step. Long runs of the blank label mark non-speech;
//! whenever a blank run reaches the minimum blank duration threshold `V`
//! the stream is cut, and each remaining span of non-blank labels is
//! widened by an onset and offset margin before being mapped back onto
//! the feature-frame grid.
//!
//! The crate provides both an offline (whole-stream) segmenter and an
//! online state machine with identical output, plus the harness used to
//! validate them: a seeded posterior synthesizer, an energy-based
//! baseline VAD, frame-level metrics and real-time-factor measurement.

pub mod energy;
pub mod error;
pub mod eval;
pub mod greedy;
pub mod io;
pub mod rtf;
pub mod segmenter;
pub mod simulate;
pub mod types;

pub use error::{Error, Result};
pub use greedy::{ctc_collapse, greedy_decode, TieBreak};
pub use segmenter::{
    filter_min_length, merge_overlapping, min_length_filter, segment_offline, LengthDecision,
    OnlineMode, OnlineSegmenter, SegmentAssembler,
};
pub use types::{
    clip_to_stream, subsampled_to_feature_index, EventKind, LabelId, LabelStream, PosteriorStream,
    ScoreKind, Segment, SegmentEvent, SegmenterConfig,
};
