//! File formats: CTCP posteriors, segment output, reference annotations
//! and 16-bit PCM WAV.

mod annotation;
mod ctcp;
mod segments;
mod wav;

pub use annotation::{read_annotation, read_annotation_file, write_annotation};
pub use ctcp::{
    read_ctcp, read_posterior_file, write_ctcp, write_posterior_file, CtcpHeader, CtcpReader,
    FormatError, HEADER_LEN, MAGIC, VERSION,
};
pub use segments::{
    format_event, format_seconds, read_segments_jsonl, write_segments, OutputFormat, SegmentWriter,
};
pub use wav::{read_wav_mono, write_wav_mono};
