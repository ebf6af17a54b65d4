//! Segment and event output.
//!
//! Every format is hand-formatted so the bytes are stable for a given
//! input. Times carry exactly six decimals, rounded half-to-even on the
//! microsecond.

use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::types::{Segment, SegmentEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Jsonl,
    /// `<stream> 1 <start> <duration> speech`, one line per segment.
    Ctm,
    Tsv,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "ctm" | "ctm-like" => Ok(Self::Ctm),
            "tsv" => Ok(Self::Tsv),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// `seconds` as a fixed six-decimal string.
pub fn format_seconds(seconds: f64) -> String {
    let micros = (seconds * 1e6).round_ties_even() as i64;
    let sign = if micros < 0 { "-" } else { "" };
    let m = micros.unsigned_abs();
    format!("{sign}{}.{:06}", m / 1_000_000, m % 1_000_000)
}

/// Writes segments one at a time; used directly by the online path.
pub struct SegmentWriter<W> {
    sink: W,
    format: OutputFormat,
    frame_shift_ms: f64,
    stream_id: String,
    wrote_header: bool,
}

impl<W: Write> SegmentWriter<W> {
    pub fn new(sink: W, format: OutputFormat, frame_shift_ms: f64) -> Self {
        Self {
            sink,
            format,
            frame_shift_ms,
            stream_id: "stream".to_string(),
            wrote_header: false,
        }
    }

    /// Utterance id written in the first CTM column.
    pub fn with_stream_id(mut self, id: impl Into<String>) -> Self {
        self.stream_id = id.into();
        self
    }

    pub fn write(&mut self, seg: &Segment) -> Result<()> {
        let start = seg.start_sec(self.frame_shift_ms);
        let end = seg.end_sec(self.frame_shift_ms);
        let line = match self.format {
            OutputFormat::Jsonl => format!(
                "{{\"index\":{},\"t_start\":{},\"t_end\":{},\"start_sec\":{},\"end_sec\":{}}}\n",
                seg.index,
                seg.t_start,
                seg.t_end,
                format_seconds(start),
                format_seconds(end)
            ),
            OutputFormat::Ctm => format!(
                "{} 1 {} {} speech\n",
                self.stream_id,
                format_seconds(start),
                format_seconds(end - start)
            ),
            OutputFormat::Tsv => {
                if !self.wrote_header {
                    self.wrote_header = true;
                    self.sink
                        .write_all(b"index\tt_start\tt_end\tstart_sec\tend_sec\n")
                        .map_err(Error::Sink)?;
                }
                format!(
                    "{}\t{}\t{}\t{}\t{}\n",
                    seg.index,
                    seg.t_start,
                    seg.t_end,
                    format_seconds(start),
                    format_seconds(end)
                )
            }
        };
        self.sink.write_all(line.as_bytes()).map_err(Error::Sink)
    }

    pub fn flush(&mut self) -> Result<()> {
        self.sink.flush().map_err(Error::Sink)
    }

    /// The underlying sink, for interleaving other lines.
    pub fn get_mut(&mut self) -> &mut W {
        &mut self.sink
    }

    pub fn into_inner(self) -> W {
        self.sink
    }
}

pub fn write_segments<W: Write>(
    segments: &[Segment],
    format: OutputFormat,
    frame_shift_ms: f64,
    sink: W,
) -> Result<()> {
    let mut w = SegmentWriter::new(sink, format, frame_shift_ms);
    for s in segments {
        w.write(s)?;
    }
    w.flush()
}

/// One JSON line describing an online event.
pub fn format_event(event: &SegmentEvent, frame_shift_ms: f64) -> String {
    match event {
        SegmentEvent::Open {
            step,
            index,
            k_first_nonblank,
            t_start,
        } => format!(
            "{{\"event\":\"open\",\"step\":{step},\"index\":{index},\"k_first\":{k_first_nonblank},\"t_start\":{t_start},\"start_sec\":{}}}",
            format_seconds(*t_start as f64 * frame_shift_ms / 1000.0)
        ),
        SegmentEvent::Close { step, segment } | SegmentEvent::Flush { step, segment } => {
            let kind = if matches!(event, SegmentEvent::Close { .. }) {
                "close"
            } else {
                "flush"
            };
            format!(
                "{{\"event\":\"{kind}\",\"step\":{step},\"index\":{},\"k_first\":{},\"k_last\":{},\"t_start\":{},\"t_end\":{},\"start_sec\":{},\"end_sec\":{}}}",
                segment.index,
                segment.k_first_nonblank,
                segment.k_last_nonblank,
                segment.t_start,
                segment.t_end,
                format_seconds(segment.start_sec(frame_shift_ms)),
                format_seconds(segment.end_sec(frame_shift_ms)),
            )
        }
    }
}

#[derive(Deserialize)]
struct SegmentLine {
    index: usize,
    t_start: usize,
    t_end: usize,
}

/// Parses the jsonl format back into segments. Only the frame fields are
/// read; `k_*` are set to the frame span and `n_tokens` to zero.
pub fn read_segments_jsonl<R: BufRead>(reader: R) -> Result<Vec<Segment>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: SegmentLine = serde_json::from_str(&line)?;
        if s.t_start == 0 || s.t_start > s.t_end {
            return Err(Error::InvalidStream(format!(
                "line {}: invalid span {}..{}",
                lineno + 1,
                s.t_start,
                s.t_end
            )));
        }
        out.push(Segment {
            index: s.index,
            k_first_nonblank: s.t_start,
            k_last_nonblank: s.t_end,
            t_start: s.t_start,
            t_end: s.t_end,
            n_tokens: 0,
        });
    }
    Ok(out)
}
