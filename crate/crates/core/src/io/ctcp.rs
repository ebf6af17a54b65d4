//! CTCP: a fixed little-endian binary container for frame posteriors.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "CTCP"
//!      4     2  u16 version (1)
//!      6     1  u8 flags, bit 0 set = rows are probabilities
//!      7     1  u8 reserved (0)
//!      8     4  u32 num_frames
//!     12     4  u32 num_labels
//!     16     4  u32 blank_id
//!     20     4  f32 frame_shift_ms (raw feature frame shift)
//!     24     4  u32 subsample_factor
//!     28     .  num_frames rows of num_labels f32
//! ```
//!
//! The same byte layout is used for files and for stdin streaming.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{row_sum, LabelId, PosteriorStream, ScoreKind, ROW_SUM_TOLERANCE};

pub const MAGIC: [u8; 4] = *b"CTCP";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 28;
const FLAG_PROBABILITIES: u8 = 0x01;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic {found:?} at offset 0, expected \"CTCP\"")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported version {found} at offset 4, expected {VERSION}")]
    VersionMismatch { found: u16 },
    #[error("invalid header field at offset {offset}: {reason}")]
    InvalidHeader { offset: u64, reason: String },
    #[error("file truncated in row {row} (offset {offset})")]
    TruncatedFile { row: u64, offset: u64 },
    #[error("row {row} sums to {sum}, not 1 (offset {offset})")]
    RowSumViolation { row: u64, sum: f64, offset: u64 },
    #[error("row {row} has a NaN or out-of-range score at label {label} (offset {offset})")]
    InvalidScore { row: u64, label: usize, offset: u64 },
    #[error("unexpected data after last row at offset {offset}")]
    TrailingBytes { offset: u64 },
    #[error("read failed at offset {offset}: {source}")]
    Io {
        offset: u64,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtcpHeader {
    pub num_frames: u32,
    pub num_labels: u32,
    pub blank_id: LabelId,
    pub frame_shift_ms: f32,
    pub subsample_factor: u32,
    pub kind: ScoreKind,
}

impl CtcpHeader {
    pub fn for_stream(stream: &PosteriorStream) -> Self {
        Self {
            num_frames: stream.num_frames() as u32,
            num_labels: stream.num_labels() as u32,
            blank_id: stream.blank_id(),
            frame_shift_ms: stream.frame_shift_ms(),
            subsample_factor: stream.subsample_factor() as u32,
            kind: stream.kind(),
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&VERSION.to_le_bytes());
        b[6] = match self.kind {
            ScoreKind::Probabilities => FLAG_PROBABILITIES,
            ScoreKind::Scores => 0,
        };
        b[8..12].copy_from_slice(&self.num_frames.to_le_bytes());
        b[12..16].copy_from_slice(&self.num_labels.to_le_bytes());
        b[16..20].copy_from_slice(&self.blank_id.to_le_bytes());
        b[20..24].copy_from_slice(&self.frame_shift_ms.to_le_bytes());
        b[24..28].copy_from_slice(&self.subsample_factor.to_le_bytes());
        b
    }

    pub fn parse(b: &[u8; HEADER_LEN]) -> Result<Self, FormatError> {
        let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().unwrap());
        let found: [u8; 4] = b[0..4].try_into().unwrap();
        if found != MAGIC {
            return Err(FormatError::BadMagic { found });
        }
        let version = u16::from_le_bytes([b[4], b[5]]);
        if version != VERSION {
            return Err(FormatError::VersionMismatch { found: version });
        }
        let invalid = |offset: u64, reason: String| FormatError::InvalidHeader { offset, reason };
        if b[6] & !FLAG_PROBABILITIES != 0 {
            return Err(invalid(6, format!("unknown flag bits {:#04x}", b[6])));
        }
        let header = Self {
            num_frames: u32_at(8),
            num_labels: u32_at(12),
            blank_id: u32_at(16),
            frame_shift_ms: f32::from_le_bytes(b[20..24].try_into().unwrap()),
            subsample_factor: u32_at(24),
            kind: if b[6] & FLAG_PROBABILITIES != 0 {
                ScoreKind::Probabilities
            } else {
                ScoreKind::Scores
            },
        };
        if header.num_labels == 0 {
            return Err(invalid(12, "num_labels is zero".into()));
        }
        if header.blank_id >= header.num_labels {
            return Err(invalid(
                16,
                format!("blank id {} >= num_labels", header.blank_id),
            ));
        }
        if !(header.frame_shift_ms.is_finite() && header.frame_shift_ms > 0.0) {
            return Err(invalid(
                20,
                format!("frame shift {}", header.frame_shift_ms),
            ));
        }
        if header.subsample_factor == 0 {
            return Err(invalid(24, "subsample factor is zero".into()));
        }
        Ok(header)
    }

    fn row_bytes(&self) -> usize {
        self.num_labels as usize * 4
    }
}

/// Incremental CTCP reader. Holds one row buffer regardless of stream
/// length, so it can sit directly on stdin.
pub struct CtcpReader<R> {
    inner: R,
    header: CtcpHeader,
    row: u64,
    buf: Vec<u8>,
    done: bool,
}

impl<R: Read> CtcpReader<R> {
    pub fn new(mut inner: R) -> Result<Self, FormatError> {
        let mut hb = [0u8; HEADER_LEN];
        let got = read_full(&mut inner, &mut hb, 0)?;
        if got < 4 {
            return Err(FormatError::TruncatedFile {
                row: 0,
                offset: got as u64,
            });
        }
        // check magic and version before complaining about length
        let found: [u8; 4] = hb[0..4].try_into().unwrap();
        if found != MAGIC {
            return Err(FormatError::BadMagic { found });
        }
        if got >= 6 && u16::from_le_bytes([hb[4], hb[5]]) != VERSION {
            return Err(FormatError::VersionMismatch {
                found: u16::from_le_bytes([hb[4], hb[5]]),
            });
        }
        if got < HEADER_LEN {
            return Err(FormatError::TruncatedFile {
                row: 0,
                offset: got as u64,
            });
        }
        let header = CtcpHeader::parse(&hb)?;
        Ok(Self {
            inner,
            buf: vec![0u8; header.row_bytes()],
            header,
            row: 0,
            done: false,
        })
    }

    pub fn header(&self) -> &CtcpHeader {
        &self.header
    }

    /// Rows read so far.
    pub fn rows_read(&self) -> u64 {
        self.row
    }

    fn row_offset(&self, row: u64) -> u64 {
        HEADER_LEN as u64 + row * self.header.row_bytes() as u64
    }

    /// Reads the next row into `out` (length `num_labels`). Returns
    /// `Ok(false)` once all declared rows have been read and the input is
    /// exhausted.
    pub fn read_frame(&mut self, out: &mut [f32]) -> Result<bool, FormatError> {
        assert_eq!(out.len(), self.header.num_labels as usize);
        if self.done {
            return Ok(false);
        }
        if self.row == u64::from(self.header.num_frames) {
            self.done = true;
            let offset = self.row_offset(self.row);
            let mut probe = [0u8; 1];
            return match read_full(&mut self.inner, &mut probe, offset)? {
                0 => Ok(false),
                _ => Err(FormatError::TrailingBytes { offset }),
            };
        }
        let offset = self.row_offset(self.row);
        let got = read_full(&mut self.inner, &mut self.buf, offset)?;
        let row = self.row + 1;
        if got < self.buf.len() {
            self.done = true;
            return Err(FormatError::TruncatedFile {
                row,
                offset: offset + got as u64,
            });
        }
        for (dst, src) in out.iter_mut().zip(self.buf.chunks_exact(4)) {
            *dst = f32::from_le_bytes(src.try_into().unwrap());
        }
        let probabilities = self.header.kind == ScoreKind::Probabilities;
        if let Some(label) = out
            .iter()
            .position(|&p| p.is_nan() || (probabilities && !(0.0..=1.0).contains(&p)))
        {
            self.done = true;
            return Err(FormatError::InvalidScore {
                row,
                label,
                offset: offset + 4 * label as u64,
            });
        }
        if probabilities {
            let sum = row_sum(out);
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                self.done = true;
                return Err(FormatError::RowSumViolation { row, sum, offset });
            }
        }
        self.row = row;
        Ok(true)
    }
}

impl<R: Read> Iterator for CtcpReader<R> {
    type Item = Result<Vec<f32>, FormatError>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut frame = vec![0f32; self.header.num_labels as usize];
        match self.read_frame(&mut frame) {
            Ok(true) => Some(Ok(frame)),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

// Like read_exact but reports how many bytes arrived before EOF.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8], offset: u64) -> Result<usize, FormatError> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(source) => {
                return Err(FormatError::Io {
                    offset: offset + filled as u64,
                    source,
                })
            }
        }
    }
    Ok(filled)
}

/// Reads an entire CTCP stream into memory.
pub fn read_ctcp<R: Read>(reader: R) -> Result<PosteriorStream> {
    let mut reader = CtcpReader::new(reader)?;
    let h = *reader.header();
    let n = h.num_labels as usize;
    // cap the up-front reservation; a hostile header should not OOM us
    let declared = h.num_frames as usize * n;
    let mut data = Vec::with_capacity(declared.min(1 << 26));
    let mut row = vec![0f32; n];
    while reader.read_frame(&mut row)? {
        data.extend_from_slice(&row);
    }
    PosteriorStream::new(
        n,
        h.blank_id,
        h.frame_shift_ms,
        h.subsample_factor as usize,
        h.kind,
        data,
    )
}

pub fn read_posterior_file(path: impl AsRef<Path>) -> Result<PosteriorStream> {
    read_ctcp(BufReader::new(File::open(path)?))
}

pub fn write_ctcp<W: Write>(stream: &PosteriorStream, mut sink: W) -> Result<()> {
    if stream.num_frames() > u32::MAX as usize || stream.num_labels() > u32::MAX as usize {
        return Err(Error::InvalidStream("stream too large for CTCP".into()));
    }
    sink.write_all(&CtcpHeader::for_stream(stream).to_bytes())
        .map_err(Error::Sink)?;
    let mut bytes = Vec::with_capacity(stream.num_labels() * 4);
    for frame in stream.frames() {
        bytes.clear();
        for v in frame {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        sink.write_all(&bytes).map_err(Error::Sink)?;
    }
    sink.flush().map_err(Error::Sink)
}

pub fn write_posterior_file(stream: &PosteriorStream, path: impl AsRef<Path>) -> Result<()> {
    write_ctcp(stream, BufWriter::new(File::create(path)?))
}
