use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use ctcseg::greedy::argmax;
use ctcseg::io::{format_event, read_ctcp, CtcpReader, OutputFormat, SegmentWriter};
use ctcseg::{
    filter_min_length, greedy_decode, segment_offline, OnlineSegmenter, SegmentAssembler,
    SegmentEvent, TieBreak,
};
use log::{debug, info};

use crate::{InputArgs, SegmenterArgs};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Offline,
    Online,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Jsonl,
    Ctm,
    Tsv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Jsonl => OutputFormat::Jsonl,
            Format::Ctm => OutputFormat::Ctm,
            Format::Tsv => OutputFormat::Tsv,
        }
    }
}

#[derive(Args, Debug)]
pub struct SegmentArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    seg: SegmenterArgs,
    #[arg(long, value_enum, default_value = "offline")]
    mode: Mode,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Online mode: print open/close/flush events instead of segments.
    #[arg(long)]
    events: bool,
    /// Feature frames in the original stream, when it is not a multiple of
    /// the subsampling factor. Defaults to rows * factor.
    #[arg(long)]
    total_frames: Option<usize>,
    /// First column of CTM output.
    #[arg(long, default_value = "stream")]
    stream_id: String,
}

fn open_sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn run(a: &SegmentArgs) -> Result<()> {
    match a.mode {
        Mode::Offline if a.events => anyhow::bail!("--events needs --mode online"),
        Mode::Offline => offline(a),
        Mode::Online => online(a),
    }
}

fn offline(a: &SegmentArgs) -> Result<()> {
    let stream = read_ctcp(a.input.open()?)?;
    let cfg = a.seg.config(stream.subsample_factor(), stream.blank_id())?;
    let total = a.total_frames.unwrap_or(stream.total_feature_frames());
    info!(
        "{} rows x {} labels, r={}, V={} ({} ms)",
        stream.num_frames(),
        stream.num_labels(),
        cfg.subsample_factor,
        cfg.v_threshold,
        cfg.min_blank_duration_ms(f64::from(stream.frame_shift_ms()))
    );
    let segs = if stream.is_empty() {
        Vec::new()
    } else {
        let labels = greedy_decode(&stream, TieBreak::LowestId)?;
        filter_min_length(segment_offline(&labels, &cfg, total)?, &cfg)
    };
    let mut w = SegmentWriter::new(
        open_sink(&a.output)?,
        a.format.into(),
        f64::from(stream.frame_shift_ms()),
    )
    .with_stream_id(&a.stream_id);
    for s in &segs {
        w.write(s)?;
    }
    w.flush()?;
    Ok(())
}

/// Consumes rows as they arrive and writes each segment (or event) as
/// soon as it is final.
fn online(a: &SegmentArgs) -> Result<()> {
    let mut reader = CtcpReader::new(a.input.open()?)?;
    let h = *reader.header();
    let r = h.subsample_factor as usize;
    let cfg = a.seg.config(r, h.blank_id)?;
    if cfg.blank_id >= h.num_labels {
        anyhow::bail!("blank id {} outside {} labels", cfg.blank_id, h.num_labels);
    }
    let total = a.total_frames.unwrap_or(h.num_frames as usize * r);
    let shift = f64::from(h.frame_shift_ms);

    let mut seg = OnlineSegmenter::new(cfg)?.with_total_frames(total);
    let mut asm = SegmentAssembler::new(cfg, total);
    let mut events: Vec<SegmentEvent> = Vec::with_capacity(1);
    let mut frame = vec![0f32; h.num_labels as usize];
    let mut sink = open_sink(&a.output)?;
    let mut w = SegmentWriter::new(&mut sink, a.format.into(), shift).with_stream_id(&a.stream_id);

    let mut more = true;
    while more {
        if reader.read_frame(&mut frame)? {
            events.extend(seg.step(argmax(&frame, TieBreak::LowestId))?);
        } else {
            more = false;
            events.extend(seg.finish(total));
        }
        for ev in events.drain(..) {
            debug!("{ev:?}");
            if a.events {
                let line = format_event(&ev, shift);
                let sink = w.get_mut();
                writeln!(sink, "{line}")?;
            } else {
                for s in asm.push(&ev) {
                    w.write(&s)?;
                }
            }
            w.flush()?;
        }
    }
    if !a.events {
        for s in asm.finish() {
            w.write(&s)?;
        }
    }
    w.flush()?;
    Ok(())
}
