//! Real-time factor: processing time divided by audio duration.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::greedy::{greedy_decode, TieBreak};
use crate::io::{read_ctcp, write_segments, OutputFormat};
use crate::segmenter::{filter_min_length, segment_offline};
use crate::types::{PosteriorStream, Segment, SegmenterConfig};

pub fn rtf(elapsed: Duration, audio_duration_sec: f64) -> f64 {
    assert!(audio_duration_sec > 0.0, "audio duration must be positive");
    elapsed.as_secs_f64() / audio_duration_sec
}

/// Runs `work` once and returns its result with the RTF it achieved.
pub fn measure_rtf<R>(audio_duration_sec: f64, work: impl FnOnce() -> R) -> (R, f64) {
    let start = Instant::now();
    let out = work();
    (out, rtf(start.elapsed(), audio_duration_sec))
}

/// The timed core: greedy decoding plus offline segmentation and the
/// min-length filter. No file I/O.
pub fn run_core(stream: &PosteriorStream, cfg: &SegmenterConfig) -> Result<Vec<Segment>> {
    let labels = greedy_decode(stream, TieBreak::LowestId)?;
    let segs = segment_offline(&labels, cfg, stream.total_feature_frames())?;
    Ok(filter_min_length(segs, cfg))
}

/// Core plus reading the CTCP input and writing jsonl output.
pub fn run_e2e(input: &Path, output: &Path, cfg: &SegmenterConfig) -> Result<usize> {
    let stream = read_ctcp(BufReader::new(File::open(input)?))?;
    let segs = run_core(&stream, cfg)?;
    let mut out = BufWriter::new(File::create(output).map_err(Error::Sink)?);
    write_segments(
        &segs,
        OutputFormat::Jsonl,
        f64::from(stream.frame_shift_ms()),
        &mut out,
    )?;
    out.flush().map_err(Error::Sink)?;
    Ok(segs.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Core,
    EndToEnd,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub mode: &'static str,
    pub repeat: usize,
    pub audio_sec: f64,
    pub num_frames: usize,
    pub samples: Vec<f64>,
    pub median_rtf: f64,
    /// Posterior rows processed per wall-clock second at the median.
    pub frames_per_sec: f64,
    pub n_segments: usize,
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Runs `one_run` `repeat` times over at most `jobs` threads and
/// collects the per-run RTFs in run order.
fn collect_runs<F>(
    repeat: usize,
    jobs: usize,
    audio_sec: f64,
    one_run: F,
) -> Result<(Vec<f64>, usize)>
where
    F: Fn(usize) -> Result<usize> + Sync,
{
    let results: Mutex<Vec<Option<(f64, usize)>>> = Mutex::new(vec![None; repeat]);
    let first_err: Mutex<Option<Error>> = Mutex::new(None);
    let jobs = jobs.clamp(1, repeat.max(1));
    std::thread::scope(|scope| {
        for worker in 0..jobs {
            let (results, first_err, one_run) = (&results, &first_err, &one_run);
            scope.spawn(move || {
                for i in (worker..repeat).step_by(jobs) {
                    let (res, r) = measure_rtf(audio_sec, || one_run(i));
                    match res {
                        Ok(n) => results.lock().unwrap()[i] = Some((r, n)),
                        Err(e) => {
                            first_err.lock().unwrap().get_or_insert(e);
                            return;
                        }
                    }
                }
            });
        }
    });
    if let Some(e) = first_err.into_inner().unwrap() {
        return Err(e);
    }
    let runs: Vec<(f64, usize)> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .flatten()
        .collect();
    let n = runs.first().map_or(0, |r| r.1);
    Ok((runs.into_iter().map(|r| r.0).collect(), n))
}

fn report(
    mode: BenchMode,
    audio_sec: f64,
    num_frames: usize,
    samples: Vec<f64>,
    n_segments: usize,
) -> BenchReport {
    let median_rtf = median(&samples);
    let secs = median_rtf * audio_sec;
    BenchReport {
        mode: match mode {
            BenchMode::Core => "core",
            BenchMode::EndToEnd => "e2e",
        },
        repeat: samples.len(),
        audio_sec,
        num_frames,
        samples,
        median_rtf,
        frames_per_sec: if secs > 0.0 {
            num_frames as f64 / secs
        } else {
            f64::INFINITY
        },
        n_segments,
    }
}

fn check_bench_args(num_frames: usize, repeat: usize) -> Result<()> {
    if num_frames == 0 {
        return Err(Error::EmptyStream);
    }
    if repeat == 0 {
        return Err(Error::InvalidConfig("repeat must be at least 1".into()));
    }
    Ok(())
}

/// Times [`run_core`] on an in-memory stream.
pub fn bench_core(
    stream: &PosteriorStream,
    cfg: &SegmenterConfig,
    repeat: usize,
    jobs: usize,
) -> Result<BenchReport> {
    check_bench_args(stream.num_frames(), repeat)?;
    let audio_sec = stream.duration_sec();
    let (samples, n) = collect_runs(
        repeat,
        jobs,
        audio_sec,
        |_| Ok(run_core(stream, cfg)?.len()),
    )?;
    Ok(report(
        BenchMode::Core,
        audio_sec,
        stream.num_frames(),
        samples,
        n,
    ))
}

/// Times [`run_e2e`]; run `i` writes to `output_for(i)`.
pub fn bench_e2e(
    input: &Path,
    output_for: impl Fn(usize) -> std::path::PathBuf + Sync,
    cfg: &SegmenterConfig,
    repeat: usize,
    jobs: usize,
) -> Result<BenchReport> {
    // header-only read to learn the duration without timing it
    let reader = crate::io::CtcpReader::new(BufReader::new(File::open(input)?))?;
    let h = *reader.header();
    let num_frames = h.num_frames as usize;
    check_bench_args(num_frames, repeat)?;
    let audio_sec =
        (num_frames * h.subsample_factor as usize) as f64 * f64::from(h.frame_shift_ms) / 1000.0;
    let (samples, n) = collect_runs(repeat, jobs, audio_sec, |i| {
        run_e2e(input, &output_for(i), cfg)
    })?;
    Ok(report(
        BenchMode::EndToEnd,
        audio_sec,
        num_frames,
        samples,
        n,
    ))
}
