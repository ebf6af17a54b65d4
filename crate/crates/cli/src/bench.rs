use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use ctcseg::io::{read_posterior_file, write_posterior_file};
use ctcseg::rtf::{bench_core, bench_e2e};
use ctcseg::simulate::{synthesize_posteriors, ReferenceAnnotation, SynthesisConfig};
use ctcseg::{PosteriorStream, SegmenterConfig};
use log::info;

use crate::SegmenterArgs;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RtfMode {
    /// Decoding and segmentation only.
    Core,
    /// Including CTCP reading and jsonl writing.
    E2e,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// CTCP file to time; a synthetic stream is generated when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 60.0, conflicts_with = "input")]
    synthetic_seconds: f64,
    #[arg(long, default_value_t = 3000, conflicts_with = "input")]
    num_labels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "core")]
    rtf: RtfMode,
    #[arg(long, default_value_t = 5)]
    repeat: usize,
    /// Worker threads running repeats concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    seg: SegmenterArgs,
}

/// Alternating 2.5 s speech and 1.5 s pause over `seconds`.
fn regions(seconds: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut t = 0.5;
    while t + 2.5 < seconds {
        out.push((t, t + 2.5));
        t += 4.0;
    }
    out
}

fn synthetic(a: &BenchArgs) -> Result<PosteriorStream> {
    let reference = ReferenceAnnotation::new(regions(a.synthetic_seconds), a.synthetic_seconds)?
        .with_alphabet_size(a.num_labels);
    let cfg = a.seg.config(4, 0)?;
    let syn = SynthesisConfig {
        seed: a.seed,
        jitter_steps: 1,
        ..SynthesisConfig::default()
    };
    Ok(synthesize_posteriors(&reference, &cfg, &syn)?)
}

pub fn run(a: &BenchArgs) -> Result<()> {
    let tmp = tempfile::tempdir()?;
    let input = match &a.input {
        Some(p) => p.clone(),
        None => {
            let p = tmp.path().join("synthetic.ctcp");
            write_posterior_file(&synthetic(a)?, &p)?;
            p
        }
    };
    let stream =
        read_posterior_file(&input).with_context(|| format!("reading {}", input.display()))?;
    let cfg: SegmenterConfig = a.seg.config(stream.subsample_factor(), stream.blank_id())?;
    info!(
        "{:.1} s, {} rows x {} labels",
        stream.duration_sec(),
        stream.num_frames(),
        stream.num_labels()
    );
    let report = match a.rtf {
        RtfMode::Core => bench_core(&stream, &cfg, a.repeat, a.jobs)?,
        RtfMode::E2e => bench_e2e(
            &input,
            |i| tmp.path().join(format!("out{i}.jsonl")),
            &cfg,
            a.repeat,
            a.jobs,
        )?,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
