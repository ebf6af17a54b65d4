use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use ctcseg::io::{read_annotation_file, write_posterior_file, write_wav_mono};
use ctcseg::simulate::{synthesize_audio, synthesize_posteriors, SynthesisConfig};
use ctcseg::SegmenterConfig;
use log::info;

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Reference annotation JSON: {"duration_sec": f, "regions": [[s, e], ...]}.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// CTCP file to write.
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum spike displacement, in subsampled frames.
    #[arg(long, default_value_t = 0)]
    jitter: usize,
    /// Longest blank gap between spikes inside a region; must be below V.
    #[arg(long, default_value_t = 3)]
    spike_gap_max: usize,
    #[arg(long, default_value_t = 10.0)]
    frame_shift_ms: f64,
    #[arg(long, default_value_t = 4)]
    subsample_factor: usize,
    /// Blank-run threshold the stream is meant for; bounds the spike gap.
    #[arg(short = 'V', long = "threshold", default_value_t = 16)]
    threshold: usize,
    /// Alphabet size including blank; overrides the annotation's value.
    #[arg(long)]
    num_labels: Option<usize>,
    #[arg(long, default_value_t = 0)]
    blank_id: u32,
    /// Also write matching 16-bit mono audio here.
    #[arg(long)]
    wav: Option<PathBuf>,
    #[arg(long, default_value_t = 16000)]
    sample_rate: u32,
}

pub fn run(a: &SimulateArgs) -> Result<()> {
    let mut reference = read_annotation_file(&a.reference)
        .with_context(|| format!("reading annotation {}", a.reference.display()))?;
    if let Some(n) = a.num_labels {
        reference = reference.with_alphabet_size(n);
    }
    let cfg = SegmenterConfig {
        v_threshold: a.threshold,
        subsample_factor: a.subsample_factor,
        blank_id: a.blank_id,
        ..SegmenterConfig::default()
    };
    let syn = SynthesisConfig {
        frame_shift_ms: a.frame_shift_ms,
        jitter_steps: a.jitter,
        spike_gap_max: a.spike_gap_max,
        seed: a.seed,
    };
    let stream = synthesize_posteriors(&reference, &cfg, &syn)?;
    write_posterior_file(&stream, &a.output)
        .with_context(|| format!("writing {}", a.output.display()))?;
    info!(
        "{} rows x {} labels, {} regions",
        stream.num_frames(),
        stream.num_labels(),
        reference.speech_regions.len()
    );
    if let Some(wav) = &a.wav {
        let samples = synthesize_audio(&reference, a.sample_rate, a.seed);
        write_wav_mono(wav, &samples, a.sample_rate)
            .with_context(|| format!("writing {}", wav.display()))?;
    }
    Ok(())
}
