use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use ctcseg::energy::{energy_vad, frame_len, EnergyVadConfig};
use ctcseg::eval::{evaluate, EvalReport};
use ctcseg::io::{read_annotation_file, read_posterior_file, read_segments_jsonl, read_wav_mono};
use ctcseg::rtf::{measure_rtf, run_core};
use ctcseg::simulate::ReferenceAnnotation;
use serde_json::{json, Value};

use crate::SegmenterArgs;

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Reference annotation JSON.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Hypothesis segments in jsonl, as written by `segment`.
    #[arg(long, conflicts_with_all = ["input", "compare"], required_unless_present = "input")]
    hyp: Option<PathBuf>,
    /// CTCP stream to segment and score.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Also run the energy VAD on `--wav` and report both methods.
    #[arg(long, requires_all = ["input", "wav"])]
    compare: bool,
    /// Audio paired with `--input`.
    #[arg(long)]
    wav: Option<PathBuf>,
    /// Frame shift of `--hyp` segments.
    #[arg(long, default_value_t = 10.0)]
    frame_shift_ms: f64,
    #[command(flatten)]
    seg: SegmenterArgs,
    /// Energy VAD mean-square threshold.
    #[arg(long, default_value_t = 1e-3)]
    energy_threshold: f64,
    /// Energy VAD hangover, in frames.
    #[arg(long, default_value_t = 30)]
    hangover: usize,
}

fn with_method(method: &str, report: &EvalReport) -> Result<Value> {
    let mut v = serde_json::to_value(report)?;
    v.as_object_mut()
        .expect("report serializes to an object")
        .insert("method".into(), json!(method));
    Ok(v)
}

fn check_frames(what: &str, got: usize, expected: usize, tolerance: usize) -> Result<()> {
    if got.abs_diff(expected) > tolerance {
        bail!("{what} covers {got} frames but the reference has {expected}");
    }
    Ok(())
}

fn eval_ctcp(
    a: &EvalArgs,
    input: &Path,
    reference: &ReferenceAnnotation,
) -> Result<(EvalReport, f64)> {
    let stream =
        read_posterior_file(input).with_context(|| format!("reading {}", input.display()))?;
    let shift = f64::from(stream.frame_shift_ms());
    let r = stream.subsample_factor();
    let ref_frames = reference.total_frames(shift);
    // one CTCP row of slack: the stream drops the ragged tail
    check_frames("stream", stream.total_feature_frames(), ref_frames, r)?;
    let cfg = a.seg.config(r, stream.blank_id())?;
    let (segs, rtf) = if stream.is_empty() {
        (Vec::new(), 0.0)
    } else {
        let (segs, rtf) = measure_rtf(stream.duration_sec(), || run_core(&stream, &cfg));
        (segs?, rtf)
    };
    let total = ref_frames.max(stream.total_feature_frames());
    let report = EvalReport {
        rtf,
        ..evaluate(&segs, reference, shift, total)
    };
    Ok((report, shift))
}

fn eval_energy(
    a: &EvalArgs,
    wav: &Path,
    reference: &ReferenceAnnotation,
    shift: f64,
) -> Result<EvalReport> {
    let (samples, rate) =
        read_wav_mono(wav).with_context(|| format!("reading {}", wav.display()))?;
    let cfg = EnergyVadConfig {
        frame_ms: shift,
        threshold: a.energy_threshold,
        hangover_frames: a.hangover,
    };
    let ref_frames = reference.total_frames(shift);
    check_frames(
        "audio",
        samples.len().div_ceil(frame_len(rate, shift)?),
        ref_frames,
        1,
    )?;
    let audio_sec = samples.len() as f64 / f64::from(rate);
    let (segs, rtf) = measure_rtf(audio_sec, || energy_vad(&samples, rate, &cfg));
    let segs = segs?;
    let total = ref_frames.max(segs.last().map_or(0, |s| s.t_end));
    Ok(EvalReport {
        rtf,
        ..evaluate(&segs, reference, shift, total)
    })
}

fn eval_hyp(a: &EvalArgs, hyp: &Path, reference: &ReferenceAnnotation) -> Result<EvalReport> {
    let file = File::open(hyp).with_context(|| format!("opening {}", hyp.display()))?;
    let segs = read_segments_jsonl(BufReader::new(file))?;
    let ref_frames = reference.total_frames(a.frame_shift_ms);
    let last = segs.iter().map(|s| s.t_end).max().unwrap_or(0);
    if last > ref_frames + 1 {
        bail!("hypothesis reaches frame {last} but the reference has {ref_frames}");
    }
    Ok(evaluate(
        &segs,
        reference,
        a.frame_shift_ms,
        ref_frames.max(last),
    ))
}

pub fn run(a: &EvalArgs) -> Result<()> {
    let reference = read_annotation_file(&a.reference)
        .with_context(|| format!("reading annotation {}", a.reference.display()))?;
    let out = match (&a.hyp, &a.input) {
        (Some(hyp), _) => serde_json::to_value(eval_hyp(a, hyp, &reference)?)?,
        (None, Some(input)) if a.compare => {
            let wav = a.wav.as_ref().expect("clap requires --wav with --compare");
            let (ctc, shift) = eval_ctcp(a, input, &reference)?;
            let energy = eval_energy(a, wav, &reference, shift)?;
            json!({
                "methods": [with_method("ctc_blank", &ctc)?, with_method("energy_vad", &energy)?]
            })
        }
        (None, Some(input)) => serde_json::to_value(eval_ctcp(a, input, &reference)?.0)?,
        (None, None) => unreachable!("clap requires --hyp or --input"),
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
