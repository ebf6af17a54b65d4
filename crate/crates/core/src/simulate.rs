//! Seeded synthetic CTC posteriors and audio from reference annotations.
//!
//! Non-speech steps are blank-dominated. Inside a speech region the
//! greedy path shows isolated non-blank spikes separated by short blank
//! gaps, the peaky pattern CTC models produce. Spikes can be displaced by
//! a few steps to mimic the model firing early or late relative to the
//! true speech boundaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{LabelId, PosteriorStream, ScoreKind, SegmenterConfig};

const EPS: f64 = 1e-9;
const DEFAULT_ALPHABET: usize = 32;

/// Ground-truth speech regions in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceAnnotation {
    pub speech_regions: Vec<(f64, f64)>,
    pub total_duration_sec: f64,
    pub label_alphabet_size: usize,
}

impl ReferenceAnnotation {
    pub fn new(speech_regions: Vec<(f64, f64)>, total_duration_sec: f64) -> Result<Self> {
        if !(total_duration_sec.is_finite() && total_duration_sec >= 0.0) {
            return Err(Error::InvalidAnnotation(format!(
                "duration {total_duration_sec} must be a non-negative number"
            )));
        }
        let mut prev_end = 0.0f64;
        for (i, &(s, e)) in speech_regions.iter().enumerate() {
            if !(s.is_finite() && e.is_finite()) || s < 0.0 || e < s || e > total_duration_sec {
                return Err(Error::InvalidAnnotation(format!(
                    "region {} [{s}, {e}] outside [0, {total_duration_sec}] or reversed",
                    i + 1
                )));
            }
            if i > 0 && s < prev_end {
                return Err(Error::InvalidAnnotation(format!(
                    "region {} starts at {s} before the previous region ends at {prev_end}",
                    i + 1
                )));
            }
            prev_end = e;
        }
        Ok(Self {
            speech_regions,
            total_duration_sec,
            label_alphabet_size: DEFAULT_ALPHABET,
        })
    }

    pub fn with_alphabet_size(mut self, n: usize) -> Self {
        self.label_alphabet_size = n;
        self
    }

    /// Number of whole feature frames in the annotated duration.
    pub fn total_frames(&self, frame_shift_ms: f64) -> usize {
        floor_eps(self.total_duration_sec * 1000.0 / frame_shift_ms).max(0.0) as usize
    }
}

pub(crate) fn ceil_eps(x: f64) -> f64 {
    (x - EPS).ceil()
}

pub(crate) fn floor_eps(x: f64) -> f64 {
    (x + EPS).floor()
}

/// Inclusive 1-based index range `[lo, hi]` of grid points `i * unit_ms`
/// falling inside `[start_sec, end_sec]`, clipped to `[1, max_index]`.
pub fn grid_span(
    start_sec: f64,
    end_sec: f64,
    unit_ms: f64,
    max_index: usize,
) -> Option<(usize, usize)> {
    let lo = ceil_eps(start_sec * 1000.0 / unit_ms).max(1.0) as usize;
    let hi = floor_eps(end_sec * 1000.0 / unit_ms).min(max_index as f64);
    if hi < 1.0 || lo as f64 > hi {
        return None;
    }
    Some((lo, hi as usize))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisConfig {
    /// Raw feature frame shift.
    pub frame_shift_ms: f64,
    /// Maximum displacement of each spike, in subsampled steps.
    pub jitter_steps: usize,
    /// Longest blank gap between spikes inside a region. Must be below `V`.
    pub spike_gap_max: usize,
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            frame_shift_ms: 10.0,
            jitter_steps: 0,
            spike_gap_max: 3,
            seed: 0,
        }
    }
}

/// Non-blank spike positions (1-based steps) and their labels.
fn place_spikes(
    reference: &ReferenceAnnotation,
    cfg: &SegmenterConfig,
    syn: &SynthesisConfig,
    num_steps: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, LabelId)> {
    let step_ms = syn.frame_shift_ms * cfg.subsample_factor as f64;
    let n = reference.label_alphabet_size as u32;
    let mut spikes = Vec::new();
    for &(s, e) in &reference.speech_regions {
        let Some((lo, hi)) = grid_span(s, e, step_ms, num_steps) else {
            continue;
        };
        let mut pos = lo;
        loop {
            // uniform over the non-blank labels
            let mut label = rng.gen_range(0..n - 1);
            if label >= cfg.blank_id {
                label += 1;
            }
            spikes.push((pos, label));
            if pos == hi {
                break;
            }
            let gap = rng.gen_range(0..=syn.spike_gap_max);
            pos = (pos + gap + 1).min(hi);
        }
    }
    if syn.jitter_steps > 0 {
        let j = syn.jitter_steps as i64;
        for (pos, _) in spikes.iter_mut() {
            let moved = *pos as i64 + rng.gen_range(-j..=j);
            *pos = moved.clamp(1, num_steps as i64) as usize;
        }
    }
    spikes
}

/// Builds a probability stream whose greedy path follows the reference.
///
/// The stream has `floor(duration / frame_shift)` feature frames and
/// `that / r` subsampled steps. Output is bit-identical for a fixed seed.
pub fn synthesize_posteriors(
    reference: &ReferenceAnnotation,
    cfg: &SegmenterConfig,
    syn: &SynthesisConfig,
) -> Result<PosteriorStream> {
    cfg.validate()?;
    if syn.spike_gap_max == 0 || syn.spike_gap_max >= cfg.v_threshold {
        return Err(Error::InvalidConfig(format!(
            "spike gap max {} must be in [1, V) with V = {}",
            syn.spike_gap_max, cfg.v_threshold
        )));
    }
    if !(syn.frame_shift_ms.is_finite() && syn.frame_shift_ms > 0.0) {
        return Err(Error::InvalidConfig("frame shift must be positive".into()));
    }
    let n = reference.label_alphabet_size;
    if n < 2 || cfg.blank_id as usize >= n {
        return Err(Error::InvalidConfig(format!(
            "alphabet of {n} labels cannot hold blank id {}",
            cfg.blank_id
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(syn.seed);
    let num_steps = reference.total_frames(syn.frame_shift_ms) / cfg.subsample_factor;

    let mut spike_at: Vec<Option<LabelId>> = vec![None; num_steps];
    for (pos, label) in place_spikes(reference, cfg, syn, num_steps, &mut rng) {
        spike_at[pos - 1] = Some(label);
    }

    let blank = cfg.blank_id as usize;
    let mut data = vec![0f32; num_steps * n];
    for (row, spike) in data.chunks_exact_mut(n).zip(&spike_at) {
        // runner-up label that shares the leftover mass
        let mut other = rng.gen_range(0..n - 1);
        if other >= blank {
            other += 1;
        }
        let (top, top_p, second, second_share) = match *spike {
            None => (blank, rng.gen_range(0.90f32..0.99), other, 0.5f32),
            Some(label) => (label as usize, rng.gen_range(0.55f32..0.95), blank, 0.6f32),
        };
        let rest = 1.0 - top_p;
        if n == 2 {
            row[top] = top_p;
            row[1 - top] = rest;
            continue;
        }
        let second_p = rest * second_share;
        let spread = (rest - second_p) / (n - 2) as f32;
        row.fill(spread);
        row[top] = top_p;
        row[second] = second_p;
    }

    PosteriorStream::new(
        n,
        cfg.blank_id,
        syn.frame_shift_ms as f32,
        cfg.subsample_factor,
        ScoreKind::Probabilities,
        data,
    )
}

/// Noise-like speech bursts over a faint noise floor, as 16-bit PCM.
pub fn synthesize_audio(reference: &ReferenceAnnotation, sample_rate: u32, seed: u64) -> Vec<i16> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_a0d1_0000_0000);
    let n = floor_eps(reference.total_duration_sec * f64::from(sample_rate)) as usize;
    let sr = f64::from(sample_rate);
    let mut samples = Vec::with_capacity(n);
    let mut regions = reference.speech_regions.iter().peekable();
    for i in 0..n {
        let t = i as f64 / sr;
        while regions.peek().is_some_and(|&&(_, e)| t > e) {
            regions.next();
        }
        let in_speech = regions.peek().is_some_and(|&&(s, e)| t >= s && t <= e);
        let amp = if in_speech {
            // 4 Hz syllabic envelope
            0.3 * (0.6 + 0.4 * (2.0 * std::f64::consts::PI * 4.0 * t).sin().abs())
        } else {
            0.003
        };
        let v = amp * rng.gen_range(-1.0f64..1.0);
        samples.push((v * 32767.0).round() as i16);
    }
    samples
}
