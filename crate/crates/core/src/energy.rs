//! Short-time energy VAD used as a baseline.
//!
//! Frames are non-overlapping; a frame is active when its mean-square
//! amplitude is above the threshold. Activity is held for
//! `hangover_frames` after the last active frame, and every contiguous run
//! of held frames becomes one segment.

use crate::error::{Error, Result};
use crate::types::Segment;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyVadConfig {
    pub frame_ms: f64,
    /// Mean-square threshold on samples normalized to `[-1, 1]`.
    pub threshold: f64,
    pub hangover_frames: usize,
}

impl Default for EnergyVadConfig {
    fn default() -> Self {
        Self {
            frame_ms: 10.0,
            threshold: 1e-3,
            hangover_frames: 30,
        }
    }
}

/// Samples per analysis frame.
pub fn frame_len(sample_rate_hz: u32, frame_ms: f64) -> Result<usize> {
    if !(frame_ms.is_finite() && frame_ms > 0.0) || sample_rate_hz == 0 {
        return Err(Error::InvalidConfig(format!(
            "frame length {frame_ms} ms at {sample_rate_hz} Hz"
        )));
    }
    let len = (f64::from(sample_rate_hz) * frame_ms / 1000.0).round() as usize;
    if len == 0 {
        return Err(Error::InvalidConfig(format!(
            "{frame_ms} ms is shorter than one sample at {sample_rate_hz} Hz"
        )));
    }
    Ok(len)
}

/// Mean-square energy of each frame. A trailing partial frame is kept.
pub fn frame_energies(samples: &[f32], frame_len: usize) -> Vec<f64> {
    samples
        .chunks(frame_len)
        .map(|c| c.iter().map(|&s| f64::from(s) * f64::from(s)).sum::<f64>() / c.len() as f64)
        .collect()
}

/// Segments in 1-based frame units of `cfg.frame_ms`.
///
/// `k_first_nonblank`/`k_last_nonblank` hold the first and last frames
/// actually above threshold; `t_end` includes the hangover.
pub fn energy_vad(
    samples: &[f32],
    sample_rate_hz: u32,
    cfg: &EnergyVadConfig,
) -> Result<Vec<Segment>> {
    if samples.is_empty() {
        return Err(Error::EmptyAudio);
    }
    let len = frame_len(sample_rate_hz, cfg.frame_ms)?;
    Ok(segments_from_energies(&frame_energies(samples, len), cfg))
}

pub fn segments_from_energies(energies: &[f64], cfg: &EnergyVadConfig) -> Vec<Segment> {
    let total = energies.len();
    let mut out: Vec<Segment> = Vec::new();
    for (t, _) in (1..).zip(energies).filter(|(_, &e)| e > cfg.threshold) {
        match out.last_mut() {
            Some(seg) if t <= seg.t_end + 1 => {
                seg.k_last_nonblank = t;
                seg.t_end = (t + cfg.hangover_frames).min(total);
            }
            _ => out.push(Segment {
                index: out.len() + 1,
                k_first_nonblank: t,
                k_last_nonblank: t,
                t_start: t,
                t_end: (t + cfg.hangover_frames).min(total),
                n_tokens: 0,
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SR: u32 = 16_000;

    fn cfg(threshold: f64, hangover: usize) -> EnergyVadConfig {
        EnergyVadConfig {
            frame_ms: 10.0,
            threshold,
            hangover_frames: hangover,
        }
    }

    #[test]
    fn silence_has_no_segments() {
        assert!(energy_vad(&[0.0; 16_000], SR, &cfg(1e-6, 5))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn constant_signal_is_one_segment() {
        let segs = energy_vad(&[1.0; 16_000], SR, &cfg(0.5, 5)).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!((segs[0].t_start, segs[0].t_end), (1, 100));
    }

    #[test]
    fn burst_with_hangover() {
        // 100 ms burst starting at 500 ms in 1 s of silence
        let mut x = vec![0.0f32; 16_000];
        for s in &mut x[8_000..9_600] {
            *s = 0.5;
        }
        let segs = energy_vad(&x, SR, &cfg(0.01, 2)).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!((segs[0].t_start, segs[0].t_end), (51, 62));
        assert_eq!(segs[0].num_feature_frames(), 12);
    }

    #[test]
    fn hangover_bridges_short_gaps() {
        let e = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let spans = |h| {
            segments_from_energies(&e, &cfg(0.5, h))
                .iter()
                .map(|s| (s.t_start, s.t_end))
                .collect::<Vec<_>>()
        };
        assert_eq!(spans(0), vec![(1, 1), (4, 4), (9, 9)]);
        assert_eq!(spans(2), vec![(1, 6), (9, 9)]);
        assert_eq!(spans(3), vec![(1, 7), (9, 9)]);
        assert_eq!(spans(4), vec![(1, 9)]);
    }

    #[test]
    fn empty_audio_and_bad_frames() {
        assert!(matches!(
            energy_vad(&[], SR, &cfg(0.1, 0)),
            Err(Error::EmptyAudio)
        ));
        let bad = EnergyVadConfig {
            frame_ms: 0.0,
            ..cfg(0.1, 0)
        };
        assert!(energy_vad(&[0.0; 10], SR, &bad).is_err());
    }

    #[test]
    fn raising_threshold_can_split_a_dip() {
        // count is not monotone in the threshold for arbitrary envelopes
        let e = [5.0, 1.0, 5.0];
        assert_eq!(segments_from_energies(&e, &cfg(0.5, 0)).len(), 1);
        assert_eq!(segments_from_energies(&e, &cfg(2.0, 0)).len(), 2);
    }

    proptest! {
        // Unimodal envelopes (rise then fall) have one interval above any
        // threshold, so the count can only drop as the threshold rises.
        #[test]
        fn count_non_increasing_for_unimodal(
            rise in prop::collection::vec(0.0f64..1.0, 1..40),
            fall in prop::collection::vec(0.0f64..1.0, 0..40),
            hangover in 0usize..5,
            mut thresholds in prop::collection::vec(0.0f64..40.0, 2..6),
        ) {
            let mut env = Vec::new();
            let mut acc = 0.0;
            for d in rise { acc += d; env.push(acc); }
            for d in fall { acc = (acc - d).max(0.0); env.push(acc); }
            thresholds.sort_by(f64::total_cmp);
            let counts: Vec<usize> = thresholds
                .iter()
                .map(|&th| segments_from_energies(&env, &cfg(th, hangover)).len())
                .collect();
            prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{:?}", counts);
        }
    }
}
