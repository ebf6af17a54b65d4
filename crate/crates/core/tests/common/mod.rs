#![allow(dead_code)]

use ctcseg::LabelId;
use rand::Rng;

pub const BLANK: LabelId = 0;

/// Brute-force blank-run segmentation, written independently of the
/// library: enumerate every maximal blank run, cut at interior runs of
/// length >= V, expand each piece's non-blank span by the margins, clip,
/// then merge overlapping spans until nothing changes.
///
/// Returns `(k_first, k_last, t_start, t_end)` per segment.
pub fn oracle_segments(
    labels: &[LabelId],
    blank: LabelId,
    v: usize,
    m_s: usize,
    m_e: usize,
    r: usize,
    total_frames: usize,
) -> Vec<(usize, usize, usize, usize)> {
    let k_len = labels.len();
    let mut runs = Vec::new();
    let mut k = 1;
    while k <= k_len {
        if labels[k - 1] == blank {
            let start = k;
            while k <= k_len && labels[k - 1] == blank {
                k += 1;
            }
            runs.push((start, k - 1));
        } else {
            k += 1;
        }
    }
    let cuts: Vec<(usize, usize)> = runs
        .into_iter()
        .filter(|&(s, e)| s > 1 && e < k_len && e - s + 1 >= v)
        .collect();

    let mut pieces = Vec::new();
    let mut lo = 1;
    for &(s, e) in &cuts {
        pieces.push((lo, s - 1));
        lo = e + 1;
    }
    pieces.push((lo, k_len));

    let mut segs: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (lo, hi) in pieces {
        let nonblank: Vec<usize> = (lo..=hi).filter(|&k| labels[k - 1] != blank).collect();
        let (Some(&first), Some(&last)) = (nonblank.first(), nonblank.last()) else {
            continue;
        };
        let t_max = total_frames as i64;
        let ts = (r as i64 * first as i64 - r as i64 * m_s as i64)
            .max(1)
            .min(t_max);
        let te = (r as i64 * last as i64 + r as i64 * m_e as i64)
            .max(1)
            .min(t_max);
        segs.push((first, last, ts as usize, te as usize));
    }

    while let Some(i) = (1..segs.len()).find(|&i| segs[i].2 <= segs[i - 1].3) {
        let b = segs.remove(i);
        let a = &mut segs[i - 1];
        a.1 = b.1;
        a.3 = a.3.max(b.3);
    }
    segs
}

#[derive(Debug, Clone)]
pub struct RandomCase {
    pub labels: Vec<LabelId>,
    pub v: usize,
    pub m_s: usize,
    pub m_e: usize,
    pub r: usize,
    pub total_frames: usize,
}

/// Random label stream with K <= 200 and parameters drawn from
/// V in [1, 8], margins in [0, 4], r in {1, 2, 4}. Streams alternate
/// blank and non-blank runs so that blank runs straddle V often.
pub fn random_case<R: Rng>(rng: &mut R) -> RandomCase {
    let v = rng.gen_range(1..=8);
    let m_s = rng.gen_range(0..=4);
    let m_e = rng.gen_range(0..=4);
    let r = [1, 2, 4][rng.gen_range(0..3)];
    let k_len = rng.gen_range(0..=200);
    let num_labels = rng.gen_range(2..=6);
    let mut labels = Vec::with_capacity(k_len);
    if rng.gen_bool(0.2) {
        // iid labels
        let p_blank = rng.gen_range(0.0..=1.0);
        for _ in 0..k_len {
            labels.push(if rng.gen_bool(p_blank) {
                BLANK
            } else {
                rng.gen_range(1..num_labels)
            });
        }
    } else {
        let mut blank_turn = rng.gen_bool(0.5);
        while labels.len() < k_len {
            let n = if blank_turn {
                rng.gen_range(0..=12)
            } else {
                rng.gen_range(1..=5)
            };
            for _ in 0..n.min(k_len - labels.len()) {
                labels.push(if blank_turn {
                    BLANK
                } else {
                    rng.gen_range(1..num_labels)
                });
            }
            blank_turn = !blank_turn;
        }
    }
    // ragged tail: up to r - 1 frames either side of r * K
    let base = r * k_len;
    let total_frames = if base == 0 {
        rng.gen_range(0..r)
    } else if rng.gen_bool(0.5) {
        base + rng.gen_range(0..r)
    } else {
        base - rng.gen_range(0..r)
    };
    RandomCase {
        labels,
        v,
        m_s,
        m_e,
        r,
        total_frames,
    }
}

impl RandomCase {
    pub fn config(&self) -> ctcseg::SegmenterConfig {
        ctcseg::SegmenterConfig::new(self.v, self.m_s, self.m_e, self.r, BLANK, 0.0).unwrap()
    }

    pub fn label_stream(&self) -> ctcseg::LabelStream {
        ctcseg::LabelStream::new(self.labels.clone(), BLANK, 6).unwrap()
    }

    pub fn oracle(&self) -> Vec<(usize, usize, usize, usize)> {
        oracle_segments(
            &self.labels,
            BLANK,
            self.v,
            self.m_s,
            self.m_e,
            self.r,
            self.total_frames,
        )
    }
}

pub fn tuples(segs: &[ctcseg::Segment]) -> Vec<(usize, usize, usize, usize)> {
    segs.iter()
        .map(|s| (s.k_first_nonblank, s.k_last_nonblank, s.t_start, s.t_end))
        .collect()
}

/// Random reference annotation of `duration` seconds with regions of at
/// least `min_len` seconds separated by at least `min_gap` seconds.
pub fn random_reference<R: Rng>(
    rng: &mut R,
    duration: f64,
    min_len: f64,
    min_gap: f64,
) -> ctcseg::simulate::ReferenceAnnotation {
    let mut regions = Vec::new();
    let mut t = rng.gen_range(0.0..2.0);
    loop {
        let s = t + rng.gen_range(min_gap..min_gap + 3.0);
        let e = s + rng.gen_range(min_len..min_len + 4.0);
        if e >= duration {
            break;
        }
        // round to 10 ms so regions sit on the frame grid
        regions.push(((s * 100.0).round() / 100.0, (e * 100.0).round() / 100.0));
        t = e;
    }
    ctcseg::simulate::ReferenceAnnotation::new(regions, duration).unwrap()
}
