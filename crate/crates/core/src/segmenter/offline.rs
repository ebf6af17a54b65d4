use crate::error::{Error, Result};
use crate::greedy::collapsed_len;
use crate::types::{LabelStream, Segment, SegmenterConfig};

/// Checks that the label stream, config and feature-frame count agree.
///
/// `total_frames` may exceed `r * K` by up to `r - 1` frames (a ragged
/// tail that does not fill a subsampled step) or fall short by the same
/// amount.
pub(crate) fn check_inputs(
    labels: &LabelStream,
    cfg: &SegmenterConfig,
    total_frames: usize,
) -> Result<()> {
    cfg.validate()?;
    if cfg.blank_id as usize >= labels.num_labels() {
        return Err(Error::InvalidConfig(format!(
            "blank id {} out of range for {} labels",
            cfg.blank_id,
            labels.num_labels()
        )));
    }
    let covered = labels.num_steps() * cfg.subsample_factor;
    if covered.abs_diff(total_frames) >= cfg.subsample_factor {
        return Err(Error::InvalidConfig(format!(
            "{total_frames} feature frames inconsistent with {} steps at r={}",
            labels.num_steps(),
            cfg.subsample_factor
        )));
    }
    Ok(())
}

/// Splits the label stream at every blank run of length `>= V`, expands
/// each remaining non-blank span by the onset and offset margins, clips
/// to `[1, total_frames]` and merges spans that end up sharing frames.
pub fn segment_offline(
    labels: &LabelStream,
    cfg: &SegmenterConfig,
    total_frames: usize,
) -> Result<Vec<Segment>> {
    Ok(super::merge_overlapping(segment_unmerged(
        labels,
        cfg,
        total_frames,
    )?))
}

/// Like [`segment_offline`] but without the final overlap merge.
pub fn segment_unmerged(
    labels: &LabelStream,
    cfg: &SegmenterConfig,
    total_frames: usize,
) -> Result<Vec<Segment>> {
    check_inputs(labels, cfg, total_frames)?;
    let blank = cfg.blank_id;
    let seq = labels.labels();

    // (k_first, k_last) of each run of non-blanks separated by < V blanks
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut current: Option<(usize, usize)> = None;
    for (k, _) in (1..).zip(seq).filter(|(_, &l)| l != blank) {
        current = match current {
            Some((first, last)) if k - last - 1 < cfg.v_threshold => Some((first, k)),
            Some(done) => {
                spans.push(done);
                Some((k, k))
            }
            None => Some((k, k)),
        };
    }
    spans.extend(current);

    Ok(spans
        .into_iter()
        .enumerate()
        .map(|(i, (first, last))| Segment {
            index: i + 1,
            k_first_nonblank: first,
            k_last_nonblank: last,
            t_start: cfg.expanded_start(first, Some(total_frames)),
            t_end: cfg.expanded_end(last, Some(total_frames)),
            n_tokens: collapsed_len(&seq[first - 1..last], blank),
        })
        .collect())
}
