use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::ReferenceAnnotation;

#[derive(Serialize, Deserialize)]
struct AnnotationJson {
    duration_sec: f64,
    regions: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    num_labels: Option<usize>,
}

/// Parses `{"duration_sec": f, "regions": [[s, e], ...]}`. An optional
/// `num_labels` sets the alphabet size used for synthesis.
pub fn read_annotation<R: Read>(reader: R) -> Result<ReferenceAnnotation> {
    let raw: AnnotationJson = serde_json::from_reader(reader)?;
    let regions = raw.regions.into_iter().map(|[s, e]| (s, e)).collect();
    let mut ann = ReferenceAnnotation::new(regions, raw.duration_sec)?;
    if let Some(n) = raw.num_labels {
        if n < 2 {
            return Err(Error::InvalidAnnotation(format!(
                "num_labels must be at least 2, got {n}"
            )));
        }
        ann.label_alphabet_size = n;
    }
    Ok(ann)
}

pub fn read_annotation_file(path: impl AsRef<Path>) -> Result<ReferenceAnnotation> {
    read_annotation(BufReader::new(File::open(path)?))
}

pub fn write_annotation<W: Write>(ann: &ReferenceAnnotation, mut sink: W) -> Result<()> {
    let raw = AnnotationJson {
        duration_sec: ann.total_duration_sec,
        regions: ann.speech_regions.iter().map(|&(s, e)| [s, e]).collect(),
        num_labels: Some(ann.label_alphabet_size),
    };
    serde_json::to_writer(&mut sink, &raw)?;
    sink.write_all(b"\n").map_err(Error::Sink)
}
