//! Labeled-dataset loading: manifest files, annotation sidecars, the three
//! task encodings, and train/test splitting.
//!
//! A manifest is a small JSON document naming the task and pointing at a
//! FASTA file plus a tab-separated annotation sidecar with one interval per
//! line: `record_id<TAB>start<TAB>end<TAB>label`, end exclusive, 0-based.
//! For the DNA tasks the sidecar lists positive intervals only and
//! uncovered positions count as the negative class; for the structure task
//! the intervals must tile each record with H/E/C labels.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::{ClassId, LabeledPattern};
use crate::error::{Error, Result};
use crate::io::fasta::{parse_fasta, FastaRecord};
use crate::pipeline::{
    concat_patterns, dna_encode, hydrophobicity_encode, signal_quantize, AminoAcidSeq,
    NucleotideSeq, HYDROPHOBICITY_RANGE,
};

/// Annotation schema accepted by this loader.
pub const LABEL_FORMAT: &str = "intervals-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    CodingRegion,
    Promoter,
    Structure,
}

impl Task {
    /// Positive/negative class names for the binary DNA tasks.
    fn binary_classes(self) -> Option<(&'static str, &'static str)> {
        match self {
            Task::CodingRegion => Some(("coding", "non-coding")),
            Task::Promoter => Some(("promoter", "non-promoter")),
            Task::Structure => None,
        }
    }
}

/// Benchmark slot a manifest fills; `Custom` covers everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetName {
    #[serde(rename = "ENCODE")]
    Encode,
    #[serde(rename = "BG570")]
    Bg570,
    #[serde(rename = "HMR195")]
    Hmr195,
    #[serde(rename = "FickettTong")]
    FickettTong,
    #[serde(rename = "ASP67")]
    Asp67,
    #[serde(rename = "custom")]
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: DatasetName,
    pub task: Task,
    pub fasta: PathBuf,
    pub annotations: PathBuf,
    pub label_format: String,
}

impl DatasetManifest {
    /// Reads a manifest file, resolving relative paths against its own
    /// directory and checking the referenced files exist.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read manifest {path:?}: {e}")))?;
        let mut manifest: DatasetManifest =
            serde_json::from_str(&text).map_err(|e| Error::Format {
                line: e.line(),
                msg: format!("manifest {path:?}: {e}"),
            })?;
        if manifest.label_format != LABEL_FORMAT {
            return Err(Error::InvalidInput(format!(
                "unsupported label_format {:?} (expected {LABEL_FORMAT:?})",
                manifest.label_format
            )));
        }
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        manifest.fasta = dir.join(&manifest.fasta);
        manifest.annotations = dir.join(&manifest.annotations);
        for file in [&manifest.fasta, &manifest.annotations] {
            if !file.exists() {
                return Err(Error::InvalidInput(format!(
                    "manifest references missing file {file:?}"
                )));
            }
        }
        Ok(manifest)
    }
}

/// One labeled interval of an annotation sidecar; `end` exclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub record_id: String,
    pub start: usize,
    pub end: usize,
    pub label: String,
}

/// Parses the tab-separated sidecar format.
pub fn parse_annotations(text: &str) -> Result<Vec<Annotation>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::Format {
                line: line_no,
                msg: format!("expected 4 tab-separated fields, got {}", fields.len()),
            });
        }
        let parse_pos = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Format {
                line: line_no,
                msg: format!("invalid position {s:?}"),
            })
        };
        let (start, end) = (parse_pos(fields[1])?, parse_pos(fields[2])?);
        if start >= end {
            return Err(Error::Format {
                line: line_no,
                msg: format!("empty interval {start}..{end}"),
            });
        }
        out.push(Annotation {
            record_id: fields[0].to_string(),
            start,
            end,
            label: fields[3].to_string(),
        });
    }
    Ok(out)
}

/// Serializes annotations back to the sidecar format.
pub fn write_annotations(annotations: &[Annotation]) -> String {
    let mut out = String::new();
    for a in annotations {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            a.record_id, a.start, a.end, a.label
        ));
    }
    out
}

/// Window and quantization controls for the task encoders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingOptions {
    /// Window length in bases (DNA tasks) or residues (structure task).
    pub window: usize,
    pub stride: usize,
    /// Bits per residue for the structure-task quantizer.
    pub quant_bits: u32,
    pub quant_lo: f64,
    pub quant_hi: f64,
}

impl Default for EncodingOptions {
    fn default() -> Self {
        Self {
            window: 12,
            stride: 1,
            quant_bits: 2,
            quant_lo: HYDROPHOBICITY_RANGE.0,
            quant_hi: HYDROPHOBICITY_RANGE.1,
        }
    }
}

/// A loaded, encoded dataset: the class table plus one labeled pattern per
/// window, in record x window order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub n: usize,
    pub classes: Vec<String>,
    pub patterns: Vec<LabeledPattern>,
}

impl Dataset {
    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.classes
            .iter()
            .position(|c| c == name)
            .map(|i| ClassId(i as u16))
    }
}

/// Interns `name` into the class table, first-seen order.
fn intern(classes: &mut Vec<String>, name: &str) -> Result<ClassId> {
    if let Some(pos) = classes.iter().position(|c| c == name) {
        return Ok(ClassId(pos as u16));
    }
    if classes.len() == u16::MAX as usize {
        return Err(Error::InvalidInput("class table overflow".into()));
    }
    classes.push(name.to_string());
    Ok(ClassId((classes.len() - 1) as u16))
}

fn annotations_by_record(
    annotations: &[Annotation],
    records: &[FastaRecord],
) -> Result<HashMap<String, Vec<Annotation>>> {
    let known: HashMap<&str, usize> = records
        .iter()
        .map(|r| (r.id.as_str(), r.sequence.len()))
        .collect();
    let mut map: HashMap<String, Vec<Annotation>> = HashMap::new();
    for a in annotations {
        let len = *known.get(a.record_id.as_str()).ok_or_else(|| {
            Error::InvalidInput(format!(
                "annotation references unknown record {:?}",
                a.record_id
            ))
        })?;
        if a.end > len {
            return Err(Error::InvalidInput(format!(
                "annotation {}..{} exceeds record {:?} of length {len}",
                a.start, a.end, a.record_id
            )));
        }
        map.entry(a.record_id.clone()).or_default().push(a.clone());
    }
    Ok(map)
}

/// Loads and encodes the dataset a manifest describes.
pub fn load_dataset(manifest: &DatasetManifest, opts: &EncodingOptions) -> Result<Dataset> {
    let fasta_text = fs::read_to_string(&manifest.fasta)
        .map_err(|e| Error::InvalidInput(format!("cannot read {:?}: {e}", manifest.fasta)))?;
    let annot_text = fs::read_to_string(&manifest.annotations)
        .map_err(|e| Error::InvalidInput(format!("cannot read {:?}: {e}", manifest.annotations)))?;
    let records = parse_fasta(&fasta_text)?;
    let annotations = parse_annotations(&annot_text)?;
    encode_records(manifest.task, &records, &annotations, opts)
}

/// Task-specific encoding of already-parsed records; the pure core of
/// [`load_dataset`].
pub fn encode_records(
    task: Task,
    records: &[FastaRecord],
    annotations: &[Annotation],
    opts: &EncodingOptions,
) -> Result<Dataset> {
    if opts.window == 0 || opts.stride == 0 {
        return Err(Error::InvalidParameter(
            "window and stride must be >= 1".into(),
        ));
    }
    let by_record = annotations_by_record(annotations, records)?;
    let mut classes: Vec<String> = Vec::new();
    let mut patterns: Vec<LabeledPattern> = Vec::new();

    match task {
        Task::Promoter | Task::CodingRegion => {
            let (positive, negative) = task.binary_classes().unwrap();
            for record in records {
                let seq = NucleotideSeq::new(&record.sequence)
                    .map_err(|e| Error::InvalidInput(format!("record {:?}: {e}", record.id)))?;
                let mut covered = vec![false; record.sequence.len()];
                for a in by_record.get(&record.id).map_or(&[][..], |v| v) {
                    if a.label != positive {
                        return Err(Error::InvalidInput(format!(
                            "record {:?}: unexpected annotation label {:?} for this task \
                             (expected {positive:?})",
                            record.id, a.label
                        )));
                    }
                    covered[a.start..a.end].iter_mut().for_each(|c| *c = true);
                }
                let windows = dna_encode(&seq, opts.window, opts.stride)?;
                for (w_idx, bits) in windows.into_iter().enumerate() {
                    let offset = w_idx * opts.stride;
                    let hits = covered[offset..offset + opts.window]
                        .iter()
                        .filter(|&&c| c)
                        .count();
                    // Strict majority; an even split counts as negative.
                    let name = if 2 * hits > opts.window {
                        positive
                    } else {
                        negative
                    };
                    let label = intern(&mut classes, name)?;
                    patterns.push(LabeledPattern { bits, label });
                }
            }
        }
        Task::Structure => {
            for record in records {
                let seq = AminoAcidSeq::new(&record.sequence)
                    .map_err(|e| Error::InvalidInput(format!("record {:?}: {e}", record.id)))?;
                let mut per_position: Vec<Option<char>> = vec![None; seq.len()];
                for a in by_record.get(&record.id).map_or(&[][..], |v| v) {
                    let class = match a.label.as_str() {
                        "H" => 'H',
                        "E" => 'E',
                        "C" => 'C',
                        other => {
                            return Err(Error::InvalidInput(format!(
                                "record {:?}: structure label must be H, E or C, got {other:?}",
                                record.id
                            )))
                        }
                    };
                    for slot in &mut per_position[a.start..a.end] {
                        if slot.is_some() {
                            return Err(Error::InvalidInput(format!(
                                "record {:?}: overlapping structure annotations",
                                record.id
                            )));
                        }
                        *slot = Some(class);
                    }
                }
                let labels: Vec<char> = per_position
                    .into_iter()
                    .enumerate()
                    .map(|(i, slot)| {
                        slot.ok_or_else(|| {
                            Error::InvalidInput(format!(
                                "record {:?}: position {i} has no structure annotation",
                                record.id
                            ))
                        })
                    })
                    .collect::<Result<_>>()?;
                if seq.len() < opts.window {
                    return Err(Error::InvalidInput(format!(
                        "record {:?}: length {} shorter than window {}",
                        record.id,
                        seq.len(),
                        opts.window
                    )));
                }
                let codes = signal_quantize(
                    &hydrophobicity_encode(&seq),
                    opts.quant_bits,
                    opts.quant_lo,
                    opts.quant_hi,
                )?;
                let mut offset = 0;
                while offset + opts.window <= codes.len() {
                    let bits = concat_patterns(&codes[offset..offset + opts.window])?;
                    let name = window_majority(&labels[offset..offset + opts.window]);
                    let label = intern(&mut classes, &name.to_string())?;
                    patterns.push(LabeledPattern { bits, label });
                    offset += opts.stride;
                }
            }
        }
    }

    if patterns.is_empty() {
        return Err(Error::InvalidInput("dataset produced no patterns".into()));
    }
    let n = patterns[0].bits.len();
    Ok(Dataset {
        n,
        classes,
        patterns,
    })
}

/// Majority class of a window; ties go to the class appearing first when
/// scanning the window left to right.
fn window_majority(labels: &[char]) -> char {
    let mut stats: Vec<(char, usize, usize)> = Vec::new();
    for (pos, &c) in labels.iter().enumerate() {
        match stats.iter_mut().find(|(l, _, _)| *l == c) {
            Some((_, count, _)) => *count += 1,
            None => stats.push((c, 1, pos)),
        }
    }
    stats
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
        .map(|&(c, _, _)| c)
        .expect("windows are never empty")
}

/// Seeded shuffle-and-split. Stratified per class whenever every class has
/// at least two members, keeping test/train class ratios within one item
/// of the overall ratio.
pub fn split(
    patterns: &[LabeledPattern],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledPattern>, Vec<LabeledPattern>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test_fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    if patterns.is_empty() {
        return Err(Error::InvalidInput("nothing to split".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total_test =
        ((patterns.len() as f64 * test_fraction).round() as usize).clamp(1, patterns.len() - 1);

    // Group indices per class, first-seen order.
    let mut class_order: Vec<ClassId> = Vec::new();
    let mut groups: HashMap<ClassId, Vec<usize>> = HashMap::new();
    for (i, p) in patterns.iter().enumerate() {
        if !groups.contains_key(&p.label) {
            class_order.push(p.label);
        }
        groups.entry(p.label).or_default().push(i);
    }

    let stratify = groups.values().all(|g| g.len() >= 2);
    let mut test_idx: Vec<usize> = Vec::with_capacity(total_test);
    if stratify {
        // Largest-remainder allocation of the test quota across classes.
        let mut quotas: Vec<(ClassId, usize, f64)> = class_order
            .iter()
            .map(|&c| {
                let exact = groups[&c].len() as f64 * test_fraction;
                (c, exact.floor() as usize, exact - exact.floor())
            })
            .collect();
        let mut assigned: usize = quotas.iter().map(|q| q.1).sum();
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&x, &y| {
            quotas[y]
                .2
                .partial_cmp(&quotas[x].2)
                .unwrap()
                .then(x.cmp(&y))
        });
        for &slot in order.iter().cycle() {
            if assigned >= total_test {
                break;
            }
            if quotas[slot].1 < groups[&quotas[slot].0].len() {
                quotas[slot].1 += 1;
                assigned += 1;
            }
        }
        for (class, quota, _) in quotas {
            let mut members = groups[&class].clone();
            members.shuffle(&mut rng);
            test_idx.extend_from_slice(&members[..quota]);
        }
    } else {
        let mut all: Vec<usize> = (0..patterns.len()).collect();
        all.shuffle(&mut rng);
        test_idx.extend_from_slice(&all[..total_test]);
    }

    let in_test: std::collections::HashSet<usize> = test_idx.iter().copied().collect();
    let mut train = Vec::with_capacity(patterns.len() - in_test.len());
    let mut test = Vec::with_capacity(in_test.len());
    for (i, p) in patterns.iter().enumerate() {
        if in_test.contains(&i) {
            test.push(p.clone());
        } else {
            train.push(p.clone());
        }
    }
    Ok((train, test))
}
