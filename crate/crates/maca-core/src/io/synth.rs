//! Deterministic generators for the bundled synthetic stand-in datasets.
//!
//! The real benchmark corpora are not redistributable, so the repository
//! ships tiny generated sets with a known planted signal instead. Each
//! generator is a pure function of its seed; the committed files under
//! `data/synthetic/` are exactly the generator output, which tests verify.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ca::CAState;
use crate::classifier::{ClassId, LabeledPattern};
use crate::io::dataset::{Annotation, DatasetManifest, DatasetName, Task, LABEL_FORMAT};
use crate::io::fasta::FastaRecord;

/// Sequences per DNA dataset.
pub const DNA_SET_SIZE: usize = 200;
/// Length of every DNA record; equal to the default window so each record
/// contributes one pattern.
pub const DNA_SEQ_LEN: usize = 12;
const ARCHETYPES_PER_CLASS: usize = 20;

pub const PROMOTER_MOTIF: &str = "TATAAT";
/// Offset of the planted motif inside promoter records.
pub const PROMOTER_MOTIF_OFFSET: usize = 3;

const BASES: [char; 4] = ['A', 'C', 'G', 'T'];

/// A generated dataset ready to be written or encoded.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub task: Task,
    pub records: Vec<FastaRecord>,
    pub annotations: Vec<Annotation>,
}

impl SynthDataset {
    /// Manifest with paths relative to the directory holding the files.
    pub fn manifest(&self, stem: &str) -> DatasetManifest {
        DatasetManifest {
            name: DatasetName::Custom,
            task: self.task,
            fasta: format!("{stem}.fasta").into(),
            annotations: format!("{stem}.annot").into(),
            label_format: LABEL_FORMAT.to_string(),
        }
    }
}

fn random_dna(len: usize, rng: &mut ChaCha8Rng) -> String {
    (0..len).map(|_| *BASES.choose(rng).unwrap()).collect()
}

/// Distinct background sequences free of the promoter motif.
fn background_pool(count: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut pool = Vec::with_capacity(count);
    while pool.len() < count {
        let candidate = random_dna(len, rng);
        if !candidate.contains(PROMOTER_MOTIF) && !pool.contains(&candidate) {
            pool.push(candidate);
        }
    }
    pool
}

/// Promoter stand-in: half the records carry the TATAAT motif at a fixed
/// offset, drawn from a small archetype pool per class so held-out windows
/// stay close to the training distribution. Background records come first,
/// making the negative class the first seen.
pub fn promoter_set(seed: u64) -> SynthDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut promoter_pool: Vec<String> = Vec::with_capacity(ARCHETYPES_PER_CLASS);
    while promoter_pool.len() < ARCHETYPES_PER_CLASS {
        let mut seq = random_dna(PROMOTER_MOTIF_OFFSET, &mut rng);
        seq.push_str(PROMOTER_MOTIF);
        seq.push_str(&random_dna(
            DNA_SEQ_LEN - PROMOTER_MOTIF_OFFSET - PROMOTER_MOTIF.len(),
            &mut rng,
        ));
        if !promoter_pool.contains(&seq) {
            promoter_pool.push(seq);
        }
    }
    let background_pool = background_pool(ARCHETYPES_PER_CLASS, DNA_SEQ_LEN, &mut rng);

    let mut records = Vec::with_capacity(DNA_SET_SIZE);
    let mut annotations = Vec::new();
    for i in 0..DNA_SET_SIZE {
        let is_promoter = i % 2 == 1;
        let pool = if is_promoter {
            &promoter_pool
        } else {
            &background_pool
        };
        let sequence = pool.choose(&mut rng).unwrap().clone();
        let id = format!("seq_{i:03}");
        if is_promoter {
            annotations.push(Annotation {
                record_id: id.clone(),
                start: 0,
                end: DNA_SEQ_LEN,
                label: "promoter".into(),
            });
        }
        records.push(FastaRecord {
            id,
            description: if is_promoter {
                "promoter"
            } else {
                "background"
            }
            .into(),
            sequence,
        });
    }
    SynthDataset {
        task: Task::Promoter,
        records,
        annotations,
    }
}

/// Coding-region stand-in: coding records start with ATG and run GC-rich,
/// non-coding records are AT-rich, again drawn from archetype pools.
pub fn coding_set(seed: u64) -> SynthDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gc_rich = |rng: &mut ChaCha8Rng| -> char {
        if rng.gen_bool(0.8) {
            *['G', 'C'].choose(rng).unwrap()
        } else {
            *['A', 'T'].choose(rng).unwrap()
        }
    };
    let at_rich = |rng: &mut ChaCha8Rng| -> char {
        if rng.gen_bool(0.8) {
            *['A', 'T'].choose(rng).unwrap()
        } else {
            *['G', 'C'].choose(rng).unwrap()
        }
    };

    let mut coding_pool: Vec<String> = Vec::with_capacity(ARCHETYPES_PER_CLASS);
    while coding_pool.len() < ARCHETYPES_PER_CLASS {
        let mut seq = String::from("ATG");
        seq.extend((3..DNA_SEQ_LEN).map(|_| gc_rich(&mut rng)));
        if !coding_pool.contains(&seq) {
            coding_pool.push(seq);
        }
    }
    let mut noncoding_pool: Vec<String> = Vec::with_capacity(ARCHETYPES_PER_CLASS);
    while noncoding_pool.len() < ARCHETYPES_PER_CLASS {
        let seq: String = (0..DNA_SEQ_LEN).map(|_| at_rich(&mut rng)).collect();
        if !seq.starts_with("ATG") && !noncoding_pool.contains(&seq) {
            noncoding_pool.push(seq);
        }
    }

    let mut records = Vec::with_capacity(DNA_SET_SIZE);
    let mut annotations = Vec::new();
    for i in 0..DNA_SET_SIZE {
        let is_coding = i % 2 == 1;
        let pool = if is_coding {
            &coding_pool
        } else {
            &noncoding_pool
        };
        let sequence = pool.choose(&mut rng).unwrap().clone();
        let id = format!("seq_{i:03}");
        if is_coding {
            annotations.push(Annotation {
                record_id: id.clone(),
                start: 0,
                end: DNA_SEQ_LEN,
                label: "coding".into(),
            });
        }
        records.push(FastaRecord {
            id,
            description: if is_coding { "coding" } else { "intergenic" }.into(),
            sequence,
        });
    }
    SynthDataset {
        task: Task::CodingRegion,
        records,
        annotations,
    }
}

/// Residue palettes with well-separated hydrophobicity per class: helix
/// segments draw hydrophobic residues, strand segments mid-scale ones,
/// coil segments strongly hydrophilic ones.
const HELIX_PALETTE: [char; 3] = ['I', 'L', 'V'];
const STRAND_PALETTE: [char; 3] = ['G', 'S', 'T'];
const COIL_PALETTE: [char; 3] = ['R', 'K', 'D'];

/// Secondary-structure stand-in: proteins assembled from labeled segments
/// whose residue palettes separate in hydrophobicity.
pub fn structure_set(seed: u64) -> SynthDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut annotations = Vec::new();
    for i in 0..30 {
        let id = format!("prot_{i:02}");
        let mut sequence = String::new();
        let mut cursor = 0usize;
        let segments = rng.gen_range(4..=7);
        for _ in 0..segments {
            let len = rng.gen_range(5..=12);
            let (label, palette) = match rng.gen_range(0..3) {
                0 => ("H", HELIX_PALETTE),
                1 => ("E", STRAND_PALETTE),
                _ => ("C", COIL_PALETTE),
            };
            sequence.extend((0..len).map(|_| *palette.choose(&mut rng).unwrap()));
            annotations.push(Annotation {
                record_id: id.clone(),
                start: cursor,
                end: cursor + len,
                label: label.into(),
            });
            cursor += len;
        }
        records.push(FastaRecord {
            id,
            description: "synthetic".into(),
            sequence,
        });
    }
    SynthDataset {
        task: Task::Structure,
        records,
        annotations,
    }
}

/// Deterministic two-class pattern set for the GA diagnostics traces.
/// Samples draw from a smaller pool with independently drawn labels, so
/// label conflicts keep fitness from saturating immediately and the traces
/// show the whole evolution.
pub fn diagnostic_patterns(count: usize, n: usize, seed: u64) -> Vec<LabeledPattern> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool_size = (count * 5 / 8).max(2);
    let pool: Vec<CAState> = (0..pool_size)
        .map(|_| CAState::random(n, &mut rng))
        .collect();
    (0..count)
        .map(|_| LabeledPattern {
            bits: pool[rng.gen_range(0..pool.len())].clone(),
            label: ClassId(rng.gen_range(0..2)),
        })
        .collect()
}

/// Base/target protein pair for the deconvolution structure predictor demo.
pub fn structure_demo_pair(seed: u64) -> (FastaRecord, FastaRecord, Vec<FastaRecord>) {
    let set = structure_set(seed);
    let base = set.records[0].clone();
    let labels_for = |record: &FastaRecord| -> String {
        let mut labels = vec!['C'; record.sequence.len()];
        for a in set.annotations.iter().filter(|a| a.record_id == record.id) {
            for slot in &mut labels[a.start..a.end] {
                *slot = a.label.chars().next().unwrap();
            }
        }
        labels.into_iter().collect()
    };
    let base_structure = FastaRecord {
        id: base.id.clone(),
        description: "structure".into(),
        sequence: labels_for(&base),
    };
    let targets = set.records[1..4].to_vec();
    (base, base_structure, targets)
}
