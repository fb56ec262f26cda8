//! Data interchange: FASTA, dataset manifests and encodings, metrics, and
//! model persistence.

pub mod dataset;
pub mod eval;
pub mod fasta;
pub mod model;
pub mod synth;

pub use dataset::{
    encode_records, load_dataset, parse_annotations, split, write_annotations, Annotation, Dataset,
    DatasetManifest, DatasetName, EncodingOptions, Task, LABEL_FORMAT,
};
pub use eval::{evaluate, ClassMetrics, EvaluationReport};
pub use fasta::{parse_fasta, write_fasta, FastaRecord};
pub use model::{load_model, model_from_str, model_to_string, save_model, write_atomic};
