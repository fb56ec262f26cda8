//! Multiple-attractor cellular automata pattern classification.
//!
//! A hybrid (per-cell rule) elementary CA drains every state into one of a
//! handful of attractor cycles; basin membership acts as a class
//! assignment. This crate provides:
//!
//! * [`ca`] - the deterministic CA engine: rule evaluation, synchronous
//!   stepping, trajectory tracing, exhaustive basin enumeration;
//! * [`classifier`] - the recursive basin-routing tree built on top of it;
//! * [`ga`] - the genetic search that evolves rule vectors toward
//!   label-pure basins;
//! * [`diagnostics`] - spacetime entropy / mutual-information traces of
//!   evolving automata;
//! * [`pipeline`] - protein and DNA encodings plus the
//!   convolution/deconvolution secondary-structure predictor;
//! * [`io`] - FASTA, dataset manifests, metrics, model persistence, and
//!   the bundled synthetic dataset generators.

pub mod ca;
pub mod classifier;
pub mod diagnostics;
pub mod error;
pub mod ga;
pub mod io;
pub mod pipeline;

pub use ca::{
    apply_rule, enumerate_basins, find_attractor, step, AttractorBasin, BoundaryMode, CAState,
    RuleNumber, RuleVector, Trajectory,
};
pub use classifier::{
    distribute, train_tree, train_tree_traced, training_accuracy, ClassId, LabeledPattern,
    MacaTree, NodeTrace, TreeNode,
};
pub use error::{Error, Result};
pub use ga::{
    crossover, evolve, fitness, init_population, mutate, Chromosome, GaParams, GenerationTrace,
};
