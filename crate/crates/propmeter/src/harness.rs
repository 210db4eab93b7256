//! Batch orchestration: corpus acquisition and indexing, full-corpus
//! experiment runs, and figure emission.

pub mod corpus;
pub mod experiment;
pub mod figures;

pub use corpus::{fetch_scot, load_corpus, CorpusEntry, CorpusError, CorpusIndex, FetchSource};
pub use experiment::{run_experiment, ExperimentConfig, RunArtifacts};
