//! Synthetic corpora, configuration files and SEGSNR sweeps.

pub mod corpus;
pub mod settings;
pub mod sweep;

pub use corpus::{generate, generate_corpus, write_corpus, CorpusKind};
pub use settings::Settings;
pub use sweep::{
    evaluate, run_cell, run_sweep, run_sweep_on, to_output_pcm, write_csv, ResultRow, SweepSpec,
    CSV_HEADER, CSV_SCHEMA_VERSION,
};
