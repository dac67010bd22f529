//! End-to-end experiment drivers: the synthetic Gaussian benchmark,
//! desk-scale image patch obfuscation over procedurally generated faces,
//! bag-of-words term-leakage scoring, and the file formats they speak
//! (PGM/PPM images, CSV tables, tab-separated document files).

mod csvio;
mod faces;
mod image;
mod pgm;
mod synthetic;
mod text;

pub use csvio::{load_tabular_csv, write_tabular_csv};
pub use faces::{synthetic_face_gen, FaceCorpus, SignalRegion, FACE_SIZE};
pub use image::{
    image_to_features, obfuscate_image, patch_train_config, patches_to_image, pool_patches,
    train_patch_model,
    ObfuscationOutput, PatchModel, PatchSpec, RasterImage,
};
pub use pgm::{read_image, write_image};
pub use synthetic::{
    bench_train_config, consistency_trend, gen_gaussian_pairs, synthetic_bench, BenchRow,
    BenchSummary, BenchTable, SyntheticSpec,
};
pub use text::{
    corpus_train_config, gen_planted_corpus, score_terms, term_scores_csv, tokenize_bow,
    tokenize_with_vocab, train_corpus_model, Corpus, TermScore,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("patch layout mismatch: {0}")]
    PatchMismatch(String),

    #[error("vocabulary empty after filtering")]
    EmptyVocabulary,

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("training failed twice (original and reseeded): {0}")]
    RepeatAborted(String),

    #[error(transparent)]
    Estimator(#[from] crate::estimators::EstimatorError),

    #[error(transparent)]
    Mechanism(#[from] crate::mechanism::MechanismError),

    #[error(transparent)]
    Divergence(#[from] crate::divergence::DivergenceError),
}

pub type Result<T> = std::result::Result<T, PipelineError>;
