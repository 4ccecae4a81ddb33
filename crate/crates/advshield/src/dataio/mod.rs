//! Synthetic corpus generation, acoustic feature extraction, and the
//! on-disk formats for features and trial lists.

mod corpus;
mod features;
mod mfcc;
mod trials;

pub use corpus::{generate_synthetic_corpus, make_balanced_trials, sample_trials, Corpus, CorpusConfig};
pub use features::{load_features, save_features, FeatureMatrix, Utterance};
pub use mfcc::{compute_mfcc, log_mel_spectrogram, mel_band_range, mel_scale, MFCC_LOG_FLOOR, MFCC_N_MELS};
pub use trials::{load_trials, save_trials, Label, Provenance, Trial};
