//! Workbench for attacking a speaker-verification system with iterative
//! sign-gradient perturbations and defending it with cascaded
//! masked-reconstruction denoisers (purification) and score-moment
//! statistics (detection).
//!
//! The crate is organized around the pipeline stages:
//! data ([`dataio`]) -> speaker model ([`asv`]) -> attack ([`attack`]) ->
//! denoiser training ([`masking`], [`reformer`]) -> defense ([`defense`]) ->
//! evaluation ([`metrics`]) -> orchestration ([`runner`]).

pub mod asv;
pub mod attack;
pub mod codec;
pub mod dataio;
pub mod defense;
pub mod error;
pub mod masking;
pub mod metrics;
pub mod optim;
pub mod reformer;
pub mod runner;

pub use error::{Error, Result};
