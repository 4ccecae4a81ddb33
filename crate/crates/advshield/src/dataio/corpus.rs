//! Synthetic corpus generation.
//!
//! Each speaker gets a fixed latent voiceprint vector; an utterance is the
//! voiceprint broadcast over time plus a low-pass-filtered noise sequence
//! and per-frame white noise. This yields separable speakers so the
//! speaker model trains in seconds.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

use super::features::{FeatureMatrix, Utterance};
use super::trials::{Label, Trial};

/// Smoothing coefficient of the low-pass noise component.
const SMOOTH_POLE: f64 = 0.7;
/// Std of the smooth (utterance-level) noise component before filtering.
const SMOOTH_STD: f64 = 0.5;
/// Std of the per-frame white noise.
const FRAME_NOISE_STD: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub n_speakers: usize,
    pub utts_per_speaker: usize,
    pub frames_per_utt: usize,
    pub feature_dim: usize,
    pub seed: u64,
    /// Scale of inter-speaker voiceprint distance vs intra-speaker noise.
    pub speaker_separation: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            n_speakers: 20,
            utts_per_speaker: 8,
            frames_per_utt: 50,
            feature_dim: 24,
            seed: 0,
            speaker_separation: 3.0,
        }
    }
}

impl CorpusConfig {
    fn validate(&self) -> Result<()> {
        if self.n_speakers < 1 || self.utts_per_speaker < 1 {
            return Err(Error::Config("speaker and utterance counts must be >= 1".into()));
        }
        if self.feature_dim < 2 {
            return Err(Error::Config("feature_dim must be >= 2".into()));
        }
        if self.frames_per_utt < 8 {
            return Err(Error::Config(
                "frames_per_utt must be >= 8 (too small for time masking)".into(),
            ));
        }
        if !(self.speaker_separation > 0.0) {
            return Err(Error::Config("speaker_separation must be > 0".into()));
        }
        Ok(())
    }
}

/// Utterances plus a canonical balanced trial list.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub utterances: Vec<Utterance>,
    pub trials: Vec<Trial>,
    pub feature_dim: usize,
    index: BTreeMap<String, usize>,
}

impl Corpus {
    pub fn from_utterances(utterances: Vec<Utterance>, trials: Vec<Trial>) -> Result<Self> {
        let feature_dim = utterances
            .first()
            .map(|u| u.features.n_channels())
            .unwrap_or(0);
        let mut index = BTreeMap::new();
        for (i, u) in utterances.iter().enumerate() {
            if u.features.n_channels() != feature_dim {
                return Err(Error::Shape(format!(
                    "utterance {} has {} channels, corpus-wide D is {}",
                    u.id,
                    u.features.n_channels(),
                    feature_dim
                )));
            }
            if index.insert(u.id.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate utterance id {}", u.id)));
            }
        }
        Ok(Self {
            utterances,
            trials,
            feature_dim,
            index,
        })
    }

    pub fn get(&self, id: &str) -> Result<&Utterance> {
        self.index
            .get(id)
            .map(|&i| &self.utterances[i])
            .ok_or_else(|| Error::Missing(format!("utterance `{id}` not in corpus")))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Per-dimension std of features pooled over all frames of all utterances.
    pub fn per_dim_std(&self) -> Vec<f64> {
        let d = self.feature_dim;
        let mut sum = vec![0.0; d];
        let mut sumsq = vec![0.0; d];
        let mut n = 0usize;
        for u in &self.utterances {
            for row in u.features.data.rows() {
                for (k, v) in row.iter().enumerate() {
                    sum[k] += v;
                    sumsq[k] += v * v;
                }
            }
            n += u.features.n_frames();
        }
        (0..d)
            .map(|k| {
                let mean = sum[k] / n as f64;
                (sumsq[k] / n as f64 - mean * mean).max(1e-12).sqrt()
            })
            .collect()
    }
}

/// Deterministic function of the seed: equal configs give bit-identical corpora.
pub fn generate_synthetic_corpus(config: &CorpusConfig) -> Result<Corpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut utterances = Vec::new();
    for s in 0..config.n_speakers {
        let speaker_id = format!("spk{s:03}");
        let voiceprint: Vec<f64> = (0..config.feature_dim)
            .map(|_| normal.sample(&mut rng) * config.speaker_separation)
            .collect();
        for u in 0..config.utts_per_speaker {
            let id = format!("{speaker_id}_u{u:03}");
            let mut data = Array2::zeros((config.frames_per_utt, config.feature_dim));
            let mut smooth = vec![0.0f64; config.feature_dim];
            for t in 0..config.frames_per_utt {
                for d in 0..config.feature_dim {
                    let e = normal.sample(&mut rng) * SMOOTH_STD;
                    smooth[d] = SMOOTH_POLE * smooth[d] + (1.0 - SMOOTH_POLE) * e;
                    let white = normal.sample(&mut rng) * FRAME_NOISE_STD;
                    data[[t, d]] = voiceprint[d] + smooth[d] + white;
                }
            }
            utterances.push(Utterance {
                id,
                speaker_id: speaker_id.clone(),
                features: FeatureMatrix::new(data, 10.0)?,
            });
        }
    }

    let mut trial_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let trials = make_balanced_trials(&utterances, &mut trial_rng);
    Corpus::from_utterances(utterances, trials)
}

/// All same-speaker pairs as targets plus an equal number of randomly
/// sampled cross-speaker pairs.
pub fn make_balanced_trials(utterances: &[Utterance], rng: &mut ChaCha8Rng) -> Vec<Trial> {
    let mut targets = Vec::new();
    for i in 0..utterances.len() {
        for j in (i + 1)..utterances.len() {
            if utterances[i].speaker_id == utterances[j].speaker_id {
                targets.push(Trial::genuine(
                    utterances[i].id.clone(),
                    utterances[j].id.clone(),
                    Label::Target,
                ));
            }
        }
    }
    let mut cross: Vec<(usize, usize)> = Vec::new();
    for i in 0..utterances.len() {
        for j in 0..utterances.len() {
            if i != j && utterances[i].speaker_id != utterances[j].speaker_id {
                cross.push((i, j));
            }
        }
    }
    cross.shuffle(rng);
    let nontargets: Vec<Trial> = cross
        .into_iter()
        .take(targets.len())
        .map(|(i, j)| {
            Trial::genuine(utterances[i].id.clone(), utterances[j].id.clone(), Label::Nontarget)
        })
        .collect();
    let mut trials = targets;
    trials.extend(nontargets);
    trials
}

/// Samples trials with replacement: `n_target` same-speaker pairs and
/// `n_nontarget` cross-speaker pairs. Needs at least one speaker with two
/// utterances (for targets) and two distinct speakers (for nontargets).
pub fn sample_trials(
    utterances: &[Utterance],
    n_target: usize,
    n_nontarget: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Trial>> {
    let mut by_speaker: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, u) in utterances.iter().enumerate() {
        by_speaker.entry(&u.speaker_id).or_default().push(i);
    }
    let multi: Vec<&Vec<usize>> = by_speaker.values().filter(|v| v.len() >= 2).collect();
    if n_target > 0 && multi.is_empty() {
        return Err(Error::Config("no speaker has two utterances; cannot sample target trials".into()));
    }
    if n_nontarget > 0 && by_speaker.len() < 2 {
        return Err(Error::Config("need >= 2 speakers to sample nontarget trials".into()));
    }
    let mut trials = Vec::with_capacity(n_target + n_nontarget);
    for _ in 0..n_target {
        let utts = multi[rng.gen_range(0..multi.len())];
        let a = utts[rng.gen_range(0..utts.len())];
        let b = loop {
            let b = utts[rng.gen_range(0..utts.len())];
            if b != a {
                break b;
            }
        };
        trials.push(Trial::genuine(
            utterances[a].id.clone(),
            utterances[b].id.clone(),
            Label::Target,
        ));
    }
    for _ in 0..n_nontarget {
        let a = rng.gen_range(0..utterances.len());
        let b = loop {
            let b = rng.gen_range(0..utterances.len());
            if utterances[b].speaker_id != utterances[a].speaker_id {
                break b;
            }
        };
        trials.push(Trial::genuine(
            utterances[a].id.clone(),
            utterances[b].id.clone(),
            Label::Nontarget,
        ));
    }
    Ok(trials)
}
