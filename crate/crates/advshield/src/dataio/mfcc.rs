//! MFCC extraction: pre-emphasis, 25 ms Hamming window, 10 ms shift,
//! power FFT, 23-band mel filterbank, log with floor 1e-10, orthonormal
//! DCT-II.

use ndarray::Array2;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

use super::features::FeatureMatrix;

pub const MFCC_N_MELS: usize = 23;
pub const MFCC_LOG_FLOOR: f64 = 1e-10;
const WINDOW_MS: f64 = 25.0;
const SHIFT_MS: f64 = 10.0;
const PRE_EMPHASIS: f64 = 0.97;

pub fn mel_scale(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn inv_mel_scale(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

fn check_waveform(waveform: &[f64], sample_rate_hz: u32) -> Result<(usize, usize)> {
    if waveform.is_empty() {
        return Err(Error::Config("empty waveform".into()));
    }
    if !waveform.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric("waveform contains non-finite samples".into()));
    }
    if sample_rate_hz != 8000 && sample_rate_hz != 16000 {
        return Err(Error::Config(format!(
            "sample rate must be 8000 or 16000 Hz, got {sample_rate_hz}"
        )));
    }
    let window = (sample_rate_hz as f64 * WINDOW_MS / 1000.0) as usize;
    let shift = (sample_rate_hz as f64 * SHIFT_MS / 1000.0) as usize;
    if waveform.len() < window {
        return Err(Error::Config(format!(
            "waveform shorter than one {WINDOW_MS} ms window ({} < {window} samples)",
            waveform.len()
        )));
    }
    Ok((window, shift))
}

/// Pre-DCT log-mel energies, T x MFCC_N_MELS. Exposed so the mel stage can
/// be inspected independently of the final cepstra.
pub fn log_mel_spectrogram(waveform: &[f64], sample_rate_hz: u32) -> Result<Array2<f64>> {
    let (window, shift) = check_waveform(waveform, sample_rate_hz)?;
    let n_frames = (waveform.len() - window) / shift + 1;
    let n_fft = window.next_power_of_two();
    let n_bins = n_fft / 2 + 1;

    // pre-emphasis
    let mut emph = Vec::with_capacity(waveform.len());
    emph.push(waveform[0]);
    for i in 1..waveform.len() {
        emph.push(waveform[i] - PRE_EMPHASIS * waveform[i - 1]);
    }

    let hamming: Vec<f64> = (0..window)
        .map(|n| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / (window - 1) as f64).cos())
        .collect();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_fft);

    let filterbank = mel_filterbank(sample_rate_hz, n_fft);

    let mut out = Array2::zeros((n_frames, MFCC_N_MELS));
    let mut buf = vec![Complex::new(0.0, 0.0); n_fft];
    for t in 0..n_frames {
        let start = t * shift;
        for i in 0..n_fft {
            let v = if i < window { emph[start + i] * hamming[i] } else { 0.0 };
            buf[i] = Complex::new(v, 0.0);
        }
        fft.process(&mut buf);
        let power: Vec<f64> = buf[..n_bins].iter().map(|c| c.norm_sqr()).collect();
        for (m, filter) in filterbank.iter().enumerate() {
            let e: f64 = filter.iter().map(|&(bin, w)| w * power[bin]).sum();
            out[[t, m]] = e.max(MFCC_LOG_FLOOR).ln();
        }
    }
    Ok(out)
}

/// Triangular mel filters as sparse (bin, weight) lists.
fn mel_filterbank(sample_rate_hz: u32, n_fft: usize) -> Vec<Vec<(usize, f64)>> {
    let nyquist = sample_rate_hz as f64 / 2.0;
    let mel_max = mel_scale(nyquist);
    let centers: Vec<f64> = (0..MFCC_N_MELS + 2)
        .map(|i| inv_mel_scale(mel_max * i as f64 / (MFCC_N_MELS + 1) as f64))
        .collect();
    let n_bins = n_fft / 2 + 1;
    let bin_hz = sample_rate_hz as f64 / n_fft as f64;
    (0..MFCC_N_MELS)
        .map(|m| {
            let (lo, mid, hi) = (centers[m], centers[m + 1], centers[m + 2]);
            let mut filter = Vec::new();
            for bin in 0..n_bins {
                let f = bin as f64 * bin_hz;
                let w = if f > lo && f < mid {
                    (f - lo) / (mid - lo)
                } else if f >= mid && f < hi {
                    (hi - f) / (hi - mid)
                } else {
                    0.0
                };
                if w > 0.0 {
                    filter.push((bin, w));
                }
            }
            filter
        })
        .collect()
}

/// Frequency range [lo, hi) covered by mel band `m`; used by tests to map a
/// tone frequency onto the band that should dominate.
pub fn mel_band_range(sample_rate_hz: u32, m: usize) -> (f64, f64) {
    let nyquist = sample_rate_hz as f64 / 2.0;
    let mel_max = mel_scale(nyquist);
    let edge = |i: usize| inv_mel_scale(mel_max * i as f64 / (MFCC_N_MELS + 1) as f64);
    (edge(m), edge(m + 2))
}

pub fn compute_mfcc(waveform: &[f64], sample_rate_hz: u32, n_coeffs: usize) -> Result<FeatureMatrix> {
    if n_coeffs == 0 || n_coeffs > MFCC_N_MELS {
        return Err(Error::Config(format!(
            "n_coeffs must be in 1..={MFCC_N_MELS}, got {n_coeffs}"
        )));
    }
    let log_mel = log_mel_spectrogram(waveform, sample_rate_hz)?;
    let n_frames = log_mel.nrows();
    // orthonormal DCT-II over the mel axis
    let n = MFCC_N_MELS as f64;
    let mut mfcc = Array2::zeros((n_frames, n_coeffs));
    for t in 0..n_frames {
        for k in 0..n_coeffs {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            let mut acc = 0.0;
            for j in 0..MFCC_N_MELS {
                acc += log_mel[[t, j]]
                    * (std::f64::consts::PI * (j as f64 + 0.5) * k as f64 / n).cos();
            }
            mfcc[[t, k]] = scale * acc;
        }
    }
    FeatureMatrix::new(mfcc, SHIFT_MS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_short_waveform_errors() {
        let wav = vec![0.1; 100]; // < 400 samples at 16 kHz
        assert!(compute_mfcc(&wav, 16000, 13).is_err());
    }

    #[test]
    fn frame_count_matches_closed_form() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let len = rng.gen_range(400..8000);
            let wav: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let m = compute_mfcc(&wav, 16000, 13).unwrap();
            let expected = (len - 400) / 160 + 1;
            assert_eq!(m.n_frames(), expected, "len={len}");
        }
    }

    #[test]
    fn pure_tone_peaks_in_matching_mel_band() {
        let sr = 16000u32;
        let freq = 440.0;
        let wav: Vec<f64> = (0..3200)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / sr as f64).sin())
            .collect();
        let log_mel = log_mel_spectrogram(&wav, sr).unwrap();
        // independent check: find the band whose triangular support contains
        // 440 Hz with the center closest to it, via our own mel formula
        let expected_band = (0..MFCC_N_MELS)
            .filter(|&m| {
                let (lo, hi) = mel_band_range(sr, m);
                freq > lo && freq < hi
            })
            .min_by(|&a, &b| {
                let da = (mel_band_center(sr, a) - freq).abs();
                let db = (mel_band_center(sr, b) - freq).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        // average over frames, then argmax
        let means: Vec<f64> = (0..MFCC_N_MELS)
            .map(|m| log_mel.column(m).sum() / log_mel.nrows() as f64)
            .collect();
        let argmax = means
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, expected_band);
    }

    fn mel_band_center(sr: u32, m: usize) -> f64 {
        let (lo, hi) = mel_band_range(sr, m);
        // triangular apex is the shared inner edge
        let nyquist = sr as f64 / 2.0;
        let mel_max = mel_scale(nyquist);
        let apex = 700.0 * (10f64.powf(mel_max * (m + 1) as f64 / (MFCC_N_MELS + 1) as f64 / 2595.0) - 1.0);
        debug_assert!(apex > lo && apex < hi);
        apex
    }

    #[test]
    fn all_zero_waveform_gives_constant_rows() {
        let wav = vec![0.0; 1600];
        let m = compute_mfcc(&wav, 16000, 13).unwrap();
        let first = m.data.row(0).to_owned();
        for row in m.data.rows() {
            assert_eq!(row, first);
        }
    }

    #[test]
    fn non_finite_samples_error() {
        let mut wav = vec![0.0; 1600];
        wav[10] = f64::NAN;
        assert!(compute_mfcc(&wav, 16000, 13).is_err());
    }
}
