//! Frame-level feature matrices and their binary file format.
//!
//! Feature file layout: magic `ASVF`, u32 version (= 1), u32 T, u32 D,
//! then `T * D` little-endian f32 values in row-major (frame-major) order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"ASVF";
const VERSION: u32 = 1;

/// T x D frame-level acoustic features.
///
/// Values are held as f64 in memory; the file format stores f32, so
/// matrices that round-trip through disk carry f32-representable entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub data: Array2<f64>,
    pub frame_shift_ms: f64,
}

impl FeatureMatrix {
    pub fn new(data: Array2<f64>, frame_shift_ms: f64) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::Shape(format!(
                "feature matrix must have T >= 1 and D >= 1, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::Numeric("feature matrix contains non-finite entries".into()));
        }
        Ok(Self { data, frame_shift_ms })
    }

    pub fn n_frames(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_channels(&self) -> usize {
        self.data.ncols()
    }
}

/// One utterance of a corpus.
#[derive(Debug, Clone)]
pub struct Utterance {
    pub id: String,
    pub speaker_id: String,
    pub features: FeatureMatrix,
}

pub fn save_features(path: &Path, features: &FeatureMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(features.n_frames() as u32).to_le_bytes())?;
    w.write_all(&(features.n_channels() as u32).to_le_bytes())?;
    for v in features.data.iter() {
        w.write_all(&(*v as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_features(path: &Path) -> Result<FeatureMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_exact_at(&mut r, &mut magic, 0)?;
    if &magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            msg: format!("bad magic {:?}, expected {:?}", magic, MAGIC),
        });
    }
    let version = read_u32(&mut r, 4)?;
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            msg: format!("unsupported version {version}"),
        });
    }
    let t = read_u32(&mut r, 8)? as usize;
    let d = read_u32(&mut r, 12)? as usize;
    if t == 0 || d == 0 {
        return Err(Error::Format {
            offset: 8,
            msg: format!("degenerate dimensions {t}x{d}"),
        });
    }
    let mut values = Vec::with_capacity(t * d);
    for i in 0..t * d {
        let offset = 16 + 4 * i as u64;
        let mut buf = [0u8; 4];
        read_exact_at(&mut r, &mut buf, offset)?;
        values.push(f32::from_le_bytes(buf) as f64);
    }
    let data = Array2::from_shape_vec((t, d), values)
        .map_err(|e| Error::Shape(e.to_string()))?;
    FeatureMatrix::new(data, 10.0)
}

fn read_exact_at(r: &mut impl Read, buf: &mut [u8], offset: u64) -> Result<()> {
    r.read_exact(buf).map_err(|_| Error::Format {
        offset,
        msg: "truncated payload".into(),
    })
}

fn read_u32(r: &mut impl Read, offset: u64) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_exact_at(r, &mut buf, offset)?;
    Ok(u32::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = tempfile::tempdir().unwrap();
        // keep the dir alive by leaking it; tests are short-lived
        let p = dir.path().join(name);
        std::mem::forget(dir);
        p
    }

    #[test]
    fn round_trip_is_identity() {
        let m = FeatureMatrix::new(array![[1.0, -2.5], [0.25, 4.0], [3.5, -0.125]], 10.0).unwrap();
        let p = tmp("a.feat");
        save_features(&p, &m).unwrap();
        let back = load_features(&p).unwrap();
        assert_eq!(back.data, m.data);
    }

    #[test]
    fn round_trip_identity_random_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for i in 0..100 {
            let t = rng.gen_range(1..20);
            let d = rng.gen_range(1..10);
            // generate f32-representable entries so the f32 format is lossless
            let data = Array2::from_shape_fn((t, d), |_| rng.gen_range(-5.0f32..5.0) as f64);
            let m = FeatureMatrix::new(data, 10.0).unwrap();
            let p = tmp(&format!("r{i}.feat"));
            save_features(&p, &m).unwrap();
            assert_eq!(load_features(&p).unwrap().data, m.data);
        }
    }

    #[test]
    fn bad_magic_is_format_error() {
        let p = tmp("bad.feat");
        std::fs::write(&p, b"XXXX\x01\x00\x00\x00\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x00").unwrap();
        match load_features(&p) {
            Err(Error::Format { offset: 0, .. }) => {}
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_reports_offset() {
        // header claims T=3, D=2 but only 5 floats follow
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"ASVF");
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&2u32.to_le_bytes());
        for _ in 0..5 {
            bytes.extend_from_slice(&1.0f32.to_le_bytes());
        }
        let p = tmp("trunc.feat");
        std::fs::write(&p, &bytes).unwrap();
        match load_features(&p) {
            Err(Error::Format { offset, msg }) => {
                assert_eq!(offset, 16 + 4 * 5);
                assert!(msg.contains("truncated"));
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_finite_entries() {
        assert!(FeatureMatrix::new(array![[f64::NAN]], 10.0).is_err());
    }
}
