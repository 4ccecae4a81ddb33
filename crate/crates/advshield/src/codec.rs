//! Versioned binary checkpoint codec shared by all models.
//!
//! Layout: magic `ASVM`, u32 version (= 1), u32 tag length + UTF-8 tag,
//! u32 tensor count, then per tensor: u32 name length + name, u32 ndim,
//! ndim u32 dims, and the payload as little-endian f32 (same float
//! convention as feature files).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{ArrayD, IxDyn};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"ASVM";
const VERSION: u32 = 1;

/// A named bundle of tensors plus a free-form tag identifying the model kind
/// (e.g. `asv` or `reformer:TCM`).
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub tag: String,
    pub tensors: BTreeMap<String, ArrayD<f64>>,
}

impl Checkpoint {
    pub fn new(tag: impl Into<String>) -> Self {
        Self {
            tag: tag.into(),
            tensors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: &str, tensor: ArrayD<f64>) {
        self.tensors.insert(name.to_string(), tensor);
    }

    pub fn insert_scalar(&mut self, name: &str, value: f64) {
        self.insert(name, ArrayD::from_elem(IxDyn(&[1]), value));
    }

    pub fn get(&self, name: &str) -> Result<&ArrayD<f64>> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::Missing(format!("checkpoint tensor `{name}`")))
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        let t = self.get(name)?;
        t.iter()
            .next()
            .copied()
            .ok_or_else(|| Error::Format {
                offset: 0,
                msg: format!("tensor `{name}` is empty"),
            })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        write_str(&mut w, &self.tag)?;
        w.write_all(&(self.tensors.len() as u32).to_le_bytes())?;
        for (name, tensor) in &self.tensors {
            write_str(&mut w, name)?;
            w.write_all(&(tensor.ndim() as u32).to_le_bytes())?;
            for &d in tensor.shape() {
                w.write_all(&(d as u32).to_le_bytes())?;
            }
            for v in tensor.iter() {
                w.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = Cursor::new(BufReader::new(File::open(path)?));
        let mut magic = [0u8; 4];
        r.read_bytes(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format {
                offset: 0,
                msg: format!("bad magic {magic:?}"),
            });
        }
        let version = r.read_u32()?;
        if version != VERSION {
            return Err(Error::Format {
                offset: 4,
                msg: format!("unsupported checkpoint version {version}"),
            });
        }
        let tag = r.read_str()?;
        let n_tensors = r.read_u32()? as usize;
        let mut tensors = BTreeMap::new();
        for _ in 0..n_tensors {
            let name = r.read_str()?;
            let ndim = r.read_u32()? as usize;
            let mut dims = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                dims.push(r.read_u32()? as usize);
            }
            let count: usize = dims.iter().product();
            let mut values = Vec::with_capacity(count);
            for _ in 0..count {
                values.push(r.read_f32()? as f64);
            }
            let tensor = ArrayD::from_shape_vec(IxDyn(&dims), values)
                .map_err(|e| Error::Shape(e.to_string()))?;
            tensors.insert(name, tensor);
        }
        Ok(Self { tag, tensors })
    }
}

fn write_str(w: &mut impl Write, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

struct Cursor<R> {
    inner: R,
    pos: u64,
}

impl<R: Read> Cursor<R> {
    fn new(inner: R) -> Self {
        Self { inner, pos: 0 }
    }

    fn read_bytes(&mut self, buf: &mut [u8]) -> Result<()> {
        let offset = self.pos;
        self.inner.read_exact(buf).map_err(|_| Error::Format {
            offset,
            msg: "truncated checkpoint".into(),
        })?;
        self.pos += buf.len() as u64;
        Ok(())
    }

    fn read_u32(&mut self) -> Result<u32> {
        let mut buf = [0u8; 4];
        self.read_bytes(&mut buf)?;
        Ok(u32::from_le_bytes(buf))
    }

    fn read_f32(&mut self) -> Result<f32> {
        let mut buf = [0u8; 4];
        self.read_bytes(&mut buf)?;
        Ok(f32::from_le_bytes(buf))
    }

    fn read_str(&mut self) -> Result<String> {
        let len = self.read_u32()? as usize;
        if len > 1 << 20 {
            return Err(Error::Format {
                offset: self.pos - 4,
                msg: format!("implausible string length {len}"),
            });
        }
        let mut buf = vec![0u8; len];
        let offset = self.pos;
        self.read_bytes(&mut buf)?;
        String::from_utf8(buf).map_err(|_| Error::Format {
            offset,
            msg: "invalid UTF-8 string".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::ArrayD;

    #[test]
    fn round_trips_tensors_and_tag() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.ckpt");
        let mut ck = Checkpoint::new("reformer:TCM");
        ck.insert(
            "w",
            ArrayD::from_shape_vec(IxDyn(&[2, 3]), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap(),
        );
        ck.insert_scalar("tau", 0.5);
        ck.save(&p).unwrap();
        let back = Checkpoint::load(&p).unwrap();
        assert_eq!(back.tag, "reformer:TCM");
        assert_eq!(back.get("w").unwrap(), ck.get("w").unwrap());
        assert_eq!(back.scalar("tau").unwrap(), 0.5);
    }

    #[test]
    fn truncated_checkpoint_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.ckpt");
        let mut ck = Checkpoint::new("asv");
        ck.insert_scalar("x", 1.0);
        ck.save(&p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 2]).unwrap();
        assert!(matches!(Checkpoint::load(&p), Err(Error::Format { .. })));
    }
}
