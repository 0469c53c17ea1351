//! Checkpoint layout, all integers little-endian:
//!
//! ```text
//! magic "SFCK" | version u32 | header_len u32 | JSON header | params f64[]
//! ```
//!
//! Parameters follow [`Parameterized::params`] order, each tensor row-major.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SimformerConfig, SimformerModel};
use crate::error::{Error, Result};
use crate::numeric::Parameterized;
use crate::scalar::Scalar;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SFCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    /// Scalar type the model was trained in.
    pub scalar: String,
    pub config: SimformerConfig,
    pub seed: u64,
    /// Optimizer steps taken when the checkpoint was written.
    pub step: u64,
    pub param_count: usize,
    /// Name of the dataset the model was trained on.
    #[serde(default)]
    pub dataset: String,
}

impl CheckpointHeader {
    pub fn for_model<T: Scalar>(model: &SimformerModel<T>, seed: u64, step: u64) -> Self {
        CheckpointHeader {
            scalar: T::NAME.to_string(),
            config: model.config,
            seed,
            step,
            param_count: model.param_count(),
            dataset: String::new(),
        }
    }
}

pub fn checkpoint_to_bytes<T: Scalar>(model: &SimformerModel<T>, header: &CheckpointHeader) -> Result<Vec<u8>> {
    let json = serde_json::to_vec(header)?;
    let mut out = Vec::with_capacity(12 + json.len() + 8 * header.param_count);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for p in model.params() {
        for v in p.value.as_slice() {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        }
    }
    Ok(out)
}

pub fn checkpoint_from_bytes<T: Scalar>(bytes: &[u8]) -> Result<(SimformerModel<T>, CheckpointHeader)> {
    let take = |lo: usize, len: usize| {
        bytes
            .get(lo..lo + len)
            .ok_or_else(|| Error::format("checkpoint truncated"))
    };
    if take(0, 4)? != CHECKPOINT_MAGIC {
        return Err(Error::format("not a checkpoint (bad magic)"));
    }
    let version = u32::from_le_bytes(take(4, 4)?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(Error::format(format!("unsupported checkpoint version {version}")));
    }
    let hlen = u32::from_le_bytes(take(8, 4)?.try_into().unwrap()) as usize;
    let header: CheckpointHeader =
        serde_json::from_slice(take(12, hlen)?).map_err(|e| Error::format(format!("checkpoint header: {e}")))?;
    let mut model = SimformerModel::<T>::init(header.config, 0).map_err(|e| Error::format(e.to_string()))?;
    if model.param_count() != header.param_count {
        return Err(Error::format(format!(
            "header declares {} parameters but the config implies {}",
            header.param_count,
            model.param_count()
        )));
    }
    let blob = &bytes[12 + hlen..];
    if blob.len() != 8 * header.param_count {
        return Err(Error::format(format!(
            "parameter blob holds {} bytes, expected {}",
            blob.len(),
            8 * header.param_count
        )));
    }
    let mut chunks = blob.chunks_exact(8);
    for p in model.params_mut() {
        for v in p.value.as_mut_slice() {
            let raw = f64::from_le_bytes(chunks.next().unwrap().try_into().unwrap());
            *v = T::of(raw);
        }
    }
    Ok((model, header))
}

pub fn save_checkpoint<T: Scalar>(model: &SimformerModel<T>, header: &CheckpointHeader, path: &Path) -> Result<()> {
    let bytes = checkpoint_to_bytes(model, header)?;
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<(SimformerModel<T>, CheckpointHeader)> {
    checkpoint_from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::Point;

    fn model() -> SimformerModel<f64> {
        let mut c = SimformerConfig::with_width(8, 2);
        c.max_len = 12;
        SimformerModel::init(c, 7).unwrap()
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let m = model();
        let h = CheckpointHeader::for_model(&m, 7, 42);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        save_checkpoint(&m, &h, &path).unwrap();
        let (back, h2) = load_checkpoint::<f64>(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(h2, h);
        let pts = [Point::new(0.1, -0.3), Point::new(0.7, 0.2), Point::new(-1.0, 0.5)];
        assert_eq!(back.encode(&pts).unwrap(), m.encode(&pts).unwrap());
    }

    #[test]
    fn truncated_and_corrupt_files() {
        let m = model();
        let bytes = checkpoint_to_bytes(&m, &CheckpointHeader::for_model(&m, 0, 0)).unwrap();
        for cut in [0, 3, 10, 20, bytes.len() - 1] {
            assert!(matches!(checkpoint_from_bytes::<f64>(&bytes[..cut]), Err(Error::Format(_))), "{cut}");
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(checkpoint_from_bytes::<f64>(&bad), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(checkpoint_from_bytes::<f64>(&bad), Err(Error::Format(_))));
    }

    #[test]
    fn config_blob_mismatch() {
        let m = model();
        let mut h = CheckpointHeader::for_model(&m, 0, 0);
        h.config.d_ff += 4;
        let bytes = checkpoint_to_bytes(&m, &h).unwrap();
        assert!(matches!(checkpoint_from_bytes::<f64>(&bytes), Err(Error::Format(_))));
        h.param_count = SimformerModel::<f64>::init(h.config, 0).unwrap().param_count();
        let bytes = checkpoint_to_bytes(&m, &h).unwrap();
        assert!(matches!(checkpoint_from_bytes::<f64>(&bytes), Err(Error::Format(_))));
    }
}
