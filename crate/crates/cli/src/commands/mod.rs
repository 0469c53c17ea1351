mod analysis;
mod data;
mod model;

use std::path::{Path, PathBuf};

use trajsim_core::encoder::{load_checkpoint, CheckpointHeader, SimformerModel};
use trajsim_core::trajectory::{norm_sidecar_path, read_dataset, read_norm_stats, FileFormat};
use trajsim_core::{Dataset, Error, SplitSpec};

pub use analysis::{analyze, bench};
pub use data::{gen, gt, preprocess};
pub use model::{eval, train};

use crate::{usage, CmdResult};

/// Reads a trajectory file and, if present, its normalization sidecar.
fn load_dataset(path: &Path) -> CmdResult<Dataset> {
    let mut d = read_dataset(path, FileFormat::from_path(path))?;
    let sidecar = norm_sidecar_path(path);
    if sidecar.exists() {
        d.norm_stats = Some(read_norm_stats(&sidecar)?);
        d.normalized = true;
    }
    Ok(d)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn split_path(ckpt: &Path) -> PathBuf {
    with_suffix(ckpt, ".split.json")
}

fn read_split(path: &Path) -> CmdResult<SplitSpec> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_list(s: &str, what: &str) -> CmdResult<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (num, mult) = match t.strip_suffix(['k', 'K']) {
                Some(n) => (n, 1000),
                None => (t, 1),
            };
            num.parse::<usize>()
                .map(|v| v * mult)
                .map_err(|_| crate::Failure::Usage(format!("invalid {what} `{t}`")))
        })
        .collect()
}

/// A checkpoint in the precision it was trained in.
enum Loaded {
    F32(SimformerModel<f32>),
    F64(SimformerModel<f64>),
}

fn load_model(path: &Path, data: &Dataset) -> CmdResult<(Loaded, CheckpointHeader)> {
    let (model, header) = load_checkpoint::<f64>(path)?;
    if !header.dataset.is_empty() && header.dataset != data.name {
        return Err(Error::Config(format!(
            "checkpoint was trained on `{}`, not `{}`",
            header.dataset, data.name
        ))
        .into());
    }
    if data.max_len() > model.config.max_len {
        return Err(Error::Config(format!(
            "dataset holds trajectories of {} points, checkpoint accepts {}",
            data.max_len(),
            model.config.max_len
        ))
        .into());
    }
    let loaded = if header.scalar == "f32" {
        Loaded::F32(model.cast())
    } else {
        Loaded::F64(model)
    };
    Ok((loaded, header))
}

fn require<'a, T>(v: &'a Option<T>, flag: &str, mode: &str) -> CmdResult<&'a T> {
    match v {
        Some(x) => Ok(x),
        None => usage(format!("--{flag} is required for {mode}")),
    }
}
