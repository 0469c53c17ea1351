use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;

use crate::CmdResult;

/// Record of one command run, written as `<primary output>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
}

pub struct Run {
    command: &'static str,
    flags: Value,
    started_at: String,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CmdResult {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

impl Run {
    pub fn start<A: Serialize>(command: &'static str, args: &A) -> Self {
        Run {
            command,
            flags: serde_json::to_value(args).unwrap_or(Value::Null),
            started_at: now(),
        }
    }

    pub fn finish(self, seeds: Vec<u64>, inputs: Vec<PathBuf>, outputs: Vec<PathBuf>) -> CmdResult {
        let primary = outputs.first().cloned().expect("every command has an output");
        let m = RunManifest {
            command: self.command.to_string(),
            flags: self.flags,
            seeds,
            inputs,
            outputs,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: self.started_at,
            finished_at: now(),
        };
        let mut json = serde_json::to_vec_pretty(&m)?;
        json.push(b'\n');
        write_atomic(&manifest_path(&primary), &json)
    }
}
