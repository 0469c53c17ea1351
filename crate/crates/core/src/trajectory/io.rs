//! Line-oriented trajectory files.
//!
//! Two encodings are accepted, one trajectory per line:
//!
//! ```text
//! csv:   0;-8.61,41.14;-8.62,41.15
//! jsonl: {"id":0,"points":[[-8.61,41.14],[-8.62,41.15]]}
//! ```
//!
//! Ids in the file are validated but trajectories are renumbered by record
//! order, so `parse → write → parse` is the identity.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Dataset, NormStats, Point, Trajectory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    Jsonl,
}

impl FileFormat {
    /// `.jsonl` / `.json` select JSON lines, anything else the csv encoding.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => FileFormat::Jsonl,
            _ => FileFormat::Csv,
        }
    }
}

impl FromStr for FileFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(FileFormat::Csv),
            "jsonl" => Ok(FileFormat::Jsonl),
            other => Err(Error::arg(format!("unknown file format `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    id: u64,
    points: Vec<[f64; 2]>,
}

fn parse_float(tok: &str) -> std::result::Result<f64, String> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| format!("invalid number `{}`", tok.trim()))?;
    if !v.is_finite() {
        return Err(format!("non-finite coordinate `{}`", tok.trim()));
    }
    Ok(v)
}

/// Parses one `id;lon,lat;...` record. Returns the file id and the points.
pub fn parse_csv_line(line: &str) -> std::result::Result<(u64, Vec<Point>), String> {
    let mut fields = line.split(';');
    let id_field = fields.next().unwrap_or("").trim();
    let id: u64 = id_field
        .parse()
        .map_err(|_| format!("invalid trajectory id `{id_field}`"))?;
    let mut points = Vec::new();
    for field in fields {
        let (lon, lat) = field
            .split_once(',')
            .ok_or_else(|| format!("expected `lon,lat`, found `{field}`"))?;
        points.push(Point::new(parse_float(lon)?, parse_float(lat)?));
    }
    if points.is_empty() {
        return Err("trajectory has no points".into());
    }
    Ok((id, points))
}

fn parse_json_line(line: &str) -> std::result::Result<(u64, Vec<Point>), String> {
    let rec: JsonRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if rec.points.is_empty() {
        return Err("trajectory has no points".into());
    }
    let mut points = Vec::with_capacity(rec.points.len());
    for [lon, lat] in rec.points {
        if !lon.is_finite() || !lat.is_finite() {
            return Err("non-finite coordinate".into());
        }
        points.push(Point::new(lon, lat));
    }
    Ok((rec.id, points))
}

pub fn format_csv_line(t: &Trajectory) -> String {
    let mut s = t.id.to_string();
    for p in &t.points {
        s.push(';');
        s.push_str(&format!("{},{}", p.lon, p.lat));
    }
    s
}

fn format_json_line(t: &Trajectory) -> String {
    let rec = JsonRecord {
        id: t.id as u64,
        points: t.points.iter().map(|p| [p.lon, p.lat]).collect(),
    };
    serde_json::to_string(&rec).expect("finite floats always serialize")
}

/// Reads a trajectory file. Blank lines are skipped.
pub fn read_dataset(path: &Path, format: FileFormat) -> Result<Dataset> {
    let reader = BufReader::new(File::open(path)?);
    let mut trajectories = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let parsed = match format {
            FileFormat::Csv => parse_csv_line(line),
            FileFormat::Jsonl => parse_json_line(line),
        };
        let (_, points) = parsed.map_err(|msg| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg,
        })?;
        trajectories.push(Trajectory::new(trajectories.len(), points));
    }
    if trajectories.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    Ok(Dataset::new(name, trajectories))
}

pub fn write_dataset(d: &Dataset, path: &Path, format: FileFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for t in &d.trajectories {
        let line = match format {
            FileFormat::Csv => format_csv_line(t),
            FileFormat::Jsonl => format_json_line(t),
        };
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// `<dataset>.norm.json` next to a trajectory file.
pub fn norm_sidecar_path(dataset_path: &Path) -> PathBuf {
    let mut s = dataset_path.as_os_str().to_owned();
    s.push(".norm.json");
    PathBuf::from(s)
}

pub fn write_norm_stats(stats: &NormStats, path: &Path) -> Result<()> {
    let mut json = serde_json::to_string_pretty(stats)?;
    json.push('\n');
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_norm_stats(path: &Path) -> Result<NormStats> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
