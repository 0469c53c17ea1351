#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn trajsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn trajsim")
}

/// Runs a command and panics with its stderr unless it succeeds.
pub fn ok(dir: &Path, args: &[&str]) -> String {
    let out = trajsim(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn code(dir: &Path, args: &[&str]) -> i32 {
    trajsim(dir, args).status.code().expect("exit code")
}

pub fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// gen → preprocess → gt → train → eval in `dir`, with a small model.
pub fn pipeline(dir: &Path, count: usize, measure: &str, sim: &str) -> PathBuf {
    let count = count.to_string();
    ok(dir, &["gen", "--count", &count, "--len-min", "10", "--len-max", "30", "--seed", "4", "--out", "raw.csv"]);
    ok(dir, &["preprocess", "--in", "raw.csv", "--out", "data.csv", "--normalize"]);
    ok(dir, &["gt", "--in", "data.csv", "--measure", measure, "--out", "data.gtm"]);
    ok(
        dir,
        &[
            "train", "--data", "data.csv", "--gt", "data.gtm", "--sim", sim, "--d", "16", "--heads", "2",
            "--pairs", "5", "--epochs", "3", "--seed", "9", "--out-ckpt", "model.ckpt",
        ],
    );
    let mut eval = vec!["eval", "--ckpt", "model.ckpt", "--data", "data.csv", "--gt", "data.gtm"];
    if count.parse::<usize>().unwrap() < 200 {
        eval.extend(["--k", "1,10", "--inv-k", "10"]);
    }
    eval.extend(["--out-report", "report.json"]);
    ok(dir, &eval);
    dir.to_path_buf()
}
