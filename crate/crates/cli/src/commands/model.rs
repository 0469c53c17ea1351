use std::fs::File;
use std::io::BufWriter;

use trajsim_core::encoder::{save_checkpoint, CheckpointHeader, SimFn, SimformerConfig, SimformerModel};
use trajsim_core::eval::{evaluate, EvalConfig};
use trajsim_core::training::{train as run_training, write_history_csv, TrainConfig};
use trajsim_core::trajectory::split;
use trajsim_core::{Dataset, Error, GroundTruthMatrix, Scalar};

use super::{load_dataset, load_model, parse_list, read_split, split_path, with_suffix, Loaded};
use crate::args::{EvalArgs, Precision, TrainArgs};
use crate::manifest::{write_atomic, Run};
use crate::{usage, CmdResult};

fn check_matrix(gt: &GroundTruthMatrix, data: &Dataset) -> CmdResult {
    let ids: Vec<usize> = (0..data.len()).collect();
    if gt.n != data.len() || !gt.covers(&ids) {
        return Err(Error::Config(format!(
            "ground-truth matrix has {} rows, dataset has {} trajectories",
            gt.n,
            data.len()
        ))
        .into());
    }
    Ok(())
}

fn train_as<T: Scalar>(
    a: &TrainArgs,
    data: &Dataset,
    gt: &GroundTruthMatrix,
    config: SimformerConfig,
    cfg: &TrainConfig,
    train_ids: &[usize],
    val_ids: &[usize],
) -> CmdResult {
    let model = SimformerModel::<T>::init(config, a.seed)?;
    let out = run_training(model, &data.cast::<T>(), gt, train_ids, val_ids, cfg)?;
    let mut header = CheckpointHeader::for_model(&out.model, a.seed, out.steps as u64);
    header.dataset = data.name.clone();
    save_checkpoint(&out.model, &header, &a.out_ckpt)?;
    let history = with_suffix(&a.out_ckpt, ".history.csv");
    write_history_csv(BufWriter::new(File::create(&history)?), &out.history)?;
    match (out.best_epoch, out.history.last()) {
        (Some(best), Some(last)) => println!(
            "trained {} epochs ({} steps); best val HR@10 {:.4} at epoch {best}; final loss {:.6}",
            out.history.len(),
            out.steps,
            out.history[best - 1].val_hr10,
            last.train_loss
        ),
        _ => println!("no training epochs run; saved the initial model"),
    }
    Ok(())
}

pub fn train(a: &TrainArgs) -> CmdResult {
    let run = Run::start("train", a);
    let data = load_dataset(&a.data)?;
    let gt = GroundTruthMatrix::read(&a.gt)?;
    check_matrix(&gt, &data)?;
    let sim_fn = SimFn::parse(&a.sim, gt.measure).or_else(|e| usage(e.to_string()))?;
    let config = SimformerConfig {
        d: a.d,
        heads: a.heads,
        layers: a.layers,
        d_ff: 4 * a.d,
        max_len: a.max_len,
        sim_fn,
    };
    if let Err(e) = config.validate() {
        return usage(e.to_string());
    }
    if a.batch == 0 {
        return usage("--batch must be at least 1");
    }
    let spec = split(&data, a.split_seed)?;
    let cfg = TrainConfig {
        lr: a.lr,
        batch_size: a.batch,
        pairs_per_anchor: a.pairs,
        max_epochs: a.epochs,
        patience: a.patience,
        max_steps: a.max_steps,
        seed: a.seed,
        measure: gt.measure,
        alpha: gt.alpha,
    };
    match a.precision {
        Precision::F32 => train_as::<f32>(a, &data, &gt, config, &cfg, &spec.train_ids, &spec.val_ids)?,
        Precision::F64 => train_as::<f64>(a, &data, &gt, config, &cfg, &spec.train_ids, &spec.val_ids)?,
    }
    let split_file = split_path(&a.out_ckpt);
    let mut json = serde_json::to_vec_pretty(&spec)?;
    json.push(b'\n');
    write_atomic(&split_file, &json)?;
    run.finish(
        vec![a.seed, a.split_seed],
        vec![a.data.clone(), a.gt.clone()],
        vec![a.out_ckpt.clone(), with_suffix(&a.out_ckpt, ".history.csv"), split_file],
    )
}

pub fn eval(a: &EvalArgs) -> CmdResult {
    let run = Run::start("eval", a);
    let data = load_dataset(&a.data)?;
    let gt = GroundTruthMatrix::read(&a.gt)?;
    check_matrix(&gt, &data)?;
    let (model, _) = load_model(&a.ckpt, &data)?;
    let split_file = a.split.clone().unwrap_or_else(|| split_path(&a.ckpt));
    let spec = read_split(&split_file)?;
    if spec.total() != data.len() {
        return Err(Error::Config(format!(
            "split covers {} trajectories, dataset has {}",
            spec.total(),
            data.len()
        ))
        .into());
    }
    let queries = match a.queries.as_str() {
        "all" => None,
        s => match s.parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => return usage(format!("--queries must be `all` or a positive number, got `{s}`")),
        },
    };
    let cfg = EvalConfig {
        hr_ks: parse_list(&a.k, "k")?,
        t: a.t,
        inversion_ks: parse_list(&a.inv_k, "inversion k")?,
        queries,
    };
    if cfg.t == 0 || cfg.hr_ks.is_empty() {
        return usage("--t must be positive and --k non-empty");
    }
    let report = match &model {
        Loaded::F32(m) => evaluate(m, &data.cast(), &gt, &spec.test_ids, m.config.sim_fn, &cfg)?,
        Loaded::F64(m) => evaluate(m, &data, &gt, &spec.test_ids, m.config.sim_fn, &cfg)?,
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    write_atomic(&a.out_report, &json)?;
    for (k, v) in report.hr.iter().chain(&report.recall) {
        println!("{k}: {v:.4}");
    }
    println!("approximation MSE: {:.6}", report.approx_mse);
    run.finish(
        vec![spec.seed],
        vec![a.ckpt.clone(), a.data.clone(), a.gt.clone(), split_file],
        vec![a.out_report.clone()],
    )
}
