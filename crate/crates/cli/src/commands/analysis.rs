use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use trajsim_core::distance::DistanceMeasure;
use trajsim_core::encoder::{Representation, SimformerModel};
use trajsim_core::eval::{
    benchmark_query, concentration_stats, log10_surface_ratio, similarity_histogram, write_bench_csv, BenchMethod,
    BenchReport,
};
use trajsim_core::{Dataset, GroundTruthMatrix, Scalar};

use super::{load_dataset, load_model, parse_list, read_split, require, split_path, Loaded};
use crate::args::{AnalyzeArgs, AnalyzeMode, BenchArgs};
use crate::manifest::{write_atomic, Run};
use crate::{usage, CmdResult};

#[derive(Clone, Copy, PartialEq)]
enum Method {
    Brute,
    NonLearning,
    Learned,
}

fn parse_methods(s: &str) -> CmdResult<Vec<Method>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "brute" => Ok(Method::Brute),
            "nonlearning" => Ok(Method::NonLearning),
            "learned" => Ok(Method::Learned),
            _ => usage(format!("unknown method `{t}`")),
        })
        .collect()
}

fn bench_size<T: Scalar>(
    data: &Dataset<T>,
    measure: DistanceMeasure,
    methods: &[Method],
    model: Option<&SimformerModel<T>>,
    a: &BenchArgs,
) -> CmdResult<Vec<BenchReport>> {
    let mut out = Vec::new();
    for &m in methods {
        let report = match m {
            Method::Brute => benchmark_query(data, &BenchMethod::BruteExact(measure), a.k, a.queries, a.seed)?,
            Method::NonLearning => benchmark_query(data, &BenchMethod::NonLearning(measure), a.k, a.queries, a.seed)?,
            Method::Learned => {
                let model = model.expect("checked by caller");
                let reps = encode_all(model, data)?;
                let method = BenchMethod::Learned { model, reps: &reps, sim: model.config.sim_fn.resolve() };
                benchmark_query(data, &method, a.k, a.queries, a.seed)?
            }
        };
        println!("{:<12} n={:<6} mean {:.3} ms  std {:.3} ms", report.method, report.n, report.mean_ms, report.std_ms);
        out.push(report);
    }
    Ok(out)
}

pub fn bench(a: &BenchArgs) -> CmdResult {
    let run = Run::start("bench", a);
    let methods = parse_methods(&a.methods)?;
    let sizes = parse_list(&a.sizes, "size")?;
    if methods.is_empty() || sizes.is_empty() {
        return usage("--methods and --sizes must be non-empty");
    }
    let data = load_dataset(&a.data)?;
    if let Some(&n) = sizes.iter().find(|&&n| n > data.len() || n <= a.k) {
        return usage(format!(
            "size {n} must exceed k = {} and fit in the dataset ({} trajectories)",
            a.k,
            data.len()
        ));
    }
    let model = if methods.contains(&Method::Learned) {
        let path = require(&a.ckpt, "ckpt", "the learned method")?;
        Some(load_model(path, &data)?.0)
    } else {
        None
    };
    let measure: DistanceMeasure = a.measure.into();
    let mut reports = Vec::new();
    for &n in &sizes {
        let ids: Vec<usize> = (0..n).collect();
        let sub = data.subset(&ids)?;
        let r = match &model {
            Some(Loaded::F32(m)) => bench_size(&sub.cast::<f32>(), measure, &methods, Some(m), a)?,
            Some(Loaded::F64(m)) => bench_size(&sub, measure, &methods, Some(m), a)?,
            None => bench_size(&sub, measure, &methods, None, a)?,
        };
        reports.extend(r);
    }
    write_bench_csv(BufWriter::new(File::create(&a.out)?), &reports)?;
    let mut inputs = vec![a.data.clone()];
    inputs.extend(a.ckpt.clone());
    run.finish(vec![a.seed], inputs, vec![a.out.clone()])
}

fn test_ids(ckpt: &Path, data_len: usize) -> CmdResult<Vec<usize>> {
    let path = split_path(ckpt);
    if path.exists() {
        let spec = read_split(&path)?;
        if spec.total() == data_len {
            return Ok(spec.test_ids);
        }
    }
    Ok((0..data_len).collect())
}

fn learned_sims<T: Scalar>(model: &SimformerModel<T>, data: &Dataset<T>) -> CmdResult<Vec<f64>> {
    let reps = encode_all(model, data)?;
    let sim = model.config.sim_fn.resolve();
    let mut out = Vec::with_capacity(reps.len() * reps.len().saturating_sub(1) / 2);
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            out.push(sim.eval(reps[i].as_slice(), reps[j].as_slice())?.to_f64().unwrap_or(f64::NAN));
        }
    }
    Ok(out)
}

pub fn analyze(a: &AnalyzeArgs) -> CmdResult {
    let run = Run::start("analyze", a);
    let mut lines: Vec<String> = Vec::new();
    let mut inputs: Vec<PathBuf> = Vec::new();
    match a.mode {
        AnalyzeMode::Ratio => {
            if a.d_min == 0 || a.d_min > a.d_max {
                return usage(format!("invalid dimension range [{}, {}]", a.d_min, a.d_max));
            }
            lines.push("d,log10_R".into());
            for d in a.d_min..=a.d_max {
                lines.push(format!("{d},{:.6}", log10_surface_ratio(d)?));
            }
        }
        AnalyzeMode::Concentration => {
            let ckpt = require(&a.ckpt, "ckpt", "concentration")?;
            let data_path = require(&a.data, "data", "concentration")?;
            let data = load_dataset(data_path)?;
            let (model, _) = load_model(ckpt, &data)?;
            let ids = test_ids(ckpt, data.len())?;
            let sub = data.subset(&ids)?;
            let stats = match &model {
                Loaded::F32(m) => concentration_stats(&encode_all(m, &sub.cast())?)?,
                Loaded::F64(m) => concentration_stats(&encode_all(m, &sub)?)?,
            };
            lines.push("dim,mean,std".into());
            for (i, (m, s)) in stats.means.iter().zip(&stats.stds).enumerate() {
                lines.push(format!("{i},{m:.6},{s:.6}"));
            }
            println!("average per-dimension std: {:.6}", stats.avg_std);
            inputs.extend([ckpt.clone(), data_path.clone()]);
        }
        AnalyzeMode::Histogram => {
            if a.bins == 0 {
                return usage("--bins must be at least 1");
            }
            let gt_path = require(&a.gt, "gt", "histogram")?;
            let gt = GroundTruthMatrix::read(gt_path)?;
            let mut values = Vec::with_capacity(gt.n * gt.n.saturating_sub(1) / 2);
            for i in 0..gt.n {
                for j in i + 1..gt.n {
                    values.push(gt.similarity(i, j));
                }
            }
            let truth = similarity_histogram(&values, a.bins)?;
            inputs.push(gt_path.clone());
            let learned = match &a.ckpt {
                Some(ckpt) => {
                    let data_path = require(&a.data, "data", "a learned histogram")?;
                    let data = load_dataset(data_path)?;
                    let (model, _) = load_model(ckpt, &data)?;
                    let sims = match &model {
                        Loaded::F32(m) => learned_sims(m, &data.cast())?,
                        Loaded::F64(m) => learned_sims(m, &data)?,
                    };
                    inputs.extend([ckpt.clone(), data_path.clone()]);
                    Some(similarity_histogram(&sims, a.bins)?)
                }
                None => None,
            };
            lines.push(match learned {
                Some(_) => "bin_lo,bin_hi,gt_count,learned_count".into(),
                None => "bin_lo,bin_hi,gt_count".into(),
            });
            let width = 1.0 / a.bins as f64;
            for (b, c) in truth.iter().enumerate() {
                let mut row = format!("{:.6},{:.6},{c}", b as f64 * width, (b + 1) as f64 * width);
                if let Some(l) = &learned {
                    row += &format!(",{}", l[b]);
                }
                lines.push(row);
            }
        }
        AnalyzeMode::Attention => {
            let ckpt = require(&a.ckpt, "ckpt", "attention")?;
            let data_path = require(&a.data, "data", "attention")?;
            let id = *require(&a.id, "id", "attention")?;
            let data = load_dataset(data_path)?;
            let Some(t) = data.get(id) else {
                return usage(format!("no trajectory with id {id}"));
            };
            let (model, _) = load_model(ckpt, &data)?;
            let weights = match &model {
                Loaded::F32(m) => m.export_attention(&t.cast::<f32>().points)?,
                Loaded::F64(m) => m.export_attention(&t.points)?,
            };
            lines.push("point_index,weight".into());
            for (i, v) in weights.iter().enumerate() {
                lines.push(format!("{i},{v:.8}"));
            }
            inputs.extend([ckpt.clone(), data_path.clone()]);
        }
    }
    let mut text = lines.join("\n");
    text.push('\n');
    write_atomic(&a.out, text.as_bytes())?;
    run.finish(vec![], inputs, vec![a.out.clone()])
}

/// Encodes one trajectory at a time, so short ones are not padded.
fn encode_all<T: Scalar>(model: &SimformerModel<T>, data: &Dataset<T>) -> CmdResult<Vec<Representation<T>>> {
    Ok(data.trajectories.iter().map(|t| model.encode(&t.points)).collect::<Result<_, _>>()?)
}
