use trajsim_core::distance::{compute_matrix, DistanceMeasure, DistanceScale};
use trajsim_core::trajectory::{
    filter_by_bbox, filter_by_length, generate_synthetic, norm_sidecar_path, normalize, write_dataset,
    write_norm_stats, BoundingBox, FileFormat,
};
use trajsim_core::GroundTruthMatrix;

use super::load_dataset;
use crate::args::{GenArgs, GtArgs, PreprocessArgs};
use crate::manifest::Run;
use crate::{usage, CmdResult};

/// Largest dataset `gt` accepts (a dense n² matrix of 64-bit floats).
const GT_MAX_N: usize = 20_000;

pub fn gen(a: &GenArgs) -> CmdResult {
    let run = Run::start("gen", a);
    if a.count == 0 {
        return usage("--count must be at least 1");
    }
    if a.len_min == 0 || a.len_min > a.len_max {
        return usage(format!("invalid length range [{}, {}]", a.len_min, a.len_max));
    }
    let d = generate_synthetic(a.count, a.len_min, a.len_max, a.seed)?;
    write_dataset(&d, &a.out, FileFormat::from_path(&a.out))?;
    println!("wrote {} trajectories to {}", d.len(), a.out.display());
    run.finish(vec![a.seed], vec![], vec![a.out.clone()])
}

fn parse_bbox(s: &str) -> CmdResult<BoundingBox> {
    let v: Vec<f64> = match s.split(',').map(|t| t.trim().parse::<f64>()).collect() {
        Ok(v) => v,
        Err(_) => return usage(format!("invalid --bbox `{s}`")),
    };
    if v.len() != 4 {
        return usage("--bbox takes lon_min,lon_max,lat_min,lat_max");
    }
    BoundingBox::new(v[0], v[1], v[2], v[3]).or_else(|e| usage(format!("invalid --bbox: {e}")))
}

pub fn preprocess(a: &PreprocessArgs) -> CmdResult {
    let run = Run::start("preprocess", a);
    if a.min_len > a.max_len {
        return usage(format!("--min-len {} exceeds --max-len {}", a.min_len, a.max_len));
    }
    let bbox = a.bbox.as_deref().map(parse_bbox).transpose()?;
    let input = load_dataset(&a.input)?;
    let mut d = filter_by_length(&input, a.min_len, a.max_len)?;
    if let Some(b) = &bbox {
        d = filter_by_bbox(&d, b);
    }
    println!("retained {} of {} trajectories ({} dropped)", d.len(), input.len(), input.len() - d.len());
    let mut outputs = vec![a.out.clone()];
    if d.is_empty() {
        eprintln!("warning: no trajectories survived preprocessing");
    } else if a.normalize {
        d = normalize(&d)?;
        let sidecar = norm_sidecar_path(&a.out);
        write_norm_stats(d.norm_stats.as_ref().expect("normalize records stats"), &sidecar)?;
        outputs.push(sidecar);
    }
    write_dataset(&d, &a.out, FileFormat::from_path(&a.out))?;
    run.finish(vec![], vec![a.input.clone()], outputs)
}

pub fn gt(a: &GtArgs) -> CmdResult {
    let run = Run::start("gt", a);
    let measure: DistanceMeasure = a.measure.into();
    let alpha = match a.alpha.as_str() {
        "auto" => measure.default_alpha(),
        s => match s.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => v,
            _ => return usage(format!("--alpha must be `auto` or a positive number, got `{s}`")),
        },
    };
    let scale = match a.scale.as_str() {
        "max" => DistanceScale::Max,
        "none" => DistanceScale::None,
        s => return usage(format!("--scale must be `max` or `none`, got `{s}`")),
    };
    if a.workers == 0 {
        return usage("--workers must be at least 1");
    }
    let d = load_dataset(&a.input)?;
    if d.len() > GT_MAX_N {
        return usage(format!(
            "refusing to build a {n}×{n} matrix; the limit is {GT_MAX_N} trajectories",
            n = d.len()
        ));
    }
    let mut m: GroundTruthMatrix = compute_matrix(&d, measure, alpha, a.workers)?.with_scale(scale);
    m.dataset_name = d.name.clone();
    m.normalized_input = d.normalized;
    m.write(&a.out)?;
    println!("wrote {n}×{n} {measure} matrix (alpha {alpha}) to {}", a.out.display(), n = m.n);
    run.finish(
        vec![],
        vec![a.input.clone()],
        vec![a.out.clone(), GroundTruthMatrix::meta_path(&a.out)],
    )
}
