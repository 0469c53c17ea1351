use std::collections::HashMap;
use std::f64::consts::PI;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajsim_core::distance::{DistanceMeasure, GroundTruthMatrix};
use trajsim_core::encoder::{Representation, SimformerConfig, SimformerModel, Similarity};
use trajsim_core::eval::*;
use trajsim_core::trajectory::generate_synthetic;
use trajsim_core::Dataset;

fn result(ids: &[usize]) -> QueryResult {
    QueryResult {
        query_id: 999,
        neighbor_ids: ids.to_vec(),
        scores: (0..ids.len()).map(|i| 1.0 - i as f64 * 0.01).collect(),
    }
}

fn matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> GroundTruthMatrix {
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[i * n + j] = f(i.min(j), i.max(j));
            }
        }
    }
    GroundTruthMatrix::from_parts(DistanceMeasure::Dtw, 16.0, d, (0..n).collect()).unwrap()
}

#[test]
fn ground_truth_topk_examples() {
    let gt = matrix(3, |i, j| match (i, j) {
        (0, 1) => 0.5,
        (0, 2) => 0.1,
        _ => 0.3,
    });
    let r = topk_ground_truth(&gt, 0, 1).unwrap();
    assert_eq!(r.neighbor_ids, vec![2]);
    assert!((r.scores[0] - (-1.6f64).exp()).abs() < 1e-15);
    assert_eq!(topk_ground_truth(&gt, 0, 2).unwrap().neighbor_ids, vec![2, 1]);
    assert!(topk_ground_truth(&gt, 0, 3).is_err());

    let ties = matrix(5, |_, _| 1.0);
    assert_eq!(topk_ground_truth(&ties, 2, 4).unwrap().neighbor_ids, vec![0, 1, 3, 4]);
}

#[test]
fn repr_topk_examples() {
    let reps: Vec<Representation> = vec![
        Representation(vec![1.0, 0.0]),
        Representation(vec![0.3, 0.7]),
        Representation(vec![0.0, 1.0]),
    ];
    let ids = [0, 1, 2];
    let q = Representation(vec![0.3, 0.7]);
    let r = topk_repr(&ids, &reps, &q, Similarity::Cosine, 2, None).unwrap();
    assert_eq!(r.neighbor_ids[0], 1);
    assert!((r.scores[0] - 1.0).abs() < 1e-7);
    let r = topk_repr(&ids[..2], &reps[..2], &Representation(vec![0.9, 0.1]), Similarity::Euclidean, 1, None).unwrap();
    assert_eq!(r.neighbor_ids, vec![0]);
    assert!(topk_repr(&ids, &reps, &q, Similarity::Cosine, 3, Some(1)).is_err());
}

#[test]
fn repr_topk_matches_full_sort() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let reps: Vec<Representation> = (0..500)
        .map(|_| Representation((0..16).map(|_| rng.random_range(0.0..1.0)).collect()))
        .collect();
    let ids: Vec<usize> = (0..500).collect();
    let q = Representation((0..16).map(|_| rng.random_range(0.0..1.0)).collect());
    for sim in [Similarity::Euclidean, Similarity::Cosine, Similarity::Chebyshev] {
        let mut all: Vec<(usize, f64)> = reps.iter().enumerate().map(|(i, r)| (i, sim.eval(&q.0, &r.0).unwrap())).collect();
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let r = topk_repr(&ids, &reps, &q, sim, 50, None).unwrap();
        assert_eq!(r.neighbor_ids, all[..50].iter().map(|x| x.0).collect::<Vec<_>>());
        assert!(r.scores.windows(2).all(|w| w[0] >= w[1]));
    }
    let by_exp = topk_repr(&ids, &reps, &q, Similarity::Euclidean, 499, None).unwrap();
    let mut by_dist: Vec<(usize, f64)> = reps
        .iter()
        .enumerate()
        .map(|(i, r)| (i, -r.0.iter().zip(&q.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()))
        .collect();
    by_dist.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    assert_eq!(by_exp.neighbor_ids, by_dist[..499].iter().map(|x| x.0).collect::<Vec<_>>());
}

#[test]
fn hit_ratio_and_recall_examples() {
    let (a, x, b, c, d) = (1, 2, 3, 4, 5);
    assert_eq!(hr_at_k(&result(&[a, b, c]), &result(&[a, b, c]), 3).unwrap(), 1.0);
    assert_eq!(hr_at_k(&result(&[a, b, c]), &result(&[x, d, 9]), 3).unwrap(), 0.0);
    assert!((hr_at_k(&result(&[a, b, c]), &result(&[a, x, c]), 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert!(hr_at_k(&result(&[a]), &result(&[a, b]), 2).is_err());

    assert_eq!(recall_t_at_k(&result(&[a, b]), &result(&[b, a]), 2, 2).unwrap(), 1.0);
    assert_eq!(recall_t_at_k(&result(&[b, c, d]), &result(&[a, b]), 2, 3).unwrap(), 0.5);
    let approx: Vec<usize> = (0..50).rev().collect();
    let truth: Vec<usize> = (40..50).collect();
    assert_eq!(recall_t_at_k(&result(&approx), &result(&truth), 10, 50).unwrap(), 1.0);
    assert!(recall_t_at_k(&result(&[a, b]), &result(&[a, b]), 3, 2).is_err());
}

#[test]
fn inversion_examples() {
    let truth = result(&[1, 2, 3]);
    let scores = HashMap::from([(1, 0.5), (2, 0.9), (3, 0.1)]);
    assert_eq!(inversions_at_k(&truth, &scores, 3).unwrap(), 1);
    let ten: Vec<usize> = (0..10).collect();
    let same: HashMap<usize, f64> = ten.iter().map(|&i| (i, 1.0 - i as f64 / 10.0)).collect();
    let reversed: HashMap<usize, f64> = ten.iter().map(|&i| (i, i as f64)).collect();
    assert_eq!(inversions_at_k(&result(&ten), &same, 10).unwrap(), 0);
    assert_eq!(inversions_at_k(&result(&ten), &reversed, 10).unwrap(), 45);
    assert!(inversions_at_k(&truth, &HashMap::from([(1, 0.5)]), 3).is_err());
}

#[test]
fn mse_examples() {
    assert_eq!(approximation_mse(&[0.3, 0.2], &[0.3, 0.2]).unwrap(), 0.0);
    assert_eq!(approximation_mse(&[0.0; 4], &[1.0; 4]).unwrap(), 1.0);
    assert!(approximation_mse(&[], &[]).is_err());
    let p = [0.1, 0.7, 0.33];
    let t = [0.2, 0.4, 0.9];
    assert_eq!(
        approximation_mse(&p, &t).unwrap().to_bits(),
        trajsim_core::training::mse_loss(&p, &t).unwrap().to_bits()
    );
}

#[test]
fn concentration_examples() {
    let same = vec![Representation(vec![0.5, 1.0]); 3];
    assert!(concentration_stats(&same).unwrap().stds.iter().all(|&s| s == 0.0));
    let two = [Representation(vec![0.0; 4]), Representation(vec![2.0; 4])];
    let s = concentration_stats(&two).unwrap();
    assert_eq!(s.stds, vec![1.0; 4]);
    assert_eq!(s.means, vec![1.0; 4]);
    assert_eq!(s.avg_std, 1.0);
    assert!(concentration_stats(&two[..1]).is_err());
}

#[test]
fn histogram_examples() {
    assert_eq!(similarity_histogram(&[0.0, 0.5, 1.0], 2).unwrap(), vec![1, 2]);
    assert_eq!(similarity_histogram(&[], 4).unwrap(), vec![0; 4]);
    assert!(similarity_histogram(&[1.2], 4).is_err());
    assert!(similarity_histogram(&[0.2], 0).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v: Vec<f64> = (0..1000).map(|_| rng.random_range(0.0..=1.0)).collect();
    assert_eq!(similarity_histogram(&v, 7).unwrap().iter().sum::<usize>(), 1000);
}

#[test]
fn surface_geometry() {
    assert!((hyperball_area(3, 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
    assert!((hyperball_area(2, 2.0).unwrap() - 4.0 * PI).abs() < 1e-12);
    assert_eq!(hypercube_area(3, 1.0).unwrap(), 24.0);
    assert!((surface_ratio(3).unwrap() - PI / 6.0).abs() < 1e-12);
    assert!((surface_ratio(2).unwrap() - PI / 4.0).abs() < 1e-12);
    assert!((log10_surface_ratio(3).unwrap() - (PI / 6.0).log10()).abs() < 1e-12);
    for d in 1..30 {
        let direct = hyperball_area(d, 1.0).unwrap() / hypercube_area(d, 1.0).unwrap();
        assert!((surface_ratio(d).unwrap() / direct - 1.0).abs() < 1e-12);
    }
    let logs: Vec<f64> = (2..=256).map(|d| log10_surface_ratio(d).unwrap()).collect();
    assert!(logs.windows(2).all(|w| w[1] < w[0]));
    assert!(log10_surface_ratio(128).unwrap() < -80.0);
    assert!(hyperball_area(0, 1.0).is_err());
    assert!(hypercube_area(3, -1.0).is_err());
}

fn small_model() -> SimformerModel {
    let mut c = SimformerConfig::with_width(16, 4);
    c.max_len = 30;
    SimformerModel::init(c, 0).unwrap()
}

#[test]
fn benchmark_reports() {
    let data: Dataset = generate_synthetic(40, 5, 20, 2).unwrap();
    let brute = BenchMethod::BruteExact(DistanceMeasure::Dtw);
    let empty = benchmark_query(&data, &brute, 5, 0, 1).unwrap();
    assert!(empty.query_ids.is_empty() && empty.times_ms.is_empty());
    let a = benchmark_query(&data, &brute, 5, 6, 1).unwrap();
    let b = benchmark_query(&data, &BenchMethod::NonLearning(DistanceMeasure::Frechet), 5, 6, 1).unwrap();
    assert_eq!(a.query_ids, b.query_ids);
    assert_eq!(a.times_ms.len(), 6);
    let model = small_model();
    let reps: Vec<Representation> = data.trajectories.iter().map(|t| model.encode(&t.points).unwrap()).collect();
    let learned = BenchMethod::Learned { model: &model, reps: &reps, sim: Similarity::Cosine };
    let c = benchmark_query(&data, &learned, 5, 6, 1).unwrap();
    assert_eq!(c.query_ids, a.query_ids);
    assert!(benchmark_query(&data, &brute, 40, 1, 1).is_err());
    let mut csv = Vec::new();
    write_bench_csv(&mut csv, &[a, c]).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("method,n,k,mean_ms,std_ms\nbrute,40,5,"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn evaluate_report_is_deterministic_and_bounded() {
    let data: Dataset = generate_synthetic(30, 5, 20, 5).unwrap();
    let gt = trajsim_core::distance::compute_matrix(&data, DistanceMeasure::Dtw, 16.0, 1).unwrap();
    let model = small_model();
    let test: Vec<usize> = (0..30).collect();
    let cfg = EvalConfig { hr_ks: vec![1, 5, 10], t: 5, inversion_ks: vec![5, 10], queries: None };
    let sim = trajsim_core::encoder::SimFn::Tailored(DistanceMeasure::Dtw);
    let a = evaluate(&model, &data, &gt, &test, sim, &cfg).unwrap();
    assert_eq!(a, evaluate(&model, &data, &gt, &test, sim, &cfg).unwrap());
    assert!(a.hr.values().chain(a.recall.values()).all(|v| (0.0..=1.0).contains(v)));
    assert!(a.inversions.values().all(|&v| (0.0..=45.0).contains(&v)));
    assert_eq!(a.recall.keys().cloned().collect::<Vec<_>>(), vec!["R5@10", "R5@5"]);
    let big = EvalConfig { hr_ks: vec![30], ..cfg };
    assert!(evaluate(&model, &data, &gt, &test, sim, &big).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]
    #[test]
    fn metric_identities_on_permutations(seed in any::<u64>(), k in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids: Vec<usize> = (0..100).collect();
        ids.shuffle(&mut rng);
        let x = result(&ids[..k]);
        let other = result(&ids[k..2 * k]);
        prop_assert_eq!(hr_at_k(&x, &x, k).unwrap(), 1.0);
        prop_assert_eq!(hr_at_k(&x, &other, k).unwrap(), 0.0);
        let t = rng.random_range(1..=k);
        prop_assert_eq!(recall_t_at_k(&x, &x, t, k).unwrap(), 1.0);
        prop_assert_eq!(recall_t_at_k(&other, &x, t, k).unwrap(), 0.0);
        let scores: HashMap<usize, f64> = ids[..k].iter().enumerate().map(|(r, &id)| (id, r as f64)).collect();
        prop_assert_eq!(inversions_at_k(&x, &scores, k).unwrap(), k * (k - 1) / 2);
        let rand_scores: HashMap<usize, f64> = ids[..k].iter().map(|&id| (id, rng.random())).collect();
        prop_assert!(inversions_at_k(&x, &rand_scores, k).unwrap() <= k * (k - 1) / 2);
    }
}
