use trajsim_core::distance::{compute_matrix, DistanceMeasure};
use trajsim_core::encoder::{SimFn, SimformerConfig, SimformerModel, Similarity};
use trajsim_core::numeric::{gradient_check_piecewise, GradCheckConfig, ParamTensor, Parameterized};
use trajsim_core::training::{batch_loss_and_grad, batch_regime, sample_pairs, PairSample};
use trajsim_core::trajectory::{generate_synthetic, normalize};
use trajsim_core::Dataset;

/// The model minus the attention key biases. Softmax is invariant to a
/// per-row shift, so their gradient is exactly zero and the relative error
/// would only measure finite-difference noise.
struct WithoutKeyBias(SimformerModel<f64>);

impl Parameterized<f64> for WithoutKeyBias {
    fn params(&self) -> Vec<&ParamTensor<f64>> {
        let skip: Vec<_> = self.0.layers.iter().map(|l| &l.attn.bk as *const _).collect();
        self.0.params().into_iter().filter(|p| !skip.contains(&(*p as *const _))).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut ParamTensor<f64>> {
        let skip: Vec<_> = self.0.layers.iter().map(|l| &l.attn.bk as *const _).collect();
        self.0.params_mut().into_iter().filter(|p| !skip.contains(&(&**p as *const _))).collect()
    }
}

fn setup(layers: usize, sim: Similarity) -> (WithoutKeyBias, Dataset, Vec<PairSample>) {
    let data = normalize(&generate_synthetic(8, 3, 12, 21).unwrap()).unwrap();
    let gt = compute_matrix(&data, DistanceMeasure::Dtw, 16.0, 1).unwrap();
    let config = SimformerConfig {
        d: 32,
        heads: 4,
        layers,
        d_ff: 128,
        max_len: 12,
        sim_fn: sim.into(),
    };
    let model = SimformerModel::init(config, 5).unwrap();
    let ids: Vec<usize> = (0..8).collect();
    let pairs = sample_pairs(&ids, 1, &gt, 2).unwrap()[..4].to_vec();
    (WithoutKeyBias(model), data, pairs)
}

fn check(layers: usize, sim: Similarity, pairs_used: usize) -> f64 {
    let (mut probe, data, pairs) = setup(layers, sim);
    let batch = &pairs[..pairs_used];
    let report = gradient_check_piecewise(
        &mut probe,
        |m| batch_loss_and_grad(&mut m.0, &data, batch, sim),
        |m| batch_regime(&m.0, &data, batch, sim),
        GradCheckConfig {
            samples: 800,
            seed: 1,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(report.skipped * 50 <= report.checked, "{report:?}");
    let mut model = probe.0;
    model.zero_grad();
    batch_loss_and_grad(&mut model, &data, batch, sim).unwrap();
    for l in &model.layers {
        assert!(l.attn.bk.grad.as_slice().iter().all(|g| g.abs() < 1e-12));
    }
    report.max_rel_error
}

#[test]
fn full_model_gradients_each_similarity() {
    for sim in [Similarity::Euclidean, Similarity::Cosine, Similarity::Chebyshev] {
        let err = check(1, sim, 4);
        assert!(err < 1e-4, "{sim}: {err}");
    }
}

#[test]
fn two_layer_gradients() {
    let err = check(2, Similarity::Cosine, 4);
    assert!(err < 1e-4, "{err}");
}

#[test]
fn siamese_two_pair_batch() {
    let err = check(1, Similarity::Euclidean, 2);
    assert!(err < 1e-4, "{err}");
}

#[test]
fn loss_is_invariant_to_pair_order() {
    let (mut probe, data, mut pairs) = setup(1, Similarity::Cosine);
    let a = batch_loss_and_grad(&mut probe.0, &data, &pairs, Similarity::Cosine).unwrap();
    pairs.reverse();
    let b = batch_loss_and_grad(&mut probe.0, &data, &pairs, Similarity::Cosine).unwrap();
    assert!((a - b).abs() < 1e-15);
}

#[test]
fn tailored_config_resolves_through_measure() {
    let c = SimformerConfig {
        sim_fn: SimFn::Tailored(DistanceMeasure::Frechet),
        ..SimformerConfig::default()
    };
    assert_eq!(c.sim_fn.resolve(), Similarity::Chebyshev);
}
