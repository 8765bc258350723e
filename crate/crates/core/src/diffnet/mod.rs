//! Minimal differentiable core: dense tensors, the handful of layers the
//! mimicry models need, two losses, reverse-mode gradients and Adam.

pub mod checkpoint;
pub mod gradcheck;
mod graph;
mod layers;
pub mod loss;
mod tensor;

pub use gradcheck::{compare_gradients, grad_check, GradCheckOptions, GradCheckReport};
pub use graph::{AdamConfig, AdamState, ForwardPass, Gradients, GraphBuilder, LayerGraph, Node};
pub use layers::LayerSpec;
pub use tensor::{Scalar, Tensor};

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(shape: [usize; 4], k: f64) -> Tensor<f64> {
        let n: usize = shape.iter().product();
        Tensor::from_vec(shape, (0..n).map(|i| (i as f64 * k).sin() * 0.8).collect()).unwrap()
    }

    fn opts() -> GradCheckOptions {
        GradCheckOptions {
            per_tensor: 40,
            ..GradCheckOptions::default()
        }
    }

    #[test]
    fn empty_graph_is_identity() {
        let g: LayerGraph<f32> = GraphBuilder::new([2, 3, 3]).build(0).unwrap();
        let x = wave([1, 2, 3, 3], 0.3).cast::<f32>();
        assert_eq!(g.infer(&x).unwrap(), x);
    }

    #[test]
    fn every_layer_kind_passes_grad_check() {
        // conv (stride 1 and 2), relu, upsample, concat, dense, sigmoid
        let mut b = GraphBuilder::new([2, 8, 6]);
        let c1 = b.conv(0, 3, 3, 2);
        let r1 = b.relu(c1);
        let c2 = b.conv(r1, 4, 3, 1);
        let up = b.upsample(c2);
        let cat = b.concat(up, 0);
        let c3 = b.conv(cat, 2, 1, 1);
        let s = b.sigmoid(c3);
        let d = b.dense(s, 5);
        let _ = d;
        let graph: LayerGraph<f64> = b.build(11).unwrap();
        let x = wave([2, 2, 8, 6], 0.71);
        let target = wave([2, 5, 1, 1], 1.3);
        let report = grad_check(&graph, &x, |y| loss::mse(y, &target), &opts()).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn conv_relu_dense_with_cross_entropy() {
        let mut b = GraphBuilder::new([1, 6, 6]);
        let c = b.conv(0, 4, 3, 1);
        let r = b.relu(c);
        b.dense(r, 10);
        let graph: LayerGraph<f64> = b.build(2).unwrap();
        let x = wave([3, 1, 6, 6], 0.9);
        let targets = [0, 4, 1, 2, 3, 3];
        let report = grad_check(&graph, &x, |y| loss::softmax_cross_entropy(y, &targets, 5), &opts()).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn gradients_scale_with_loss() {
        let mut b = GraphBuilder::new([1, 4, 4]);
        let c = b.conv(0, 2, 3, 1);
        b.dense(c, 3);
        let graph: LayerGraph<f64> = b.build(9).unwrap();
        let x = wave([1, 1, 4, 4], 0.5);
        let pass = graph.forward(&x).unwrap();
        let g = wave([1, 3, 1, 1], 2.0);
        let once = graph.backward(&pass, &g).unwrap();
        let twice = graph.backward(&pass, &g.scale(2.0)).unwrap();
        for (a, b) in once.0.iter().zip(&twice.0) {
            for (x, y) in a.data().iter().zip(b.data()) {
                assert!((2.0 * x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn released_pass_is_a_state_error() {
        let mut b = GraphBuilder::new([1, 4, 4]);
        b.conv(0, 2, 3, 1);
        let graph: LayerGraph<f32> = b.build(1).unwrap();
        let mut pass = graph.forward(&Tensor::zeros([1, 1, 4, 4])).unwrap();
        pass.release();
        let err = graph.backward(&pass, &Tensor::zeros([1, 2, 4, 4])).unwrap_err();
        assert!(matches!(err, crate::Error::State(_)));
    }

    #[test]
    fn wrong_input_shape_is_rejected() {
        let mut b = GraphBuilder::new([1, 4, 4]);
        b.relu(0);
        let graph: LayerGraph<f32> = b.build(1).unwrap();
        assert!(graph.infer(&Tensor::zeros([1, 2, 4, 4])).is_err());
    }

    #[test]
    fn non_finite_input_is_numeric_error() {
        let mut b = GraphBuilder::new([1, 1, 2]);
        b.relu(0);
        let graph: LayerGraph<f32> = b.build(1).unwrap();
        let x = Tensor::from_vec([1, 1, 1, 2], vec![f32::NAN, 0.0]).unwrap();
        assert!(matches!(graph.infer(&x), Err(crate::Error::Numeric { .. })));
    }

    #[test]
    fn adam_zero_gradient_leaves_params() {
        let mut b = GraphBuilder::new([1, 1, 3]);
        b.dense(0, 2);
        let mut graph: LayerGraph<f64> = b.build(4).unwrap();
        let before = graph.params().to_vec();
        let zeros = Gradients(before.iter().map(|p| Tensor::zeros(p.shape())).collect());
        graph.adam_step(&zeros, &AdamConfig::default()).unwrap();
        assert_eq!(graph.params(), &before[..]);
        assert_eq!(graph.adam_state().step, 1);
    }

    #[test]
    fn adam_first_step_matches_hand_evaluation() {
        // t = 1: m̂ = g, v̂ = g², so Δθ = -lr·g/(|g| + ε)
        let mut b = GraphBuilder::new([1, 1, 2]);
        b.dense(0, 1);
        let mut graph: LayerGraph<f64> = b.build(4).unwrap();
        let before = graph.params().to_vec();
        let g = Gradients(vec![
            Tensor::from_vec([1, 2, 1, 1], vec![0.3, -2.0]).unwrap(),
            Tensor::from_vec([1, 1, 1, 1], vec![1e-9]).unwrap(),
        ]);
        let cfg = AdamConfig::with_lr(0.01);
        graph.adam_step(&g, &cfg).unwrap();
        for (k, t) in graph.params().iter().enumerate() {
            for (j, &p) in t.data().iter().enumerate() {
                let gj = g.0[k].data()[j];
                let expected = before[k].data()[j] - 0.01 * gj / (gj.abs() + 1e-8);
                assert!((p - expected).abs() < 1e-12, "{p} vs {expected}");
            }
        }
    }

    #[test]
    fn adam_rejects_mismatched_gradients() {
        let mut b = GraphBuilder::new([1, 1, 2]);
        b.dense(0, 1);
        let mut graph: LayerGraph<f32> = b.build(4).unwrap();
        let bad = Gradients(vec![Tensor::zeros([1, 1, 1, 1])]);
        assert!(graph.adam_step(&bad, &AdamConfig::default()).is_err());
    }

    #[test]
    fn checkpoint_roundtrip() {
        let mut b = GraphBuilder::new([1, 4, 4]);
        let c = b.conv(0, 2, 3, 1);
        b.dense(c, 3);
        let mut graph: LayerGraph<f32> = b.build(7).unwrap();
        let grads = Gradients(graph.params().iter().map(|p| p.map(|v| v + 0.5)).collect());
        graph.adam_step(&grads, &AdamConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let meta = serde_json::json!({"kind": "test"});
        checkpoint::save(&graph, meta.clone(), dir.path()).unwrap();
        let (loaded, m) = checkpoint::load(dir.path()).unwrap();
        assert_eq!(loaded, graph);
        assert_eq!(m, meta);
        assert_eq!(
            checkpoint::checkpoint_hash(&loaded, &m),
            checkpoint::checkpoint_hash(&graph, &meta)
        );
    }
}
