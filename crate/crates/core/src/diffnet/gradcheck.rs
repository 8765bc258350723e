//! Finite-difference verification of analytic gradients.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::{Gradients, LayerGraph};
use super::tensor::{Scalar, Tensor};
use crate::error::Result;

#[derive(Clone, Copy, Debug)]
pub struct GradCheckOptions {
    /// Central-difference step.
    pub epsilon: f64,
    /// Maximum allowed relative error.
    pub tolerance: f64,
    /// Parameters checked per tensor (all of them when the tensor is smaller).
    pub per_tensor: usize,
    /// Denominator floor so exactly-zero gradients compare absolutely.
    pub floor: f64,
    /// Skip entries whose ±epsilon probe flips the sign of any ReLU input;
    /// central differences across a kink do not estimate the derivative.
    pub skip_kinks: bool,
    /// Probes per tensor, kinked ones included, before giving up on it.
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            epsilon: 1e-3,
            tolerance: 1e-3,
            per_tensor: 16,
            floor: 1e-6,
            skip_kinks: true,
            max_attempts: 64,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// (tensor, element) of the worst entry.
    pub worst: Option<(usize, usize)>,
    pub checked: usize,
    /// Probes discarded because they crossed a ReLU kink.
    pub kinked: usize,
    /// Tensors left without a single valid probe.
    pub uncovered: Vec<usize>,
    pub passed: bool,
}

/// `|a - n| / max(|a|, |n|, floor)`
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Checks `graph.backward` against central differences of `loss`.
pub fn grad_check<T, F>(
    graph: &LayerGraph<T>,
    input: &Tensor<T>,
    loss: F,
    options: &GradCheckOptions,
) -> Result<GradCheckReport>
where
    T: Scalar,
    F: Fn(&Tensor<T>) -> Result<(T, Tensor<T>)>,
{
    let pass = graph.forward(input)?;
    let (_, grad_out) = loss(pass.output())?;
    let analytic = graph.backward(&pass, &grad_out)?;
    compare_gradients(graph, input, &loss, &analytic, options)
}

/// Compares supplied analytic gradients with central differences.
pub fn compare_gradients<T, F>(
    graph: &LayerGraph<T>,
    input: &Tensor<T>,
    loss: &F,
    analytic: &Gradients<T>,
    options: &GradCheckOptions,
) -> Result<GradCheckReport>
where
    T: Scalar,
    F: Fn(&Tensor<T>) -> Result<(T, Tensor<T>)>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut probe = graph.clone();
    let eps = T::from_f64(options.epsilon);
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst: None,
        checked: 0,
        kinked: 0,
        uncovered: Vec::new(),
        passed: true,
    };
    let base = if options.skip_kinks {
        Some(graph.relu_pattern(&graph.forward(input)?))
    } else {
        None
    };
    // loss at the probe, and whether it sits on the base point's linear piece
    let eval = |g: &LayerGraph<T>| -> Result<(f64, bool)> {
        let pass = g.forward(input)?;
        let same = base.as_ref().is_none_or(|b| *b == g.relu_pattern(&pass));
        Ok((loss(pass.output())?.0.as_f64(), same))
    };
    for t in 0..graph.params().len() {
        let len = graph.params()[t].len();
        let order: Vec<usize> = if len <= options.per_tensor {
            (0..len).collect()
        } else {
            sample(&mut rng, len, options.max_attempts.max(options.per_tensor).min(len)).into_vec()
        };
        let mut done = 0;
        for j in order {
            if done == options.per_tensor {
                break;
            }
            let orig = probe.params()[t].data()[j];
            probe.params_mut()[t].data_mut()[j] = orig + eps;
            let (plus, smooth_plus) = eval(&probe)?;
            probe.params_mut()[t].data_mut()[j] = orig - eps;
            let (minus, smooth_minus) = eval(&probe)?;
            probe.params_mut()[t].data_mut()[j] = orig;
            if !(smooth_plus && smooth_minus) {
                report.kinked += 1;
                continue;
            }
            done += 1;
            let numeric = (plus - minus) / (2.0 * options.epsilon);
            let a = analytic.0[t].data()[j].as_f64();
            let err = relative_error(a, numeric, options.floor);
            report.checked += 1;
            if err > report.max_relative_error || report.worst.is_none() {
                report.max_relative_error = err;
                report.worst = Some((t, j));
            }
        }
        if done == 0 {
            report.uncovered.push(t);
        }
    }
    report.passed = report.max_relative_error < options.tolerance && report.uncovered.is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffnet::{loss, GraphBuilder};

    #[test]
    fn linear_single_parameter_is_exact() {
        // y = w·x with a 1→1 dense layer; bias is also checked
        let mut b = GraphBuilder::new([1, 1, 1]);
        b.dense(0, 1);
        let graph: LayerGraph<f64> = b.build(3).unwrap();
        let x = Tensor::from_vec([1, 1, 1, 1], vec![1.7]).unwrap();
        let target = Tensor::from_vec([1, 1, 1, 1], vec![0.4]).unwrap();
        let report = grad_check(&graph, &x, |y| loss::mse(y, &target), &GradCheckOptions::default()).unwrap();
        assert!(report.max_relative_error < 1e-6, "{report:?}");
    }

    #[test]
    fn corrupted_backward_fails() {
        let mut b = GraphBuilder::new([2, 6, 6]);
        let c = b.conv(0, 3, 3, 1);
        let r = b.relu(c);
        b.dense(r, 4);
        let graph: LayerGraph<f64> = b.build(5).unwrap();
        let x = Tensor::from_vec([2, 2, 6, 6], (0..144).map(|i| (i as f64 * 0.37).sin()).collect()).unwrap();
        let target = Tensor::from_vec([2, 4, 1, 1], vec![0.1, -0.2, 0.3, 0.0, 0.5, 0.2, -0.1, 0.4]).unwrap();
        let lossf = |y: &Tensor<f64>| loss::mse(y, &target);
        let pass = graph.forward(&x).unwrap();
        let (_, g) = lossf(pass.output()).unwrap();
        let mut grads = graph.backward(&pass, &g).unwrap();
        let opts = GradCheckOptions::default();
        let good = compare_gradients(&graph, &x, &lossf, &grads, &opts).unwrap();
        assert!(good.passed, "{good:?}");
        grads.0[0] = grads.0[0].scale(1.1);
        let bad = compare_gradients(&graph, &x, &lossf, &grads, &opts).unwrap();
        assert!(!bad.passed);
    }

    #[test]
    fn probes_across_a_relu_kink_are_skipped() {
        // the bias sits exactly on the kink, so its ±eps probes straddle it
        let mut b = GraphBuilder::new([1, 1, 1]);
        let d = b.dense(0, 1);
        let r = b.relu(d);
        b.dense(r, 1);
        let mut graph: LayerGraph<f64> = b.build(2).unwrap();
        graph.params_mut()[0].data_mut()[0] = 1.0;
        let x = Tensor::from_vec([1, 1, 1, 1], vec![0.0]).unwrap();
        let target = Tensor::from_vec([1, 1, 1, 1], vec![1.0]).unwrap();
        let lossf = |y: &Tensor<f64>| loss::mse(y, &target);
        let opts = GradCheckOptions::default();
        let report = grad_check(&graph, &x, lossf, &opts).unwrap();
        // the kinked bias is the only entry of its tensor, so it stays unverified
        assert_eq!((report.kinked, report.uncovered.clone()), (1, vec![1]), "{report:?}");
        assert!(report.max_relative_error < 1e-6 && !report.passed, "{report:?}");
        let naive = grad_check(&graph, &x, lossf, &GradCheckOptions { skip_kinks: false, ..opts }).unwrap();
        assert_eq!(naive.kinked, 0);
        assert!(naive.max_relative_error > 0.1, "{naive:?}");
    }
}
