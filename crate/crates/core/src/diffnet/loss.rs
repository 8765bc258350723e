use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};

/// Mean squared error over every value in the batch, with its gradient.
pub fn mse<T: Scalar>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<(T, Tensor<T>)> {
    if pred.shape() != target.shape() {
        return Err(Error::Dimension(format!(
            "mse between {:?} and {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let count = pred.len().max(1) as f64;
    let scale = T::from_f64(2.0 / count);
    let mut sum = 0.0f64;
    let grad: Vec<T> = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| {
            let d = p - t;
            sum += (d * d).as_f64();
            d * scale
        })
        .collect();
    Ok((T::from_f64(sum / count), Tensor::from_vec(pred.shape(), grad)?))
}

/// Per-head softmax probabilities; `logits` holds `heads × classes` values per item.
pub fn softmax_heads<T: Scalar>(logits: &[T], classes: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(logits.len());
    for head in logits.chunks(classes) {
        let max = head.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        let exps: Vec<T> = head.iter().map(|&v| (v - max).exp()).collect();
        let total: T = exps.iter().copied().sum();
        out.extend(exps.into_iter().map(|e| e / total));
    }
    out
}

/// Summed per-head cross-entropy averaged over the batch.
///
/// `targets` holds one class index per head per item, item-major.
pub fn softmax_cross_entropy<T: Scalar>(
    logits: &Tensor<T>,
    targets: &[usize],
    classes: usize,
) -> Result<(T, Tensor<T>)> {
    let n = logits.batch();
    let per_item = logits.item_len();
    if classes == 0 || per_item % classes != 0 {
        return Err(Error::Dimension(format!(
            "{per_item} logits cannot be split into heads of {classes}"
        )));
    }
    let heads = per_item / classes;
    if targets.len() != n * heads {
        return Err(Error::Dimension(format!(
            "expected {} targets, got {}",
            n * heads,
            targets.len()
        )));
    }
    if let Some(&bad) = targets.iter().find(|&&t| t >= classes) {
        return Err(Error::Range(format!("class index {bad} >= {classes}")));
    }
    let probs = softmax_heads(logits.data(), classes);
    let inv_n = T::from_f64(1.0 / n.max(1) as f64);
    let mut loss = 0.0f64;
    let mut grad = probs.clone();
    for (h, &t) in targets.iter().enumerate() {
        let idx = h * classes + t;
        loss -= probs[idx].as_f64().max(1e-300).ln();
        grad[idx] = grad[idx] - T::one();
    }
    for g in &mut grad {
        *g = *g * inv_n;
    }
    Ok((T::from_f64(loss / n.max(1) as f64), Tensor::from_vec(logits.shape(), grad)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_of_equal_tensors_is_zero_with_zero_gradient() {
        let x = Tensor::<f32>::from_vec([1, 1, 2, 2], vec![0.1, 0.5, 0.9, 0.3]).unwrap();
        let (l, g) = mse(&x, &x).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cross_entropy_is_negative_log_prob() {
        let logits = Tensor::<f64>::from_vec([1, 5, 1, 1], vec![1.0, 2.0, 0.5, -1.0, 0.0]).unwrap();
        let (loss, grad) = softmax_cross_entropy(&logits, &[1], 5).unwrap();
        let p = softmax_heads(logits.data(), 5);
        assert!((loss + p[1].ln()).abs() < 1e-12);
        assert!(loss >= 0.0);
        let s: f64 = grad.data().iter().sum();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_sums_heads() {
        let logits = Tensor::<f64>::from_vec([1, 10, 1, 1], (0..10).map(|i| i as f64 * 0.3).collect()).unwrap();
        let (both, _) = softmax_cross_entropy(&logits, &[2, 4], 5).unwrap();
        let a = Tensor::<f64>::from_vec([1, 5, 1, 1], logits.data()[..5].to_vec()).unwrap();
        let b = Tensor::<f64>::from_vec([1, 5, 1, 1], logits.data()[5..].to_vec()).unwrap();
        let (la, _) = softmax_cross_entropy(&a, &[2], 5).unwrap();
        let (lb, _) = softmax_cross_entropy(&b, &[4], 5).unwrap();
        assert!((both - la - lb).abs() < 1e-12);
    }

    #[test]
    fn head_probabilities_sum_to_one() {
        let p = softmax_heads(&[3.0f32, -2.0, 0.0, 9.0, 1.0, 0.1, 0.2, 0.3, 0.4, 0.5], 5);
        for head in p.chunks(5) {
            assert!((head.iter().sum::<f32>() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let logits = Tensor::<f32>::zeros([1, 5, 1, 1]);
        assert!(softmax_cross_entropy(&logits, &[5], 5).is_err());
        assert!(softmax_cross_entropy(&logits, &[1, 2], 5).is_err());
    }
}
