use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Probabilities are clipped to this floor before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Max-shifted softmax.
pub fn softmax(theta: &[f64]) -> Result<Vec<f64>> {
    if theta.iter().any(|x| !x.is_finite()) {
        return Err(Error::arg("softmax input contains a non-finite value"));
    }
    let mut out = theta.to_vec();
    softmax_in_place(&mut out);
    Ok(out)
}

pub(crate) fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
}

pub(crate) fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        softmax_in_place(row.as_slice_mut().expect("standard layout"));
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossEntropy {
    /// `-Σ_samples Σ_classes y log ŷ`
    pub total: f64,
    pub mean: f64,
}

/// Categorical cross-entropy between one-hot targets and predicted
/// probabilities, both `samples × classes`.
pub fn ce_loss(y_true: ArrayView2<f64>, y_pred: ArrayView2<f64>) -> Result<CrossEntropy> {
    if y_true.dim() != y_pred.dim() {
        return Err(Error::shape(format!("targets {:?} vs predictions {:?}", y_true.dim(), y_pred.dim())));
    }
    let total: f64 = y_true
        .iter()
        .zip(y_pred.iter())
        .filter(|(&y, _)| y != 0.0)
        .map(|(&y, &p)| -y * p.clamp(PROB_FLOOR, 1.0).ln())
        .sum();
    let n = y_true.len_of(Axis(0));
    Ok(CrossEntropy { total, mean: if n == 0 { 0.0 } else { total / n as f64 } })
}

/// Loss of one sample given its class index.
pub(crate) fn sample_loss(probs: &[f64], label: usize) -> f64 {
    -probs[label].clamp(PROB_FLOOR, 1.0).ln()
}

pub fn one_hot(labels: &[usize], classes: usize) -> Array2<f64> {
    let mut y = Array2::zeros((labels.len(), classes));
    for (i, &l) in labels.iter().enumerate() {
        y[[i, l]] = 1.0;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0; 5]).unwrap(), vec![0.2; 5]);
        let p = softmax(&[2f64.ln(), 0.0]).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(softmax(&[1.0, f64::NAN]).is_err());
        assert!(softmax(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn softmax_survives_large_logits() {
        let p = softmax(&[1000.0, 999.0]).unwrap();
        assert!(p.iter().all(|x| x.is_finite()));
        assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ce_examples() {
        let l = ce_loss(array![[0.0, 1.0]].view(), array![[0.0, 1.0]].view()).unwrap();
        assert_eq!(l.total, 0.0);
        let y = one_hot(&[3], 5);
        let l = ce_loss(y.view(), Array2::from_elem((1, 5), 0.2).view()).unwrap();
        assert!((l.total - 5f64.ln()).abs() < 1e-12);
        assert!((l.total - 1.60944).abs() < 1e-5);
    }

    #[test]
    fn ce_is_additive() {
        let y = one_hot(&[0, 2], 3);
        let p = array![[0.5, 0.25, 0.25], [0.1, 0.2, 0.7]];
        let both = ce_loss(y.view(), p.view()).unwrap();
        let a = ce_loss(y.slice(ndarray::s![0..1, ..]), p.slice(ndarray::s![0..1, ..])).unwrap();
        let b = ce_loss(y.slice(ndarray::s![1..2, ..]), p.slice(ndarray::s![1..2, ..])).unwrap();
        assert!((both.total - (a.total + b.total)).abs() < 1e-15);
        assert!((both.mean - both.total / 2.0).abs() < 1e-15);
    }

    #[test]
    fn ce_shape_mismatch() {
        assert!(ce_loss(one_hot(&[0], 3).view(), Array2::zeros((1, 2)).view()).is_err());
    }

    #[test]
    fn ce_clips_zero_probability() {
        let l = ce_loss(one_hot(&[0], 2).view(), array![[0.0, 1.0]].view()).unwrap();
        assert!((l.total - (-(PROB_FLOOR.ln()))).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn softmax_properties(theta in prop::collection::vec(-50.0f64..50.0, 1..12), c in -100.0f64..100.0) {
            let p = softmax(&theta).unwrap();
            prop_assert!(p.iter().all(|&x| x > 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let shifted: Vec<f64> = theta.iter().map(|x| x + c).collect();
            let q = softmax(&shifted).unwrap();
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn ce_nonnegative_and_zero_only_when_certain(theta in prop::collection::vec(-20.0f64..20.0, 2..8), pick in 0usize..8) {
            let label = pick % theta.len();
            let p = softmax(&theta).unwrap();
            let y = one_hot(&[label], theta.len());
            let pm = Array2::from_shape_vec((1, theta.len()), p.clone()).unwrap();
            let l = ce_loss(y.view(), pm.view()).unwrap();
            prop_assert!(l.total >= 0.0);
            prop_assert_eq!(l.total == 0.0, p[label] >= 1.0);
        }
    }
}
