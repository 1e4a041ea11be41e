use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: ArrayView2<f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Mean softmax cross-entropy over the batch and its gradient with respect to
/// the logits, `(softmax − target) / K`.
pub fn softmax_cross_entropy(
    logits: ArrayView2<f64>,
    targets: ArrayView2<f64>,
) -> Result<(f64, Array2<f64>)> {
    if logits.dim() != targets.dim() {
        return Err(Error::domain(format!(
            "logits {:?} vs targets {:?}",
            logits.dim(),
            targets.dim()
        )));
    }
    let mut labels = Vec::with_capacity(targets.nrows());
    for (r, row) in targets.rows().into_iter().enumerate() {
        let ones: Vec<usize> = row
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1.0)
            .map(|(i, _)| i)
            .collect();
        if ones.len() != 1 || row.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::domain(format!("target row {r} is not one-hot")));
        }
        labels.push(ones[0]);
    }
    softmax_cross_entropy_labels(logits, &labels)
}

/// Same as [`softmax_cross_entropy`] with targets given as class indices.
pub fn softmax_cross_entropy_labels(
    logits: ArrayView2<f64>,
    labels: &[usize],
) -> Result<(f64, Array2<f64>)> {
    let (rows, classes) = logits.dim();
    if labels.len() != rows {
        return Err(Error::domain(format!("{} labels for {rows} rows", labels.len())));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::domain(format!("label {bad} >= {classes} classes")));
    }
    let k = rows as f64;
    let mut grad = Array2::zeros((rows, classes));
    let mut total = 0.0;
    for (r, (row, &label)) in logits.rows().into_iter().zip(labels).enumerate() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let sum: f64 = row.iter().map(|&v| (v - max).exp()).sum();
        let log_sum = sum.ln();
        // −ln softmax[label] = log Σ e^(z − max) − (z_label − max)
        total += log_sum - (row[label] - max);
        for (c, &v) in row.iter().enumerate() {
            grad[[r, c]] = (v - max).exp() / sum / k;
        }
        grad[[r, label]] -= 1.0 / k;
    }
    Ok((total / k, grad))
}
