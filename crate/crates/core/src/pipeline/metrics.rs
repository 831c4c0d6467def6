use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five reported scores, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub auc: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

/// Positive class = lexicographically larger label.
pub fn positive_label(labels: &[String]) -> Option<&str> {
    labels.iter().map(String::as_str).max()
}

/// Mann–Whitney AUC; tied positive/negative scores earn half credit.
pub fn auc(scores: &[f64], truth: &[bool]) -> Result<f64> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let n_pos = truth.iter().filter(|&&t| t).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    // midranks over groups of equal scores
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * idx[i..=j].iter().filter(|&&k| truth[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos * n_neg) as f64)
}

/// Scores, thresholded predictions and truth, all with `true` = positive.
/// Precision with no predicted positives is 0, as is F1 when precision and
/// recall are both 0.
pub fn metrics(scores: &[f64], predicted: &[bool], truth: &[bool]) -> Result<MetricsReport> {
    if truth.is_empty() || scores.len() != truth.len() || predicted.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} scores, {} predictions, {} labels",
            scores.len(),
            predicted.len(),
            truth.len()
        )));
    }
    let auc = auc(scores, truth)?;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    let mut correct = 0usize;
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
        correct += usize::from(p == t);
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let recall = ratio(tp, tp + fn_);
    let precision = ratio(tp, tp + fp);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricsReport {
        accuracy: ratio(correct, truth.len()),
        auc,
        recall,
        precision,
        f1,
    })
}
