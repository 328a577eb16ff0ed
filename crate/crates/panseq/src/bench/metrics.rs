//! Binder-class evaluation: threshold-0.5 precision/recall/F1 plus the
//! precision-recall curve and its average-precision AUC.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EvalMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// (recall, precision) points swept over all distinct score
    /// thresholds, recall non-decreasing.
    pub pr_curve: Vec<(f64, f64)>,
    /// Average precision (step interpolation).
    pub pr_auc: f64,
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Evaluate scores in [0, 1] against boolean labels (true = binder).
pub fn evaluate_scores(scores: &[f64], labels: &[bool]) -> Result<EvalMetrics> {
    if scores.is_empty() || scores.len() != labels.len() {
        return Err(Error::Evaluation(format!(
            "need equal non-empty scores and labels (got {} and {})",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Evaluation("non-finite score".to_string()));
    }

    // Threshold 0.5 point metrics.
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    for (&s, &y) in scores.iter().zip(labels) {
        let pred = s >= 0.5;
        match (pred, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = safe_div(tp as f64, (tp + fp) as f64);
    let recall = safe_div(tp as f64, (tp + fn_) as f64);
    let f1 = safe_div(2.0 * precision * recall, precision + recall);

    // PR sweep: descending scores, ties processed as one group.
    let total_pos = labels.iter().filter(|&&y| y).count() as f64;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut pr_curve = Vec::new();
    let mut pr_auc = 0.0;
    if total_pos > 0.0 {
        let mut cum_tp = 0.0;
        let mut cum_fp = 0.0;
        let mut prev_recall = 0.0;
        let mut i = 0;
        while i < order.len() {
            let threshold = scores[order[i]];
            while i < order.len() && scores[order[i]] == threshold {
                if labels[order[i]] {
                    cum_tp += 1.0;
                } else {
                    cum_fp += 1.0;
                }
                i += 1;
            }
            let r = cum_tp / total_pos;
            let p = cum_tp / (cum_tp + cum_fp);
            pr_curve.push((r, p));
            pr_auc += (r - prev_recall) * p;
            prev_recall = r;
        }
    }

    Ok(EvalMetrics {
        precision,
        recall,
        f1,
        pr_curve,
        pr_auc,
    })
}
