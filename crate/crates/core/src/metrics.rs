//! Performance measures: AUC and support-recovery statistics.

use serde::Serialize;

use crate::cd::Solution;
use crate::{Error, Result};

/// Evaluation summary. Recovery fields are `None` when no ground-truth
/// support was supplied; `auc` is `None` when no scores were evaluated.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EvalReport {
    pub auc: Option<f64>,
    pub f1: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub support_size: usize,
    pub false_positives: Option<usize>,
}

/// Area under the ROC curve, computed as the Mann-Whitney statistic via
/// rank sums in O(n log n). Ties get average ranks (each tied pair
/// contributes 1/2). Internally counts doubled ranks in integers, so the
/// result is exact: it equals the pairwise-count definition bit for bit.
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    assert_eq!(scores.len(), labels.len());
    let n = scores.len();
    let n_pos = labels.iter().filter(|y| **y > 0.0).count() as i64;
    let n_neg = n as i64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClassLabels);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // doubled midrank of a tie group spanning sorted positions [i, j) is
    // (i + 1) + j, an integer
    let mut doubled_rank_sum_pos: i64 = 0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let doubled = (i + 1 + j) as i64;
        for &k in &order[i..j] {
            if labels[k] > 0.0 {
                doubled_rank_sum_pos += doubled;
            }
        }
        i = j;
    }

    let numerator = doubled_rank_sum_pos - n_pos * (n_pos + 1);
    Ok(numerator as f64 / (2 * n_pos * n_neg) as f64)
}

/// Support precision/recall/F1 and false positives of an estimate against
/// the planted coefficient vector.
pub fn recovery_report(est: &Solution, truth: &[f64]) -> EvalReport {
    assert_eq!(est.p, truth.len(), "dimension mismatch");
    let est_support = est.support();
    let truth_support: Vec<usize> = truth
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect();

    let hits = est_support
        .iter()
        .filter(|j| truth_support.binary_search(j).is_ok())
        .count();
    let fp = est_support.len() - hits;

    let precision = if est_support.is_empty() {
        0.0
    } else {
        hits as f64 / est_support.len() as f64
    };
    let recall = if truth_support.is_empty() {
        0.0
    } else {
        hits as f64 / truth_support.len() as f64
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };

    EvalReport {
        auc: None,
        f1: Some(f1),
        precision: Some(precision),
        recall: Some(recall),
        support_size: est_support.len(),
        false_positives: Some(fp),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cd::{Diagnostics, Solution};
    use crate::data::Dataset;
    use crate::loss::{LossKind, Objectives, PenaltyParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solution_with_support(p: usize, support: &[usize]) -> Solution {
        Solution {
            beta: support.iter().map(|&j| (j, 1.0)).collect(),
            p,
            objectives: Objectives {
                penalized: 0.0,
                regularized: 0.0,
                loss: 0.0,
            },
            diagnostics: Diagnostics::default(),
        }
    }

    #[test]
    fn auc_worked_example() {
        let scores = [0.9, 0.8, 0.4, 0.1];
        let labels = [1.0, -1.0, 1.0, -1.0];
        assert_eq!(auc(&scores, &labels).unwrap(), 0.75);
    }

    #[test]
    fn auc_all_tied_is_half() {
        let scores = [0.3; 6];
        let labels = [1.0, 1.0, -1.0, -1.0, 1.0, -1.0];
        assert_eq!(auc(&scores, &labels).unwrap(), 0.5);
    }

    #[test]
    fn auc_perfect_separation() {
        let scores = [2.0, 1.5, -0.5, -1.0];
        let labels = [1.0, 1.0, -1.0, -1.0];
        assert_eq!(auc(&scores, &labels).unwrap(), 1.0);
    }

    #[test]
    fn auc_single_class_errors() {
        match auc(&[0.1, 0.2], &[1.0, 1.0]) {
            Err(crate::Error::SingleClassLabels) => {}
            other => panic!("expected SingleClassLabels, got {other:?}"),
        }
    }

    #[test]
    fn auc_matches_pairwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..100 {
            let n = rng.random_range(2..400);
            // inject ties by quantizing scores
            let scores: Vec<f64> = (0..n)
                .map(|_| (rng.random_range(-1.0f64..1.0) * 8.0).round() / 8.0)
                .collect();
            let mut labels: Vec<f64> = (0..n)
                .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            labels[0] = 1.0;
            if n > 1 {
                labels[1] = -1.0;
            }
            let ours = auc(&scores, &labels).unwrap();
            let oracle = l0class_oracles::pairwise_auc(&scores, &labels);
            assert_eq!(ours, oracle);
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 200;
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0f64..2.0)).collect();
        let labels: Vec<f64> = (0..n)
            .map(|i| if i % 3 == 0 { 1.0 } else { -1.0 })
            .collect();
        let base = auc(&scores, &labels).unwrap();
        let warped: Vec<f64> = scores.iter().map(|s| (s * 0.7).exp() + 3.0).collect();
        assert_eq!(auc(&warped, &labels).unwrap(), base);
    }

    #[test]
    fn recovery_identical_supports() {
        let est = solution_with_support(10, &[1, 4, 7]);
        let mut truth = vec![0.0; 10];
        for j in [1, 4, 7] {
            truth[j] = 1.0;
        }
        let r = recovery_report(&est, &truth);
        assert_eq!(r.f1, Some(1.0));
        assert_eq!(r.false_positives, Some(0));
    }

    #[test]
    fn recovery_disjoint_supports() {
        let est = solution_with_support(10, &[0, 2]);
        let mut truth = vec![0.0; 10];
        truth[5] = 1.0;
        let r = recovery_report(&est, &truth);
        assert_eq!(r.f1, Some(0.0));
    }

    #[test]
    fn recovery_worked_example() {
        // truth {1,2,3,4}, estimate {3,4,5} -> P=2/3, R=1/2, F1=4/7, FP=1
        let est = solution_with_support(10, &[3, 4, 5]);
        let mut truth = vec![0.0; 10];
        for j in [1, 2, 3, 4] {
            truth[j] = 1.0;
        }
        let r = recovery_report(&est, &truth);
        assert!((r.precision.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.recall.unwrap() - 0.5).abs() < 1e-15);
        assert!((r.f1.unwrap() - 4.0 / 7.0).abs() < 1e-15);
        assert_eq!(r.false_positives, Some(1));
    }

    #[test]
    fn recovery_empty_estimate() {
        let est = solution_with_support(10, &[]);
        let mut truth = vec![0.0; 10];
        truth[0] = 1.0;
        let r = recovery_report(&est, &truth);
        assert_eq!(r.precision, Some(0.0));
        assert_eq!(r.f1, Some(0.0));
    }

    #[test]
    fn f1_symmetric_under_swap() {
        let dummy = Dataset::from_rows(&[vec![1.0]], vec![1.0]).unwrap();
        let _ = (&dummy, LossKind::Logistic, PenaltyParams::l0(0.0));
        let est = solution_with_support(12, &[0, 3, 5, 9]);
        let mut truth = vec![0.0; 12];
        for j in [3, 5, 7] {
            truth[j] = 1.0;
        }
        let fwd = recovery_report(&est, &truth);
        // swap roles
        let est2 = solution_with_support(12, &[3, 5, 7]);
        let mut truth2 = vec![0.0; 12];
        for j in [0, 3, 5, 9] {
            truth2[j] = 1.0;
        }
        let rev = recovery_report(&est2, &truth2);
        assert_eq!(fwd.precision, rev.recall);
        assert_eq!(fwd.recall, rev.precision);
        assert_eq!(fwd.f1, rev.f1);
    }
}
