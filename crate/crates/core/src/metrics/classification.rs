use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::label::ClassLabel;

fn check_lengths<A, B>(preds: &[A], gts: &[B]) -> Result<(), MetricsError> {
    if preds.len() != gts.len() {
        return Err(MetricsError::LengthMismatch { left: preds.len(), right: gts.len() });
    }
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// Fraction of positions where the prediction equals the ground truth.
pub fn accuracy(preds: &[ClassLabel], gts: &[ClassLabel]) -> Result<f64, MetricsError> {
    check_lengths(preds, gts)?;
    let correct = preds.iter().zip(gts).filter(|(p, g)| p == g).count();
    Ok(correct as f64 / preds.len() as f64)
}

/// `counts[i][j]` = number of samples with true class `classes[i]` predicted as `classes[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<ClassLabel>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Rows divided by their sums (normalized over the true-label axis).
    /// Empty rows stay all-zero.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let sum: u64 = row.iter().sum();
                row.iter().map(|&c| if sum == 0 { 0.0 } else { c as f64 / sum as f64 }).collect()
            })
            .collect()
    }

    fn position(&self, label: ClassLabel) -> Option<usize> {
        self.classes.iter().position(|&c| c == label)
    }
}

pub fn confusion(preds: &[ClassLabel], gts: &[ClassLabel], classes: &[ClassLabel]) -> Result<ConfusionMatrix, MetricsError> {
    if preds.len() != gts.len() {
        return Err(MetricsError::LengthMismatch { left: preds.len(), right: gts.len() });
    }
    let mut cm = ConfusionMatrix { classes: classes.to_vec(), counts: vec![vec![0; classes.len()]; classes.len()] };
    for (&p, &g) in preds.iter().zip(gts) {
        let i = cm.position(g).ok_or(MetricsError::UnknownLabel(g))?;
        let j = cm.position(p).ok_or(MetricsError::UnknownLabel(p))?;
        cm.counts[i][j] += 1;
    }
    Ok(cm)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: ClassLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prf1Report {
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted mean of per-class F1, including zero-support classes.
    pub macro_f1: f64,
    pub accuracy: f64,
    pub total: u64,
}

impl Prf1Report {
    pub fn class(&self, label: ClassLabel) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|m| m.label == label)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn one_vs_rest(cm: &ConfusionMatrix, k: usize) -> ClassMetrics {
    let tp = cm.counts[k][k];
    let support: u64 = cm.counts[k].iter().sum();
    let predicted: u64 = cm.counts.iter().map(|row| row[k]).sum();
    let precision = ratio(tp, predicted);
    let recall = ratio(tp, support);
    ClassMetrics { label: cm.classes[k], precision, recall, f1: f1(precision, recall), support }
}

/// One-vs-rest precision, recall and F1 for every class of `cm`.
pub fn prf1(cm: &ConfusionMatrix) -> Prf1Report {
    let per_class: Vec<ClassMetrics> = (0..cm.classes.len()).map(|k| one_vs_rest(cm, k)).collect();
    let macro_f1 = if per_class.is_empty() {
        0.0
    } else {
        per_class.iter().map(|m| m.f1).sum::<f64>() / per_class.len() as f64
    };
    Prf1Report { per_class, macro_f1, accuracy: ratio(cm.trace(), cm.total()), total: cm.total() }
}

/// Single-row summary of a binary task with `positive` as the positive class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinarySummary {
    pub positive: ClassLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

pub fn binary_summary(cm: &ConfusionMatrix, positive: ClassLabel) -> Result<BinarySummary, MetricsError> {
    let k = cm.position(positive).ok_or(MetricsError::UnknownLabel(positive))?;
    let m = one_vs_rest(cm, k);
    Ok(BinarySummary {
        positive,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        accuracy: ratio(cm.trace(), cm.total()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ClassLabel::{Background as B, Dreb as D, Oreb as O};

    fn repeat(label: ClassLabel, n: usize) -> Vec<ClassLabel> {
        vec![label; n]
    }

    #[test]
    fn accuracy_examples() {
        let g = vec![D, O, O, D];
        assert_eq!(accuracy(&g, &g).unwrap(), 1.0);
        assert_eq!(accuracy(&[O, D, D, O], &g).unwrap(), 0.0);
        let mut preds = repeat(D, 881);
        preds.extend(repeat(O, 119));
        assert!((accuracy(&preds, &repeat(D, 1000)).unwrap() - 0.881).abs() < 1e-15);
        assert_eq!(accuracy(&[D], &[D, O]), Err(MetricsError::LengthMismatch { left: 1, right: 2 }));
        assert_eq!(accuracy(&[], &[]), Err(MetricsError::Empty));
    }

    #[test]
    fn confusion_examples() {
        let g = vec![D, D, D, O, O];
        let cm = confusion(&g, &g, &[D, O]).unwrap();
        assert_eq!(cm.counts, vec![vec![3, 0], vec![0, 2]]);
        let cm = confusion(&repeat(O, 4), &repeat(D, 4), &[D, O]).unwrap();
        assert_eq!(cm.counts, vec![vec![0, 4], vec![0, 0]]);
        assert_eq!(confusion(&[B], &[D], &[D, O]), Err(MetricsError::UnknownLabel(B)));
    }

    #[test]
    fn normalized_rows_sum_to_one() {
        let cm = ConfusionMatrix { classes: vec![D, O, B], counts: vec![vec![3, 1, 0], vec![0, 0, 0], vec![2, 2, 4]] };
        let n = cm.row_normalized();
        assert!((n[0].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(n[1], vec![0.0, 0.0, 0.0]);
        assert!((n[2][2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn prf1_perfect_binary() {
        let cm = ConfusionMatrix { classes: vec![D, O], counts: vec![vec![500, 0], vec![0, 500]] };
        let r = prf1(&cm);
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        assert!(r.per_class.iter().all(|m| m.precision == 1.0 && m.recall == 1.0 && m.f1 == 1.0));
    }

    #[test]
    fn prf1_hand_arithmetic() {
        let cm = ConfusionMatrix { classes: vec![D, O], counts: vec![vec![435, 65], vec![55, 445]] };
        let r = prf1(&cm);
        let d = r.class(D).unwrap();
        let o = r.class(O).unwrap();
        assert!((d.precision - 435.0 / 490.0).abs() < 1e-15);
        assert!((d.recall - 0.87).abs() < 1e-15);
        assert!((o.precision - 445.0 / 510.0).abs() < 1e-15);
        assert!((o.recall - 0.89).abs() < 1e-15);
        assert!((r.accuracy - 0.88).abs() < 1e-15);
        assert_eq!(format!("{:.3} {:.3}", d.precision, o.precision), "0.888 0.873");
        assert_eq!((d.support, o.support), (500, 500));
    }

    #[test]
    fn zero_support_class_counts_in_macro() {
        let cm = ConfusionMatrix { classes: vec![D, O, B], counts: vec![vec![5, 0, 0], vec![0, 5, 0], vec![0, 0, 0]] };
        let r = prf1(&cm);
        assert_eq!(r.class(B).unwrap().f1, 0.0);
        assert!((r.macro_f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn binary_summary_uses_positive_class() {
        // All-DREB predictions on a balanced set.
        let gts: Vec<ClassLabel> = repeat(D, 10).into_iter().chain(repeat(O, 10)).collect();
        let cm = confusion(&repeat(D, 20), &gts, &[D, O]).unwrap();
        let s = binary_summary(&cm, O).unwrap();
        assert_eq!((s.precision, s.recall, s.f1, s.accuracy), (0.0, 0.0, 0.0, 0.5));
        let s = binary_summary(&cm, D).unwrap();
        assert_eq!(s.recall, 1.0);
        assert!(binary_summary(&cm, B).is_err());
    }
}
