//! Binary and multi-label classification metrics.
//!
//! Multi-label inputs are row-per-sample, column-per-label boolean matrices.
//! Conventions for degenerate labels:
//! - a label with no positives in either matrix has F1 = 0;
//! - balanced accuracy averages whichever of sensitivity and specificity is
//!   defined, and a label with neither is left out of the macro mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn add(&mut self, pred: bool, truth: bool) {
        match (pred, truth) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn merge(&mut self, o: &Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.tn += o.tn;
        self.fn_ += o.fn_;
    }

    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }

    /// `None` when the confusion holds no samples at all.
    pub fn balanced_accuracy(&self) -> Option<f64> {
        let pos = self.tp + self.fn_;
        let neg = self.tn + self.fp;
        let sens = (pos > 0).then(|| self.tp as f64 / pos as f64);
        let spec = (neg > 0).then(|| self.tn as f64 / neg as f64);
        match (sens, spec) {
            (Some(a), Some(b)) => Some((a + b) / 2.0),
            (Some(a), None) | (None, Some(a)) => Some(a),
            (None, None) => None,
        }
    }

    pub fn accuracy(&self) -> f64 {
        let n = self.tp + self.fp + self.tn + self.fn_;
        if n == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / n as f64
        }
    }
}

fn check_shapes(pred: &[Vec<bool>], truth: &[Vec<bool>]) -> Result<usize> {
    if pred.len() != truth.len() {
        return Err(Error::shape(format!(
            "{} predicted rows vs {} true rows",
            pred.len(),
            truth.len()
        )));
    }
    let k = truth.first().map_or(0, Vec::len);
    for (i, (p, t)) in pred.iter().zip(truth).enumerate() {
        if p.len() != k || t.len() != k {
            return Err(Error::shape(format!(
                "row {i}: widths {} and {}, expected {k}",
                p.len(),
                t.len()
            )));
        }
    }
    Ok(k)
}

/// One confusion per label.
pub fn per_label_confusion(pred: &[Vec<bool>], truth: &[Vec<bool>]) -> Result<Vec<Confusion>> {
    let k = check_shapes(pred, truth)?;
    let mut out = vec![Confusion::default(); k];
    for (p, t) in pred.iter().zip(truth) {
        for j in 0..k {
            out[j].add(p[j], t[j]);
        }
    }
    Ok(out)
}

fn pooled(per_label: &[Confusion]) -> Confusion {
    let mut c = Confusion::default();
    for l in per_label {
        c.merge(l);
    }
    c
}

/// `(micro, macro)` F1.
pub fn f1_scores(pred: &[Vec<bool>], truth: &[Vec<bool>]) -> Result<(f64, f64)> {
    let per = per_label_confusion(pred, truth)?;
    let micro = pooled(&per).f1();
    let macro_ = if per.is_empty() {
        0.0
    } else {
        per.iter().map(Confusion::f1).sum::<f64>() / per.len() as f64
    };
    Ok((micro, macro_))
}

/// `(micro, macro)` balanced accuracy; micro uses pooled counts.
pub fn balanced_accuracy(pred: &[Vec<bool>], truth: &[Vec<bool>]) -> Result<(f64, f64)> {
    let per = per_label_confusion(pred, truth)?;
    let micro = pooled(&per).balanced_accuracy().unwrap_or(0.0);
    let defined: Vec<f64> = per.iter().filter_map(Confusion::balanced_accuracy).collect();
    let macro_ = if defined.is_empty() {
        0.0
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    Ok((micro, macro_))
}

/// Fraction of cells where prediction and truth differ.
pub fn hamming_loss(pred: &[Vec<bool>], truth: &[Vec<bool>]) -> Result<f64> {
    let k = check_shapes(pred, truth)?;
    let cells = pred.len() * k;
    if cells == 0 {
        return Ok(0.0);
    }
    let wrong: usize = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| p.iter().zip(t).filter(|(a, b)| a != b).count())
        .sum();
    Ok(wrong as f64 / cells as f64)
}

/// Binary confusion with `true` as the positive class.
pub fn binary_confusion(pred: &[bool], truth: &[bool]) -> Result<Confusion> {
    if pred.len() != truth.len() {
        return Err(Error::shape(format!("{} vs {} labels", pred.len(), truth.len())));
    }
    let mut c = Confusion::default();
    for (&p, &t) in pred.iter().zip(truth) {
        c.add(p, t);
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub f1: f64,
    pub accuracy: f64,
    pub count: usize,
}

impl BinaryMetrics {
    pub fn compute(pred: &[bool], truth: &[bool]) -> Result<Self> {
        let c = binary_confusion(pred, truth)?;
        Ok(Self {
            f1: c.f1(),
            accuracy: c.accuracy(),
            count: pred.len(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelMetrics {
    pub f1_micro: f64,
    pub f1_macro: f64,
    pub balanced_accuracy_micro: f64,
    pub balanced_accuracy_macro: f64,
    pub hamming_loss: f64,
    pub samples: usize,
    pub labels: usize,
}

impl MultiLabelMetrics {
    pub fn compute(pred: &[Vec<bool>], truth: &[Vec<bool>]) -> Result<Self> {
        let (f1_micro, f1_macro) = f1_scores(pred, truth)?;
        let (ba_micro, ba_macro) = balanced_accuracy(pred, truth)?;
        Ok(Self {
            f1_micro,
            f1_macro,
            balanced_accuracy_micro: ba_micro,
            balanced_accuracy_macro: ba_macro,
            hamming_loss: hamming_loss(pred, truth)?,
            samples: pred.len(),
            labels: truth.first().map_or(0, Vec::len),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[u8]]) -> Vec<Vec<bool>> {
        rows.iter().map(|r| r.iter().map(|&v| v == 1).collect()).collect()
    }

    #[test]
    fn perfect_prediction() {
        let t = m(&[&[1, 0], &[0, 1], &[1, 1]]);
        assert_eq!(f1_scores(&t, &t).unwrap(), (1.0, 1.0));
        assert_eq!(balanced_accuracy(&t, &t).unwrap(), (1.0, 1.0));
        assert_eq!(hamming_loss(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn complement_prediction() {
        let t = m(&[&[1, 0], &[0, 1], &[1, 1]]);
        let c: Vec<Vec<bool>> = t.iter().map(|r| r.iter().map(|v| !v).collect()).collect();
        assert_eq!(f1_scores(&c, &t).unwrap().0, 0.0);
        assert_eq!(hamming_loss(&c, &t).unwrap(), 1.0);
    }

    #[test]
    fn pooled_counts_fixture() {
        // TP=2, FP=1, FN=1 pooled over a 3x2 matrix
        let truth = m(&[&[1, 0], &[1, 0], &[0, 1]]);
        let pred = m(&[&[1, 1], &[1, 0], &[0, 0]]);
        let (micro, _) = f1_scores(&pred, &truth).unwrap();
        assert!((micro - 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn all_ones_predictor_has_half_balanced_accuracy() {
        let truth = m(&[&[1], &[0], &[1], &[0]]);
        let pred = m(&[&[1], &[1], &[1], &[1]]);
        assert_eq!(balanced_accuracy(&pred, &truth).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn pooled_balanced_accuracy_fixture() {
        let c = Confusion {
            tp: 3,
            tn: 5,
            fp: 1,
            fn_: 1,
        };
        let ba = c.balanced_accuracy().unwrap();
        assert!((ba - (0.75 + 5.0 / 6.0) / 2.0).abs() < 1e-15);
        assert!((ba - 0.7917).abs() < 1e-4);
    }

    #[test]
    fn one_wrong_cell_of_ten() {
        let truth = m(&[&[1, 0, 0, 1, 0], &[0, 0, 1, 0, 0]]);
        let mut pred = truth.clone();
        pred[1][4] = true;
        assert!((hamming_loss(&pred, &truth).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch_errors() {
        let a = m(&[&[1, 0]]);
        let b = m(&[&[1, 0, 1]]);
        assert!(f1_scores(&a, &b).is_err());
        assert!(hamming_loss(&a, &m(&[])).is_err());
    }
}
