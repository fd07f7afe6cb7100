//! ROC analysis for anomaly scores.
//!
//! "Positive" means abnormal. A sample is predicted positive when its score
//! is strictly greater than the threshold. Samples with equal scores always
//! switch together, so each ROC step may move diagonally; the trapezoidal
//! area then credits ties with one half, exactly like the Mann-Whitney
//! statistic. The EER is read off the piecewise-linear curve where
//! `fpr = 1 - tpr`.

use std::fmt::Write as _;

use crate::error::{AedError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores {
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl LabeledScores {
    /// `labels[i]` is true for an abnormal (positive) sample.
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(AedError::dims(
                format!("{} labels", scores.len()),
                format!("{} labels", labels.len()),
            ));
        }
        if scores.iter().any(|s| s.is_nan()) {
            return Err(AedError::NonFinite("scores"));
        }
        let pos = labels.iter().filter(|&&l| l).count();
        if pos == 0 || pos == labels.len() {
            return Err(AedError::InvalidParameter(
                "ROC needs at least one positive and one negative label".into(),
            ));
        }
        Ok(LabeledScores { scores, labels })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// Predicting `score > threshold` yields this point.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub eer: f64,
}

impl RocCurve {
    /// `threshold,fpr,tpr` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", fmt_threshold(p.threshold), p.fpr, p.tpr);
        }
        out
    }

    /// `auc,eer` header plus one row.
    pub fn summary_csv(&self) -> String {
        format!("auc,eer\n{},{}\n", self.auc, self.eer)
    }
}

fn fmt_threshold(t: f64) -> String {
    if t == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{t}")
    }
}

/// Trapezoidal area under a curve given as `(fpr, tpr)` pairs.
pub fn trapezoid_area(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) * 0.5)
        .sum()
}

pub fn roc(data: &LabeledScores) -> Result<RocCurve> {
    let pos = data.positives() as f64;
    let neg = data.negatives() as f64;
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| data.scores[b].total_cmp(&data.scores[a]));

    let mut points = Vec::new();
    points.push(RocPoint {
        threshold: data.scores[order[0]],
        fpr: 0.0,
        tpr: 0.0,
    });
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = data.scores[order[i]];
        while i < order.len() && data.scores[order[i]] == s {
            if data.labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let threshold = if i < order.len() {
            data.scores[order[i]]
        } else {
            f64::NEG_INFINITY
        };
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / neg,
            tpr: tp as f64 / pos,
        });
    }

    let auc = trapezoid_area(&points);
    let eer = equal_error_rate(&points);
    Ok(RocCurve { points, auc, eer })
}

/// Crossing of `fpr = 1 - tpr`, linearly interpolated.
fn equal_error_rate(points: &[RocPoint]) -> f64 {
    let gap = |p: &RocPoint| p.fpr - (1.0 - p.tpr);
    for w in points.windows(2) {
        let (g0, g1) = (gap(&w[0]), gap(&w[1]));
        if g0 == 0.0 {
            return w[0].fpr;
        }
        if g0 < 0.0 && g1 >= 0.0 {
            let t = -g0 / (g1 - g0);
            return w[0].fpr + t * (w[1].fpr - w[0].fpr);
        }
    }
    // The curve ends at (1,1) where the gap is +1, so this is unreachable.
    points.last().map_or(1.0, |p| p.fpr)
}

/// Fraction of (positive, negative) pairs ordered correctly, ties 1/2.
pub fn auc_pairwise_oracle(data: &LabeledScores) -> Result<f64> {
    let pos: Vec<f64> = data.scores.iter().zip(&data.labels).filter(|(_, &l)| l).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = data.scores.iter().zip(&data.labels).filter(|(_, &l)| !l).map(|(s, _)| *s).collect();
    let mut wins = 0.0;
    for p in &pos {
        for n in &neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (pos.len() * neg.len()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(neg: &[f64], pos: &[f64]) -> LabeledScores {
        let scores = neg.iter().chain(pos).copied().collect();
        let labels = neg.iter().map(|_| false).chain(pos.iter().map(|_| true)).collect();
        LabeledScores::new(scores, labels).unwrap()
    }

    #[test]
    fn perfect_separation() {
        let d = data(&[0.1, 0.2], &[0.8, 0.9]);
        let c = roc(&d).unwrap();
        assert_eq!(c.auc, 1.0);
        assert_eq!(c.eer, 0.0);
        assert_eq!(auc_pairwise_oracle(&d).unwrap(), 1.0);
    }

    #[test]
    fn all_ties() {
        let d = data(&[0.3, 0.3, 0.3], &[0.3, 0.3]);
        let c = roc(&d).unwrap();
        assert_eq!(c.auc, 0.5);
        assert_eq!(c.eer, 0.5);
        assert_eq!(auc_pairwise_oracle(&d).unwrap(), 0.5);
        assert_eq!(c.points.len(), 2);
    }

    #[test]
    fn four_point_case() {
        let d = data(&[0.1, 0.5], &[0.4, 0.8]);
        let c = roc(&d).unwrap();
        assert_eq!(c.auc, 0.75);
        assert_eq!(auc_pairwise_oracle(&d).unwrap(), 0.75);
        assert_eq!(c.eer, 0.5);
        let first = c.points.first().unwrap();
        let last = c.points.last().unwrap();
        assert_eq!((first.fpr, first.tpr), (0.0, 0.0));
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn thresholds_reproduce_points() {
        let d = data(&[0.1, 0.5, 0.5, 0.2], &[0.4, 0.8, 0.5]);
        let c = roc(&d).unwrap();
        for p in &c.points {
            let tp = d.scores().iter().zip(d.labels()).filter(|(s, &l)| l && **s > p.threshold).count();
            let fp = d.scores().iter().zip(d.labels()).filter(|(s, &l)| !l && **s > p.threshold).count();
            assert_eq!(p.tpr, tp as f64 / 3.0);
            assert_eq!(p.fpr, fp as f64 / 4.0);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        assert!(LabeledScores::new(vec![0.1, 0.2], vec![true, true]).is_err());
        assert!(LabeledScores::new(vec![0.1, 0.2], vec![false, false]).is_err());
        assert!(LabeledScores::new(vec![0.1], vec![false, true]).is_err());
    }

    #[test]
    fn csv_exports() {
        let c = roc(&data(&[0.1], &[0.9])).unwrap();
        let csv = c.to_csv();
        assert!(csv.starts_with("threshold,fpr,tpr\n0.9,0,0\n"));
        assert!(csv.ends_with("-inf,1,1\n"));
        assert_eq!(c.summary_csv(), "auc,eer\n1,0\n");
    }
}
