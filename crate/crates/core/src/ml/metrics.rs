//! Binary classification metrics. The positive class is "suitable".

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn count(truth: &[bool], predicted: &[bool]) -> Confusion {
        assert_eq!(truth.len(), predicted.len(), "truth and predictions differ in length");
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// How per-class precision, recall and F1 are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    #[default]
    Macro,
    /// Pooled counts; for two classes all three equal accuracy.
    Micro,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// Macro averages over the two classes.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub positive: ClassMetrics,
    pub negative: ClassMetrics,
}

impl Metrics {
    /// Undefined quotients (no predictions or no members of a class) are 0.
    pub fn from_confusion(c: &Confusion) -> Metrics {
        let pos_p = ratio(c.tp, c.tp + c.fp);
        let pos_r = ratio(c.tp, c.tp + c.fn_);
        let neg_p = ratio(c.tn, c.tn + c.fn_);
        let neg_r = ratio(c.tn, c.tn + c.fp);
        // F1 from counts, 2tp / (2tp + fp + fn), rather than from the rounded ratios.
        let positive = ClassMetrics { precision: pos_p, recall: pos_r, f1: ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_) };
        let negative = ClassMetrics { precision: neg_p, recall: neg_r, f1: ratio(2 * c.tn, 2 * c.tn + c.fp + c.fn_) };
        Metrics {
            accuracy: ratio(c.tp + c.tn, c.total()),
            precision: (pos_p + neg_p) / 2.0,
            recall: (pos_r + neg_r) / 2.0,
            f1: (positive.f1 + negative.f1) / 2.0,
            positive,
            negative,
        }
    }

    pub fn from_confusion_with(c: &Confusion, averaging: Averaging) -> Metrics {
        let mut m = Metrics::from_confusion(c);
        if averaging == Averaging::Micro {
            m.precision = m.accuracy;
            m.recall = m.accuracy;
            m.f1 = m.accuracy;
        }
        m
    }

    pub fn score(truth: &[bool], predicted: &[bool]) -> Metrics {
        Metrics::from_confusion(&Confusion::count(truth, predicted))
    }

    /// Field-wise mean.
    pub fn mean(all: &[Metrics]) -> Metrics {
        let n = all.len().max(1) as f64;
        let avg = |f: &dyn Fn(&Metrics) -> f64| all.iter().map(f).sum::<f64>() / n;
        let class = |g: &dyn Fn(&Metrics) -> ClassMetrics| ClassMetrics {
            precision: avg(&|m| g(m).precision),
            recall: avg(&|m| g(m).recall),
            f1: avg(&|m| g(m).f1),
        };
        Metrics {
            accuracy: avg(&|m| m.accuracy),
            precision: avg(&|m| m.precision),
            recall: avg(&|m| m.recall),
            f1: avg(&|m| m.f1),
            positive: class(&|m| m.positive),
            negative: class(&|m| m.negative),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_confusion() {
        let c = Confusion { tp: 3, fp: 1, fn_: 1, tn: 5 };
        let m = Metrics::from_confusion(&c);
        assert_eq!(m.accuracy, 0.8);
        assert_eq!(m.positive.precision, 0.75);
        assert_eq!(m.positive.recall, 0.75);
    }

    #[test]
    fn micro_collapses_to_accuracy() {
        let c = Confusion { tp: 3, fp: 1, fn_: 1, tn: 5 };
        let m = Metrics::from_confusion_with(&c, Averaging::Micro);
        assert_eq!((m.precision, m.recall, m.f1), (0.8, 0.8, 0.8));
    }

    #[test]
    fn perfect_predictions_score_one() {
        let y = [true, false, true, false];
        let m = Metrics::score(&y, &y);
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
    }
}
