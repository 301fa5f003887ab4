//! Confusion counts and the derived classification metrics.

/// Binary confusion counts; "positive" is the monotone class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionCounts {
    pub true_neg: u64,
    pub false_pos: u64,
    pub false_neg: u64,
    pub true_pos: u64,
}

impl ConfusionCounts {
    /// Row-major `[[TN, FP], [FN, TP]]`, the layout used in reports.
    pub fn from_rows(rows: [[u64; 2]; 2]) -> Self {
        Self {
            true_neg: rows[0][0],
            false_pos: rows[0][1],
            false_neg: rows[1][0],
            true_pos: rows[1][1],
        }
    }

    pub fn total(&self) -> u64 {
        self.true_neg + self.false_pos + self.false_neg + self.true_pos
    }

    pub fn record(&mut self, label: bool, predicted: bool) {
        match (label, predicted) {
            (true, true) => self.true_pos += 1,
            (true, false) => self.false_neg += 1,
            (false, true) => self.false_pos += 1,
            (false, false) => self.true_neg += 1,
        }
    }
}

/// Standard metrics; ratios with zero denominators are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Accuracy, precision, recall, and specificity of counts.
pub fn metrics(c: &ConfusionCounts) -> Metrics {
    let total = c.total();
    assert!(total > 0, "metrics of an empty evaluation");
    Metrics {
        accuracy: (c.true_pos + c.true_neg) as f64 / total as f64,
        precision: ratio(c.true_pos, c.true_pos + c.false_pos),
        recall: ratio(c.true_pos, c.true_pos + c.false_neg),
        specificity: ratio(c.true_neg, c.true_neg + c.false_pos),
    }
}

/// Evaluate a classifier's probabilities against labels at a threshold;
/// a sample is predicted positive iff `p > threshold`.
pub fn confusion_from_probs(probs: &[f64], labels: &[bool], threshold: f64) -> ConfusionCounts {
    assert_eq!(probs.len(), labels.len());
    let mut c = ConfusionCounts::default();
    for (&p, &y) in probs.iter().zip(labels) {
        c.record(y, p > threshold);
    }
    c
}

/// Round to a fixed number of decimals (reporting helper).
pub fn round_to(x: f64, decimals: u32) -> f64 {
    #[allow(unused_imports)]
    use num_traits::Float;
    let scale = 10f64.powi(decimals as i32);
    (x * scale).round() / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn check_row(rows: [[u64; 2]; 2], want: [f64; 4]) {
        let m = metrics(&ConfusionCounts::from_rows(rows));
        let got = [
            m.accuracy,
            m.precision.unwrap(),
            m.recall.unwrap(),
            m.specificity.unwrap(),
        ];
        for (g, w) in got.iter().zip(want) {
            assert!(
                (g - w).abs() <= 0.0005,
                "rows {rows:?}: got {got:?}, want {want:?}"
            );
        }
    }

    #[test]
    fn reference_confusion_rows_reproduce_reported_metrics() {
        // Raw-entry FFN on the 36k 7x7 set.
        check_row([[17297, 703], [412, 17588]], [0.969, 0.962, 0.977, 0.961]);
        // Hybrid 73-feature model.
        check_row([[17825, 175], [170, 17830]], [0.990, 0.990, 0.991, 0.990]);
        // Two-feature model.
        check_row([[16708, 1292], [480, 17520]], [0.951, 0.931, 0.973, 0.928]);
        // Single-ratio model.
        check_row([[16041, 1959], [396, 17604]], [0.935, 0.900, 0.978, 0.891]);
    }

    #[test]
    fn subdomain_confusion_row() {
        let m = metrics(&ConfusionCounts::from_rows([[1811, 111], [55, 1867]]));
        // 3678/3844; the published "~95.8%" rounds the true 95.68%.
        assert!((m.accuracy - 0.9568).abs() < 0.0005);
        assert!((m.accuracy - 0.958).abs() < 0.002);
    }

    #[test]
    fn perfect_and_constant_predictors() {
        let labels: Vec<bool> = (0..20).map(|i| i < 10).collect();
        let perfect: Vec<f64> = labels.iter().map(|&y| if y { 0.9 } else { 0.1 }).collect();
        let c = confusion_from_probs(&perfect, &labels, 0.5);
        assert_eq!(
            c,
            ConfusionCounts {
                true_neg: 10,
                false_pos: 0,
                false_neg: 0,
                true_pos: 10
            }
        );

        // A constant 0.5 - eps predictor classifies everything negative.
        let constant = alloc::vec![0.5 - 1e-9; 20];
        let c = confusion_from_probs(&constant, &labels, 0.5);
        assert_eq!(c.true_pos + c.false_pos, 0);
        assert_eq!(c.true_neg, 10);
        assert_eq!(c.false_neg, 10);
    }

    #[test]
    fn undefined_ratios_are_none() {
        // No positive predictions: precision undefined.
        let c = ConfusionCounts {
            true_neg: 5,
            false_pos: 0,
            false_neg: 5,
            true_pos: 0,
        };
        let m = metrics(&c);
        assert_eq!(m.precision, None);
        assert_eq!(m.recall, Some(0.0));
        assert_eq!(m.specificity, Some(1.0));
        assert_eq!(m.accuracy, 0.5);
    }
}
