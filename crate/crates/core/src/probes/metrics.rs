use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use super::ProbeError;

/// Binary confusion matrix. The positive class is "participates" /
/// "grammatical".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> ConfusionMatrix {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    /// Tally `(truth, predicted)` pairs. Panics if lengths differ.
    pub fn from_labels(truth: &[bool], predicted: &[bool]) -> ConfusionMatrix {
        assert_eq!(truth.len(), predicted.len(), "label vectors differ in length");
        let mut cm = ConfusionMatrix::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => cm.tp += 1,
                (false, false) => cm.tn += 1,
                (false, true) => cm.fp += 1,
                (true, false) => cm.fn_ += 1,
            }
        }
        cm
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn mcc(&self) -> f64 {
        mcc(self)
    }

    pub fn accuracy(&self) -> Result<f64, ProbeError> {
        accuracy(self)
    }
}

impl Add for ConfusionMatrix {
    type Output = ConfusionMatrix;

    fn add(self, o: ConfusionMatrix) -> ConfusionMatrix {
        ConfusionMatrix::new(self.tp + o.tp, self.tn + o.tn, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, o: ConfusionMatrix) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = ConfusionMatrix>>(iter: I) -> ConfusionMatrix {
        iter.fold(ConfusionMatrix::default(), |a, b| a + b)
    }
}

/// Matthews correlation coefficient,
/// `(tp*tn - fp*fn) / sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn))`.
///
/// Returns 0.0 when any factor of the denominator is zero (a single-class
/// truth or prediction vector).
pub fn mcc(cm: &ConfusionMatrix) -> f64 {
    let (tp, tn, fp, fn_) = (cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.fn_ as f64);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0.0) {
        return 0.0;
    }
    // pairwise square roots keep the product in range for large counts
    let denom = (factors[0] * factors[1]).sqrt() * (factors[2] * factors[3]).sqrt();
    ((tp * tn - fp * fn_) / denom).clamp(-1.0, 1.0)
}

/// Fraction of correct predictions.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, ProbeError> {
    match cm.total() {
        0 => Err(ProbeError::EmptyEvaluation),
        n => Ok((cm.tp + cm.tn) as f64 / n as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction() {
        assert_eq!(mcc(&ConfusionMatrix::new(50, 192, 0, 0)), 1.0);
    }

    #[test]
    fn single_class_frame_is_zero_mcc_full_accuracy() {
        let cm = ConfusionMatrix::new(124, 0, 0, 0);
        assert_eq!(mcc(&cm), 0.0);
        assert_eq!(accuracy(&cm).unwrap(), 1.0);
    }

    #[test]
    fn small_matrix_matches_hand_evaluation() {
        // (6*9 - 1*2) / sqrt(7 * 8 * 10 * 11) = 52 / sqrt(6160)
        let expected = 52.0 / 6160f64.sqrt();
        assert!((mcc(&ConfusionMatrix::new(6, 9, 1, 2)) - expected).abs() < 1e-15);
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&ConfusionMatrix::new(1, 1, 0, 0)).unwrap(), 1.0);
        assert_eq!(accuracy(&ConfusionMatrix::new(0, 0, 1, 1)).unwrap(), 0.0);
        assert!((accuracy(&ConfusionMatrix::new(3, 5, 1, 1)).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(accuracy(&ConfusionMatrix::default()), Err(ProbeError::EmptyEvaluation)));
    }

    #[test]
    fn symmetry_and_negation() {
        for tp in 0..6u64 {
            for tn in 0..6u64 {
                for fp in 0..6u64 {
                    for fn_ in 0..6u64 {
                        let m = mcc(&ConfusionMatrix::new(tp, tn, fp, fn_));
                        assert_eq!(m, mcc(&ConfusionMatrix::new(tn, tp, fn_, fp)));
                        // flipping every prediction swaps tp<->fn and tn<->fp
                        let flipped = mcc(&ConfusionMatrix::new(fn_, fp, tn, tp));
                        assert!((m + flipped).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn tallies_from_labels() {
        let cm = ConfusionMatrix::from_labels(&[true, true, false, false, true], &[true, false, false, true, true]);
        assert_eq!(cm, ConfusionMatrix::new(2, 1, 1, 1));
        assert_eq!(cm + cm, ConfusionMatrix::new(4, 2, 2, 2));
    }
}
