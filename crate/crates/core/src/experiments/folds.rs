use rand::seq::SliceRandom;

use super::ExperimentError;
use crate::rng;

/// Fold index per example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub folds: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    pub fn members(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|i| self.folds[*i] == fold).collect()
    }

    pub fn complement(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|i| self.folds[*i] != fold).collect()
    }
}

/// Largest-remainder split of `total` over `weights` (ties to the lower
/// index). Each share is the floor or ceiling of its exact quota.
fn apportion(total: usize, weights: &[usize]) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut shares: Vec<usize> = weights.iter().map(|w| total * w / sum).collect();
    let mut rest: Vec<(usize, usize)> = weights.iter().enumerate().map(|(i, w)| (total * w % sum, i)).collect();
    rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let left = total - shares.iter().sum::<usize>();
    for &(_, i) in rest.iter().take(left) {
        shares[i] += 1;
    }
    shares
}

/// Stratified k-fold assignment.
///
/// Fold sizes differ by at most one (the first `n mod k` folds take the
/// extra example). Positive counts are apportioned by largest remainder
/// against the fold sizes, so every fold's positive count is within one of
/// `positives * size / n`. Which examples land where is decided by a
/// seeded shuffle within each class.
pub fn stratified_kfold(y: &[bool], k: usize, seed: u64) -> Result<FoldAssignment, ExperimentError> {
    let n = y.len();
    if k < 2 || n < k {
        return Err(ExperimentError::TooFewExamples { n, k });
    }
    let sizes: Vec<usize> = (0..k).map(|f| n / k + usize::from(f < n % k)).collect();
    let mut pos: Vec<usize> = (0..n).filter(|i| y[*i]).collect();
    let mut neg: Vec<usize> = (0..n).filter(|i| !y[*i]).collect();
    let pos_share = apportion(pos.len(), &sizes);

    let mut rng = rng::keyed(seed, "stratified-kfold");
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut folds = vec![0; n];
    let (mut pi, mut ni) = (0, 0);
    for f in 0..k {
        for &i in &pos[pi..pi + pos_share[f]] {
            folds[i] = f;
        }
        pi += pos_share[f];
        let need = sizes[f] - pos_share[f];
        for &i in &neg[ni..ni + need] {
            folds[i] = f;
        }
        ni += need;
    }
    Ok(FoldAssignment { folds, k, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(y: &[bool], a: &FoldAssignment) -> Vec<(usize, usize)> {
        (0..a.k)
            .map(|f| {
                let m = a.members(f);
                (m.len(), m.iter().filter(|i| y[**i]).count())
            })
            .collect()
    }

    #[test]
    fn exact_division() {
        let y: Vec<bool> = (0..16).map(|i| i % 4 == 0).collect();
        let a = stratified_kfold(&y, 4, 9).unwrap();
        assert_eq!(summary(&y, &a), vec![(4, 1); 4]);
    }

    #[test]
    fn all_negative_labels() {
        let y = vec![false; 12];
        let a = stratified_kfold(&y, 4, 0).unwrap();
        assert_eq!(summary(&y, &a), vec![(3, 0); 4]);
    }

    #[test]
    fn inchoative_sized_frame() {
        let y: Vec<bool> = (0..217).map(|i| i < 73).collect();
        let a = stratified_kfold(&y, 4, 1).unwrap();
        for (size, pos) in summary(&y, &a) {
            assert!(size == 54 || size == 55);
            assert!(pos == 18 || pos == 19);
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let y: Vec<bool> = (0..40).map(|i| i % 3 == 0).collect();
        assert_eq!(stratified_kfold(&y, 4, 5).unwrap(), stratified_kfold(&y, 4, 5).unwrap());
        assert_ne!(stratified_kfold(&y, 4, 5).unwrap().folds, stratified_kfold(&y, 4, 6).unwrap().folds);
    }

    #[test]
    fn too_few_examples() {
        assert!(matches!(stratified_kfold(&[true, false], 4, 0), Err(ExperimentError::TooFewExamples { .. })));
        assert!(stratified_kfold(&[true, false, true], 1, 0).is_err());
    }

    #[test]
    fn apportion_is_floor_or_ceiling() {
        assert_eq!(apportion(73, &[55, 54, 54, 54]), vec![19, 18, 18, 18]);
        assert_eq!(apportion(0, &[3, 3]), vec![0, 0]);
        assert_eq!(apportion(5, &[0, 0]), vec![0, 0]);
    }
}
