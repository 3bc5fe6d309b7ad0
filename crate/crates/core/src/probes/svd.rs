use nalgebra::DMatrix;

use super::ProbeError;

/// Projection onto the top-`k` right singular vectors of a training matrix.
/// The data is not centred.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFrontEnd {
    /// `k x d`, orthonormal rows.
    pub basis: DMatrix<f64>,
    /// Top `k` singular values, descending.
    pub singular_values: Vec<f64>,
}

impl SvdFrontEnd {
    pub fn rank(&self) -> usize {
        self.basis.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `x` (n x d) to coordinates in the basis (n x k).
    pub fn project(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        x * self.basis.transpose()
    }

    /// Rank-k reconstruction of `x` in the original space.
    pub fn reconstruct(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.project(x) * &self.basis
    }
}

pub fn fit_svd(x: &DMatrix<f64>, k: usize) -> Result<SvdFrontEnd, ProbeError> {
    let max = x.nrows().min(x.ncols());
    if k == 0 || k > max {
        return Err(ProbeError::RankTooLarge { rank: k, max });
    }
    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|a, b| svd.singular_values[*b].total_cmp(&svd.singular_values[*a]));
    let d = x.ncols();
    let mut basis = DMatrix::zeros(k, d);
    for (r, &i) in order.iter().take(k).enumerate() {
        basis.row_mut(r).copy_from(&v_t.row(i));
    }
    let singular_values = order.iter().take(k).map(|&i| svd.singular_values[i]).collect();
    Ok(SvdFrontEnd { basis, singular_values })
}
