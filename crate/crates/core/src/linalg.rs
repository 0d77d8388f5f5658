//! Coordinates on sl(3,R), adjoint matrices and thresholded SVD utilities.
//!
//! Every rank decision in the crate goes through [`RankPolicy`], so a single
//! threshold governs kernels, images and least-squares solves.

use nalgebra::{DMatrix, DVector, Matrix3, SVD};

pub type Mat3 = Matrix3<f64>;

/// Dimension of sl(3,R).
pub const DIM_G: usize = 8;

/// Default relative threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankPolicy {
    /// singular values below `rel * sigma_max` count as zero
    pub rel: f64,
    /// absolute floor so rounding noise in a zero matrix has rank 0
    pub abs: f64,
}

impl Default for RankPolicy {
    fn default() -> Self {
        RankPolicy { rel: RANK_TOL, abs: 1e-13 }
    }
}

/// Frobenius-orthonormal basis of sl(3,R): six off-diagonal units, then two
/// diagonal elements.
pub fn sl3_basis() -> [Mat3; DIM_G] {
    let unit = |i: usize, j: usize| {
        let mut m = Mat3::zeros();
        m[(i, j)] = 1.0;
        m
    };
    let h1 = Mat3::from_diagonal(&nalgebra::Vector3::new(1.0, -1.0, 0.0)) / 2f64.sqrt();
    let h2 = Mat3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, -2.0)) / 6f64.sqrt();
    [unit(0, 1), unit(0, 2), unit(1, 0), unit(1, 2), unit(2, 0), unit(2, 1), h1, h2]
}

thread_local! {
    static BASIS: [Mat3; DIM_G] = sl3_basis();
}

pub fn basis() -> [Mat3; DIM_G] {
    BASIS.with(|b| *b)
}

/// Coordinates of the traceless part of `x`.
pub fn coords(x: &Mat3) -> DVector<f64> {
    let b = basis();
    DVector::from_iterator(DIM_G, b.iter().map(|e| e.dot(x)))
}

pub fn from_coords(c: &[f64]) -> Mat3 {
    let b = basis();
    let mut m = Mat3::zeros();
    for (k, e) in b.iter().enumerate() {
        m += e * c[k];
    }
    m
}

pub fn traceless_part(x: &Mat3) -> Mat3 {
    x - Mat3::identity() * (x.trace() / 3.0)
}

/// `Ad_g X = g X g^-1`
pub fn ad(g: &Mat3, g_inv: &Mat3, x: &Mat3) -> Mat3 {
    g * x * g_inv
}

/// Matrix of `Ad_g` in the orthonormal basis.
pub fn ad_matrix(g: &Mat3, g_inv: &Mat3) -> DMatrix<f64> {
    let b = basis();
    let mut m = DMatrix::zeros(DIM_G, DIM_G);
    for (k, e) in b.iter().enumerate() {
        let img = g * e * g_inv;
        for (r, f) in b.iter().enumerate() {
            m[(r, k)] = f.dot(&img);
        }
    }
    m
}

pub fn inverse(m: &Mat3) -> Mat3 {
    m.try_inverse().expect("singular matrix in SL(3)")
}

pub fn expm(x: &Mat3) -> Mat3 {
    x.exp()
}

/// Thin wrapper over a sorted SVD.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    /// rows are right singular vectors, always a full square basis
    pub v_t: DMatrix<f64>,
}

/// SVD with singular values in decreasing order and a full right basis.
pub fn svd_full(a: &DMatrix<f64>) -> SortedSvd {
    let (m, n) = a.shape();
    // pad with zero rows so the right singular basis is complete
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = SVD::new(padded, true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let sigma: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let u = DMatrix::from_columns(&idx.iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>());
    let v_t = DMatrix::from_rows(&idx.iter().map(|&i| v_t.row(i).into_owned()).collect::<Vec<_>>());
    // the padded rows contribute extra zero singular values beyond min(m, n)
    let u = if m < n { u.rows(0, m).into_owned() } else { u };
    SortedSvd { u, sigma, v_t }
}

impl SortedSvd {
    pub fn rank(&self, policy: RankPolicy) -> usize {
        let smax = self.sigma.first().copied().unwrap_or(0.0);
        let cut = (policy.rel * smax).max(policy.abs);
        self.sigma.iter().filter(|&&s| s > cut).count()
    }
}

pub fn rank(a: &DMatrix<f64>, policy: RankPolicy) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    svd_full(a).rank(policy)
}

/// Orthonormal basis of the kernel, as columns.
pub fn null_space(a: &DMatrix<f64>, policy: RankPolicy) -> DMatrix<f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let s = svd_full(a);
    let r = s.rank(policy);
    let rows: Vec<_> = (r..n).map(|i| s.v_t.row(i).transpose()).collect();
    if rows.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&rows)
    }
}

/// Orthonormal basis of the column space.
pub fn range_space(a: &DMatrix<f64>, policy: RankPolicy) -> DMatrix<f64> {
    let m = a.nrows();
    if a.ncols() == 0 {
        return DMatrix::zeros(m, 0);
    }
    let s = svd_full(a);
    let r = s.rank(policy);
    if r == 0 {
        return DMatrix::zeros(m, 0);
    }
    DMatrix::from_columns(&(0..r).map(|i| s.u.column(i).into_owned()).collect::<Vec<_>>())
}

/// Orthonormal basis of the orthogonal complement of the column space.
pub fn cokernel_space(a: &DMatrix<f64>, policy: RankPolicy) -> DMatrix<f64> {
    null_space(&a.transpose(), policy)
}

/// Minimum-norm least-squares solution with thresholded pseudo-inverse.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>, policy: RankPolicy) -> DVector<f64> {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return DVector::zeros(n);
    }
    let s = svd_full(a);
    let r = s.rank(policy);
    let mut x = DVector::zeros(n);
    for i in 0..r {
        let ui = s.u.column(i);
        let coef = ui.dot(b) / s.sigma[i];
        x += s.v_t.row(i).transpose() * coef;
    }
    x
}

pub fn min_singular_ratio(a: &DMatrix<f64>) -> (f64, f64) {
    if a.nrows() == 0 || a.ncols() == 0 {
        return (0.0, 0.0);
    }
    let s = SVD::new(a.clone(), false, false);
    let sv = s.singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    (min, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal_and_traceless() {
        let b = sl3_basis();
        for i in 0..DIM_G {
            assert!(b[i].trace().abs() < 1e-15);
            for j in 0..DIM_G {
                let d = b[i].dot(&b[j]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn coords_round_trip() {
        let x = Mat3::new(1.0, 2.0, 3.0, -4.0, 0.5, 6.0, 7.0, 8.0, -1.5);
        let y = from_coords(coords(&x).as_slice());
        assert!((y - x).norm() < 1e-14);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        let k = null_space(&a, RankPolicy::default());
        assert_eq!(k.ncols(), 2);
        assert!((&a * &k).norm() < 1e-14);
        let r = range_space(&a, RankPolicy::default());
        assert_eq!(r.ncols(), 2);
    }

    #[test]
    fn min_norm_solution() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = lstsq_min_norm(&a, &DVector::from_vec(vec![2.0]), RankPolicy::default());
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }
}
