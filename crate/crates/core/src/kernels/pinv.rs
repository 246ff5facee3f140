use crate::error::{Error, Result};
use crate::kernels::{thin_svd, HouseholderQR};
use crate::matrix::Matrix;

/// Condition estimate at or above which a factor is treated as rank deficient.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Moore–Penrose pseudoinverse of a full-column-rank `C` (`n x k`, `k <= n`),
/// computed as `R^{-1} Q^T` from a Householder QR. Returns the `k x n` left
/// inverse.
pub fn orthonormal_pinv_factor(c: &Matrix) -> Result<Matrix> {
    let (n, k) = (c.rows(), c.cols());
    if k == 0 || k > n {
        return Err(Error::DimensionMismatch(format!(
            "a {n}x{k} matrix cannot have full column rank"
        )));
    }
    let qr = HouseholderQR::new(c);
    let r = qr.r();
    let s = thin_svd(r)?.s;
    let condition = if s[k - 1] > 0.0 {
        s[0] / s[k - 1]
    } else {
        f64::INFINITY
    };
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::RankDeficient { condition });
    }

    // Back-substitute R X = Q^T one column of X at a time.
    let qt = qr.thin_q().transpose();
    let mut x = Matrix::zeros(k, n);
    for col in 0..n {
        for i in (0..k).rev() {
            let mut acc = qt[(i, col)];
            for j in i + 1..k {
                acc -= r[(i, j)] * x[(j, col)];
            }
            x[(i, col)] = acc / r[(i, i)];
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{gaussian_matrix, SeededRng};

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.sub(b)
            .unwrap()
            .as_slice()
            .iter()
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn scaled_axes() {
        let c = Matrix::from_rows(&[&[2.0, 0.0], &[0.0, 4.0], &[0.0, 0.0]]).unwrap();
        let p = orthonormal_pinv_factor(&c).unwrap();
        let want = Matrix::from_rows(&[&[0.5, 0.0, 0.0], &[0.0, 0.25, 0.0]]).unwrap();
        assert!(max_abs_diff(&p, &want) <= 1e-15);
    }

    #[test]
    fn orthonormal_input_gives_transpose() {
        let g = gaussian_matrix(10, 3, &mut SeededRng::new(1, 0));
        let q = HouseholderQR::new(&g).thin_q();
        let p = orthonormal_pinv_factor(&q).unwrap();
        assert!(max_abs_diff(&p, &q.transpose()) <= 1e-12);
    }

    #[test]
    fn left_inverse() {
        let c = gaussian_matrix(9, 4, &mut SeededRng::new(3, 0));
        let p = orthonormal_pinv_factor(&c).unwrap();
        assert!(max_abs_diff(&p.matmul(&c).unwrap(), &Matrix::identity(4)) <= 1e-10);
    }

    #[test]
    fn duplicated_column_is_rejected() {
        let g = gaussian_matrix(6, 2, &mut SeededRng::new(4, 0));
        let c = g.select_columns(&[0, 1, 0]);
        assert!(matches!(
            orthonormal_pinv_factor(&c),
            Err(Error::RankDeficient { .. })
        ));
        assert!(orthonormal_pinv_factor(&Matrix::zeros(2, 3)).is_err());
    }
}
