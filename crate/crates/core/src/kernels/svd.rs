//! Thin SVD by Householder QR followed by one-sided (Hestenes) Jacobi on
//! the triangular factor.

use crate::error::{Error, Result};
use crate::kernels::HouseholderQR;
use crate::matrix::{dot, norm2, Matrix};

/// Cap on Jacobi sweeps before reporting non-convergence.
pub const MAX_SWEEPS: usize = 100;

/// `M = U diag(S) V^T` with `q = min(rows, cols)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct ThinSVD {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl ThinSVD {
    /// `U diag(S) V^T`.
    pub fn reconstruct(&self) -> Matrix {
        self.u
            .scale_columns(&self.s)
            .matmul(&self.v.transpose())
            .expect("factor shapes agree")
    }
}

pub fn thin_svd(m: &Matrix) -> Result<ThinSVD> {
    if m.rows() < m.cols() {
        let t = tall_svd(&m.transpose(), m.rows())?;
        return Ok(ThinSVD {
            u: t.v,
            s: t.s,
            v: t.u,
        });
    }
    tall_svd(m, m.cols())
}

/// The `r` leading left singular vectors of `m`, without forming the rest
/// of the decomposition.
pub fn leading_left_singular_vectors(m: &Matrix, r: usize) -> Result<Matrix> {
    if r > m.rows().min(m.cols()) {
        return Err(Error::InvalidRank(format!(
            "{r} singular vectors requested from a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() < m.cols() {
        Ok(tall_svd(&m.transpose(), 0)?.v.leading_columns(r))
    } else {
        Ok(tall_svd(m, r)?.u)
    }
}

/// SVD of a tall matrix with only the first `lift` columns of `U` formed.
fn tall_svd(m: &Matrix, lift: usize) -> Result<ThinSVD> {
    let n = m.cols();
    let qr = HouseholderQR::new(m);
    let scale = qr.r().as_slice().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let r = if scale > 0.0 {
        qr.r().scale_columns(&vec![1.0 / scale; n])
    } else {
        qr.r().clone()
    };
    let (w, v) = jacobi(r)?;

    // Columns the rotations ignored as negligible get a zero singular value
    // and a completed basis vector, keeping U orthonormal.
    let norms: Vec<f64> = (0..n)
        .map(|j| {
            let c = norm2(w.col(j));
            if c * c < TINY {
                0.0
            } else {
                c * scale
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let mut ur = Matrix::zeros(n, n);
    let mut vs = Matrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s.push(sigma);
        vs.col_mut(dst).copy_from_slice(v.col(src));
        let inv = scale / sigma;
        if sigma > 0.0 && inv.is_finite() {
            for (x, &y) in ur.col_mut(dst).iter_mut().zip(w.col(src)) {
                *x = y * inv;
            }
        } else {
            missing.push(dst);
        }
    }
    complete_basis(&mut ur, &missing);

    // Lift U back through Q: U = Q [Ur; 0].
    let mut u = Matrix::zeros(m.rows(), lift);
    for j in 0..lift {
        u.col_mut(j)[..n].copy_from_slice(ur.col(j));
    }
    qr.apply_q(&mut u);
    Ok(ThinSVD { u, s, v: vs })
}

// Squared column norms below this are treated as zero. Inputs are scaled to
// unit max-abs first, so this only discards columns under ~1e-146.
const TINY: f64 = f64::MIN_POSITIVE / f64::EPSILON;

/// Orthogonalises the columns of `w` by plane rotations; returns the rotated
/// columns and the accumulated right factor.
fn jacobi(mut w: Matrix) -> Result<(Matrix, Matrix)> {
    let n = w.cols();
    let mut v = Matrix::identity(n);
    if n < 2 {
        return Ok((w, v));
    }
    // Columns count as orthogonal once their cosine is below n * eps, the
    // rounding level of the dot products themselves.
    let tol = n as f64 * f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(w.col(p), w.col(p));
                let beta = dot(w.col(q), w.col(q));
                let gamma = dot(w.col(p), w.col(q));
                if alpha < TINY || beta < TINY || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + 1f64.hypot(zeta));
                let c = 1.0 / 1f64.hypot(t);
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            return Ok((w, v));
        }
    }
    Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
}

fn rotate(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let (cp, cq) = m.col_pair_mut(p, q);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fills the listed columns of a square `u` with unit vectors orthogonal to
/// all other columns (used where a singular value is exactly zero).
fn complete_basis(u: &mut Matrix, missing: &[usize]) {
    let n = u.rows();
    for &j in missing {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..n {
            let mut x = vec![0.0; n];
            x[e] = 1.0;
            for _ in 0..2 {
                for k in 0..u.cols() {
                    if k == j {
                        continue;
                    }
                    let h = dot(u.col(k), &x);
                    x.iter_mut()
                        .zip(u.col(k))
                        .for_each(|(xi, uk)| *xi -= h * uk);
                }
            }
            let r = norm2(&x);
            if best.as_ref().is_none_or(|(b, _)| r > *b) {
                best = Some((r, x));
            }
        }
        let (r, x) = best.expect("n >= 1");
        u.col_mut(j)
            .iter_mut()
            .zip(&x)
            .for_each(|(dst, xi)| *dst = xi / r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{gaussian_matrix, SeededRng};

    fn check_invariants(m: &Matrix, svd: &ThinSVD) {
        let q = m.rows().min(m.cols());
        assert_eq!(svd.s.len(), q);
        assert_eq!((svd.u.rows(), svd.u.cols()), (m.rows(), q));
        assert_eq!((svd.v.rows(), svd.v.cols()), (m.cols(), q));
        assert!(svd.u.orthonormality_defect() <= 1e-12);
        assert!(svd.v.orthonormality_defect() <= 1e-12);
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(svd.s.iter().all(|&x| x >= 0.0));
        let resid = svd.reconstruct().sub(m).unwrap().frobenius_norm();
        assert!(resid <= 1e-12 * m.frobenius_norm().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn diagonal() {
        let m = Matrix::from_rows(&[&[2.0, 0.0], &[0.0, 1.0]]).unwrap();
        let svd = thin_svd(&m).unwrap();
        assert_eq!(svd.s, vec![2.0, 1.0]);
        for j in 0..2 {
            assert_eq!(svd.u[(j, j)].abs(), 1.0);
            assert_eq!(svd.v[(j, j)].abs(), 1.0);
        }
        check_invariants(&m, &svd);
    }

    #[test]
    fn orthonormal_columns_have_unit_values() {
        let g = gaussian_matrix(12, 4, &mut SeededRng::new(5, 0));
        let q = HouseholderQR::new(&g).thin_q();
        let svd = thin_svd(&q).unwrap();
        assert!(svd.s.iter().all(|s| (s - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn wide_tall_and_rank_deficient() {
        let mut rng = SeededRng::new(9, 1);
        for (r, c) in [(5, 17), (17, 5), (1, 6), (6, 1), (8, 8)] {
            let m = gaussian_matrix(r, c, &mut rng);
            check_invariants(&m, &thin_svd(&m).unwrap());
        }
        let u = gaussian_matrix(7, 1, &mut rng);
        let w = gaussian_matrix(1, 5, &mut rng);
        let rank1 = u.matmul(&w).unwrap();
        let svd = thin_svd(&rank1).unwrap();
        check_invariants(&rank1, &svd);
        assert!(svd.s[1..].iter().all(|&s| s <= 1e-12 * svd.s[0]));
        let zero = Matrix::zeros(4, 3);
        let svd = thin_svd(&zero).unwrap();
        assert_eq!(svd.s, vec![0.0; 3]);
        assert!(svd.u.orthonormality_defect() <= 1e-12);
    }

    #[test]
    fn leading_vectors_match_full_decomposition() {
        let mut rng = SeededRng::new(31, 4);
        for (r, c) in [(40, 6), (6, 40), (9, 9)] {
            let m = gaussian_matrix(r, c, &mut rng);
            let full = thin_svd(&m).unwrap();
            let lead = leading_left_singular_vectors(&m, 3).unwrap();
            assert_eq!((lead.rows(), lead.cols()), (r, 3));
            for j in 0..3 {
                // Same vector up to sign.
                let d: f64 = lead
                    .col(j)
                    .iter()
                    .zip(full.u.col(j))
                    .map(|(a, b)| a * b)
                    .sum();
                assert!((d.abs() - 1.0).abs() <= 1e-10, "{r}x{c} column {j}: {d}");
            }
        }
        assert!(leading_left_singular_vectors(&Matrix::zeros(3, 5), 4).is_err());
    }

    #[test]
    fn column_permutation_leaves_values() {
        let m = gaussian_matrix(9, 6, &mut SeededRng::new(2, 2));
        let p = m.select_columns(&[3, 0, 5, 1, 4, 2]);
        let a = thin_svd(&m).unwrap().s;
        let b = thin_svd(&p).unwrap().s;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-10 * a[0]);
        }
    }
}
