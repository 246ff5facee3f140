use crate::matrix::{axpy, dot, norm2, Matrix};

/// Householder QR of a tall matrix (`rows >= cols`), reflectors kept unpacked.
pub(crate) struct HouseholderQR {
    rows: usize,
    // Reflector k acts on rows k.. and is stored unnormalised with its 2/v'v factor.
    reflectors: Vec<(Vec<f64>, f64)>,
    r: Matrix,
}

impl HouseholderQR {
    pub(crate) fn new(a: &Matrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        assert!(m >= n, "Householder QR expects a tall matrix, got {m}x{n}");
        let mut work = a.clone();
        let mut reflectors = Vec::with_capacity(n);
        let mut r = Matrix::zeros(n, n);
        for k in 0..n {
            let x = &work.col(k)[k..];
            let xnorm = norm2(x);
            let mut v = x.to_vec();
            let alpha = if x[0] > 0.0 { -xnorm } else { xnorm };
            let beta = if xnorm == 0.0 {
                0.0
            } else {
                v[0] -= alpha;
                let vv = dot(&v, &v);
                if vv == 0.0 {
                    0.0
                } else {
                    2.0 / vv
                }
            };
            let diag = if beta == 0.0 { x[0] } else { alpha };
            for j in k + 1..n {
                let col = &mut work.col_mut(j)[k..];
                let s = beta * dot(&v, col);
                if s != 0.0 {
                    axpy(-s, &v, col);
                }
            }
            r[(k, k)] = diag;
            for j in k + 1..n {
                r[(k, j)] = work[(k, j)];
            }
            reflectors.push((v, beta));
        }
        Self {
            rows: m,
            reflectors,
            r,
        }
    }

    pub(crate) fn r(&self) -> &Matrix {
        &self.r
    }

    /// The thin orthonormal factor, `rows x cols`.
    pub(crate) fn thin_q(&self) -> Matrix {
        let n = self.reflectors.len();
        let mut q = Matrix::zeros(self.rows, n);
        for j in 0..n {
            q[(j, j)] = 1.0;
        }
        self.apply_q(&mut q);
        q
    }

    /// Overwrites `b` (with `rows` rows) by `Q b` using the full reflector product.
    pub(crate) fn apply_q(&self, b: &mut Matrix) {
        assert_eq!(b.rows(), self.rows);
        for (k, (v, beta)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            for j in 0..b.cols() {
                let col = &mut b.col_mut(j)[k..];
                let s = beta * dot(v, col);
                if s != 0.0 {
                    axpy(-s, v, col);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_reproduce_input() {
        let a = Matrix::from_fn(9, 4, |i, j| {
            ((i * 5 + j * 11) % 7) as f64 - 3.0 + 0.1 * j as f64
        });
        let qr = HouseholderQR::new(&a);
        let q = qr.thin_q();
        assert!(q.orthonormality_defect() < 1e-14);
        let back = q.matmul(qr.r()).unwrap();
        assert!(back.sub(&a).unwrap().frobenius_norm() < 1e-13 * a.frobenius_norm());
        for j in 0..4 {
            for i in j + 1..4 {
                assert_eq!(qr.r()[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn zero_column_is_tolerated() {
        let a = Matrix::from_rows(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        let qr = HouseholderQR::new(&a);
        assert_eq!(qr.r()[(1, 1)], 0.0);
        assert!(qr.thin_q().orthonormality_defect() < 1e-15);
    }
}
