use crate::error::{Error, Result};
use crate::matrix::{axpy, combine_columns, exact_sum, multi_dot, Matrix};

/// A d-way array of `f64` stored column-major (first index fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() {
        return Err(Error::InvalidShape(
            "a tensor needs at least one mode".into(),
        ));
    }
    if let Some(k) = shape.iter().position(|&n| n == 0) {
        return Err(Error::InvalidShape(format!(
            "extent of mode {} is zero",
            k + 1
        )));
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::InvalidShape(format!("{shape:?} overflows usize")))
}

impl DenseTensor {
    /// Wraps column-major `data`, rejecting NaN and infinities.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = check_shape(&shape)?;
        if data.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for shape {shape:?}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = check_shape(&shape)?;
        Ok(Self {
            shape,
            data: vec![0.0; len],
        })
    }

    /// Fills entries from a function of the 0-based multi-index, in storage order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_shape(&shape)?;
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for (i, n) in idx.iter_mut().zip(&shape) {
                *i += 1;
                if *i < *n {
                    break;
                }
                *i = 0;
            }
        }
        Self::new(shape, data)
    }

    #[inline]
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.shape.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Entry at a 0-based multi-index.
    pub fn get(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.order());
        let mut flat = 0;
        let mut stride = 1;
        for (i, n) in idx.iter().zip(&self.shape) {
            assert!(i < n, "index {idx:?} out of bounds for {:?}", self.shape);
            flat += i * stride;
            stride *= n;
        }
        self.data[flat]
    }

    /// Product of all extents except `mode` (1-based).
    pub fn complement_size(&self, mode: usize) -> usize {
        self.shape
            .iter()
            .enumerate()
            .filter(|&(k, _)| k + 1 != mode)
            .map(|(_, &n)| n)
            .product()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.order() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// `(left, n, right)` such that flat index = a + left * (i + n * b).
    fn split(&self, mode: usize) -> (usize, usize, usize) {
        let k = mode - 1;
        let left = self.shape[..k].iter().product();
        let right = self.shape[k + 1..].iter().product();
        (left, self.shape[k], right)
    }
}

/// Mode-`mode` unfolding with Kolda–Bader column order: the remaining
/// indices enumerate columns with the lowest mode varying fastest.
pub fn unfold(t: &DenseTensor, mode: usize) -> Result<Matrix> {
    t.check_mode(mode)?;
    let (left, n, right) = t.split(mode);
    if left == 1 {
        return Matrix::from_col_major(n, right, t.data.clone());
    }
    let mut out = vec![0.0; t.len()];
    for b in 0..right {
        for i in 0..n {
            let src = &t.data[left * (i + n * b)..left * (i + n * b + 1)];
            for (a, &x) in src.iter().enumerate() {
                out[i + n * (a + left * b)] = x;
            }
        }
    }
    Matrix::from_col_major(n, left * right, out)
}

/// `(m · unfold(t, mode))^T`, a `cols × m.rows()` matrix, without forming
/// the unfolding.
pub fn sketch_unfolding_transposed(t: &DenseTensor, mode: usize, m: &Matrix) -> Result<Matrix> {
    t.check_mode(mode)?;
    let (left, n, right) = t.split(mode);
    if m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "a {}x{} matrix cannot act on mode {mode} of extent {n}",
            m.rows(),
            m.cols()
        )));
    }
    let (rows, total) = (m.rows(), left * right);
    let mut out = vec![0.0; total * rows];
    let mt = m.transpose();
    if left == 1 {
        let mrows: Vec<&[f64]> = (0..rows).map(|r| mt.col(r)).collect();
        let mut part = vec![0.0; rows];
        for b in 0..right {
            multi_dot(&t.data[n * b..n * (b + 1)], &mrows, &mut part);
            for (r, &x) in part.iter().enumerate() {
                out[b + total * r] = x;
            }
        }
    } else {
        const CHUNK: usize = 256;
        for b in 0..right {
            let slab = &t.data[left * n * b..left * n * (b + 1)];
            for start in (0..left).step_by(CHUNK) {
                let len = CHUNK.min(left - start);
                for r in 0..rows {
                    let at = total * r + left * b + start;
                    combine_columns(&slab[start..], left, mt.col(r), &mut out[at..at + len]);
                }
            }
        }
    }
    Matrix::from_col_major(total, rows, out)
}

/// Selected columns of the mode-`mode` unfolding, gathered without forming
/// the unfolding.
pub fn unfolding_columns(t: &DenseTensor, mode: usize, columns: &[usize]) -> Result<Matrix> {
    t.check_mode(mode)?;
    let (left, n, right) = t.split(mode);
    let mut out = Vec::with_capacity(n * columns.len());
    for &c in columns {
        if c >= left * right {
            return Err(Error::DimensionMismatch(format!(
                "column {c} out of range for a mode-{mode} unfolding with {} columns",
                left * right
            )));
        }
        let (a, b) = (c % left, c / left);
        out.extend((0..n).map(|i| t.data[a + left * (i + n * b)]));
    }
    Matrix::from_col_major(n, columns.len(), out)
}

/// `unfold(t, mode) * q` without forming the unfolding.
pub fn unfolding_matmul(t: &DenseTensor, mode: usize, q: &Matrix) -> Result<Matrix> {
    t.check_mode(mode)?;
    let (left, n, right) = t.split(mode);
    if q.rows() != left * right {
        return Err(Error::DimensionMismatch(format!(
            "a mode-{mode} unfolding with {} columns cannot multiply a {}x{} matrix",
            left * right,
            q.rows(),
            q.cols()
        )));
    }
    let mut out = Matrix::zeros(n, q.cols());
    if left == 1 {
        for s in 0..q.cols() {
            let dst = out.col_mut(s);
            for (b, &coef) in q.col(s).iter().enumerate() {
                axpy(coef, &t.data[n * b..n * (b + 1)], dst);
            }
        }
    } else {
        // Fiber-major so each contiguous slice of the tensor is read once.
        let (rows, total) = (q.rows(), q.cols());
        let qs = q.as_slice();
        let mut acc = vec![0.0; n * total];
        let mut part = vec![0.0; total];
        for b in 0..right {
            let qb: Vec<&[f64]> = (0..total)
                .map(|s| &qs[rows * s + left * b..rows * s + left * (b + 1)])
                .collect();
            for i in 0..n {
                multi_dot(
                    &t.data[left * (i + n * b)..left * (i + n * b + 1)],
                    &qb,
                    &mut part,
                );
                for (s, &x) in part.iter().enumerate() {
                    acc[i + n * s] += x;
                }
            }
        }
        out = Matrix::from_col_major(n, total, acc)?;
    }
    Ok(out)
}

/// Inverse of [`unfold`].
pub fn fold(m: &Matrix, mode: usize, shape: &[usize]) -> Result<DenseTensor> {
    let len = check_shape(shape)?;
    if mode == 0 || mode > shape.len() {
        return Err(Error::ModeOutOfRange {
            mode,
            order: shape.len(),
        });
    }
    let n = shape[mode - 1];
    if m.rows() != n || m.rows() * m.cols() != len {
        return Err(Error::DimensionMismatch(format!(
            "a {}x{} matrix cannot fold into shape {shape:?} along mode {mode}",
            m.rows(),
            m.cols()
        )));
    }
    let left: usize = shape[..mode - 1].iter().product();
    let right = len / (left * n);
    let src = m.as_slice();
    if left == 1 {
        return DenseTensor::new(shape.to_vec(), src.to_vec());
    }
    let mut data = vec![0.0; len];
    for b in 0..right {
        for i in 0..n {
            let dst = &mut data[left * (i + n * b)..left * (i + n * b + 1)];
            for (a, x) in dst.iter_mut().enumerate() {
                *x = src[i + n * (a + left * b)];
            }
        }
    }
    DenseTensor::new(shape.to_vec(), data)
}

/// `t ×_mode m`: contracts mode `mode` of `t` with the columns of `m`.
pub fn mode_mul(t: &DenseTensor, m: &Matrix, mode: usize) -> Result<DenseTensor> {
    t.check_mode(mode)?;
    let (left, n, right) = t.split(mode);
    if m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "a {}x{} matrix cannot act on mode {mode} of extent {n}",
            m.rows(),
            m.cols()
        )));
    }
    let rows = m.rows();
    let mut shape = t.shape.clone();
    shape[mode - 1] = rows;
    let mut data = vec![0.0; left * rows * right];
    if left == 1 {
        // Mode 1: each result column is m times a contiguous fiber; dots
        // against the rows of m vectorize better than short axpys.
        let mt = m.transpose();
        let mrows: Vec<&[f64]> = (0..rows).map(|r| mt.col(r)).collect();
        for b in 0..right {
            multi_dot(
                &t.data[n * b..n * (b + 1)],
                &mrows,
                &mut data[rows * b..rows * (b + 1)],
            );
        }
    } else {
        // Each slab `b` is a left × n column-major block; the result slab is
        // slab · mᵀ, formed in row chunks that stay cache resident.
        const CHUNK: usize = 256;
        let mt = m.transpose();
        for b in 0..right {
            let slab = &t.data[left * n * b..left * n * (b + 1)];
            let out = &mut data[left * rows * b..left * rows * (b + 1)];
            for start in (0..left).step_by(CHUNK) {
                let len = CHUNK.min(left - start);
                for r in 0..rows {
                    let dst = &mut out[left * r + start..left * r + start + len];
                    combine_columns(&slab[start..], left, mt.col(r), dst);
                }
            }
        }
    }
    Ok(DenseTensor { shape, data })
}

/// Frobenius norm; bit-identical to the norm of any unfolding of `t`.
pub fn frobenius_norm(t: &DenseTensor) -> f64 {
    exact_sum(t.data.iter().map(|x| x * x)).sqrt()
}

/// `‖reference − approx‖_F / ‖reference‖_F`.
pub fn relative_error(reference: &DenseTensor, approx: &DenseTensor) -> Result<f64> {
    if reference.shape != approx.shape {
        return Err(Error::DimensionMismatch(format!(
            "shapes {:?} and {:?} differ",
            reference.shape, approx.shape
        )));
    }
    let denom = frobenius_norm(reference);
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num = reference
        .data
        .iter()
        .zip(&approx.data)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}
