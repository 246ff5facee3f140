//! Greedy column-pivoted QR (Businger–Golub), stopped after `k` pivots.
//! Each new basis vector is reorthogonalised against the earlier ones.

use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, norm2, Matrix};

/// Truncated factorisation `M[:, perm] ≈ Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQR {
    /// Selected columns of `M` in selection order (0-based).
    pub pivots: Vec<usize>,
    /// Full column permutation: `pivots` followed by the remaining columns in
    /// ascending order.
    pub permutation: Vec<usize>,
    /// Orthonormal, `rows x rank`.
    pub q: Matrix,
    /// `Q^T M[:, permutation]`, `rank x cols`; its leading `rank x rank`
    /// block is upper triangular.
    pub r: Matrix,
    /// Set when the residual vanished before `k` pivots were found; `pivots`
    /// then holds the achieved prefix.
    pub rank_deficient: bool,
}

impl PivotedQR {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Runs `k` steps of greedy pivoting on residual column norms. Ties go to
/// the lowest column index.
pub fn truncated_pivoted_qr(m: &Matrix, k: usize) -> Result<PivotedQR> {
    truncated_pivoted_qr_transposed(m.transpose(), k)
}

/// [`truncated_pivoted_qr`] of `M`, given `M^T`.
pub fn truncated_pivoted_qr_transposed(mt: Matrix, k: usize) -> Result<PivotedQR> {
    let (rows, cols) = (mt.cols(), mt.rows());
    if k == 0 || k > rows.min(cols) {
        return Err(Error::InvalidRank(format!(
            "pivoted QR of a {rows}x{cols} matrix cannot stop after {k} steps"
        )));
    }
    // The residual M - Q Q^T M is kept explicitly and stored transposed, so
    // each update and the norm refresh run over contiguous rows of length
    // `cols`. Norms are recomputed exactly every step rather than downdated.
    let mut w = mt;
    let mut residual = vec![0.0; cols];
    column_norms_sq(&w, &mut residual);
    let max_norm = residual.iter().copied().fold(0.0f64, f64::max).sqrt();
    let breakdown = (rows.max(cols) as f64) * f64::EPSILON * max_norm;

    let mut selected = vec![false; cols];
    let mut pivots = Vec::with_capacity(k);
    let mut qcols: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut rrows: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut rank_deficient = false;

    while pivots.len() < k {
        let mut best: Option<usize> = None;
        for j in (0..cols).filter(|&j| !selected[j]) {
            if best.is_none_or(|b| residual[j] > residual[b]) {
                best = Some(j);
            }
        }
        let j = best.expect("k <= cols leaves an unselected column");

        let mut v: Vec<f64> = (0..rows).map(|i| w[(j, i)]).collect();
        for _ in 0..2 {
            for q in &qcols {
                let h = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= h * qi);
            }
        }
        let vnorm = norm2(&v);
        if !(vnorm > breakdown) {
            rank_deficient = true;
            break;
        }
        v.iter_mut().for_each(|x| *x /= vnorm);

        // Row of R for every column (v is orthogonal to the earlier Q, so
        // v^T W = v^T M), then remove it from the residual.
        let mut rrow = vec![0.0; cols];
        for (i, &vi) in v.iter().enumerate() {
            axpy(vi, w.col(i), &mut rrow);
        }
        for (i, &vi) in v.iter().enumerate() {
            axpy(-vi, &rrow, w.col_mut(i));
        }
        column_norms_sq(&w, &mut residual);
        selected[j] = true;
        pivots.push(j);
        qcols.push(v);
        rrows.push(rrow);
    }

    let mut permutation = pivots.clone();
    permutation.extend((0..cols).filter(|&c| !selected[c]));
    let rank = pivots.len();
    let q = Matrix::from_columns(rows, &qcols.iter().map(Vec::as_slice).collect::<Vec<_>>())?;
    let r = Matrix::from_fn(rank, cols, |i, c| rrows[i][permutation[c]]);
    Ok(PivotedQR {
        pivots,
        permutation,
        q,
        r,
        rank_deficient,
    })
}

/// Squared norms of the columns of `M` from its transpose `mt`.
fn column_norms_sq(mt: &Matrix, out: &mut [f64]) {
    out.fill(0.0);
    for i in 0..mt.cols() {
        for (o, x) in out.iter_mut().zip(mt.col(i)) {
            *o += x * x;
        }
    }
}
