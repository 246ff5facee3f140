//! Tucker-format decompositions.
//!
//! All four methods share one layout: the first `t` modes carry
//! fiber-sampled factors (actual columns of the mode unfolding) and the
//! remaining modes carry orthonormal factors. HOSVD is `t = 0`, the
//! higher-order interpolatory decomposition is `t = d`.
//!
//! The randomized variant sketches every unfolding with a Gaussian matrix of
//! `r + p` rows. Fiber modes pick columns by pivoted QR of the sketch; the
//! other modes take the leading right singular vectors `Q` of the sketch,
//! form `A_(j) Q` and keep its left singular vectors.

use log::warn;

use crate::error::{Error, Result};
use crate::kernels::{
    gaussian_matrix, leading_left_singular_vectors, orthonormal_pinv_factor, truncated_pivoted_qr,
    truncated_pivoted_qr_transposed, PivotedQR, SeededRng,
};
use crate::matrix::Matrix;
use crate::tensor::{
    mode_mul, sketch_unfolding_transposed, unfold, unfolding_columns, unfolding_matmul, DenseTensor,
};

/// Target ranks, fiber-mode count, oversampling and seed of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchConfig {
    pub ranks: Vec<usize>,
    /// Number of leading modes whose factors are sampled fibers.
    pub fiber_modes: usize,
    pub oversampling: usize,
    pub seed: u64,
}

impl SketchConfig {
    pub fn new(ranks: Vec<usize>, fiber_modes: usize, oversampling: usize, seed: u64) -> Self {
        Self {
            ranks,
            fiber_modes,
            oversampling,
            seed,
        }
    }

    /// Checks ranks and `t` against `shape`.
    pub fn validate(&self, shape: &[usize]) -> Result<()> {
        let d = shape.len();
        if self.ranks.len() != d {
            return Err(Error::InvalidRank(format!(
                "{} ranks given for a tensor of order {d}",
                self.ranks.len()
            )));
        }
        if self.fiber_modes > d {
            return Err(Error::InvalidArgument(format!(
                "t = {} exceeds the tensor order {d}",
                self.fiber_modes
            )));
        }
        let total: usize = shape.iter().product();
        for (k, (&r, &n)) in self.ranks.iter().zip(shape).enumerate() {
            let others = total / n;
            if r == 0 || r > n || r > others {
                return Err(Error::InvalidRank(format!(
                    "rank {r} for mode {} is outside 1..={}",
                    k + 1,
                    n.min(others)
                )));
            }
        }
        Ok(())
    }

    /// Rows of the sketching matrix for `mode` (1-based): `r + p`, clamped
    /// to the mode extent.
    pub fn sketch_rows(&self, shape: &[usize], mode: usize) -> usize {
        let (r, n) = (self.ranks[mode - 1], shape[mode - 1]);
        let l = r + self.oversampling;
        if l > n {
            warn!(
                "mode {mode}: oversampling {} clamped to {} (extent {n}, rank {r})",
                self.oversampling,
                n - r
            );
            n
        } else {
            l
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorKind {
    /// Columns are copies of the listed columns (0-based) of the mode unfolding.
    FiberSampled { columns: Vec<usize> },
    /// Columns are orthonormal.
    Orthonormal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub matrix: Matrix,
    pub kind: FactorKind,
}

impl Factor {
    fn fibers(unfolding: &Matrix, columns: Vec<usize>) -> Self {
        Self {
            matrix: unfolding.select_columns(&columns),
            kind: FactorKind::FiberSampled { columns },
        }
    }

    fn orthonormal(matrix: Matrix) -> Self {
        Self {
            matrix,
            kind: FactorKind::Orthonormal,
        }
    }

    pub fn is_fiber_sampled(&self) -> bool {
        matches!(self.kind, FactorKind::FiberSampled { .. })
    }

    /// The matrix applied to the source tensor when forming the core:
    /// `C^+` for sampled fibers, `U^T` otherwise.
    pub fn contraction(&self) -> Result<Matrix> {
        match self.kind {
            FactorKind::FiberSampled { .. } => orthonormal_pinv_factor(&self.matrix),
            FactorKind::Orthonormal => Ok(self.matrix.transpose()),
        }
    }
}

/// Core tensor plus one factor per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerModel {
    core: DenseTensor,
    factors: Vec<Factor>,
    config: SketchConfig,
}

impl TuckerModel {
    /// Assembles a model, checking that the core shape matches the factor
    /// column counts and the fiber indices match the column count.
    pub fn new(core: DenseTensor, factors: Vec<Factor>, config: SketchConfig) -> Result<Self> {
        if core.order() != factors.len() {
            return Err(Error::DimensionMismatch(format!(
                "core of order {} with {} factors",
                core.order(),
                factors.len()
            )));
        }
        for (k, (f, &r)) in factors.iter().zip(core.shape()).enumerate() {
            if f.matrix.cols() != r {
                return Err(Error::DimensionMismatch(format!(
                    "factor {} has {} columns, core extent is {r}",
                    k + 1,
                    f.matrix.cols()
                )));
            }
            if let FactorKind::FiberSampled { columns } = &f.kind {
                if columns.len() != r {
                    return Err(Error::DimensionMismatch(format!(
                        "factor {} lists {} fibers for {r} columns",
                        k + 1,
                        columns.len()
                    )));
                }
            }
        }
        Ok(Self {
            core,
            factors,
            config,
        })
    }

    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn ranks(&self) -> &[usize] {
        self.core.shape()
    }

    /// Shape of the approximated tensor.
    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.matrix.rows()).collect()
    }
}

fn pivot_columns(f: PivotedQR) -> Result<Vec<usize>> {
    if f.rank_deficient {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    Ok(f.pivots)
}

/// Higher-order SVD: every factor holds the leading left singular vectors of
/// its unfolding.
pub fn hosvd(t: &DenseTensor, ranks: &[usize]) -> Result<TuckerModel> {
    hybrid(t, ranks, 0)
}

/// Higher-order interpolatory decomposition: fibers in every mode.
pub fn hoid(t: &DenseTensor, ranks: &[usize]) -> Result<TuckerModel> {
    hybrid(t, ranks, t.order())
}

/// Deterministic hybrid decomposition with fiber-sampled factors in modes
/// `1..=fiber_modes`, selected by pivoted QR of each full unfolding.
pub fn hybrid(t: &DenseTensor, ranks: &[usize], fiber_modes: usize) -> Result<TuckerModel> {
    let config = SketchConfig::new(ranks.to_vec(), fiber_modes, 0, 0);
    config.validate(t.shape())?;
    let mut factors = Vec::with_capacity(t.order());
    for mode in 1..=t.order() {
        let a = unfold(t, mode)?;
        let r = ranks[mode - 1];
        let factor = if mode <= fiber_modes {
            // Only the first r pivots are used; the full-width pivot order
            // has the same prefix.
            Factor::fibers(&a, pivot_columns(truncated_pivoted_qr(&a, r)?)?)
        } else {
            Factor::orthonormal(leading_left_singular_vectors(&a, r)?)
        };
        factors.push(factor);
    }
    let core = compute_core(t, &factors)?;
    TuckerModel::new(core, factors, config)
}

/// Randomized hybrid decomposition. Mode `k` draws its Gaussian sketch from
/// stream `k` of `config.seed`, so the result does not depend on the order
/// in which modes are processed.
pub fn randomized_hybrid(t: &DenseTensor, config: &SketchConfig) -> Result<TuckerModel> {
    config.validate(t.shape())?;
    let mut factors = Vec::with_capacity(t.order());
    for mode in 1..=t.order() {
        let r = config.ranks[mode - 1];
        let l = config.sketch_rows(t.shape(), mode);
        let mut rng = SeededRng::new(config.seed, mode as u64);
        let omega = gaussian_matrix(l, t.shape()[mode - 1], &mut rng);
        // The sketch Ω A_(k) is formed directly in transposed layout; the
        // full unfolding of t is never built.
        let yt = sketch_unfolding_transposed(t, mode, &omega)?;
        let factor = if mode <= config.fiber_modes {
            let columns = pivot_columns(truncated_pivoted_qr_transposed(yt, r)?)?;
            Factor {
                matrix: unfolding_columns(t, mode, &columns)?,
                kind: FactorKind::FiberSampled { columns },
            }
        } else {
            // Leading right singular vectors of the sketch.
            let q = leading_left_singular_vectors(&yt, r)?;
            let projected = unfolding_matmul(t, mode, &q)?;
            Factor::orthonormal(leading_left_singular_vectors(&projected, r)?)
        };
        factors.push(factor);
    }
    let core = compute_core(t, &factors)?;
    TuckerModel::new(core, factors, config.clone())
}

/// `t ×_1 F_1 ⋯ ×_d F_d` with `F_k` the contraction of factor `k`
/// (pseudoinverse for sampled fibers, transpose for orthonormal factors).
pub fn compute_core(t: &DenseTensor, factors: &[Factor]) -> Result<DenseTensor> {
    if factors.len() != t.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} factors for a tensor of order {}",
            factors.len(),
            t.order()
        )));
    }
    let mut g: Option<DenseTensor> = None;
    for (k, f) in factors.iter().enumerate() {
        g = Some(mode_mul(g.as_ref().unwrap_or(t), &f.contraction()?, k + 1)?);
    }
    Ok(g.unwrap_or_else(|| t.clone()))
}

/// Expands a model back to a full tensor, `G ×_1 F_1 ⋯ ×_d F_d`.
pub fn reconstruct(model: &TuckerModel) -> DenseTensor {
    model
        .factors
        .iter()
        .enumerate()
        .fold(model.core.clone(), |acc, (k, f)| {
            mode_mul(&acc, &f.matrix, k + 1).expect("model shapes are validated on construction")
        })
}
