//! Closed-form error guarantees for the randomized hybrid decomposition.
//!
//! For a mode-`i` unfolding with `m` rows and `n` columns, the randomized ID
//! and SVD with `l = k + p` sketch rows satisfy, in the spectral norm,
//!
//! ```text
//! ‖C B − A‖ ≤ id_coefficient(k, l, m, n, β, γ) · σ_{k+1}
//! ‖Z Σ Vᵀ − A‖ ≤ svd_coefficient(l, m, β, γ) · σ_{k+1}
//! ```
//!
//! with probability at least [`chi_probability`]. Summing `n_i` times the
//! squared per-mode bounds gives [`randomized_error_bound`], a bound on the squared
//! Frobenius error of the whole Tucker approximation, which holds with
//! probability at least [`phi_probability`]. The probability is stated per
//! mode with `m = min n_i`; no union bound over modes is applied.

use std::f64::consts::PI;

use log::warn;

use crate::error::{Error, Result};
use crate::kernels::thin_svd;
use crate::tensor::{unfold, DenseTensor};

/// Inputs to [`randomized_error_bound`] other than the spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub beta: f64,
    pub gamma: f64,
    pub oversampling: usize,
    pub shape: Vec<usize>,
    pub ranks: Vec<usize>,
    pub fiber_modes: usize,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beta = {} must be positive",
                self.beta
            )));
        }
        check_gamma(self.gamma)?;
        if self.ranks.len() != self.shape.len() || self.fiber_modes > self.shape.len() {
            return Err(Error::InvalidArgument(format!(
                "{} ranks and t = {} do not fit shape {:?}",
                self.ranks.len(),
                self.fiber_modes,
                self.shape
            )));
        }
        Ok(())
    }

    /// Smallest extent, the `m` used by the overall success probability.
    pub fn min_extent(&self) -> usize {
        self.shape.iter().copied().min().unwrap_or(0)
    }
}

/// Per-mode singular values of the unfoldings, each in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectra(pub Vec<Vec<f64>>);

impl ModeSpectra {
    /// Computes the spectra of every unfolding of `t`.
    pub fn of(t: &DenseTensor) -> Result<Self> {
        (1..=t.order())
            .map(|k| mode_singular_values(t, k))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// `σ_{r+1}` of mode `mode` (1-based); zero when `r` equals the number of
    /// singular values.
    pub fn trailing(&self, mode: usize, r: usize) -> Result<f64> {
        let s = self.0.get(mode - 1).ok_or_else(|| {
            Error::InvalidArgument(format!("no spectrum recorded for mode {mode}"))
        })?;
        match r.cmp(&s.len()) {
            std::cmp::Ordering::Less => Ok(s[r]),
            std::cmp::Ordering::Equal => Ok(0.0),
            std::cmp::Ordering::Greater => Err(Error::InvalidRank(format!(
                "rank {r} exceeds the {} singular values of mode {mode}",
                s.len()
            ))),
        }
    }

    /// Elementwise scaling, convenient for homogeneity checks.
    pub fn scaled(&self, factor: f64) -> Self {
        Self(
            self.0
                .iter()
                .map(|s| s.iter().map(|x| x * factor).collect())
                .collect(),
        )
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma = {gamma} must exceed 1"
        )));
    }
    Ok(())
}

/// The two subtracted terms of the success probability, evaluated in log
/// space so that neither underflows prematurely. Returns `1 − χ`.
pub fn chi_complement(k: usize, l: usize, m: usize, beta: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if l < k || m == 0 || !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need l >= k, m >= 1 and beta > 0 (k = {k}, l = {l}, m = {m}, beta = {beta})"
        )));
    }
    let q = (l - k + 1) as f64;
    let m = m as f64;
    let g2 = gamma * gamma;
    let log_first = -0.5 * (2.0 * PI * q).ln() + q * (1.0 - (q * beta).ln());
    let log_second =
        -(2.0 * (g2 - 1.0)).ln() - 0.5 * (PI * m * g2).ln() + m * ((2.0 * g2).ln() - (g2 - 1.0));
    Ok(log_first.exp() + log_second.exp())
}

/// Probability lower bound `χ` for the randomized ID/SVD bounds. Returned
/// unclamped: values at or below zero mean the guarantee is vacuous.
pub fn chi_probability(k: usize, l: usize, m: usize, beta: f64, gamma: f64) -> Result<f64> {
    Ok(1.0 - chi_complement(k, l, m, beta, gamma)?)
}

/// Success probability `φ` of the whole-tensor bound: `χ` with `l − k = p`
/// and `m = min n_i`. This is the per-mode expression as stated; no union
/// bound over the `d` modes is applied, so the joint guarantee can be weaker.
pub fn phi_probability(p: usize, min_extent: usize, beta: f64, gamma: f64) -> Result<f64> {
    chi_probability(0, p, min_extent, beta, gamma)
}

/// Coefficient of `σ_{k+1}` in the randomized ID bound.
pub fn id_coefficient(k: usize, l: usize, m: usize, n: usize, beta: f64, gamma: f64) -> f64 {
    assert!(n >= k, "id_coefficient needs n >= k (n = {n}, k = {k})");
    let lm = l as f64 * m as f64;
    let a = (2.0 * lm * beta * beta * gamma * gamma + 1.0).sqrt();
    let b = (4.0 * k as f64 * (n - k) as f64 + 1.0).sqrt();
    a * (b + 1.0) + beta * gamma * (2.0 * lm).sqrt() * b
}

/// Coefficient of `σ_{k+1}` in the randomized SVD bound.
pub fn svd_coefficient(l: usize, m: usize, beta: f64, gamma: f64) -> f64 {
    let lm = l as f64 * m as f64;
    2.0 * (2.0 * lm * beta * beta * gamma * gamma + 1.0).sqrt()
        + 2.0 * (2.0 * lm).sqrt() * beta * gamma
}

/// Whether every extent is at most the product of the others.
pub fn bound_hypothesis_holds(shape: &[usize]) -> bool {
    let total: usize = shape.iter().product();
    shape.iter().all(|&n| n <= total / n)
}

/// Upper bound on `‖A − Â‖_F²` for the randomized hybrid decomposition.
///
/// A shape violating `n_i ≤ ∏_{k≠i} n_k` is reported with a warning and the
/// bound is still evaluated.
pub fn randomized_error_bound(spectra: &ModeSpectra, params: &BoundParams) -> Result<f64> {
    params.validate()?;
    if !bound_hypothesis_holds(&params.shape) {
        warn!(
            "shape {:?} has an extent larger than the product of the others; \
             the bound's hypothesis does not hold",
            params.shape
        );
    }
    let total: usize = params.shape.iter().product();
    let mut bound = 0.0;
    for (k, (&n, &r)) in params.shape.iter().zip(&params.ranks).enumerate() {
        let mode = k + 1;
        let sigma = spectra.trailing(mode, r)?;
        let l = r + params.oversampling;
        let coef = if mode <= params.fiber_modes {
            let others = total / n;
            id_coefficient(r, l, n, others, params.beta, params.gamma)
        } else {
            svd_coefficient(l, n, params.beta, params.gamma)
        };
        bound += n as f64 * coef * coef * sigma * sigma;
    }
    Ok(bound)
}

/// All singular values of the mode-`mode` unfolding, descending.
pub fn mode_singular_values(t: &DenseTensor, mode: usize) -> Result<Vec<f64>> {
    Ok(thin_svd(&unfold(t, mode)?)?.s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const BETA: f64 = 0.75;

    fn gamma() -> f64 {
        5f64.sqrt()
    }

    // Reference values computed with mpmath at 50 significant digits.
    const COMPLEMENT_20_50: f64 = 8.262145099735796e-18;
    const CHI_0_50: f64 = -0.44591673522563672;
    const ID_5_10_50_2500: f64 = 23748.73925119479;
    const SVD_10_50: f64 = 212.15088886098884;
    const SVD_1_1: f64 = 9.891_231_560_746_07;

    #[test]
    fn probability_anchor() {
        let c = chi_complement(0, 20, 50, BETA, gamma()).unwrap();
        assert!(c <= 1e-17);
        assert_relative_eq!(c, COMPLEMENT_20_50, max_relative = 1e-12);
        assert!(1.0 - chi_probability(0, 20, 50, BETA, gamma()).unwrap() <= 1e-17);
    }

    #[test]
    fn vacuous_guarantee_is_negative() {
        let chi = chi_probability(7, 7, 50, BETA, gamma()).unwrap();
        assert!(chi < 0.0);
        assert_relative_eq!(chi, CHI_0_50, max_relative = 1e-12);
    }

    #[test]
    fn gamma_must_exceed_one() {
        assert!(chi_probability(0, 5, 10, BETA, 1.0).is_err());
        assert!(phi_probability(5, 10, BETA, 0.5).is_err());
        assert!(chi_probability(3, 2, 10, BETA, 2.0).is_err());
    }

    #[test]
    fn phi_matches_chi_and_grows_with_p() {
        for p in 0..40 {
            let a = phi_probability(p, 50, BETA, gamma()).unwrap();
            let b = chi_probability(3, 3 + p, 50, BETA, gamma()).unwrap();
            assert!((a - b).abs() <= 1e-15);
        }
        let comp = |p| chi_complement(0, p, 50, BETA, gamma()).unwrap();
        for p in 20..60 {
            assert!(comp(p + 1) <= comp(p));
        }
    }

    #[test]
    fn large_m_kills_second_term() {
        // p large enough that the first term is negligible as well.
        let big = chi_complement(0, 200, 5000, BETA, gamma()).unwrap();
        assert!(big < 1e-300);
        // Second term alone at m = 500 is ~3.6e-372, far below f64 range.
        let c = chi_complement(0, 20, 500, BETA, gamma()).unwrap();
        let first_only = chi_complement(0, 20, 50, BETA, gamma()).unwrap();
        assert_relative_eq!(c, first_only, max_relative = 1e-12);
    }

    #[test]
    fn coefficients_against_reference() {
        assert_relative_eq!(
            id_coefficient(5, 10, 50, 2500, BETA, gamma()),
            ID_5_10_50_2500,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            svd_coefficient(10, 50, BETA, gamma()),
            SVD_10_50,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            svd_coefficient(1, 1, BETA, gamma()),
            SVD_1_1,
            max_relative = 1e-13
        );
    }

    #[test]
    fn id_coefficient_collapses_at_full_rank() {
        let (l, m) = (12, 30);
        let a = (2.0 * (l * m) as f64 * BETA * BETA * 5.0 + 1.0).sqrt();
        let want = 2.0 * a + BETA * gamma() * (2.0 * (l * m) as f64).sqrt();
        assert_relative_eq!(
            id_coefficient(8, l, m, 8, BETA, gamma()),
            want,
            max_relative = 1e-15
        );
    }

    #[test]
    fn coefficient_orderings_and_symmetry() {
        for m in 1..60 {
            assert!(
                id_coefficient(5, 10, m + 1, 400, BETA, gamma())
                    > id_coefficient(5, 10, m, 400, BETA, gamma())
            );
        }
        for (k, l, m, n) in [(1, 2, 3, 4), (5, 10, 50, 2500), (3, 3, 7, 9), (2, 30, 1, 3)] {
            assert!(
                svd_coefficient(l, m, BETA, gamma()) <= id_coefficient(k, l, m, n, BETA, gamma())
            );
            assert_eq!(
                id_coefficient(k, l, m, n, BETA, gamma()),
                id_coefficient(k, m, l, n, BETA, gamma())
            );
            assert_eq!(
                svd_coefficient(l, m, BETA, gamma()),
                svd_coefficient(m, l, BETA, gamma())
            );
        }
    }

    fn params(shape: Vec<usize>, ranks: Vec<usize>, t: usize) -> BoundParams {
        BoundParams {
            beta: BETA,
            gamma: gamma(),
            oversampling: 5,
            shape,
            ranks,
            fiber_modes: t,
        }
    }

    #[test]
    fn bound_homogeneity_and_zero() {
        let spectra = ModeSpectra(vec![vec![3.0, 1.0, 0.5, 0.1]; 3]);
        let p = params(vec![4, 4, 4], vec![2, 2, 2], 1);
        let b = randomized_error_bound(&spectra, &p).unwrap();
        let b2 = randomized_error_bound(&spectra.scaled(2.0), &p).unwrap();
        assert_relative_eq!(b2, 4.0 * b, max_relative = 1e-15);
        let exact = ModeSpectra(vec![vec![3.0, 1.0, 0.0, 0.0]; 3]);
        assert_eq!(randomized_error_bound(&exact, &p).unwrap(), 0.0);
        assert_eq!(
            randomized_error_bound(&spectra, &params(vec![4, 4, 4], vec![4, 4, 4], 1)).unwrap(),
            0.0
        );
        assert!(
            randomized_error_bound(&spectra, &params(vec![4, 4, 4], vec![5, 2, 2], 1)).is_err()
        );
    }

    #[test]
    fn bound_is_monotone() {
        let base = ModeSpectra(vec![vec![3.0, 1.0, 0.5, 0.1]; 3]);
        let p = params(vec![4, 4, 4], vec![2, 2, 2], 1);
        let b = randomized_error_bound(&base, &p).unwrap();
        for mode in 0..3 {
            let mut s = base.clone();
            s.0[mode][2] = 0.6;
            assert!(randomized_error_bound(&s, &p).unwrap() >= b);
            let mut shape = vec![4, 4, 4];
            shape[mode] = 5;
            assert!(randomized_error_bound(&base, &params(shape, vec![2, 2, 2], 1)).unwrap() >= b);
        }
    }

    #[test]
    fn hypothesis_check() {
        assert!(bound_hypothesis_holds(&[5, 5, 5]));
        assert!(!bound_hypothesis_holds(&[30, 2, 3]));
    }

    #[test]
    fn rank_one_and_diagonal_spectra() {
        let u = [0.6, 0.8];
        let v = [1.0, 0.0, 0.0];
        let w = [0.0, 0.28, 0.96];
        let t = DenseTensor::from_fn(vec![2, 3, 3], |i| u[i[0]] * v[i[1]] * w[i[2]]).unwrap();
        for mode in 1..=3 {
            let s = mode_singular_values(&t, mode).unwrap();
            assert_relative_eq!(s[0], 1.0, max_relative = 1e-14);
            assert!(s[1..].iter().all(|&x| x <= 1e-12));
        }
        let diag = DenseTensor::from_fn(vec![3, 3, 3], |i| {
            if i[0] == i[1] && i[1] == i[2] {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        for mode in 1..=3 {
            for s in mode_singular_values(&diag, mode).unwrap() {
                assert_relative_eq!(s, 1.0, max_relative = 1e-14);
            }
        }
    }
}
