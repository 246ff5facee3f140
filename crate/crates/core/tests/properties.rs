//! Oracle and invariant checks for the kernels and decompositions.

use hytucker::kernels::{gaussian_matrix, thin_svd, truncated_pivoted_qr, SeededRng};
use hytucker::{
    compute_core, hoid, hosvd, hybrid, mode_mul, randomized_hybrid, reconstruct, relative_error,
    unfold, DenseTensor, Factor, FactorKind, Matrix, SketchConfig,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.as_slice())
}

fn gaussian_tensor(shape: &[usize], seed: u64) -> DenseTensor {
    let n = shape.iter().product();
    let data = gaussian_matrix(n, 1, &mut SeededRng::new(seed, 1000)).into_vec();
    DenseTensor::new(shape.to_vec(), data).unwrap()
}

fn entry_sum_tensor(n: usize) -> DenseTensor {
    DenseTensor::from_fn(vec![n; 3], |i| 1.0 / (i.iter().sum::<usize>() + 3) as f64).unwrap()
}

/// `X ×_k P` evaluated entry by entry.
fn apply_projector(t: &DenseTensor, p: &DMatrix<f64>, mode: usize) -> DenseTensor {
    DenseTensor::from_fn(t.shape().to_vec(), |idx| {
        let mut src = idx.to_vec();
        (0..t.shape()[mode])
            .map(|j| {
                src[mode] = j;
                p[(idx[mode], j)] * t.get(&src)
            })
            .sum()
    })
    .unwrap()
}

fn diff_norm_sq(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Orthogonal projector onto the column space of a factor, via nalgebra.
fn projector(f: &Factor) -> DMatrix<f64> {
    let c = to_na(&f.matrix);
    match f.kind {
        FactorKind::Orthonormal => &c * c.transpose(),
        FactorKind::FiberSampled { .. } => {
            let pinv = c.clone().pseudo_inverse(1e-14).unwrap();
            &c * pinv
        }
    }
}

#[test]
fn svd_matches_eigen_oracle() {
    let m = gaussian_matrix(20, 7, &mut SeededRng::new(2024, 0));
    let ours = thin_svd(&m).unwrap().s;
    let gram = to_na(&m).transpose() * to_na(&m);
    let mut eig: Vec<f64> = gram
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    for (a, b) in ours.iter().zip(&eig) {
        assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
    }
}

#[test]
fn hosvd_error_matches_projector_oracle() {
    let t = entry_sum_tensor(20);
    let model = hosvd(&t, &[5, 5, 5]).unwrap();
    let got = relative_error(&t, &reconstruct(&model)).unwrap();

    let mut approx = t.clone();
    for mode in 0..3 {
        let a = to_na(&unfold(&t, mode + 1).unwrap());
        let u = a.svd(true, false).u.unwrap().columns(0, 5).into_owned();
        approx = apply_projector(&approx, &(&u * u.transpose()), mode);
    }
    let want = diff_norm_sq(&t, &approx).sqrt() / hytucker::frobenius_norm(&t);
    assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
}

#[test]
fn core_matches_entrywise_contraction() {
    let t = gaussian_tensor(&[4, 4, 4], 5);
    let factors: Vec<Factor> = (0..3)
        .map(|k| {
            let g = gaussian_matrix(4, 2, &mut SeededRng::new(7, k));
            let svd = thin_svd(&g).unwrap();
            Factor {
                matrix: svd.u,
                kind: FactorKind::Orthonormal,
            }
        })
        .collect();
    let core = compute_core(&t, &factors).unwrap();
    let oracle = DenseTensor::from_fn(vec![2, 2, 2], |c| {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    acc += t.get(&[i, j, k])
                        * factors[0].matrix[(i, c[0])]
                        * factors[1].matrix[(j, c[1])]
                        * factors[2].matrix[(k, c[2])];
                }
            }
        }
        acc
    })
    .unwrap();
    assert!(relative_error(&oracle, &core).unwrap() <= 1e-12);
    assert!(hytucker::frobenius_norm(&core) <= hytucker::frobenius_norm(&t) + 1e-12);
}

#[test]
fn integer_fibers_stay_integer() {
    let mut s = 12345u64;
    let t = DenseTensor::from_fn(vec![6, 5, 7], |_| {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((s >> 33) % 10) as f64
    })
    .unwrap();
    let model = hybrid(&t, &[3, 3, 3], 3).unwrap();
    for f in model.factors() {
        assert!(f.is_fiber_sampled());
        assert!(f
            .matrix
            .as_slice()
            .iter()
            .all(|&x| x >= 0.0 && x.fract() == 0.0));
    }
}

#[test]
fn svd_floor_per_mode() {
    let t = entry_sum_tensor(12);
    let ranks = [3, 3, 3];
    let cfg = SketchConfig::new(ranks.to_vec(), 1, 4, 42);
    for model in [
        hosvd(&t, &ranks).unwrap(),
        hoid(&t, &ranks).unwrap(),
        hybrid(&t, &ranks, 2).unwrap(),
        randomized_hybrid(&t, &cfg).unwrap(),
    ] {
        for (k, f) in model.factors().iter().enumerate() {
            let a = to_na(&unfold(&t, k + 1).unwrap());
            let resid = (&a - projector(f) * &a).norm();
            let s = a.singular_values();
            let mut s: Vec<f64> = s.iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            let floor = s[ranks[k]..].iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(resid >= floor - 1e-10, "mode {}: {resid} < {floor}", k + 1);
        }
    }
}

fn pivot_order_for(m: &Matrix, k: usize) -> Vec<usize> {
    truncated_pivoted_qr(m, k).unwrap().pivots
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    // ‖T − T̂‖² ≤ Σ_i ‖T − T ×_i Π_i‖² for the mode projectors of the model.
    #[test]
    fn projection_inequality(seed in any::<u64>(), r1 in 1usize..5, r2 in 1usize..5, r3 in 1usize..5, t in 0usize..4) {
        let x = gaussian_tensor(&[6, 6, 6], seed);
        let model = hybrid(&x, &[r1, r2, r3], t).unwrap();
        let lhs = diff_norm_sq(&x, &reconstruct(&model));
        let rhs: f64 = model
            .factors()
            .iter()
            .enumerate()
            .map(|(k, f)| diff_norm_sq(&x, &apply_projector(&x, &projector(f), k)))
            .sum();
        prop_assert!(lhs <= rhs + 1e-10, "{} > {}", lhs, rhs);
    }

    #[test]
    fn pqr_diagonal_non_increasing(seed in any::<u64>(), rows in 3usize..12, cols in 3usize..12) {
        let m = gaussian_matrix(rows, cols, &mut SeededRng::new(seed, 0));
        let k = rows.min(cols);
        let f = truncated_pivoted_qr(&m, k).unwrap();
        prop_assert!(f.q.orthonormality_defect() <= 1e-12);
        for i in 1..f.rank() {
            prop_assert!(f.r[(i, i)].abs() <= f.r[(i - 1, i - 1)].abs() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn pqr_scaling_invariance(seed in any::<u64>(), c in 0.01f64..100.0) {
        let m = gaussian_matrix(6, 15, &mut SeededRng::new(seed, 0));
        let scaled = m.scale_columns(&[c; 15]);
        prop_assert_eq!(pivot_order_for(&m, 5), pivot_order_for(&scaled, 5));
    }

    #[test]
    fn svd_column_permutation(seed in any::<u64>()) {
        let m = gaussian_matrix(8, 6, &mut SeededRng::new(seed, 0));
        let p = m.select_columns(&[5, 3, 1, 0, 2, 4]);
        let a = thin_svd(&m).unwrap().s;
        let b = thin_svd(&p).unwrap().s;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn randomized_exact_rank(seed in any::<u64>(), t in 0usize..4) {
        let mut rng = SeededRng::new(seed, 77);
        let mut x = DenseTensor::new(vec![3, 3, 3], gaussian_matrix(27, 1, &mut rng).into_vec()).unwrap();
        for k in 1..=3 {
            x = mode_mul(&x, &gaussian_matrix(10 + k, 3, &mut rng), k).unwrap();
        }
        let model = randomized_hybrid(&x, &SketchConfig::new(vec![3, 3, 3], t, 5, seed)).unwrap();
        prop_assert!(relative_error(&x, &reconstruct(&model)).unwrap() <= 1e-9);
    }
}
