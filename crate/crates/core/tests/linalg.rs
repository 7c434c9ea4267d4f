mod common;

use covfit::linalg::{cholesky_sqrt, dot, generalized_eig, hermitian_eig, LinalgError};
use covfit::simulate::SplitMix64;
use covfit::{HermitianMatrix, Matrix};
use proptest::prelude::*;

use common::*;

fn pair(seed: u64, n: usize, is_real: bool) -> (HermitianMatrix, HermitianMatrix) {
    let mut rng = SplitMix64::new(seed);
    let r = random_pd(&mut rng, n, is_real, 0.05);
    let w = random_pd(&mut rng, n, is_real, 0.3);
    (r, w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cholesky_reproduces_input(seed in any::<u64>(), n in 1usize..=12, is_real in any::<bool>()) {
        let (_, w) = pair(seed, n, is_real);
        let l = cholesky_sqrt(&w).unwrap();
        let product = l.matrix() * &l.matrix().adjoint();
        prop_assert!(rel_matrix_diff(&product, w.as_matrix()) <= 1e-12);
        for i in 0..n {
            for j in (i + 1)..n {
                prop_assert_eq!(l.matrix()[(i, j)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn hermitian_eig_contract(seed in any::<u64>(), n in 1usize..=12, is_real in any::<bool>()) {
        let (a, _) = pair(seed, n, is_real);
        let eig = hermitian_eig(&a).unwrap();
        let scale = a.as_matrix().max_abs() * n as f64;
        for i in 0..n {
            let t = eig.vectors.column(i);
            let at = a.as_matrix().mul_vec(&t);
            let residual = at.iter().zip(&t).map(|(x, y)| (x - y * eig.values[i]).norm()).fold(0.0, f64::max);
            prop_assert!(residual <= 1e-10 * scale, "residual {residual}");
            for j in 0..n {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot(&eig.vectors.column(j), &t) - c(expected, 0.0)).norm() <= 1e-10);
            }
        }
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn generalized_eig_invariants(seed in any::<u64>(), n in 1usize..=12, is_real in any::<bool>()) {
        let (r, w) = pair(seed, n, is_real);
        let d = generalized_eig(&r, &w).unwrap();
        prop_assert_eq!(d.lambdas.len(), n);
        prop_assert_eq!(d.vectors.cols(), n);
        prop_assert!(d.lambdas.windows(2).all(|p| p[0] >= p[1]));
        prop_assert!(d.lambdas[n - 1] > 0.0);

        let w_chol = w.cholesky().unwrap();
        let r_chol = r.cholesky().unwrap();
        for i in 0..n {
            let ui = d.vectors.column(i);
            let w_inv_ui = w_chol.solve(&ui);
            for j in 0..n {
                let expected = if i == j { 1.0 } else { 0.0 };
                let g = dot(&d.vectors.column(j), &w_inv_ui);
                prop_assert!((g - c(expected, 0.0)).norm() <= 1e-10, "gram ({j},{i}) = {g}");
            }
            let lhs = r_chol.solve(&ui);
            let residual = lhs
                .iter()
                .zip(&w_inv_ui)
                .map(|(a, b)| (a * d.lambdas[i] - b).norm())
                .fold(0.0, f64::max);
            prop_assert!(residual <= 1e-9 * d.lambdas[0], "column {i} residual {residual}");
        }
    }

    #[test]
    fn whitened_round_trip(seed in any::<u64>(), n in 1usize..=12, is_real in any::<bool>()) {
        let (r, w) = pair(seed, n, is_real);
        let d = generalized_eig(&r, &w).unwrap();
        let whitened = w.cholesky().unwrap().whiten(&r);
        let t = &d.whitened_vectors;
        let rebuilt = Matrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| t[(i, k)] * t[(j, k)].conj() * d.lambdas[k]).sum()
        });
        prop_assert!(rel_matrix_diff(&rebuilt, whitened.as_matrix()) <= 1e-9);
    }

    #[test]
    fn identity_noise_matches_ordinary_eig(seed in any::<u64>(), n in 1usize..=12, is_real in any::<bool>()) {
        let (r, _) = pair(seed, n, is_real);
        let d = generalized_eig(&r, &HermitianMatrix::identity(n, is_real)).unwrap();
        let e = hermitian_eig(&r).unwrap();
        prop_assert_eq!(&d.lambdas, &e.values);
    }

    #[test]
    fn equal_pencil_gives_unit_spectrum(seed in any::<u64>(), n in 1usize..=8, is_real in any::<bool>()) {
        let (_, w) = pair(seed, n, is_real);
        let d = generalized_eig(&w, &w).unwrap();
        prop_assert!(d.lambdas.iter().all(|l| (l - 1.0).abs() <= 1e-10));
    }
}

#[test]
fn two_by_two_pencil_with_identity_noise() {
    let r = HermitianMatrix::from_real(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
    let d = generalized_eig(&r, &HermitianMatrix::identity(2, true)).unwrap();
    assert!((d.lambdas[0] - 3.0).abs() < 1e-14 && (d.lambdas[1] - 1.0).abs() < 1e-14);
    let s = 0.5f64.sqrt();
    let u1 = d.vectors.column(0);
    let u2 = d.vectors.column(1);
    assert!(rel_vec_diff(&u1, &real_vec(&[s, s])) < 1e-14);
    // Sign fixed so the dominant (first, by tie-break) component is positive.
    assert!(rel_vec_diff(&u2, &real_vec(&[s, -s])) < 1e-14);
}

#[test]
fn repeated_eigenvalues_are_ordered_reproducibly() {
    let a = HermitianMatrix::diagonal(&[2.0, 5.0, 2.0, 2.0]);
    let first = hermitian_eig(&a).unwrap();
    let second = hermitian_eig(&a).unwrap();
    assert_eq!(first, second);
    assert_eq!(first.values, vec![5.0, 2.0, 2.0, 2.0]);
    let dominant: Vec<usize> = (1..4)
        .map(|j| {
            let col = first.vectors.column(j);
            (0..4)
                .max_by(|&x, &y| col[x].norm().total_cmp(&col[y].norm()))
                .unwrap()
        })
        .collect();
    assert_eq!(dominant, vec![0, 2, 3]);
}

#[test]
fn non_hermitian_and_indefinite_inputs_are_rejected() {
    let m = Matrix::from_row_major(2, 2, real_vec(&[1.0, 2.0, 0.0, 1.0])).unwrap();
    assert!(matches!(
        HermitianMatrix::new(m, true),
        Err(LinalgError::NotHermitian { .. })
    ));
    let indefinite = HermitianMatrix::from_real(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
    assert!(matches!(
        cholesky_sqrt(&indefinite),
        Err(LinalgError::NotPositiveDefinite { .. })
    ));
    let w = HermitianMatrix::identity(3, true);
    assert!(matches!(
        generalized_eig(&HermitianMatrix::identity(2, true), &w),
        Err(LinalgError::DimensionMismatch { .. })
    ));
}

#[test]
fn diagonal_imaginary_parts_are_cleared() {
    let m = Matrix::from_row_major(
        2,
        2,
        vec![c(1.0, 1e-15), c(0.5, 0.5), c(0.5, -0.5), c(2.0, 0.0)],
    )
    .unwrap();
    let h = HermitianMatrix::new(m, false).unwrap();
    assert_eq!(h.get(0, 0).im, 0.0);
    assert_eq!(h.get(0, 1), h.get(1, 0).conj());
}
