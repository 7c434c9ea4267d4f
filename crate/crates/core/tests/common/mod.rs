//! Shared fixtures and independent reference computations for the
//! integration tests.

#![allow(dead_code)]

use covfit::simulate::{Scene, SplitMix64};
use covfit::{HermitianMatrix, Matrix, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real_vec(values: &[f64]) -> Vec<C64> {
    values.iter().map(|&v| c(v, 0.0)).collect()
}

pub fn gaussian_entry(rng: &mut SplitMix64, is_real: bool) -> C64 {
    if is_real {
        c(rng.next_normal(), 0.0)
    } else {
        rng.next_complex_normal()
    }
}

pub fn random_vector(rng: &mut SplitMix64, n: usize, is_real: bool) -> Vec<C64> {
    (0..n).map(|_| gaussian_entry(rng, is_real)).collect()
}

/// `G G^H / n + floor I` for a Gaussian `G`: well conditioned, positive definite.
pub fn random_pd(rng: &mut SplitMix64, n: usize, is_real: bool, floor: f64) -> HermitianMatrix {
    let g = Matrix::from_fn(n, n, |_, _| gaussian_entry(rng, is_real));
    let mut m = &g * &g.adjoint();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] /= n as f64;
        }
        m[(i, i)] += floor;
    }
    hermitian(m, is_real)
}

/// Builds a Hermitian matrix from one that is Hermitian up to rounding.
pub fn hermitian(m: Matrix, is_real: bool) -> HermitianMatrix {
    let n = m.rows();
    let sym = Matrix::from_fn(n, n, |i, j| {
        let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        if is_real || i == j {
            c(v.re, 0.0)
        } else {
            v
        }
    });
    HermitianMatrix::new(sym, is_real).expect("symmetrized matrix is Hermitian")
}

/// Scene with `p` random directions, log-uniform powers in `[0.5, 20]`,
/// random positive definite noise shape and noise gain in `[0.3, 1.5]`.
pub fn random_scene(rng: &mut SplitMix64, n: usize, p: usize, is_real: bool, seed: u64) -> Scene {
    let noise = random_pd(rng, n, is_real, 0.3);
    let directions = (0..p).map(|_| random_vector(rng, n, is_real)).collect();
    let powers = (0..p)
        .map(|_| (0.5f64.ln() + rng.next_f64() * (20.0f64 / 0.5).ln()).exp())
        .collect();
    let sigma = 0.3 + 1.2 * rng.next_f64();
    Scene::new(directions, powers, sigma, noise, is_real, seed).expect("valid random scene")
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn rel_matrix_diff(a: &Matrix, b: &Matrix) -> f64 {
    max_abs_diff(a, b) / a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE)
}

pub fn rel_vec_diff(a: &[C64], b: &[C64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let den = a
        .iter()
        .chain(b)
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    num / den
}

/// Plain real Cholesky, written out independently of the library.
pub fn naive_cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        assert!(d > 0.0, "oracle matrix not positive definite");
        l[j][j] = d.sqrt();
        for i in (j + 1)..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    l
}

fn forward(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    y
}

/// Sampled estimate of `E_q[log q(x) - log p(x)]` for zero-mean real
/// Gaussians whose means differ by `shift`, with `x = L_q z` (centred on
/// the mean of `q`) and `z` produced by `next_z`. Returns the mean and its
/// standard error.
pub fn kl_sample_estimate(
    q: &[Vec<f64>],
    p: &[Vec<f64>],
    shift: &[f64],
    samples: usize,
    mut next_z: impl FnMut(&mut [f64]),
) -> (f64, f64) {
    let n = q.len();
    let lq = naive_cholesky(q);
    let lp = naive_cholesky(p);
    let log_det = |l: &[Vec<f64>]| 2.0 * (0..n).map(|i| l[i][i].ln()).sum::<f64>();
    let offset = 0.5 * (log_det(&lp) - log_det(&lq));
    let mut z = vec![0.0; n];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        next_z(&mut z);
        let x: Vec<f64> = (0..n)
            .map(|i| shift[i] + (0..=i).map(|k| lq[i][k] * z[k]).sum::<f64>())
            .collect();
        let qz: f64 = z.iter().map(|v| v * v).sum();
        let pz: f64 = forward(&lp, &x).iter().map(|v| v * v).sum();
        let term = offset + 0.5 * (pz - qz);
        sum += term;
        sum_sq += term * term;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean).max(0.0);
    (mean, (var / m).sqrt())
}

pub fn to_real_rows(m: &HermitianMatrix) -> Vec<Vec<f64>> {
    let n = m.dim();
    (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j).re).collect())
        .collect()
}

/// Standard normal vectors from Owen-scrambled Sobol points: four
/// independent scrambles of 50 000 points each, in sequence.
pub fn scrambled_normals(seed: u32) -> impl FnMut(&mut [f64]) {
    use statrs::distribution::{ContinuousCDF, Normal};
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut index = 0u32;
    move |z: &mut [f64]| {
        let scramble = seed.wrapping_mul(16).wrapping_add(index / 50_000);
        for (d, v) in z.iter_mut().enumerate() {
            let u = f64::from(sobol_burley::sample(index % 50_000, d as u32, scramble));
            *v = normal.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12));
        }
        index += 1;
    }
}
