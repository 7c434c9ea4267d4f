mod common;

use covfit::beamform::{
    beampattern, beampattern_with, classical_power, mvdr_weights, whitened_response,
    BeamformerKind, CovarianceSource, SteeringVector,
};
use covfit::estimator::fit;
use covfit::linalg::dot;
use covfit::simulate::{generate, ula_steering, Scene, SplitMix64};
use covfit::{Criterion, Execution, HermitianMatrix};

use common::*;

fn basis(n: usize, k: usize) -> SteeringVector {
    let mut v = vec![c(0.0, 0.0); n];
    v[k] = c(1.0, 0.0);
    SteeringVector::new(v, format!("e{}", k + 1))
}

#[test]
fn simple_powers() {
    let unit = SteeringVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)], "unit");
    assert!(
        (classical_power(&HermitianMatrix::identity(2, false), &unit).unwrap() - 1.0).abs() < 1e-15
    );
    assert_eq!(
        classical_power(&HermitianMatrix::diagonal(&[4.0, 1.0]), &basis(2, 0)).unwrap(),
        4.0
    );
    assert!(classical_power(&HermitianMatrix::identity(3, true), &unit).is_err());
}

#[test]
fn mvdr_under_identity_is_normalized_steering() {
    let w0 = SteeringVector::new(vec![c(1.0, 1.0), c(2.0, -1.0), c(0.5, 0.0)], "w0");
    let weights = mvdr_weights(
        &HermitianMatrix::identity(3, false),
        &w0,
        CovarianceSource::Observed,
    )
    .unwrap();
    let norm2 = dot(w0.w0(), w0.w0()).re;
    let expected: Vec<_> = w0.w0().iter().map(|z| z / norm2).collect();
    assert!(rel_vec_diff(&weights.w, &expected) < 1e-15);
    assert_eq!(weights.kind, BeamformerKind::Mvdr);
    assert!((dot(&weights.w, w0.w0()) - c(1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn zero_steering_and_indefinite_covariance_are_rejected() {
    let zero = SteeringVector::new(vec![c(0.0, 0.0); 2], "zero");
    assert!(mvdr_weights(
        &HermitianMatrix::identity(2, true),
        &zero,
        CovarianceSource::Observed
    )
    .is_err());
    let indefinite = HermitianMatrix::from_real(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
    assert!(mvdr_weights(&indefinite, &basis(2, 0), CovarianceSource::Observed).is_err());
    assert!(beampattern(&HermitianMatrix::identity(2, true), &[]).is_err());
}

#[test]
fn unit_response_holds_for_random_inputs() {
    let mut rng = SplitMix64::new(41);
    for case in 0..20 {
        let n = 2 + case % 6;
        let cov = random_pd(&mut rng, n, case % 2 == 0, 0.05);
        let w0 = SteeringVector::new(random_vector(&mut rng, n, case % 2 == 0), "r");
        let w = mvdr_weights(&cov, &w0, CovarianceSource::Observed).unwrap();
        assert!((dot(&w.w, w0.w0()) - c(1.0, 0.0)).norm() < 1e-10);
    }
}

#[test]
fn in_span_steering_sees_identical_covariances() {
    let mut rng = SplitMix64::new(42);
    for case in 0..30 {
        let n = 3 + case % 5;
        let p = 1 + case % (n - 1);
        let is_real = case % 2 == 1;
        let r = random_pd(&mut rng, n, is_real, 0.05);
        let w = random_pd(&mut rng, n, is_real, 0.3);
        for crit in [Criterion::Ce, Criterion::Rce] {
            let model = fit(&r, &w, p, crit).unwrap().model;
            let alpha = random_vector(&mut rng, p, is_real);
            let in_u = SteeringVector::new(model.u().mul_vec(&alpha), "U alpha");
            let a = mvdr_weights(&r, &in_u, CovarianceSource::Observed).unwrap();
            let b = mvdr_weights(model.r_theta(), &in_u, CovarianceSource::Structured).unwrap();
            assert!(rel_vec_diff(&a.w, &b.w) <= 1e-8, "case {case} {crit}");

            let in_r_inv_u =
                SteeringVector::new(r.cholesky().unwrap().solve(in_u.w0()), "R^-1 U alpha");
            let pa = classical_power(&r, &in_r_inv_u).unwrap();
            let pb = classical_power(model.r_theta(), &in_r_inv_u).unwrap();
            assert!(
                (pa - pb).abs() <= 1e-8 * pa,
                "case {case} {crit}: {pa} vs {pb}"
            );
        }
    }
}

#[test]
fn out_of_span_steering_differs_on_diagonal_instance() {
    let r = HermitianMatrix::diagonal(&[4.0, 2.0, 1.0]);
    let w = HermitianMatrix::identity(3, true);
    let e3 = basis(3, 2);
    for (crit, s2) in [(Criterion::Ce, 4.0 / 3.0), (Criterion::Rce, 1.5)] {
        let rt = fit(&r, &w, 1, crit).unwrap().model.r_theta().clone();
        assert_eq!(classical_power(&r, &e3).unwrap(), 1.0);
        assert!((classical_power(&rt, &e3).unwrap() - s2).abs() < 1e-14);

        let a = whitened_response(&r, &e3).unwrap();
        let b = whitened_response(&rt, &e3).unwrap();
        assert!(rel_vec_diff(&a, &b) > 1e-6);

        // e3 is an eigenvector of both covariances, so its normalized MVDR
        // weights coincide; only the output power differs.
        let wa = mvdr_weights(&r, &e3, CovarianceSource::Observed).unwrap();
        let wb = mvdr_weights(&rt, &e3, CovarianceSource::Structured).unwrap();
        assert!(rel_vec_diff(&wa.w, &wb.w) < 1e-14);
        assert!((wa.output_power(&r) - wb.output_power(&rt)).abs() > 1e-3);

        let s = 0.5f64.sqrt();
        let mixed = SteeringVector::new(real_vec(&[0.0, s, s]), "mixed");
        let wa = mvdr_weights(&r, &mixed, CovarianceSource::Observed).unwrap();
        let wb = mvdr_weights(&rt, &mixed, CovarianceSource::Structured).unwrap();
        let diff: f64 =
            wa.w.iter()
                .zip(&wb.w)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
        assert!(diff > 1e-3, "{crit}: {diff}");
    }
}

#[test]
fn basis_family_reads_the_diagonal() {
    let d = [3.0, 1.5, 0.25, 7.0];
    let cov = HermitianMatrix::diagonal(&d);
    let family: Vec<_> = (0..4).map(|k| basis(4, k)).collect();
    let points = beampattern(&cov, &family).unwrap();
    for (k, point) in points.iter().enumerate() {
        assert_eq!(point.label, format!("e{}", k + 1));
        assert_eq!(point.classical, d[k]);
        assert!((point.mvdr - d[k]).abs() < 1e-14);
    }
    let single = beampattern(&cov, &family[3..]).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(
        single[0].classical,
        classical_power(&cov, &family[3]).unwrap()
    );
}

#[test]
fn ula_sweep_peaks_at_source() {
    let n = 8;
    let source = ula_steering(n, 0.5, 25f64.to_radians());
    let scene = Scene::new(
        vec![source.w0().to_vec()],
        vec![10.0],
        0.5,
        HermitianMatrix::identity(n, false),
        false,
        99,
    )
    .unwrap();
    let set = generate(&scene, 400).unwrap();
    let model = fit(set.sample_cov(), scene.noise(), 1, Criterion::Rce)
        .unwrap()
        .model;
    let family: Vec<_> = (0..181)
        .map(|k| ula_steering(n, 0.5, (k as f64 - 90.0).to_radians()))
        .collect();
    for cov in [set.sample_cov(), model.r_theta()] {
        let points = beampattern(cov, &family).unwrap();
        let peak = points
            .iter()
            .max_by(|a, b| a.classical.total_cmp(&b.classical))
            .unwrap();
        assert_eq!(peak.label, "25");
        let peak = points
            .iter()
            .max_by(|a, b| a.mvdr.total_cmp(&b.mvdr))
            .unwrap();
        assert_eq!(peak.label, "25");
    }
    let seq = beampattern_with(Execution::Sequential, model.r_theta(), &family).unwrap();
    let par = beampattern_with(Execution::default(), model.r_theta(), &family).unwrap();
    assert_eq!(seq, par);
}
