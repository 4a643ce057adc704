mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::*;
use proptest::prelude::*;
use sohq::equilibria::{i_squared, normalizer, weight_m, EquilibriumDist, NoiseRatio};
use sohq::nematic::{principal, QTensor, TieBreak};
use sohq::quadrature::GaussLegendre;
use sohq::quat::{mc_integral, McEstimate, Quat, UnitQuat, SPHERE3_VOLUME};
use sohq::stats::ks_one_sample;

/// Reference values from 30-digit adaptive quadrature.
const Z_GOLDEN: [(f64, f64); 3] = [(1.0, 22.810627849638600748), (0.2, 698.38822009910450731), (5.0, 19.841451749829146035)];
const I2_GOLDEN: [(f64, f64); 3] = [(1.0, 0.40316282075652157261), (0.2, 0.83793793240145511041), (5.0, 0.27624563127858069693)];

fn nr(d: f64) -> NoiseRatio {
    NoiseRatio::new(d).unwrap()
}

fn qbar() -> UnitQuat {
    Quat::new(0.2, 0.9, -0.3, 0.1).normalize().unwrap()
}

#[test]
fn noise_ratio_validation() {
    assert!(NoiseRatio::new(0.0).is_err());
    assert!(NoiseRatio::new(-1.0).is_err());
    assert!(NoiseRatio::new(f64::NAN).is_err());
    assert!(NoiseRatio::new(f64::INFINITY).is_err());
    assert!(serde_json::from_str::<NoiseRatio>("-2.0").is_err());
    assert_eq!(serde_json::from_str::<NoiseRatio>("2.0").unwrap().get(), 2.0);
}

#[test]
fn weight_examples() {
    for d in [0.3, 1.0, 4.0] {
        assert!((weight_m(FRAC_PI_2, nr(d)) - (0.5 / d).exp()).abs() < 1e-12 * (0.5 / d).exp());
        let prod = weight_m(PI, nr(d)) * weight_m(0.0, nr(d));
        assert!((prod / (1.0 / d).exp() - 1.0).abs() < 1e-14);
    }
    assert!((weight_m(0.0, nr(1.0)) - 4.4816890703380645).abs() < 1e-14);
    let mut prev = f64::INFINITY;
    for k in 0..=100 {
        let m = weight_m(PI * k as f64 / 100.0, nr(0.7));
        assert!(m > 0.0 && m < prev);
        prev = m;
    }
}

#[test]
fn normalizer_golden_values() {
    for (d, z) in Z_GOLDEN {
        assert!((normalizer(nr(d)) / z - 1.0).abs() < 1e-12, "d={d}");
    }
    let z = normalizer(nr(1e6));
    assert!((z / SPHERE3_VOLUME - 1.0).abs() < 1e-5);
}

#[test]
fn normalizer_matches_monte_carlo() {
    let mut r = rng(21);
    let d = 1.0;
    let est = mc_integral(|q| ((2.0 / d) * (q.w() * q.w() - 0.25)).exp(), 1_000_000, &mut r);
    let z = normalizer(nr(d));
    assert!((est.value - z).abs() < 3.0 * est.std_err, "{est:?} vs {z}");
}

#[test]
fn density_examples() {
    for d in [0.02, 0.5, 3.0] {
        let dist = EquilibriumDist::new(nr(d), qbar());
        let z = normalizer(nr(d));
        let at_mean = dist.density(qbar());
        assert!((at_mean / ((1.5 / d).exp() / z) - 1.0).abs() < 1e-12);
        let perp = Quat::new(-0.9, 0.2, 0.1, 0.3).normalize().unwrap();
        assert!(perp.dot(qbar()).abs() < 1e-15);
        assert!((dist.density(perp) / ((-0.5 / d).exp() / z) - 1.0).abs() < 1e-12);
    }
    let other = EquilibriumDist::new(nr(0.8), UnitQuat::IDENTITY);
    assert_eq!(other.log_z(), EquilibriumDist::new(nr(0.8), qbar()).log_z());
}

#[test]
fn density_is_normalized() {
    for d in [0.05, 0.2, 1.0, 5.0] {
        let dist = EquilibriumDist::new(nr(d), UnitQuat::IDENTITY);
        let f = |t: f64| {
            let q = UnitQuat::from_axis_angle(sohq::linalg::Vec3::unit(0), t).unwrap();
            (0.5 * t).sin().powi(2) * dist.density(q)
        };
        let total = 4.0 * PI * GaussLegendre::new(40).composite(f, 0.0, PI, 64);
        assert!((total - 1.0).abs() < 1e-10, "d={d}: {total}");
    }
    let mut r = rng(22);
    let dist = EquilibriumDist::new(nr(1.0), qbar());
    let est = mc_integral(|q| dist.density(q), 1_000_000, &mut r);
    assert!((est.value - 1.0).abs() < 3.0 * est.std_err);
}

#[test]
fn i_squared_golden_and_limits() {
    for (d, v) in I2_GOLDEN {
        assert!((i_squared(nr(d)) - v).abs() < 1e-12, "d={d}");
    }
    let grid = [0.1, 0.5, 1.0, 2.0, 10.0];
    let vals: Vec<f64> = grid.iter().map(|&d| i_squared(nr(d))).collect();
    assert!(vals.iter().all(|&v| v > 0.25));
    assert!(vals.windows(2).all(|w| w[0] > w[1]), "{vals:?}");
    assert!((i_squared(nr(1e3)) - 0.25).abs() < 5e-3);
    assert!((i_squared(nr(0.01)) - 1.0).abs() < 0.05);
}

#[test]
fn sampler_mean_matches_i_squared() {
    let mut r = rng(23);
    let dist = EquilibriumDist::new(nr(1.0), qbar());
    let vals: Vec<f64> = dist.sample(1_000_000, &mut r).iter().map(|q| q.dot(qbar()).powi(2)).collect();
    let est = McEstimate::from_samples(&vals);
    let i2 = i_squared(nr(1.0));
    assert!((est.value - i2).abs() < 3.0 * est.std_err, "{est:?} vs {i2}");
}

#[test]
fn sampler_concentrates_for_small_noise() {
    let mut r = rng(24);
    let dist = EquilibriumDist::new(nr(0.01), qbar());
    let samples = dist.sample(2000, &mut r);
    let mean_angle = samples.iter().map(|q| 2.0 * q.dot(qbar()).abs().min(1.0).acos()).sum::<f64>() / 2000.0;
    assert!(mean_angle < 0.2, "{mean_angle}");
}

#[test]
fn sampler_passes_ks_against_quadrature_cdf() {
    for (d, seed) in [(1.0, 25), (0.2, 26), (5.0, 27)] {
        let mut r = rng(seed);
        let dist = EquilibriumDist::new(nr(d), qbar());
        let theta: Vec<f64> = dist.sample(100_000, &mut r).iter().map(|q| 2.0 * q.dot(qbar()).abs().min(1.0).acos()).collect();
        let ks = ks_one_sample(&theta, |t| 1.0 - dist.cdf_r2((0.5 * t).cos().powi(2)));
        assert!(ks.p_value > 0.001, "d={d}: {ks:?}");
    }
}

#[test]
fn empirical_tensor_recovers_mean_and_order() {
    let mut r = rng(28);
    let d = nr(1.0);
    let dist = EquilibriumDist::new(d, qbar());
    let samples = dist.sample(100_000, &mut r);
    let t = QTensor::build(&samples, None).unwrap();
    let m = principal(&t, Some(qbar()), TieBreak::Reject).unwrap();
    let angle = 2.0 * m.qbar.dot(qbar()).abs().min(1.0).acos();
    assert!(angle < 0.02, "{angle}");
    let vals: Vec<f64> = samples.iter().map(|q| q.dot(qbar()).powi(2) - 0.25).collect();
    let se = McEstimate::from_samples(&vals).std_err;
    let target = i_squared(d) - 0.25;
    assert!((m.lambda_max - target).abs() < 3.0 * se, "{} vs {target}", m.lambda_max);
}

proptest! {
    #[test]
    fn equilibrium_ratio_is_constant(q in unit_quat(), qb in unit_quat(), d in 0.05f64..10.0) {
        let dist = EquilibriumDist::new(nr(d), qb);
        let (a, l) = (q.to_matrix(), qb.to_matrix());
        let ratio = dist.density(q) / (a.half_dot(&l) / d).exp();
        let z = normalizer(nr(d));
        prop_assert!((ratio * z - 1.0).abs() < 1e-10);
    }

    #[test]
    fn density_symmetries(q in unit_quat(), qb in unit_quat(), d in 0.01f64..10.0) {
        let dist = EquilibriumDist::new(nr(d), qb);
        prop_assert_eq!(dist.density(q), dist.density(-q));
        let base = EquilibriumDist::new(nr(d), UnitQuat::IDENTITY);
        let rel = (dist.density(qb * q) / base.density(q) - 1.0).abs();
        prop_assert!(rel < 1e-12);
    }
}
