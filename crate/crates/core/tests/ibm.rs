mod common;

use common::*;
use sohq::ibm::neighbors::{all_pairs, cell_list_pairs};
use sohq::ibm::{Attitudes, Initial, Kernel, PeriodicBox, Representation, SimConfig, Simulation};
use sohq::linalg::{Mat3, Vec3};
use sohq::quadrature::GaussLegendre;
use sohq::quat::{McEstimate, Quat, UnitQuat};

fn q0() -> UnitQuat {
    Quat::new(0.9, 0.1, -0.3, 0.2).normalize().unwrap()
}

fn config(n: usize, rep: Representation) -> SimConfig {
    SimConfig {
        n_particles: n,
        v0: 1.0,
        nu: 1.0,
        diffusion: 0.0,
        kernel: Kernel::Smooth { radius: 1.5 },
        dt: 1e-3,
        t_end: 0.1,
        domain: [100.0; 3],
        seed: 7,
        representation: rep,
        initial: Initial::Uniform,
    }
}

fn attitudes(rep: Representation, qs: &[UnitQuat]) -> Attitudes {
    match rep {
        Representation::Quaternion => Attitudes::Quaternion(qs.to_vec()),
        Representation::Matrix => Attitudes::Matrix(qs.iter().map(|q| q.to_matrix()).collect()),
    }
}

fn max_matrix_diff(a: &[Mat3], b: &[Mat3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max)
}

fn cluster(n: usize, seed: u64) -> (Vec<Vec3>, Vec<UnitQuat>) {
    let mut r = rng(seed);
    let c = Vec3::new(50.0, 50.0, 50.0);
    let pos = (0..n).map(|_| c + gaussian_vec3(&mut r) * 0.6).collect();
    let qs = (0..n).map(|_| UnitQuat::exp(gaussian_vec3(&mut r) * 0.4) * q0()).collect();
    (pos, qs)
}

#[test]
fn kernel_support_and_boundary_pairs() {
    for k in [Kernel::Indicator { radius: 2.0 }, Kernel::Smooth { radius: 2.0 }] {
        assert!(k.weight(2.0 + 1e-12) == 0.0);
        assert!(k.weight(0.0) > 0.0);
        let total = 4.0 * std::f64::consts::PI * GaussLegendre::new(40).integrate(|r| r * r * k.weight(r), 0.0, 2.0);
        assert!((total - 1.0).abs() < 1e-12);
    }
    assert_eq!(Kernel::Smooth { radius: 2.0 }.weight(2.0), 0.0);
    let pbox = PeriodicBox::new([10.0; 3]);
    let pos = [Vec3::new(0.2, 5.0, 5.0), Vec3::new(9.7, 5.0, 5.0), Vec3::new(5.0, 5.0, 5.0)];
    for pairs in [all_pairs(&pos, &pbox, 1.0), cell_list_pairs(&pos, &pbox, 1.0)] {
        assert_eq!(pairs[0].iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1]);
        assert!((pairs[0][1].1 - 0.5).abs() < 1e-12);
        assert_eq!(pairs[2], vec![(2, 0.0)]);
    }
}

#[test]
fn cell_list_matches_brute_force() {
    let mut r = rng(40);
    for (lengths, radius) in [([10.0, 10.0, 10.0], 1.3), ([7.0, 3.0, 12.0], 1.0), ([4.0; 3], 2.5), ([50.0; 3], 0.01)] {
        let pbox = PeriodicBox::new(lengths);
        let pos: Vec<Vec3> = (0..200)
            .map(|_| Vec3(std::array::from_fn(|k| rand::Rng::random::<f64>(&mut r) * lengths[k])))
            .collect();
        assert_eq!(cell_list_pairs(&pos, &pbox, radius), all_pairs(&pos, &pbox, radius));
    }
}

#[test]
fn two_body_fixed_points() {
    for rep in [Representation::Quaternion, Representation::Matrix] {
        for second in [q0(), -q0()] {
            let pos = vec![Vec3::new(50.0, 50.0, 50.0), Vec3::new(50.5, 50.0, 50.0)];
            let mut cfg = config(2, rep);
            cfg.v0 = 0.0;
            let mut sim = Simulation::from_state(cfg, pos, attitudes(rep, &[q0(), second])).unwrap();
            let start = sim.attitudes.matrices();
            for _ in 0..100 {
                sim.step().unwrap();
            }
            assert!(max_matrix_diff(&sim.attitudes.matrices(), &start) < 1e-13);
        }
    }
}

#[test]
fn perturbed_pair_aligns_monotonically() {
    let pos = vec![Vec3::new(50.0, 50.0, 50.0), Vec3::new(50.5, 50.0, 50.0)];
    let second = UnitQuat::exp(Vec3::new(0.3, -0.2, 0.4)) * q0();
    let mut cfg = config(2, Representation::Quaternion);
    cfg.v0 = 0.0;
    cfg.dt = 0.01;
    let mut sim = Simulation::from_state(cfg, pos, attitudes(Representation::Quaternion, &[q0(), second])).unwrap();
    let mut prev = 0.0;
    for _ in 0..500 {
        let qs = sim.attitudes.quaternions();
        let a = qs[0].dot(qs[1]).powi(2);
        assert!(a >= prev);
        prev = a;
        sim.step().unwrap();
    }
    assert!(prev > 0.999);
}

#[test]
fn matrix_all_equal_stays_fixed() {
    let mut cfg = config(30, Representation::Matrix);
    cfg.kernel = Kernel::Indicator { radius: 1e3 };
    cfg.domain = [5.0; 3];
    cfg.initial = Initial::Aligned { q: q0() };
    let mut sim = Simulation::new(cfg).unwrap();
    let start = sim.attitudes.matrices();
    for _ in 0..100 {
        sim.step().unwrap();
    }
    assert!(max_matrix_diff(&sim.attitudes.matrices(), &start) < 1e-13);
}

#[test]
fn pure_noise_destroys_order() {
    let mut cfg = config(2000, Representation::Quaternion);
    cfg.nu = 0.0;
    cfg.diffusion = 1.0;
    cfg.dt = 0.01;
    cfg.t_end = 3.0;
    cfg.kernel = Kernel::Indicator { radius: 1e3 };
    cfg.domain = [5.0; 3];
    cfg.initial = Initial::Aligned { q: q0() };
    let mut sim = Simulation::new(cfg.clone()).unwrap();
    assert!((sim.observables().nematic_order - 0.75).abs() < 1e-12);
    for _ in 0..cfg.n_steps() {
        sim.step().unwrap();
    }
    assert!(sim.observables().nematic_order < 0.05);
}

#[test]
fn deterministic_alignment_reaches_full_order() {
    for rep in [Representation::Quaternion, Representation::Matrix] {
        let mut cfg = config(200, rep);
        cfg.dt = 0.05;
        cfg.kernel = Kernel::Indicator { radius: 1e3 };
        cfg.domain = [5.0; 3];
        let mut sim = Simulation::new(cfg).unwrap();
        for _ in 0..600 {
            sim.step().unwrap();
        }
        let order = sim.observables().nematic_order;
        assert!(order > 0.75 - 1e-6, "{rep:?}: {order}");
    }
}

#[test]
fn attitudes_stay_normalized() {
    for rep in [Representation::Quaternion, Representation::Matrix] {
        let mut cfg = config(300, rep);
        cfg.diffusion = 2.0;
        cfg.dt = 0.02;
        cfg.domain = [6.0; 3];
        let mut sim = Simulation::new(cfg).unwrap();
        for _ in 0..100 {
            sim.step().unwrap();
        }
        match &sim.attitudes {
            Attitudes::Quaternion(qs) => assert!(qs.iter().all(|q| (q.quat().norm() - 1.0).abs() < 1e-12)),
            Attitudes::Matrix(ms) => {
                for m in ms {
                    assert!((m.transpose() * *m).max_abs_diff(&Mat3::IDENTITY) < 1e-12);
                    assert!((m.det() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn frame_equivariance() {
    let frame = Quat::new(0.4, -0.6, 0.2, 0.66).normalize().unwrap();
    let rot = frame.to_matrix();
    let c = Vec3::new(50.0, 50.0, 50.0);
    for rep in [Representation::Quaternion, Representation::Matrix] {
        let (pos, qs) = cluster(60, 41);
        let pos2: Vec<Vec3> = pos.iter().map(|&x| c + rot.apply(x - c)).collect();
        let qs2: Vec<UnitQuat> = qs.iter().map(|&q| frame * q).collect();
        let cfg = config(60, rep);
        let mut a = Simulation::from_state(cfg.clone(), pos, attitudes(rep, &qs)).unwrap();
        let mut b = Simulation::from_state(cfg, pos2, attitudes(rep, &qs2)).unwrap();
        for _ in 0..100 {
            a.step().unwrap();
            b.step().unwrap();
        }
        let mapped: Vec<Mat3> = a.attitudes.matrices().iter().map(|m| rot * *m).collect();
        assert!(max_matrix_diff(&mapped, &b.attitudes.matrices()) < 1e-8, "{rep:?}");
        for (x, y) in a.positions.iter().zip(&b.positions) {
            let d = c + rot.apply(*x - c) - *y;
            assert!(d.norm() < 1e-8);
        }
    }
}

#[test]
fn sign_flips_are_invisible() {
    let (pos, qs) = cluster(80, 42);
    let flip: Vec<bool> = (0..80).map(|k| k % 3 == 1).collect();
    let flipped: Vec<UnitQuat> = qs.iter().zip(&flip).map(|(q, f)| if *f { -*q } else { *q }).collect();
    let mut cfg = config(80, Representation::Quaternion);
    cfg.diffusion = 0.5;
    cfg.dt = 0.01;
    let mut a = Simulation::from_state(cfg.clone(), pos.clone(), attitudes(Representation::Quaternion, &qs)).unwrap();
    let mut b = Simulation::from_state(cfg.clone(), pos, attitudes(Representation::Quaternion, &flipped)).unwrap();
    for step in 0..200 {
        a.step().unwrap();
        let flip = &flip;
        b.step_with_noise(|k| {
            let xi = sohq::ibm::particle_noise(cfg.seed, k, step);
            if flip[k] {
                xi.map(|x| -x)
            } else {
                xi
            }
        })
        .unwrap();
        assert_eq!(a.positions, b.positions);
        assert_eq!(a.attitudes.matrices(), b.attitudes.matrices());
    }
    let (qa, qb) = (a.attitudes.quaternions(), b.attitudes.quaternions());
    for k in 0..80 {
        assert_eq!(qa[k].quat(), if flip[k] { -qb[k].quat() } else { qb[k].quat() });
    }
}

/// Multiplier of the degree-2 harmonic `(q . q0)^2 - 1/4` under one pure-noise
/// quaternion step, `(E[1 / (1 + s chi^2_3)] - 1/4) / (3/4)` with `s = D dt / 2`.
fn harmonic_multiplier(diffusion: f64, dt: f64) -> f64 {
    let s = 0.5 * diffusion * dt;
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    let mean = GaussLegendre::new(40).composite(|u| 2.0 * u * u * (-0.5 * u * u).exp() / norm / (1.0 + s * u * u), 0.0, 14.0, 16);
    (mean - 0.25) / 0.75
}

#[test]
fn pure_noise_weak_error_is_first_order() {
    let (diffusion, t_end) = (1.0f64, 0.5f64);
    let exact = 0.75 * (-2.0 * diffusion * t_end).exp();
    let predicted = |dt: f64| 0.75 * harmonic_multiplier(diffusion, dt).powf(t_end / dt);
    let frozen = [(0.1, 0.03346081491695069), (0.05, 0.018412207614307285), (0.025, 0.009726732797951443)];
    for (dt, err) in frozen {
        assert!(((predicted(dt) - exact) - err).abs() < 1e-10, "dt={dt}");
    }
    let ratio = (predicted(0.025) - exact) / (predicted(0.0125) - exact);
    assert!((1.6..=2.4).contains(&ratio), "{ratio}");

    let mut errors = Vec::new();
    for dt in [0.1, 0.05] {
        let mut cfg = config(200_000, Representation::Quaternion);
        cfg.nu = 0.0;
        cfg.diffusion = diffusion;
        cfg.v0 = 0.0;
        cfg.dt = dt;
        cfg.t_end = t_end;
        cfg.kernel = Kernel::Indicator { radius: 1e3 };
        cfg.domain = [5.0; 3];
        cfg.initial = Initial::Aligned { q: q0() };
        let mut sim = Simulation::new(cfg.clone()).unwrap();
        for _ in 0..cfg.n_steps() {
            sim.step().unwrap();
        }
        let vals: Vec<f64> = sim.attitudes.quaternions().iter().map(|q| q.dot(q0()).powi(2) - 0.25).collect();
        let est = McEstimate::from_samples(&vals);
        assert!((est.value - predicted(dt)).abs() < 3.0 * est.std_err, "dt={dt}: {est:?} vs {}", predicted(dt));
        errors.push(est.value - exact);
    }
    let ratio = errors[0] / errors[1];
    assert!((1.6..=2.4).contains(&ratio), "{errors:?}");
}

fn two_body_deviation(dt: f64) -> f64 {
    let qs = [q0(), UnitQuat::exp(Vec3::new(0.3, 0.5, -0.2)) * q0()];
    let pos = vec![Vec3::new(5.0, 5.0, 5.0), Vec3::new(5.3, 5.0, 5.0)];
    let mut worst: f64 = 0.0;
    let mut sims: Vec<Simulation> = [Representation::Quaternion, Representation::Matrix]
        .into_iter()
        .map(|rep| {
            let mut cfg = config(2, rep);
            cfg.v0 = 0.0;
            cfg.kernel = Kernel::Smooth { radius: 1.0 };
            cfg.dt = dt;
            cfg.t_end = 2.0;
            cfg.domain = [10.0; 3];
            Simulation::from_state(cfg, pos.clone(), attitudes(rep, &qs)).unwrap()
        })
        .collect();
    for _ in 0..sims[0].config.n_steps() {
        for s in sims.iter_mut() {
            s.step().unwrap();
        }
        worst = worst.max(max_matrix_diff(&sims[0].attitudes.matrices(), &sims[1].attitudes.matrices()));
    }
    worst
}

#[test]
fn two_body_representations_agree_to_second_order() {
    let errs: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| two_body_deviation(dt)).collect();
    assert!(errs[0] < 1e-5, "{errs:?}");
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "{errs:?}");
    }
}

#[test]
fn config_errors_name_the_field() {
    let good = serde_json::to_value(config(10, Representation::Quaternion)).unwrap();
    let mut missing = good.clone();
    missing.as_object_mut().unwrap().remove("dt");
    let err = serde_json::from_value::<SimConfig>(missing).unwrap_err().to_string();
    assert!(err.contains("dt"), "{err}");
    let mut cfg = config(10, Representation::Quaternion);
    cfg.nu = 10.0;
    cfg.dt = 0.02;
    assert!(cfg.validate().unwrap_err().to_string().contains("dt"));
    cfg.nu = 1.0;
    cfg.diffusion = -1.0;
    assert!(cfg.validate().is_err());
    cfg.diffusion = 0.0;
    cfg.kernel = Kernel::Smooth { radius: 0.0 };
    assert!(cfg.validate().is_err());
    cfg.kernel = Kernel::Smooth { radius: 1.0 };
    cfg.n_particles = 0;
    assert!(cfg.validate().is_err());
    assert!(Simulation::from_state(config(2, Representation::Quaternion), vec![Vec3::ZERO], attitudes(Representation::Quaternion, &[q0(), q0()])).is_err());
}
