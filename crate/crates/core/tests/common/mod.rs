#![allow(dead_code)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sohq::linalg::Vec3;
use sohq::quat::{Quat, UnitQuat};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec3<R: Rng>(rng: &mut R) -> Vec3 {
    Vec3(std::array::from_fn(|_| rng.sample(StandardNormal)))
}

pub fn gaussian_quat<R: Rng>(rng: &mut R) -> Quat {
    Quat::from_array(std::array::from_fn(|_| rng.sample(StandardNormal)))
}

pub fn unit_quat() -> impl Strategy<Value = UnitQuat> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("away from zero", |a| a.iter().map(|x| x * x).sum::<f64>() > 0.01)
        .prop_map(|a| Quat::from_array(a).normalize().unwrap())
}

pub fn vec3(scale: f64) -> impl Strategy<Value = Vec3> {
    prop::array::uniform3(-scale..scale).prop_map(Vec3)
}

pub fn quat_max_diff(a: Quat, b: Quat) -> f64 {
    let (a, b) = (a.to_array(), b.to_array());
    (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

/// Distance up to the sign ambiguity of unit quaternions.
pub fn nematic_diff(a: UnitQuat, b: UnitQuat) -> f64 {
    quat_max_diff(a.quat(), b.quat()).min(quat_max_diff(a.quat(), -b.quat()))
}
