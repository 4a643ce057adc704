//! Quaternions, the double cover of SO(3), and integration over the unit
//! sphere of quaternions.
//!
//! Quaternions are stored scalar first, `q = w + x i + y j + z k`, with the
//! Hamilton convention `ij = k`, `jk = i`, `ki = j`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};

/// Tolerance on `| |q| - 1 |` accepted by [`UnitQuat::try_new`].
pub const UNIT_TOL: f64 = 1e-12;

/// Total volume of the unit sphere of quaternions, `2 pi^2`.
pub const SPHERE3_VOLUME: f64 = 2.0 * PI * PI;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const ONE: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const ZERO: Quat = Quat { w: 0.0, x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    /// Pure imaginary quaternion with vector part `v`.
    pub fn pure(v: Vec3) -> Self {
        Quat::new(0.0, v[0], v[1], v[2])
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Quat::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn re(self) -> f64 {
        self.w
    }

    pub fn im(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn conj(self) -> Quat {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Euclidean inner product in R^4, equal to `Re(p q*)`.
    pub fn dot(self, o: Quat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalize(self) -> Result<UnitQuat> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NonUnit { norm: n });
        }
        Ok(UnitQuat(self * (1.0 / n)))
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

impl Add for Quat {
    type Output = Quat;
    fn add(self, o: Quat) -> Quat {
        Quat::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quat {
    type Output = Quat;
    fn sub(self, o: Quat) -> Quat {
        Quat::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Quat {
    type Output = Quat;
    fn mul(self, s: f64) -> Quat {
        Quat::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul for Quat {
    type Output = Quat;
    fn mul(self, o: Quat) -> Quat {
        Quat::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

/// A quaternion of norm one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct UnitQuat(Quat);

impl TryFrom<[f64; 4]> for UnitQuat {
    type Error = Error;
    fn try_from(a: [f64; 4]) -> Result<Self> {
        UnitQuat::try_new(Quat::from_array(a))
    }
}

impl From<UnitQuat> for [f64; 4] {
    fn from(q: UnitQuat) -> [f64; 4] {
        q.0.to_array()
    }
}

impl Default for UnitQuat {
    fn default() -> Self {
        UnitQuat::IDENTITY
    }
}

impl UnitQuat {
    pub const IDENTITY: UnitQuat = UnitQuat(Quat::ONE);

    pub fn try_new(q: Quat) -> Result<Self> {
        let n = q.norm();
        if (n - 1.0).abs() > UNIT_TOL || !n.is_finite() {
            return Err(Error::NonUnit { norm: n });
        }
        Ok(UnitQuat(q))
    }

    /// Wraps `q` without checking its norm.
    pub fn new_unchecked(q: Quat) -> Self {
        UnitQuat(q)
    }

    pub fn quat(self) -> Quat {
        self.0
    }

    pub fn w(self) -> f64 {
        self.0.w
    }

    pub fn conj(self) -> UnitQuat {
        UnitQuat(self.0.conj())
    }

    pub fn dot(self, o: UnitQuat) -> f64 {
        self.0.dot(o.0)
    }

    /// Rescales to unit norm, absorbing accumulated round-off.
    pub fn renormalize(self) -> UnitQuat {
        UnitQuat(self.0 * (1.0 / self.0.norm()))
    }

    /// `cos(theta/2) + sin(theta/2) n` for a unit axis `n`.
    pub fn from_axis_angle(axis: Vec3, theta: f64) -> Result<UnitQuat> {
        let n = axis.norm();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnit { norm: n });
        }
        let (s, c) = (0.5 * theta).sin_cos();
        Ok(UnitQuat(Quat::new(c, s * axis[0], s * axis[1], s * axis[2])))
    }

    /// Inverse of [`from_axis_angle`](Self::from_axis_angle) with
    /// `theta` in `[0, 2 pi]`; the axis defaults to `e3` when `theta` is below
    /// `1e-9`.
    pub fn to_axis_angle(self) -> (Vec3, f64) {
        let v = self.0.im();
        let s = v.norm();
        let theta = 2.0 * s.atan2(self.0.w);
        if s == 0.0 || theta < 1e-9 {
            (Vec3::unit(2), theta)
        } else {
            (v * (1.0 / s), theta)
        }
    }

    /// `exp(u) = cos|u| + sin|u| u/|u|` for a pure imaginary `u`.
    pub fn exp(u: Vec3) -> UnitQuat {
        let a = u.norm();
        if a == 0.0 {
            return UnitQuat::IDENTITY;
        }
        let s = a.sin() / a;
        UnitQuat(Quat::new(a.cos(), s * u[0], s * u[1], s * u[2]))
    }

    /// `Im(q v q*)`.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        self.to_matrix().apply(v)
    }

    /// The rotation matrix `Phi(q)`.
    pub fn to_matrix(self) -> Mat3 {
        let Quat { w, x, y, z } = self.0;
        let (ww, xx, yy, zz) = (w * w, x * x, y * y, z * z);
        let (wx, wy, wz, xy, xz, yz) = (w * x, w * y, w * z, x * y, x * z, y * z);
        Mat3([
            [ww + xx - yy - zz, 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), ww - xx + yy - zz, 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), ww - xx - yy + zz],
        ])
    }

    /// Self-propulsion direction `e1(q) = Phi(q) e1`.
    pub fn e1(self) -> Vec3 {
        let Quat { w, x, y, z } = self.0;
        Vec3::new(w * w + x * x - y * y - z * z, 2.0 * (x * y + w * z), 2.0 * (x * z - w * y))
    }

    /// A preimage of a rotation matrix under `Phi` (Shepperd's method),
    /// with non-negative scalar part.
    pub fn from_matrix(m: &Mat3) -> UnitQuat {
        let t = m.trace();
        let a = &m.0;
        let q = if t >= a[0][0] && t >= a[1][1] && t >= a[2][2] {
            let r = (1.0 + t).max(0.0).sqrt();
            let s = 0.5 / r;
            Quat::new(0.5 * r, (a[2][1] - a[1][2]) * s, (a[0][2] - a[2][0]) * s, (a[1][0] - a[0][1]) * s)
        } else if a[0][0] >= a[1][1] && a[0][0] >= a[2][2] {
            let r = (1.0 + a[0][0] - a[1][1] - a[2][2]).max(0.0).sqrt();
            let s = 0.5 / r;
            Quat::new((a[2][1] - a[1][2]) * s, 0.5 * r, (a[0][1] + a[1][0]) * s, (a[0][2] + a[2][0]) * s)
        } else if a[1][1] >= a[2][2] {
            let r = (1.0 - a[0][0] + a[1][1] - a[2][2]).max(0.0).sqrt();
            let s = 0.5 / r;
            Quat::new((a[0][2] - a[2][0]) * s, (a[0][1] + a[1][0]) * s, 0.5 * r, (a[1][2] + a[2][1]) * s)
        } else {
            let r = (1.0 - a[0][0] - a[1][1] + a[2][2]).max(0.0).sqrt();
            let s = 0.5 / r;
            Quat::new((a[1][0] - a[0][1]) * s, (a[0][2] + a[2][0]) * s, (a[1][2] + a[2][1]) * s, 0.5 * r)
        };
        let q = if q.w < 0.0 { -q } else { q };
        UnitQuat(q * (1.0 / q.norm()))
    }

    /// Projection of `v` onto the tangent space `q^perp = { u q : u in R^3 }`.
    pub fn tangent_project(self, v: Quat) -> Quat {
        v - self.0 * v.dot(self.0)
    }

    /// Relative derivative `Im(dq q*)` of a derivative `dq` taken at `q`.
    pub fn rel_derivative(self, dq: Quat) -> Vec3 {
        (dq * self.0.conj()).im()
    }

    /// Differential of `Phi` at `q` applied to the tangent vector `u q`,
    /// equal to `2 [u]x Phi(q)`.
    pub fn dphi(self, u: Vec3) -> Mat3 {
        u.hat() * self.to_matrix() * 2.0
    }

    /// Uniform sample on the unit sphere of quaternions.
    pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R) -> UnitQuat {
        loop {
            let g: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let q = Quat::from_array(g);
            let n = q.norm();
            if n > 1e-12 {
                return UnitQuat(q * (1.0 / n));
            }
        }
    }
}

impl Mul for UnitQuat {
    type Output = UnitQuat;
    fn mul(self, o: UnitQuat) -> UnitQuat {
        UnitQuat(self.0 * o.0)
    }
}

impl Neg for UnitQuat {
    type Output = UnitQuat;
    fn neg(self) -> UnitQuat {
        UnitQuat(-self.0)
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
}

impl McEstimate {
    /// Mean and standard error of a sample of values.
    pub fn from_samples(values: &[f64]) -> McEstimate {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        McEstimate { value: mean, std_err: (var / n).sqrt() }
    }

    pub fn scale(self, s: f64) -> McEstimate {
        McEstimate { value: self.value * s, std_err: self.std_err * s.abs() }
    }
}

/// `int_{H1} f(q) dq` by uniform sampling, with the unnormalized measure of
/// total mass `2 pi^2`.
pub fn mc_integral<R, F>(f: F, n: usize, rng: &mut R) -> McEstimate
where
    R: Rng + ?Sized,
    F: Fn(UnitQuat) -> f64,
{
    let values: Vec<f64> = (0..n).map(|_| f(UnitQuat::sample_uniform(rng))).collect();
    McEstimate::from_samples(&values).scale(SPHERE3_VOLUME)
}

/// Uniform sample on the unit sphere of R^3.
pub fn sample_sphere2<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let g = Vec3(std::array::from_fn(|_| rng.sample(StandardNormal)));
        let n = g.norm();
        if n > 1e-12 {
            return g * (1.0 / n);
        }
    }
}
