//! Von Mises-like equilibria on the unit quaternions.
//!
//! For a noise ratio `d = D / nu` and a mean `qbar`,
//! `M(q) = exp((2/d)((qbar . q)^2 - 1/4)) / Z`. Writing `qbar* q` in
//! axis-angle form with angle `theta`, `M = m(theta) / Z` with
//! `m(theta) = exp((1/2 + cos theta) / d)`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::GaussLegendre;
use crate::quat::UnitQuat;

/// Below this noise ratio densities are combined in log space.
pub const LOG_SPACE_BELOW: f64 = 0.05;

/// Noise-to-alignment ratio `d = D / nu > 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseRatio(f64);

impl NoiseRatio {
    pub fn new(d: f64) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(invalid("d", format!("noise ratio must be positive and finite, got {d}")));
        }
        Ok(NoiseRatio(d))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for NoiseRatio {
    type Error = crate::error::Error;
    fn try_from(d: f64) -> Result<Self> {
        NoiseRatio::new(d)
    }
}

impl From<NoiseRatio> for f64 {
    fn from(d: NoiseRatio) -> f64 {
        d.0
    }
}

/// `m(theta) = exp((1/2 + cos theta) / d)`.
pub fn weight_m(theta: f64, d: NoiseRatio) -> f64 {
    ((0.5 + theta.cos()) / d.0).exp()
}

/// `log m - 3/(2d)`, the log-weight relative to its maximum `m(0)`.
fn log_m_rel(theta: f64, d: f64) -> f64 {
    (theta.cos() - 1.0) / d
}

fn theta_rule() -> (GaussLegendre, usize) {
    (GaussLegendre::new(24), 64)
}

/// `int_0^pi g(theta) m(theta) sin^2(theta/2) dtheta / m(0)`.
pub(crate) fn scaled_theta_integral<G: Fn(f64) -> f64>(g: G, d: NoiseRatio) -> f64 {
    let (rule, panels) = theta_rule();
    let dd = d.0;
    // The weight decays like exp(-theta^2 / 2d); resolve that scale.
    let cut = if dd < 0.5 { (40.0 * dd).sqrt().min(PI) } else { PI };
    let f = |t: f64| g(t) * log_m_rel(t, dd).exp() * (0.5 * t).sin().powi(2);
    let mut s = rule.composite(f, 0.0, cut, panels);
    if cut < PI {
        s += rule.composite(f, cut, PI, panels / 4);
    }
    s
}

/// `log Z` with `Z = 4 pi int_0^pi m sin^2(theta/2) dtheta`.
pub fn log_normalizer(d: NoiseRatio) -> f64 {
    1.5 / d.0 + (4.0 * PI * scaled_theta_integral(|_| 1.0, d)).ln()
}

/// The normalization constant `Z` of `M`.
pub fn normalizer(d: NoiseRatio) -> f64 {
    log_normalizer(d).exp()
}

/// Order parameter `I^2(d) = int_{H1} (qbar . q)^2 M(q) dq`.
pub fn i_squared(d: NoiseRatio) -> f64 {
    let num = scaled_theta_integral(|t| (0.5 * t).cos().powi(2), d);
    let den = scaled_theta_integral(|_| 1.0, d);
    num / den
}

/// The equilibrium `M_qbar` for a noise ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquilibriumDist {
    pub d: NoiseRatio,
    pub qbar: UnitQuat,
    log_z: f64,
}

impl EquilibriumDist {
    pub fn new(d: NoiseRatio, qbar: UnitQuat) -> Self {
        EquilibriumDist { d, qbar, log_z: log_normalizer(d) }
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn log_density(&self, q: UnitQuat) -> f64 {
        let r = self.qbar.dot(q);
        (2.0 / self.d.0) * (r * r - 0.25) - self.log_z
    }

    pub fn density(&self, q: UnitQuat) -> f64 {
        if self.d.0 < LOG_SPACE_BELOW {
            self.log_density(q).exp()
        } else {
            let r = self.qbar.dot(q);
            ((2.0 / self.d.0) * (r * r - 0.25)).exp() / self.log_z.exp()
        }
    }

    /// One exact draw by rejection: a uniform proposal (angle density
    /// proportional to `sin^2(theta/2)`) accepted with `m(theta) / m(0)`,
    /// then rotated to `qbar q`.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitQuat {
        let d = self.d.0;
        loop {
            let q = UnitQuat::sample_uniform(rng);
            let r = q.w();
            let log_acc = (2.0 / d) * (r * r - 1.0);
            let u: f64 = rng.random();
            if u > 0.0 && u.ln() <= log_acc {
                return self.qbar * q;
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<UnitQuat> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    /// CDF of `(qbar . q)^2` under this law, for goodness-of-fit checks.
    pub fn cdf_r2(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        // (qbar.q)^2 = cos^2(theta/2) <= x  <=>  theta >= 2 acos(sqrt x)
        let t0 = 2.0 * x.sqrt().acos();
        let rule = GaussLegendre::new(24);
        let dd = self.d.0;
        let f = |t: f64| log_m_rel(t, dd).exp() * (0.5 * t).sin().powi(2);
        let den = scaled_theta_integral(|_| 1.0, self.d);
        if t0 >= PI {
            return 0.0;
        }
        rule.composite(f, t0, PI, 64) / den
    }
}
