//! Individual-based simulation of nematic body-attitude alignment.
//!
//! Each particle has a position `X` in a periodic box and an attitude given
//! either by a unit quaternion `q` or by a rotation matrix `A = Phi(q)`.
//! One explicit step of size `dt` reads, in quaternion form,
//!
//! ```text
//! q <- normalize(q + P_{q^perp}(nu F dt + sqrt(D/2) sqrt(dt) xi)),  xi ~ N(0, I_4)
//! F  = (qbar (x) qbar - Id/4) q,  qbar = leading eigenvector of Q_k
//! ```
//!
//! and, in matrix form,
//!
//! ```text
//! A <- polar(A + P_{T_A}(nu PD(M_k) dt + 2 sqrt(D) sqrt(dt) Xi)),  Xi ~ N(0, I_9)
//! ```
//!
//! with `P_{T_A}(X) = (X - A X^T A) / 2`. Positions move with speed `v0`
//! along the first body axis.

pub mod equivalence;
pub mod neighbors;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{polar_orthogonal, Mat3, Vec3};
use crate::nematic::{drift, principal, QTensor, TieBreak};
use crate::quat::{Quat, UnitQuat};

pub use neighbors::PeriodicBox;

/// Upper bound on `nu dt`.
pub const MAX_NU_DT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Kernel {
    /// Uniform weight on the ball of the given radius.
    Indicator { radius: f64 },
    /// `(1 - r^2/R^2)^2` on the ball of radius `R`.
    Smooth { radius: f64 },
}

impl Kernel {
    pub fn radius(&self) -> f64 {
        match *self {
            Kernel::Indicator { radius } | Kernel::Smooth { radius } => radius,
        }
    }

    /// Kernel value, normalized to unit integral over R^3.
    pub fn weight(&self, r: f64) -> f64 {
        let big_r = self.radius();
        if r > big_r {
            return 0.0;
        }
        match self {
            Kernel::Indicator { .. } => 3.0 / (4.0 * std::f64::consts::PI * big_r.powi(3)),
            Kernel::Smooth { .. } => {
                let s = 1.0 - (r / big_r).powi(2);
                105.0 / (32.0 * std::f64::consts::PI * big_r.powi(3)) * s * s
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    #[default]
    Quaternion,
    Matrix,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Initial {
    /// Uniform positions and attitudes.
    #[default]
    Uniform,
    /// Uniform positions, all attitudes equal to `q`.
    Aligned { q: UnitQuat },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_particles: usize,
    pub v0: f64,
    pub nu: f64,
    #[serde(rename = "D")]
    pub diffusion: f64,
    pub kernel: Kernel,
    pub dt: f64,
    pub t_end: f64,
    pub domain: [f64; 3],
    pub seed: u64,
    #[serde(default)]
    pub representation: Representation,
    #[serde(default)]
    pub initial: Initial,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |name: &'static str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite and non-negative, got {v}")))
            }
        };
        if self.n_particles == 0 {
            return Err(invalid("n_particles", "must be at least 1"));
        }
        if !self.v0.is_finite() {
            return Err(invalid("v0", "must be finite"));
        }
        finite_nonneg("nu", self.nu)?;
        finite_nonneg("D", self.diffusion)?;
        finite_nonneg("t_end", self.t_end)?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.nu * self.dt > MAX_NU_DT {
            return Err(invalid("dt", format!("nu * dt = {} exceeds {MAX_NU_DT}", self.nu * self.dt)));
        }
        if self.domain.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(invalid("domain", "box lengths must be positive"));
        }
        let r = self.kernel.radius();
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid("kernel", format!("radius must be positive, got {r}")));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    /// True when every pair interacts with the same weight.
    pub fn is_dense(&self) -> bool {
        matches!(self.kernel, Kernel::Indicator { radius } if radius >= PeriodicBox::new(self.domain).max_distance())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Attitudes {
    Quaternion(Vec<UnitQuat>),
    Matrix(Vec<Mat3>),
}

impl Attitudes {
    pub fn len(&self) -> usize {
        match self {
            Attitudes::Quaternion(q) => q.len(),
            Attitudes::Matrix(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Attitudes as quaternions (for matrices, the preimage with `w >= 0`).
    pub fn quaternions(&self) -> Vec<UnitQuat> {
        match self {
            Attitudes::Quaternion(q) => q.clone(),
            Attitudes::Matrix(a) => a.iter().map(UnitQuat::from_matrix).collect(),
        }
    }

    pub fn matrices(&self) -> Vec<Mat3> {
        match self {
            Attitudes::Quaternion(q) => q.iter().map(|q| q.to_matrix()).collect(),
            Attitudes::Matrix(a) => a.clone(),
        }
    }

    fn direction(&self, k: usize) -> Vec3 {
        match self {
            Attitudes::Quaternion(q) => q[k].e1(),
            Attitudes::Matrix(a) => a[k].col(0),
        }
    }
}

/// Nine standard normal draws for one particle and one step; the
/// quaternion model uses the first four.
pub type NoiseDraw = [f64; 9];

/// Noise of particle `k` at step `step`, from a ChaCha stream keyed by
/// `(seed, k)` and positioned by the step index.
pub fn particle_noise(seed: u64, k: usize, step: u64) -> NoiseDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng.set_word_pos((step as u128) << 20);
    std::array::from_fn(|_| rng.sample(StandardNormal))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub step: u64,
    pub time: f64,
    /// Largest eigenvalue of the global Q-tensor (zero for an isotropic
    /// cloud in the large-N limit).
    pub nematic_order: f64,
    pub mean_direction: [f64; 3],
    pub polar_speed: f64,
    /// `-(1/N) sum_k q_k . Q_k q_k` with the local Q-tensors.
    pub energy: f64,
    pub degenerate_count: u64,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub config: SimConfig,
    pub pbox: PeriodicBox,
    pub positions: Vec<Vec3>,
    pub attitudes: Attitudes,
    pub step_index: u64,
    pub degenerate_count: u64,
}

impl Simulation {
    /// Initial state drawn from `config.seed`.
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(u64::MAX);
        let n = config.n_particles;
        let positions: Vec<Vec3> =
            (0..n).map(|_| Vec3(std::array::from_fn(|k| rng.random::<f64>() * config.domain[k]))).collect();
        let qs: Vec<UnitQuat> = match config.initial {
            Initial::Uniform => (0..n).map(|_| UnitQuat::sample_uniform(&mut rng)).collect(),
            Initial::Aligned { q } => vec![q; n],
        };
        let attitudes = match config.representation {
            Representation::Quaternion => Attitudes::Quaternion(qs),
            Representation::Matrix => Attitudes::Matrix(qs.iter().map(|q| q.to_matrix()).collect()),
        };
        Simulation::from_state(config, positions, attitudes)
    }

    pub fn from_state(config: SimConfig, positions: Vec<Vec3>, attitudes: Attitudes) -> Result<Self> {
        config.validate()?;
        if positions.len() != config.n_particles || attitudes.len() != config.n_particles {
            return Err(invalid("n_particles", "state size does not match the configuration"));
        }
        let pbox = PeriodicBox::new(config.domain);
        let positions = positions.into_iter().map(|x| pbox.wrap(x)).collect();
        Ok(Simulation { config, pbox, positions, attitudes, step_index: 0, degenerate_count: 0 })
    }

    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.config.dt
    }

    /// Per-particle interaction lists `(j, K(|X_j - X_k|))`, or `None` when
    /// all weights are equal.
    fn interactions(&self) -> Option<Vec<Vec<(usize, f64)>>> {
        if self.config.is_dense() {
            return None;
        }
        let kernel = self.config.kernel;
        let pairs = neighbors::cell_list_pairs(&self.positions, &self.pbox, kernel.radius());
        Some(pairs.into_iter().map(|l| l.into_iter().map(|(j, r)| (j, kernel.weight(r))).collect()).collect())
    }

    /// Advances one step with the default noise streams.
    pub fn step(&mut self) -> Result<()> {
        let (seed, step) = (self.config.seed, self.step_index);
        self.step_with_noise(|k| particle_noise(seed, k, step))
    }

    /// Advances one step with caller-provided noise for each particle.
    pub fn step_with_noise<F>(&mut self, noise: F) -> Result<()>
    where
        F: Fn(usize) -> NoiseDraw + Sync,
    {
        let cfg = self.config.clone();
        let n = cfg.n_particles;
        let inv_n = 1.0 / n as f64;
        let lists = self.interactions();
        let dense_w = cfg.kernel.weight(0.0);
        let sqdt = cfg.dt.sqrt();
        let new_positions: Vec<Vec3> = (0..n)
            .map(|k| self.pbox.wrap(self.positions[k] + self.attitudes.direction(k) * (cfg.v0 * cfg.dt)))
            .collect();
        let (new_att, degenerate) = match &self.attitudes {
            Attitudes::Quaternion(qs) => {
                let global = if lists.is_none() {
                    let mut t = QTensor::ZERO;
                    qs.iter().for_each(|q| t.accumulate(*q, dense_w));
                    Some(principal(&t.scaled(inv_n), None, TieBreak::Reject).map(|m| m.qbar))
                } else {
                    None
                };
                let sigma = (cfg.diffusion / 2.0).sqrt() * sqdt;
                let out: Vec<(Result<UnitQuat>, bool)> = (0..n)
                    .into_par_iter()
                    .map(|k| {
                        let qk = qs[k];
                        let mean = global.clone().unwrap_or_else(|| {
                            let mut t = QTensor::ZERO;
                            for &(j, w) in &lists.as_ref().expect("interaction lists")[k] {
                                t.accumulate(qs[j], w);
                            }
                            principal(&t.scaled(inv_n), Some(qk), TieBreak::Reject).map(|m| m.qbar)
                        });
                        let (f, degenerate) = match mean {
                            Ok(qbar) => (drift(qbar, qk), false),
                            Err(_) => (Quat::ZERO, true),
                        };
                        let xi = noise(k);
                        let incr = f * (cfg.nu * cfg.dt) + Quat::new(xi[0], xi[1], xi[2], xi[3]) * sigma;
                        ((qk.quat() + qk.tangent_project(incr)).normalize(), degenerate)
                    })
                    .collect();
                let degenerate = out.iter().filter(|o| o.1).count() as u64;
                let qs = out.into_iter().map(|o| o.0).collect::<Result<Vec<_>>>();
                let qs = qs.map_err(|_| Error::NonFinite { step: self.step_index })?;
                (Attitudes::Quaternion(qs), degenerate)
            }
            Attitudes::Matrix(as_) => {
                let global = if lists.is_none() {
                    let mut m = Mat3::ZERO;
                    as_.iter().for_each(|a| m += *a * dense_w);
                    Some(polar_orthogonal(&(m * inv_n)).map(|p| p.0))
                } else {
                    None
                };
                let sigma = 2.0 * cfg.diffusion.sqrt() * sqdt;
                let out: Vec<(Result<Mat3>, bool)> = (0..n)
                    .into_par_iter()
                    .map(|k| {
                        let ak = as_[k];
                        let lambda = global.clone().unwrap_or_else(|| {
                            let mut m = Mat3::ZERO;
                            for &(j, w) in &lists.as_ref().expect("interaction lists")[k] {
                                m += as_[j] * w;
                            }
                            polar_orthogonal(&(m * inv_n)).map(|p| p.0)
                        });
                        let (target, degenerate) = match lambda {
                            Ok(lambda) => (lambda * (cfg.nu * cfg.dt), false),
                            Err(_) => (Mat3::ZERO, true),
                        };
                        let xi = noise(k);
                        let xi = Mat3([[xi[0], xi[1], xi[2]], [xi[3], xi[4], xi[5]], [xi[6], xi[7], xi[8]]]);
                        let incr = tangent_project_matrix(&ak, &(target + xi * sigma));
                        (polar_orthogonal(&(ak + incr)).map(|p| p.0), degenerate)
                    })
                    .collect();
                let degenerate = out.iter().filter(|o| o.1).count() as u64;
                let as_ = out.into_iter().map(|o| o.0).collect::<Result<Vec<_>>>();
                let as_ = as_.map_err(|_| Error::NonFinite { step: self.step_index })?;
                (Attitudes::Matrix(as_), degenerate)
            }
        };
        if new_positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { step: self.step_index });
        }
        self.positions = new_positions;
        self.attitudes = new_att;
        self.degenerate_count += degenerate;
        self.step_index += 1;
        Ok(())
    }

    pub fn observables(&self) -> Observables {
        let qs = self.attitudes.quaternions();
        let n = qs.len();
        let inv_n = 1.0 / n as f64;
        let global = QTensor::build(&qs, None).expect("non-empty ensemble");
        let lambda = global.eigen().0[0];
        let mut dir = Vec3::ZERO;
        for k in 0..n {
            dir += self.attitudes.direction(k);
        }
        let dir = dir * inv_n;
        let energy = match self.interactions() {
            None => -self.config.kernel.weight(0.0) * qs.iter().map(|q| global.objective(*q)).sum::<f64>() * inv_n,
            Some(lists) => {
                let total: f64 = (0..n)
                    .map(|k| {
                        let mut t = QTensor::ZERO;
                        for &(j, w) in &lists[k] {
                            t.accumulate(qs[j], w);
                        }
                        t.scaled(inv_n).objective(qs[k])
                    })
                    .sum();
                -total * inv_n
            }
        };
        Observables {
            step: self.step_index,
            time: self.time(),
            nematic_order: lambda,
            mean_direction: dir.0,
            polar_speed: dir.norm(),
            energy,
            degenerate_count: self.degenerate_count,
        }
    }
}

/// Orthogonal projection onto the tangent space of SO(3) at `a`,
/// `(X - A X^T A) / 2`.
pub fn tangent_project_matrix(a: &Mat3, x: &Mat3) -> Mat3 {
    (*x - *a * x.transpose() * *a) * 0.5
}

/// Runs `config` to `t_end`, calling `on_output` at step 0 and every
/// `stride` steps.
pub fn run<F>(config: SimConfig, stride: u64, mut on_output: F) -> Result<Simulation>
where
    F: FnMut(&Simulation) -> Result<()>,
{
    let mut sim = Simulation::new(config)?;
    let stride = stride.max(1);
    let steps = sim.config.n_steps();
    on_output(&sim)?;
    for _ in 0..steps {
        sim.step()?;
        if sim.step_index % stride == 0 {
            on_output(&sim)?;
        }
    }
    Ok(sim)
}
