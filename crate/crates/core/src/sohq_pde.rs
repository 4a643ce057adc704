//! One-dimensional periodic solver for the macroscopic equations
//!
//! ```text
//! d_t rho + d_x (c1 e1(qbar)_1 rho) = 0
//! d_t qbar = -W qbar,
//! W = c2 v_1 a + (c3 / rho) v x grad(rho) + c4 ((a . v) e_1 + a_1 v)
//! ```
//!
//! where `v = e1(qbar)`, `a = Im(d_x qbar qbar*)` is the relative
//! derivative along `x_1` and all fields are independent of `x_2, x_3`.
//! Space is discretized with centred differences on a periodic grid of
//! point values, time with Heun's method followed by renormalization.

use serde::{Deserialize, Serialize};

use crate::coeffs::HydroCoefficients;
use crate::error::{invalid, Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::quat::{Quat, UnitQuat};

/// Densities below this are treated as vacuum: `qbar` is frozen there.
pub const RHO_FLOOR: f64 = 1e-10;

/// Largest accepted `dt max(c1, c2) / dx`.
pub const CFL_MAX: f64 = 0.4;

#[derive(Clone, Debug, PartialEq)]
pub struct HydroField {
    pub dx: f64,
    pub rho: Vec<f64>,
    pub qbar: Vec<UnitQuat>,
}

impl HydroField {
    pub fn new(dx: f64, rho: Vec<f64>, qbar: Vec<UnitQuat>) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(invalid("dx", "must be positive"));
        }
        if rho.len() != qbar.len() || rho.len() < 3 {
            return Err(invalid("n_cells", "rho and qbar need the same length, at least 3"));
        }
        if rho.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(invalid("rho", "densities must be finite and non-negative"));
        }
        let mut f = HydroField { dx, rho, qbar };
        f.gauge_fix()?;
        Ok(f)
    }

    /// Samples `rho(x)` and `qbar(x)` at `x_i = i dx`.
    pub fn from_fn<R, Q>(n_cells: usize, dx: f64, rho: R, qbar: Q) -> Result<Self>
    where
        R: Fn(f64) -> f64,
        Q: Fn(f64) -> UnitQuat,
    {
        let xs = (0..n_cells).map(|i| i as f64 * dx);
        HydroField::new(dx, xs.clone().map(&rho).collect(), xs.map(&qbar).collect())
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.dx
    }

    /// Flips signs left to right so that neighbouring cells have
    /// non-negative inner product; an odd number of flips around the loop
    /// is a topological defect.
    pub fn gauge_fix(&mut self) -> Result<()> {
        let n = self.len();
        for i in 1..n {
            if self.qbar[i].dot(self.qbar[i - 1]) < 0.0 {
                self.qbar[i] = -self.qbar[i];
            }
        }
        if self.qbar[n - 1].dot(self.qbar[0]) < 0.0 {
            return Err(Error::TopologicalDefect);
        }
        Ok(())
    }

    fn idx(&self, i: usize, off: isize) -> usize {
        (i as isize + off).rem_euclid(self.len() as isize) as usize
    }

    /// Centred derivative of `rho`.
    pub fn rho_grad(&self) -> Vec<f64> {
        (0..self.len()).map(|i| (self.rho[self.idx(i, 1)] - self.rho[self.idx(i, -1)]) / (2.0 * self.dx)).collect()
    }

    /// Centred derivative of the quaternion components.
    pub fn qbar_grad_raw(&self) -> Vec<Quat> {
        (0..self.len())
            .map(|i| (self.qbar[self.idx(i, 1)].quat() - self.qbar[self.idx(i, -1)].quat()) * (0.5 / self.dx))
            .collect()
    }

    /// Relative derivative `Im(d_x qbar qbar*)` at every point.
    pub fn rel_grad(&self) -> Vec<Vec3> {
        self.qbar_grad_raw().iter().zip(&self.qbar).map(|(d, q)| q.rel_derivative(*d)).collect()
    }
}

/// Relative velocity `W` such that `d_t qbar = -W qbar`.
pub fn rotation_rate(c: &HydroCoefficients, rho: f64, grad_rho: f64, q: UnitQuat, a: Vec3) -> Vec3 {
    let v = q.e1();
    let pressure = v.cross(Vec3::new(grad_rho, 0.0, 0.0)) * (c.c3 / rho);
    let c4_term = (Vec3::unit(0) * a.dot(v) + v * a[0]) * c.c4;
    a * (c.c2 * v[0]) + pressure + c4_term
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rhs {
    pub drho: Vec<f64>,
    pub dqbar: Vec<Quat>,
    pub vacuum_cells: usize,
}

/// Time derivatives of the discrete field.
pub fn rhs(field: &HydroField, c: &HydroCoefficients) -> Rhs {
    let n = field.len();
    let v1: Vec<f64> = field.qbar.iter().map(|q| q.e1()[0]).collect();
    let flux: Vec<f64> =
        (0..n).map(|i| 0.5 * c.c1 * (v1[i] * field.rho[i] + v1[field.idx(i, 1)] * field.rho[field.idx(i, 1)])).collect();
    let drho = (0..n).map(|i| -(flux[i] - flux[field.idx(i, -1)]) / field.dx).collect();
    let a = field.rel_grad();
    let g = field.rho_grad();
    let mut vacuum = 0;
    let dqbar = (0..n)
        .map(|i| {
            if field.rho[i] < RHO_FLOOR {
                vacuum += 1;
                return Quat::ZERO;
            }
            let w = rotation_rate(c, field.rho[i], g[i], field.qbar[i], a[i]);
            -(Quat::pure(w) * field.qbar[i].quat())
        })
        .collect();
    Rhs { drho, dqbar, vacuum_cells: vacuum }
}

/// Largest gap between the relative form `d_t,rel qbar = -W` and the
/// relative derivative of the non-relative update, in which the transport
/// term uses the tangent projection of the raw derivative.
pub fn relative_form_defect(field: &HydroField, c: &HydroCoefficients) -> f64 {
    let raw = field.qbar_grad_raw();
    let g = field.rho_grad();
    let mut worst: f64 = 0.0;
    for i in 0..field.len() {
        let q = field.qbar[i];
        if field.rho[i] < RHO_FLOOR {
            continue;
        }
        let a = q.rel_derivative(raw[i]);
        let rel = -rotation_rate(c, field.rho[i], g[i], q, a);
        let v = q.e1();
        let transport = q.tangent_project(raw[i]) * (c.c2 * v[0]);
        let others = rotation_rate(c, field.rho[i], g[i], q, a) - a * (c.c2 * v[0]);
        let dq = -(transport + Quat::pure(others) * q.quat());
        let back = q.rel_derivative(dq);
        worst = worst.max((back - rel).norm());
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub vacuum_cells: usize,
}

/// Checks the time-step restriction `dt max(c1, c2) / dx <= 0.4`.
pub fn check_cfl(dt: f64, dx: f64, c: &HydroCoefficients) -> Result<()> {
    let cfl = dt * c.c1.abs().max(c.c2.abs()) / dx;
    if !(dt > 0.0) || cfl > CFL_MAX {
        return Err(invalid("dt", format!("CFL number {cfl} exceeds {CFL_MAX}")));
    }
    Ok(())
}

fn advance(base: &HydroField, k: &[&Rhs], weights: &[f64], dt: f64) -> Result<HydroField> {
    let n = base.len();
    let mut rho = base.rho.clone();
    let mut qbar = Vec::with_capacity(n);
    for i in 0..n {
        let mut q = base.qbar[i].quat();
        for (r, w) in k.iter().zip(weights) {
            rho[i] += dt * w * r.drho[i];
            q = q + r.dqbar[i] * (dt * w);
        }
        qbar.push(q.normalize()?);
    }
    if rho.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite { step: 0 });
    }
    Ok(HydroField { dx: base.dx, rho, qbar })
}

/// One Heun step.
pub fn step(field: &mut HydroField, c: &HydroCoefficients, dt: f64) -> Result<StepReport> {
    check_cfl(dt, field.dx, c)?;
    let k1 = rhs(field, c);
    let stage = advance(field, &[&k1], &[1.0], dt)?;
    let k2 = rhs(&stage, c);
    let mut next = advance(field, &[&k1, &k2], &[0.5, 0.5], dt)?;
    next.gauge_fix()?;
    *field = next;
    Ok(StepReport { vacuum_cells: k1.vacuum_cells.max(k2.vacuum_cells) })
}

/// Eighth-order centred first derivative of periodic samples.
fn d8(f: &[f64], dx: f64) -> Vec<f64> {
    const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let n = f.len() as isize;
    (0..n)
        .map(|i| {
            let at = |o: isize| f[(i + o).rem_euclid(n) as usize];
            W.iter().enumerate().map(|(k, w)| w * (at(k as isize + 1) - at(-(k as isize) - 1))).sum::<f64>() / dx
        })
        .collect()
}

/// The five terms of the relative attitude equation in quaternion form
/// (vectors `X_q`) and in rotation-matrix form (antisymmetric `X_Lambda`),
/// at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TermTable {
    pub x_q: [Vec3; 5],
    pub x_lambda: [Mat3; 5],
}

impl TermTable {
    /// `max_i | [X_q,i]x - X_Lambda,i |`.
    pub fn max_defect(&self) -> f64 {
        (0..5).map(|i| self.x_q[i].hat().max_abs_diff(&self.x_lambda[i])).fold(0.0, f64::max)
    }
}

/// Term tables at every point, with spatial derivatives of `qbar` and of
/// `Lambda = Phi(qbar)` taken independently by eighth-order differences.
/// The time-derivative terms come from the respective evolution equations.
pub fn term_tables(field: &HydroField, c: &HydroCoefficients) -> Vec<TermTable> {
    let n = field.len();
    let dx = field.dx;
    let g = d8(&field.rho, dx);
    let comp = |k: usize| -> Vec<f64> { field.qbar.iter().map(|q| q.quat().to_array()[k]).collect() };
    let dq: Vec<Vec<f64>> = (0..4).map(|k| d8(&comp(k), dx)).collect();
    let lam: Vec<Mat3> = field.qbar.iter().map(|q| q.to_matrix()).collect();
    let mut dlam = vec![Mat3::ZERO; n];
    for r in 0..3 {
        for s in 0..3 {
            let e: Vec<f64> = lam.iter().map(|m| m[(r, s)]).collect();
            for (i, v) in d8(&e, dx).into_iter().enumerate() {
                dlam[i][(r, s)] = v;
            }
        }
    }
    (0..n)
        .map(|i| {
            let rho = field.rho[i];
            let q = field.qbar[i];
            let grad = Vec3::new(g[i], 0.0, 0.0);
            let a = q.rel_derivative(Quat::from_array(std::array::from_fn(|k| dq[k][i])));
            let v = q.e1();
            let x_q2 = a * (2.0 * rho * v[0]);
            let x_q3 = v.cross(grad);
            let x_q4 = Vec3::unit(0) * (2.0 * rho * a.dot(v));
            let x_q5 = v * (2.0 * rho * a[0]);
            let x_q1 = rotation_rate(c, rho, g[i], q, a) * (-2.0 * rho);

            let l = lam[i];
            let lv = l.col(0);
            let rel = dlam[i] * l.transpose();
            let omega = rel.vex();
            let dmat = Mat3::from_cols(omega, Vec3::ZERO, Vec3::ZERO);
            let delta = dmat.trace();
            let r_x = (dmat - dmat.transpose()).vex();
            let x_l2 = rel * (rho * lv[0]);
            let x_l3 = lv.cross(grad).hat();
            let x_l4 = lv.cross(r_x).hat() * rho + x_l2;
            let x_l5 = lv.hat() * (rho * delta);
            let x_l1 = (x_l2 * (c.ct2 - c.ct4) + x_l3 * c.ct3 + x_l4 * c.ct4 + x_l5 * c.ct4) * -1.0;
            TermTable { x_q: [x_q1, x_q2, x_q3, x_q4, x_q5], x_lambda: [x_l1, x_l2, x_l3, x_l4, x_l5] }
        })
        .collect()
}

/// Initial conditions for [`PdeConfig`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PdeInitial {
    /// Constant density and attitude.
    Uniform {
        #[serde(default = "one")]
        rho: f64,
        #[serde(default)]
        q: UnitQuat,
    },
    /// `rho0 + amplitude exp(-(x - L/2)^2 / width^2)` with a constant
    /// attitude.
    Bump {
        #[serde(default = "one")]
        rho0: f64,
        amplitude: f64,
        width: f64,
        #[serde(default)]
        q: UnitQuat,
    },
    /// `qbar(x) = exp(2 pi turns x / L e_axis) q`; the body frame makes
    /// `2 turns` full rotations about the axis across the domain.
    Twist {
        #[serde(default = "one")]
        rho: f64,
        turns: i64,
        #[serde(default)]
        axis: usize,
        #[serde(default)]
        q: UnitQuat,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeConfig {
    pub n_cells: usize,
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    pub d: crate::equilibria::NoiseRatio,
    pub initial: PdeInitial,
    /// Steps between output frames; only the initial and final frames when
    /// absent.
    #[serde(default)]
    pub output_every: Option<u64>,
    #[serde(default = "default_nodes")]
    pub gci_nodes: usize,
}

fn default_nodes() -> usize {
    256
}

impl PdeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 3 {
            return Err(invalid("n_cells", "need at least 3 cells"));
        }
        if !(self.dx > 0.0) || !self.dx.is_finite() {
            return Err(invalid("dx", "must be positive"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(invalid("t_end", "must be non-negative"));
        }
        match self.initial {
            PdeInitial::Twist { axis, .. } if axis > 2 => Err(invalid("initial", "axis must be 0, 1 or 2")),
            PdeInitial::Bump { width, .. } if !(width > 0.0) => Err(invalid("initial", "width must be positive")),
            _ => Ok(()),
        }
    }

    pub fn initial_field(&self) -> Result<HydroField> {
        self.validate()?;
        let l = self.n_cells as f64 * self.dx;
        match self.initial {
            PdeInitial::Uniform { rho, q } => HydroField::from_fn(self.n_cells, self.dx, |_| rho, |_| q),
            PdeInitial::Bump { rho0, amplitude, width, q } => HydroField::from_fn(
                self.n_cells,
                self.dx,
                |x| rho0 + amplitude * (-((x - 0.5 * l) / width).powi(2)).exp(),
                |_| q,
            ),
            PdeInitial::Twist { rho, turns, axis, q } => HydroField::from_fn(
                self.n_cells,
                self.dx,
                |_| rho,
                |x| UnitQuat::exp(Vec3::unit(axis) * (2.0 * std::f64::consts::PI * turns as f64 * x / l)) * q,
            ),
        }
    }

    pub fn n_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }
}
