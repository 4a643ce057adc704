//! Generalized collision invariants.
//!
//! For `beta` orthogonal to `qbar` the invariant is
//! `psi(q) = (beta . q) h(qbar . q)`, where the odd profile `h` is the bounded
//! solution on `(-1, 1)` of
//!
//! ```text
//! (1 - r^2) h'' + (4 (1 - r^2) / d - 5) r h' - (4 r^2 / d + 3) h = r,
//! ```
//!
//! i.e. the divergence-form equation
//! `[(1-r^2)^{5/2} e^{2r^2/d} h']' - (1-r^2)^{3/2} e^{2r^2/d} (4r^2/d + 3) h
//!  = r (1-r^2)^{3/2} e^{2r^2/d}` divided by its weight.
//!
//! The profile is computed by Chebyshev collocation on `[0, 1]` with
//! `h(0) = 0` and the regularity condition at `r = 1` (the equation itself,
//! whose second-order term vanishes there), and then reflected.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::equilibria::{EquilibriumDist, NoiseRatio};
use crate::error::{invalid, Result};
use crate::linalg::lu_solve;
use crate::quat::{Quat, UnitQuat};

/// Version tag stored with cached tables.
pub const TABLE_VERSION: u32 = 1;

pub const MIN_NODES: usize = 64;

/// Tabulated profile `h` on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GciTable {
    pub d: NoiseRatio,
    pub version: u32,
    /// Increasing nodes, symmetric about zero.
    pub grid: Vec<f64>,
    pub h: Vec<f64>,
    pub hprime: Vec<f64>,
    /// Largest weight-normalized residual at interior nodes, measured with
    /// finite differences independent of the solver.
    pub residual_max: f64,
}

/// First and second barycentric differentiation matrices (row-major) for
/// the given nodes and barycentric weights.
fn diff_matrices(x: &[f64], w: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let mut d1 = vec![0.0; n * n];
    let mut d2 = vec![0.0; n * n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (x[i] - x[j]);
                d1[i * n + j] = v;
                diag -= v;
            }
        }
        d1[i * n + i] = diag;
        let mut diag2 = 0.0;
        for j in 0..n {
            if i != j {
                let v = 2.0 * d1[i * n + j] * (diag - 1.0 / (x[i] - x[j]));
                d2[i * n + j] = v;
                diag2 -= v;
            }
        }
        d2[i * n + i] = diag2;
    }
    (d1, d2)
}

/// Coefficients `(a2, a1, a0)` of `a2 h'' + a1 h' + a0 h = r`.
pub fn ode_coefficients(r: f64, d: f64) -> (f64, f64, f64) {
    let s = 1.0 - r * r;
    (s, (4.0 * s / d - 5.0) * r, -(4.0 * r * r / d + 3.0))
}

/// Solves for `h` at `n_nodes` Chebyshev points in `(0, 1]`.
///
/// The unknowns are the values at the positive points; odd parity ties the
/// value at `-r` to `-h(r)` and pins `h(0) = 0`.
pub fn solve_h(d: NoiseRatio, n_nodes: usize) -> Result<GciTable> {
    if n_nodes < MIN_NODES {
        return Err(invalid("n_nodes", format!("need at least {MIN_NODES} nodes, got {n_nodes}")));
    }
    let dd = d.get();
    let nf = 2 * n_nodes;
    let n = nf + 1;
    let mid = n_nodes;
    let mut x: Vec<f64> = (0..n).map(|j| -(j as f64 * PI / nf as f64).cos()).collect();
    x[mid] = 0.0;
    for j in 0..mid {
        x[j] = -x[nf - j];
    }
    let bw: Vec<f64> = (0..n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n - 1 {
                0.5 * s
            } else {
                s
            }
        })
        .collect();
    let (d1, d2) = diff_matrices(&x, &bw);
    let m = n_nodes;
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    for (ri, i) in ((mid + 1)..n).enumerate() {
        let (c2, c1, c0) = ode_coefficients(x[i], dd);
        for (rj, j) in ((mid + 1)..n).enumerate() {
            let jm = nf - j;
            let l = |k: usize| c2 * d2[i * n + k] + c1 * d1[i * n + k];
            a[ri * m + rj] = l(j) - l(jm);
        }
        a[ri * m + ri] += c0;
        b[ri] = x[i];
    }
    let half = lu_solve(a, b, m)?;
    let mut h = vec![0.0; n];
    for (k, v) in half.iter().enumerate() {
        h[mid + 1 + k] = *v;
        h[mid - 1 - k] = -*v;
    }
    let mut hprime: Vec<f64> = (0..n).map(|i| (0..n).map(|j| d1[i * n + j] * h[j]).sum()).collect();
    for j in 0..mid {
        hprime[j] = hprime[nf - j];
    }
    let mut table = GciTable { d, version: TABLE_VERSION, grid: x, h, hprime, residual_max: 0.0 };
    table.residual_max = table.fd_residuals().into_iter().map(|(_, e)| e.abs()).fold(0.0, f64::max);
    Ok(table)
}

/// Finite-difference weights for derivatives `0..=m` at `z` from nodes `x`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

impl GciTable {
    pub fn n_nodes(&self) -> usize {
        (self.grid.len() - 1) / 2
    }

    fn locate(&self, r: f64) -> usize {
        let g = &self.grid;
        match g.binary_search_by(|x| x.total_cmp(&r)) {
            Ok(i) => i.min(g.len() - 2),
            Err(i) => i.saturating_sub(1).min(g.len() - 2),
        }
    }

    /// Cubic Hermite interpolation of `(h, h')` at `r` in `[-1, 1]`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let r = r.clamp(-1.0, 1.0);
        let i = self.locate(r);
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let dx = x1 - x0;
        let t = (r - x0) / dx;
        let (y0, y1) = (self.h[i], self.h[i + 1]);
        let (m0, m1) = (self.hprime[i] * dx, self.hprime[i + 1] * dx);
        let t2 = t * t;
        let t3 = t2 * t;
        let h = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let dh = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1) / dx;
        (h, dh)
    }

    pub fn h(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    pub fn hprime(&self, r: f64) -> f64 {
        self.eval(r).1
    }

    /// `h(r) / r`, continuous through `r = 0`.
    pub fn h_over_r(&self, r: f64) -> f64 {
        if r.abs() < 1e-8 {
            self.hprime(0.0)
        } else {
            self.h(r) / r
        }
    }

    /// Weight-normalized residual of the profile equation at each interior
    /// node `r` in `(0, 1)`, from 7-point finite differences of the nodal
    /// values only.
    pub fn fd_residuals(&self) -> Vec<(f64, f64)> {
        let n = self.grid.len();
        let mid = (n - 1) / 2;
        let d = self.d.get();
        let width = 7;
        let mut out = Vec::new();
        for i in (mid + 1)..(n - 1) {
            let start = i.saturating_sub(width / 2).min(n - width);
            let xs = &self.grid[start..start + width];
            let w = fornberg_weights(self.grid[i], xs, 2);
            let hv = &self.h[start..start + width];
            let d1: f64 = w[1].iter().zip(hv).map(|(a, b)| a * b).sum();
            let d2: f64 = w[2].iter().zip(hv).map(|(a, b)| a * b).sum();
            let r = self.grid[i];
            let (a2, a1, a0) = ode_coefficients(r, d);
            out.push((r, a2 * d2 + a1 * d1 + a0 * self.h[i] - r));
        }
        out
    }

    /// Matrix-side profile `k(theta) = 4 h(cos(theta/2)) / cos(theta/2)`.
    pub fn k(&self, theta: f64) -> f64 {
        4.0 * self.h_over_r((0.5 * theta).cos())
    }

    /// Residual, divided by `m(theta)`, of the matrix-side equation
    /// `(1/s^2) d/dt(s^2 m d/dt(sin(t) k)) - m sin(t) k / (2 s^2) = sin(t) m`,
    /// with `s = sin(theta/2)`, by nested 5-point central differences.
    pub fn k_residual(&self, theta: f64, step: f64) -> f64 {
        let d = self.d.get();
        let m = |t: f64| ((0.5 + t.cos()) / d).exp();
        let g = |t: f64| t.sin() * self.k(t);
        let deriv = |f: &dyn Fn(f64) -> f64, t: f64| {
            (f(t - 2.0 * step) - 8.0 * f(t - step) + 8.0 * f(t + step) - f(t + 2.0 * step)) / (12.0 * step)
        };
        let inner = |t: f64| (0.5 * t).sin().powi(2) * m(t) * deriv(&g, t);
        let s2 = (0.5 * theta).sin().powi(2);
        let lhs = deriv(&inner, theta) / s2 - m(theta) * theta.sin() * self.k(theta) / (2.0 * s2);
        (lhs - theta.sin() * m(theta)) / m(theta)
    }
}

/// `psi(q) = (beta . q) h(qbar . q)` for a fixed mean and direction.
#[derive(Clone, Debug)]
pub struct GciFunction<'a> {
    pub table: &'a GciTable,
    pub qbar: UnitQuat,
    pub beta: Quat,
}

impl<'a> GciFunction<'a> {
    pub fn new(table: &'a GciTable, qbar: UnitQuat, beta: Quat) -> Result<Self> {
        if beta.dot(qbar.quat()).abs() > 1e-12 {
            return Err(invalid("beta", "must be orthogonal to qbar"));
        }
        Ok(GciFunction { table, qbar, beta })
    }

    pub fn eval(&self, q: UnitQuat) -> f64 {
        self.beta.dot(q.quat()) * self.table.h(self.qbar.dot(q))
    }

    /// Tangential gradient of `psi` on the sphere at `q`.
    pub fn grad(&self, q: UnitQuat) -> Quat {
        let (h, dh) = self.table.eval(self.qbar.dot(q));
        let ambient = self.beta * h + self.qbar.quat() * (self.beta.dot(q.quat()) * dh);
        q.tangent_project(ambient)
    }
}

/// Polynomial test function on the sphere: `c * prod_k (a_k . q)`.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub name: String,
    pub factors: Vec<Quat>,
}

impl TestFunction {
    pub fn eval(&self, q: Quat) -> f64 {
        self.factors.iter().map(|a| a.dot(q)).product()
    }

    /// Tangential gradient at a unit `q`.
    pub fn grad(&self, q: UnitQuat) -> Quat {
        let vals: Vec<f64> = self.factors.iter().map(|a| a.dot(q.quat())).collect();
        let mut g = Quat::ZERO;
        for (k, a) in self.factors.iter().enumerate() {
            let others: f64 = vals.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, v)| v).product();
            g = g + *a * others;
        }
        q.tangent_project(g)
    }
}

/// Standard set of ten even test functions built from `qbar` and `beta`.
pub fn standard_test_functions(qbar: UnitQuat, beta: Quat, gamma: Quat) -> Vec<TestFunction> {
    let qb = qbar.quat();
    let e = |i: usize| Quat::from_array(std::array::from_fn(|k| if k == i { 1.0 } else { 0.0 }));
    let tf = |name: &str, factors: Vec<Quat>| TestFunction { name: name.to_string(), factors };
    vec![
        tf("1", vec![]),
        tf("(beta.q)(qbar.q)", vec![beta, qb]),
        tf("(beta.q)(qbar.q)^3", vec![beta, qb, qb, qb]),
        tf("(gamma.q)(qbar.q)", vec![gamma, qb]),
        tf("(beta.q)^2", vec![beta, beta]),
        tf("(qbar.q)^2", vec![qb, qb]),
        tf("(beta.q)(gamma.q)", vec![beta, gamma]),
        tf("(e0.q)(e1.q)", vec![e(0), e(1)]),
        tf("(e2.q)(e3.q)(qbar.q)^2", vec![e(2), e(3), qb, qb]),
        tf("(beta.q)(qbar.q)(gamma.q)^2", vec![beta, qb, gamma, gamma]),
    ]
}

/// Signed defect of the weak formulation
/// `int M grad psi . grad phi = -beta . int q (q . qbar) phi M`
/// estimated from equilibrium samples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeakDefect {
    pub name: String,
    pub defect: f64,
    pub std_err: f64,
}

pub fn weak_residual<R: Rng + ?Sized>(
    table: &GciTable,
    qbar: UnitQuat,
    beta: Quat,
    tests: &[TestFunction],
    n_mc: usize,
    rng: &mut R,
) -> Result<Vec<WeakDefect>> {
    let psi = GciFunction::new(table, qbar, beta)?;
    let dist = EquilibriumDist::new(table.d, qbar);
    let samples = dist.sample(n_mc, rng);
    Ok(tests
        .iter()
        .map(|phi| {
            let vals: Vec<f64> = samples
                .iter()
                .map(|&q| {
                    let lhs = psi.grad(q).dot(phi.grad(q));
                    let rhs = -beta.dot(q.quat()) * qbar.dot(q) * phi.eval(q.quat());
                    lhs - rhs
                })
                .collect();
            let est = crate::quat::McEstimate::from_samples(&vals);
            WeakDefect { name: phi.name.clone(), defect: est.value, std_err: est.std_err }
        })
        .collect())
}
