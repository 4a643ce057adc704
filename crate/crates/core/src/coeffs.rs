//! Coefficients of the macroscopic (hydrodynamic) equations.
//!
//! All coefficients are weighted averages over the rotation angle
//! `theta in [0, pi]`, `<g>_w = int g w / int w`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::equilibria::NoiseRatio;
use crate::error::{invalid, Result};
use crate::gci::GciTable;
use crate::quadrature::GaussLegendre;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HydroCoefficients {
    pub d: NoiseRatio,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Rotation-matrix formulation.
    pub ct2: f64,
    pub ct3: f64,
    pub ct4: f64,
    /// Largest change of any coefficient when the angular quadrature is
    /// refined by a factor of two.
    pub quad_err: f64,
}

/// A composite Gauss-Legendre rule on `[0, pi]` refined near `theta = 0`
/// for small noise ratios.
fn theta_points(d: f64, refine: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(16);
    let cut = if d < 0.5 { (40.0 * d).sqrt().min(PI) } else { PI };
    let mut pts = rule.composite_points(0.0, cut, 128 * refine);
    if cut < PI {
        pts.extend(rule.composite_points(cut, PI, 32 * refine));
    }
    pts
}

/// `m(theta) / m(0)`.
fn m_rel(theta: f64, d: f64) -> f64 {
    ((theta.cos() - 1.0) / d).exp()
}

/// Weights whose integral is below this magnitude are rejected.
pub const DEGENERATE_WEIGHT: f64 = 1e-14;

/// `<g>_w` on `[0, pi]`, with the quadrature refined near zero for small
/// `d`. The weight may be signed.
pub fn bracket<G, W>(g: G, w: W, d: NoiseRatio) -> Result<f64>
where
    G: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    let pts = theta_points(d.get(), 1);
    let total: f64 = pts.iter().map(|&(t, q)| w(t) * q).sum();
    if !(total.abs() >= DEGENERATE_WEIGHT) {
        return Err(invalid("w", format!("weight integrates to {total}")));
    }
    Ok(bracket_on(&pts, g, w))
}

fn bracket_on<G, W>(pts: &[(f64, f64)], g: G, w: W) -> f64
where
    G: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    let (mut num, mut den) = (0.0, 0.0);
    for &(t, q) in pts {
        let wt = w(t) * q;
        num += g(t) * wt;
        den += wt;
    }
    num / den
}

/// Mean-velocity coefficient `c1 = (2/3) <1/2 + cos theta>_{m sin^2(theta/2)}`.
pub fn c1(d: NoiseRatio) -> f64 {
    let dd = d.get();
    let w = |t: f64| m_rel(t, dd) * (0.5 * t).sin().powi(2);
    (2.0 / 3.0) * bracket_on(&theta_points(dd, 2), |t| 0.5 + t.cos(), w)
}

fn compute_on(d: NoiseRatio, table: &GciTable, pts: &[(f64, f64)]) -> [f64; 6] {
    let dd = d.get();
    let ms2 = |t: f64| m_rel(t, dd) * (0.5 * t).sin().powi(2);
    let c1 = (2.0 / 3.0) * bracket_on(pts, |t| 0.5 + t.cos(), ms2);
    let w = |t: f64| {
        let c = (0.5 * t).cos();
        m_rel(t, dd) * (0.5 * t).sin().powi(4) * table.h(c) * c
    };
    let c2 = 0.2 * bracket_on(pts, |t| 1.0 + 4.0 * t.cos(), w);
    let c4 = 0.2 * bracket_on(pts, |t| 1.0 - t.cos(), w);
    let mt = |t: f64| t.sin().powi(2) * m_rel(t, dd) * table.k(t) * (0.5 * t).sin().powi(2);
    let ct2 = 0.2 * bracket_on(pts, |t| 2.0 + 3.0 * t.cos(), mt);
    let ct4 = 0.2 * bracket_on(pts, |t| 1.0 - t.cos(), mt);
    [c1, c2, c4, ct2, ct4, 0.0]
}

/// All hydrodynamic coefficients for the table's noise ratio.
pub fn compute(d: NoiseRatio, table: &GciTable) -> Result<HydroCoefficients> {
    if table.d != d {
        return Err(invalid("table", format!("table built for d = {}, requested d = {}", table.d.get(), d.get())));
    }
    let coarse = compute_on(d, table, &theta_points(d.get(), 1));
    let fine = compute_on(d, table, &theta_points(d.get(), 2));
    let quad_err = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let [c1, c2, c4, ct2, ct4, _] = fine;
    Ok(HydroCoefficients { d, c1, c2, c3: d.get() / 2.0, c4, ct2, ct3: d.get(), ct4, quad_err })
}

/// Intermediate constants of the closure computation, all of the form
/// `int_{H1} f(q) h(qbar . q) (qbar . q) M(q) dq`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProofConstants {
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl ProofConstants {
    /// `(C3 + C4) / C2`.
    pub fn hydro_c2(&self) -> f64 {
        (self.c3 + self.c4) / self.c2
    }

    /// `C4 / C2`.
    pub fn hydro_c4(&self) -> f64 {
        self.c4 / self.c2
    }
}

/// `int_{S^2} f(n) dn` by Gauss-Legendre in `cos(polar)` and the
/// trapezoidal rule in azimuth.
fn sphere_integral<F: Fn([f64; 3]) -> f64>(f: F) -> f64 {
    let rule = GaussLegendre::new(24);
    let n_phi = 48;
    let mut s = 0.0;
    for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
        let rho = (1.0 - u * u).sqrt();
        for k in 0..n_phi {
            let phi = 2.0 * PI * k as f64 / n_phi as f64;
            s += wu * f([rho * phi.cos(), rho * phi.sin(), *u]);
        }
    }
    s * 2.0 * PI / n_phi as f64
}

/// `C2`, `C3`, `C5` from angular brackets; `C4` from the separated
/// spherical moment `int (n1^4 - n1^2 n2^2) dn`.
pub fn proof_constants(d: NoiseRatio, table: &GciTable) -> ProofConstants {
    let dd = d.get();
    let pts = theta_points(dd, 2);
    let ms2 = |t: f64| m_rel(t, dd) * (0.5 * t).sin().powi(2);
    let hc = |t: f64| {
        let c = (0.5 * t).cos();
        c * table.h(c)
    };
    let s = |t: f64| (0.5 * t).sin();
    let c2 = bracket_on(&pts, |t| s(t).powi(2) * hc(t), ms2) / 3.0;
    let c3 = bracket_on(&pts, |t| (2.0 * (0.5 * t).cos().powi(2) - 1.0) * s(t).powi(2) * hc(t), ms2) / 3.0;
    let c5 = bracket_on(&pts, |t| s(t).powi(4) * hc(t), ms2) / 15.0;
    let moment = sphere_integral(|n| n[0].powi(4) - n[0].powi(2) * n[1].powi(2)) / (4.0 * PI);
    let c4 = moment * bracket_on(&pts, |t| s(t).powi(4) * hc(t), ms2);
    ProofConstants { c2, c3, c4, c5 }
}
