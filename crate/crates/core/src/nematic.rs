//! Nematic averaging of quaternion clouds.
//!
//! The Q-tensor `(1/N) sum_i w_i (q_i (x) q_i - Id/4)` is invariant under
//! `q_i -> -q_i`; its leading eigenvector is the nematic mean.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::jacobi_eigen4;
use crate::quat::{Quat, UnitQuat};

/// Spectral gap, relative to the spectral radius, below which the leading
/// eigenvector is considered ambiguous.
pub const GAP_TOL: f64 = 1e-9;

/// Symmetric, trace-free 4x4 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QTensor(pub [[f64; 4]; 4]);

impl QTensor {
    pub const ZERO: QTensor = QTensor([[0.0; 4]; 4]);

    /// `(1/N) sum_i w_i (q_i (x) q_i - Id/4)`, with `N = qs.len()`.
    pub fn build(qs: &[UnitQuat], weights: Option<&[f64]>) -> Result<QTensor> {
        if qs.is_empty() {
            return Err(invalid("qs", "empty quaternion cloud"));
        }
        if let Some(w) = weights {
            if w.len() != qs.len() {
                return Err(invalid("weights", format!("expected {} weights, got {}", qs.len(), w.len())));
            }
            if w.iter().any(|x| !(*x >= 0.0)) {
                return Err(invalid("weights", "weights must be non-negative"));
            }
            if w.iter().all(|x| *x == 0.0) {
                return Err(invalid("weights", "all weights are zero"));
            }
        }
        let mut t = QTensor::ZERO;
        for (k, q) in qs.iter().enumerate() {
            t.accumulate(*q, weights.map_or(1.0, |w| w[k]));
        }
        Ok(t.scaled(1.0 / qs.len() as f64))
    }

    /// Adds `w (q (x) q - Id/4)`.
    pub fn accumulate(&mut self, q: UnitQuat, w: f64) {
        let a = q.quat().to_array();
        for i in 0..4 {
            for j in i..4 {
                let v = w * (a[i] * a[j] - if i == j { 0.25 } else { 0.0 });
                self.0[i][j] += v;
                if i != j {
                    self.0[j][i] += v;
                }
            }
        }
    }

    pub fn scaled(mut self, s: f64) -> QTensor {
        self.0.iter_mut().flatten().for_each(|x| *x *= s);
        self
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn apply(&self, q: Quat) -> Quat {
        let a = q.to_array();
        Quat::from_array(std::array::from_fn(|i| (0..4).map(|j| self.0[i][j] * a[j]).sum()))
    }

    /// Eigenvalues in decreasing order and matching unit eigenvectors.
    pub fn eigen(&self) -> ([f64; 4], [Quat; 4]) {
        let (vals, vecs) = jacobi_eigen4(&self.0);
        let v = std::array::from_fn(|k| Quat::from_array(std::array::from_fn(|r| vecs[r][k])));
        (vals, v)
    }

    /// `q . Q q`, the function maximized by the nematic mean.
    pub fn objective(&self, q: UnitQuat) -> f64 {
        q.quat().dot(self.apply(q.quat()))
    }
}

/// How to resolve a (near-)repeated leading eigenvalue.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    /// Report [`Error::DegenerateAverage`].
    #[default]
    Reject,
    /// Return the eigenvector chosen by the solver.
    Arbitrary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NematicMean {
    pub qbar: UnitQuat,
    pub lambda_max: f64,
    pub spectral_gap: f64,
}

/// Leading eigenvector of `q_tensor`, sign-aligned with `hint` when given
/// (`qbar . hint >= 0`), otherwise with a non-negative leading nonzero
/// component.
pub fn principal(q_tensor: &QTensor, hint: Option<UnitQuat>, tie: TieBreak) -> Result<NematicMean> {
    let (vals, vecs) = q_tensor.eigen();
    let gap = vals[0] - vals[1];
    if !gap.is_finite() {
        return Err(Error::DegenerateAverage { gap });
    }
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if gap <= GAP_TOL * scale && tie == TieBreak::Reject {
        return Err(Error::DegenerateAverage { gap });
    }
    let v = vecs[0];
    let s = match hint {
        Some(h) if v.dot(h.quat()) < 0.0 => -1.0,
        Some(_) => 1.0,
        None => {
            let lead = v.to_array().into_iter().find(|x| x.abs() > 1e-14).unwrap_or(1.0);
            lead.signum()
        }
    };
    let qbar = (v * s).normalize()?;
    Ok(NematicMean { qbar, lambda_max: vals[0], spectral_gap: gap })
}

/// Nematic alignment drift `(qbar (x) qbar - Id/4) q`.
pub fn drift(qbar: UnitQuat, q: UnitQuat) -> Quat {
    qbar.quat() * qbar.dot(q) - q.quat() * 0.25
}
