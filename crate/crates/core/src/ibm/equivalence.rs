//! Matched quaternion and rotation-matrix runs compared in law.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Representation, SimConfig, Simulation};
use crate::equilibria::{i_squared, NoiseRatio};
use crate::error::{invalid, Result};
use crate::nematic::{principal, QTensor, TieBreak};
use crate::quat::UnitQuat;
use crate::stats::ks_two_sample;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConfig {
    /// Shared model parameters; `representation` and `seed` are overridden.
    pub sim: SimConfig,
    pub n_seeds: u64,
    /// Time discarded before sampling.
    pub burn_in: f64,
    /// Time between snapshots.
    pub sample_every: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepresentationSummary {
    pub n_samples: usize,
    pub mean: f64,
    /// Standard error of the mean from the spread of per-seed means.
    pub std_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub d: f64,
    pub i_squared: f64,
    pub quaternion: RepresentationSummary,
    pub matrix: RepresentationSummary,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

/// `(q_i . qbar_{-i})^2` for every particle, where `qbar_{-i}` is the
/// nematic mean of all other particles.
pub fn leave_one_out_alignment(qs: &[UnitQuat]) -> Result<Vec<f64>> {
    let full = QTensor::build(qs, None)?.scaled(qs.len() as f64);
    qs.iter()
        .map(|&q| {
            let mut t = full;
            t.accumulate(q, -1.0);
            Ok(q.dot(principal(&t, None, TieBreak::Arbitrary)?.qbar).powi(2))
        })
        .collect()
}

/// Leave-one-out alignment samples at every snapshot after burn-in, for
/// one seed and representation.
pub fn alignment_samples(cfg: &EquivalenceConfig, rep: Representation, seed: u64) -> Result<Vec<f64>> {
    let mut sim_cfg = cfg.sim.clone();
    sim_cfg.representation = rep;
    sim_cfg.seed = seed;
    let dt = sim_cfg.dt;
    let burn = (cfg.burn_in / dt).round() as u64;
    let every = ((cfg.sample_every / dt).round() as u64).max(1);
    let total = sim_cfg.n_steps();
    let mut sim = Simulation::new(sim_cfg)?;
    let mut out = Vec::new();
    while sim.step_index < total {
        sim.step()?;
        if sim.step_index >= burn && (sim.step_index - burn) % every == 0 {
            out.extend(leave_one_out_alignment(&sim.attitudes.quaternions())?);
        }
    }
    Ok(out)
}

fn summarize(per_seed: &[Vec<f64>]) -> RepresentationSummary {
    let means: Vec<f64> = per_seed.iter().map(|s| s.iter().sum::<f64>() / s.len() as f64).collect();
    let k = means.len() as f64;
    let mean = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    RepresentationSummary { n_samples: per_seed.iter().map(Vec::len).sum(), mean, std_err: (var / k).sqrt() }
}

pub fn equivalence_in_law(cfg: &EquivalenceConfig) -> Result<EquivalenceReport> {
    if cfg.n_seeds < 2 {
        return Err(invalid("n_seeds", "need at least two seeds"));
    }
    if !(cfg.sample_every > 0.0) {
        return Err(invalid("sample_every", "must be positive"));
    }
    if !(cfg.burn_in >= 0.0) || cfg.burn_in >= cfg.sim.t_end {
        return Err(invalid("burn_in", "must lie in [0, t_end)"));
    }
    if !(cfg.sim.nu > 0.0) {
        return Err(invalid("nu", "must be positive to define a noise ratio"));
    }
    let d = NoiseRatio::new(cfg.sim.diffusion / cfg.sim.nu)?;
    let jobs: Vec<(Representation, u64)> = [Representation::Quaternion, Representation::Matrix]
        .into_iter()
        .flat_map(|r| (0..cfg.n_seeds).map(move |s| (r, s)))
        .collect();
    let results: Vec<Result<Vec<f64>>> =
        jobs.par_iter().map(|&(rep, s)| alignment_samples(cfg, rep, cfg.sim.seed.wrapping_add(s))).collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let (quat, mat) = results.split_at(cfg.n_seeds as usize);
    let pooled_q: Vec<f64> = quat.concat();
    let pooled_m: Vec<f64> = mat.concat();
    let ks = ks_two_sample(&pooled_q, &pooled_m);
    Ok(EquivalenceReport {
        d: d.get(),
        i_squared: i_squared(d),
        quaternion: summarize(quat),
        matrix: summarize(mat),
        ks_statistic: ks.statistic,
        ks_p_value: ks.p_value,
    })
}
