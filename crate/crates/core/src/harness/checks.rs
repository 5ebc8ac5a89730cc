//! Self-checks run from the CLI: the time-domain aliasing reference and the
//! exhaustive-support cross-check of the solver.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fusion::{assemble_matrix, bp_recover, oracle_recover, MeasurementVector, SolverOptions};
use crate::sampler::{clean_measurement, draw_mixing, fourier_coeffs, timedomain_reference};
use crate::seed::{self, tag};
use crate::spectrum::{draw_levels, draw_occupancy, ChannelProfile, LevelRange, NoiseModel, SpectrumConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliasingSummary {
    pub subbands: usize,
    pub seeds: usize,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
}

/// Compares the time-domain sampler against the aliasing model on `seeds`
/// random environments (seeds `0..seeds`).
pub fn aliasing_selftest(
    subbands: usize,
    pu_count: usize,
    oversample: usize,
    periods: usize,
    seeds: usize,
) -> Result<AliasingSummary> {
    let cfg = SpectrumConfig::with_subbands(subbands)?;
    let mut max_rel_error = 0.0f64;
    let mut total = 0.0;
    for s in 0..seeds as u64 {
        let occ = draw_occupancy(&cfg, pu_count, &mut seed::stream(s, &[tag::OCCUPANCY]))?;
        let levels = draw_levels(&occ, LevelRange::default(), &mut seed::stream(s, &[tag::LEVELS]))?;
        let seq = draw_mixing(1, subbands, seed::derive(s, &[tag::MIXING]))?;
        let check = timedomain_reference(
            &cfg,
            &levels,
            &seq,
            oversample,
            periods,
            seed::derive(s, &[tag::TONES]),
        )?;
        max_rel_error = max_rel_error.max(check.rel_error);
        total += check.rel_error;
    }
    Ok(AliasingSummary {
        subbands,
        seeds,
        max_rel_error,
        mean_rel_error: if seeds == 0 { 0.0 } else { total / seeds as f64 },
    })
}

/// Indices whose value exceeds `tol`.
pub fn support_of(x: &[f64], tol: f64) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, &v)| v > tol)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub subbands: usize,
    pub pu_count: usize,
    pub instances: usize,
    pub support_matches: usize,
    /// Largest `|bp - oracle|` over instances whose supports match.
    pub max_value_diff: f64,
}

/// Noiseless instances with `K = 8J` nodes and identity channel: the
/// solver at `eps = 0` against the oracle with `s_max = 2J`.
pub fn oracle_agreement(subbands: usize, pu_count: usize, seeds: usize) -> Result<OracleSummary> {
    let cfg = SpectrumConfig::with_subbands(subbands)?;
    let channel = ChannelProfile::identity(&cfg);
    let nodes = (8 * pu_count).max(1);
    let node_ids: Vec<u64> = (1..=nodes as u64).collect();
    let opts = SolverOptions {
        epsilon: Some(0.0),
        ..Default::default()
    };

    let mut support_matches = 0;
    let mut max_value_diff = 0.0f64;
    for s in 0..seeds as u64 {
        let occ = draw_occupancy(&cfg, pu_count, &mut seed::stream(s, &[tag::OCCUPANCY]))?;
        let levels = draw_levels(&occ, LevelRange::default(), &mut seed::stream(s, &[tag::LEVELS]))?;
        let mixing_seed = seed::derive(s, &[tag::MIXING]);
        let y = node_ids
            .iter()
            .map(|&id| {
                let c = fourier_coeffs(&draw_mixing(id, subbands, mixing_seed)?);
                clean_measurement(&c, &channel, &levels)
            })
            .collect::<Result<Vec<_>>>()?;
        let y = MeasurementVector::new(y);
        let a = assemble_matrix(&cfg, mixing_seed, &node_ids, &channel)?;

        let bp = bp_recover(&a, &y, NoiseModel::noiseless(), &opts)?;
        let oracle = oracle_recover(&a, &y, 2 * pu_count)?;
        let tol = 1e-6 * levels.as_slice().iter().cloned().fold(1.0, f64::max);
        if support_of(bp.x_hat(), tol) == support_of(oracle.x_hat(), tol) {
            support_matches += 1;
            let diff = bp
                .x_hat()
                .iter()
                .zip(oracle.x_hat())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            max_value_diff = max_value_diff.max(diff);
        }
    }
    Ok(OracleSummary {
        subbands,
        pu_count,
        instances: seeds,
        support_matches,
        max_value_diff,
    })
}
