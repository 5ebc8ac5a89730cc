use rand_distr::{Distribution, StandardNormal};

use super::config::{ExperimentConfig, MeasurementMode, NoiseSpec};
use crate::error::Result;
use crate::fusion::{assemble_matrix, bp_recover, decide, MeasurementVector, SolverReport};
use crate::metrics::{detection_counts, mse, TrialOutcome};
use crate::sampler::{
    clean_measurement, draw_mixing, fourier_coeffs, magnitude_averaged_measurement, SubbandTexture,
};
use crate::seed::{self, tag};
use crate::spectrum::{
    draw_channel, draw_levels, draw_occupancy, NoiseModel, SpectrumConfig,
};

/// Everything one sensing round produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_seed: u64,
    pub nodes: usize,
    pub truth: Vec<bool>,
    pub x_true: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub sigma_w: f64,
    pub outcome: TrialOutcome,
    pub report: SolverReport,
}

/// Trial `trial_index` of the campaign seeded by `cfg.master_seed`.
pub fn run_trial(
    cfg: &ExperimentConfig,
    spectrum: &SpectrumConfig,
    nodes: usize,
    trial_index: u64,
    lambda: f64,
) -> Result<TrialRecord> {
    run_trial_seeded(cfg, spectrum, nodes, seed::derive(cfg.master_seed, &[trial_index]), lambda)
}

/// Draws the environment, simulates `nodes` sensors, recovers at the fusion
/// center and scores the decision at threshold `lambda`.
///
/// Environment, chips and per-node noise depend only on `trial_seed`, so
/// the same seed at different node counts shares its first nodes.
pub fn run_trial_seeded(
    cfg: &ExperimentConfig,
    spectrum: &SpectrumConfig,
    nodes: usize,
    trial_seed: u64,
    lambda: f64,
) -> Result<TrialRecord> {
    let occ = draw_occupancy(spectrum, cfg.pu_count, &mut seed::stream(trial_seed, &[tag::OCCUPANCY]))?;
    let levels = draw_levels(&occ, cfg.levels, &mut seed::stream(trial_seed, &[tag::LEVELS]))?;
    let channel = draw_channel(spectrum, cfg.fading, &mut seed::stream(trial_seed, &[tag::CHANNEL]))?;

    let mixing_seed = seed::derive(trial_seed, &[tag::MIXING]);
    let node_ids: Vec<u64> = (1..=nodes as u64).collect();
    let texture = match cfg.measurement {
        MeasurementMode::Linear => None,
        MeasurementMode::MagnitudeAveraged => Some(SubbandTexture::draw(
            spectrum,
            cfg.texture_bins,
            &mut seed::stream(trial_seed, &[tag::TEXTURE]),
        )?),
    };

    let mut clean = Vec::with_capacity(nodes);
    for &id in &node_ids {
        let c = fourier_coeffs(&draw_mixing(id, spectrum.subband_count(), mixing_seed)?);
        let y = match &texture {
            None => clean_measurement(&c, &channel, &levels)?,
            Some(t) => magnitude_averaged_measurement(
                &c,
                &channel,
                &levels,
                t,
                NoiseModel::noiseless(),
                &mut seed::stream(trial_seed, &[tag::NOISE, id]),
            )?,
        };
        clean.push(y);
    }

    let sigma_w = match cfg.noise {
        NoiseSpec::SigmaW(s) => s,
        NoiseSpec::SnrDb(db) => {
            let power = clean.iter().map(|v| v * v).sum::<f64>() / nodes as f64;
            (power / 10f64.powf(db / 10.0)).sqrt()
        }
    };
    let noise = NoiseModel::new(sigma_w)?;
    let y: Vec<f64> = clean
        .iter()
        .zip(&node_ids)
        .map(|(c, &id)| {
            let z: f64 = StandardNormal.sample(&mut seed::stream(trial_seed, &[tag::NOISE, id]));
            c + sigma_w * z
        })
        .collect();

    let a = assemble_matrix(spectrum, mixing_seed, &node_ids, &channel)?;
    let recovered = bp_recover(&a, &MeasurementVector::new(y), noise, &cfg.solver)?;
    let (x_hat, report) = recovered.into_parts();

    let x_true = levels.into_vec();
    let truth = occ.flags().to_vec();
    let outcome = TrialOutcome {
        mse: mse(&x_hat, &x_true).ok(),
        counts: detection_counts(&decide(&x_hat, lambda)?, &truth)?,
    };
    Ok(TrialRecord {
        trial_seed,
        nodes,
        truth,
        x_true,
        x_hat,
        sigma_w,
        outcome,
        report,
    })
}
