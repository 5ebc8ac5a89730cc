use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, OperatingRule};
use super::rates::{rate_table, RateTable};
use super::trial::run_trial_seeded;
use crate::error::Result;
use crate::metrics::{
    aggregate_pd, aggregate_pf, lambda_grid, mean_stderr, median, roc_sweep, RocCurve,
    TrialOutcome,
};
use crate::seed::{self, tag};
use crate::spectrum::SpectrumConfig;

/// One row of `trials.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial_seed: u64,
    pub nodes: usize,
    pub outcome: TrialOutcome,
    pub converged: bool,
}

/// Aggregates for one node count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KAggregate {
    pub nodes: usize,
    pub trials: usize,
    pub mean_mse: f64,
    pub mse_stderr: f64,
    pub pd: f64,
    pub pd_stderr: f64,
    pub pf: f64,
    pub pf_stderr: f64,
    pub nonconverged: usize,
}

/// Threshold grid plus the single operating threshold used for Pd/Pf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPlan {
    pub grid: Vec<f64>,
    pub operating: f64,
    /// Median recovered level over truly busy subbands in the pilot run.
    pub reference_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub thresholds: ThresholdPlan,
    pub per_k: Vec<KAggregate>,
    pub roc: Vec<(usize, RocCurve)>,
    pub rates: RateTable,
    pub trials: Vec<TrialSummary>,
}

/// Pilot run at the middle node count on seeds disjoint from the campaign.
///
/// The grid is log-spaced around the median recovered busy level. The
/// operating threshold comes from the configured rule applied to the pilot
/// ROC, unless the config pins one.
pub fn pilot_thresholds(cfg: &ExperimentConfig, spectrum: &SpectrumConfig) -> Result<ThresholdPlan> {
    let nodes = cfg.nodes[cfg.nodes.len() / 2];
    let pilot_master = seed::derive(cfg.master_seed, &[tag::PILOT]);
    let pilot_count = cfg.lambda.pilot_trials.max(1) as u64;
    let records = (0..pilot_count)
        .into_par_iter()
        .map(|i| run_trial_seeded(cfg, spectrum, nodes, seed::derive(pilot_master, &[i]), 0.0))
        .collect::<Result<Vec<_>>>()?;

    let busy_levels: Vec<f64> = records
        .iter()
        .flat_map(|r| r.x_hat.iter().zip(&r.truth).filter(|(_, &t)| t).map(|(&v, _)| v))
        .collect();
    let reference_level = median(&busy_levels).filter(|&m| m > 0.0).unwrap_or(1.0);
    let grid = lambda_grid(
        reference_level,
        cfg.lambda.points,
        cfg.lambda.low_factor,
        cfg.lambda.high_factor,
    )?;
    let operating = match cfg.lambda.operating {
        Some(v) => v,
        None => {
            let x: Vec<Vec<f64>> = records.iter().map(|r| r.x_hat.clone()).collect();
            let t: Vec<Vec<bool>> = records.iter().map(|r| r.truth.clone()).collect();
            let roc = roc_sweep(&x, &t, &grid, cfg.aggregation)?;
            let chosen = match cfg.lambda.rule {
                OperatingRule::FalseAlarmBudget { max_pf } => roc.at_false_alarm(max_pf),
                OperatingRule::Youden => roc.youden(),
            };
            // an unmet budget falls back to the top of the grid
            chosen.map_or(grid[grid.len() - 1], |p| p.lambda)
        }
    };
    Ok(ThresholdPlan {
        grid,
        operating,
        reference_level,
    })
}

/// Runs `cfg.trials` trials at every node count.
///
/// Trial `i` uses the same seed at every node count (paired design).
/// Trials run on the current rayon pool; results are reduced in trial order,
/// so reports are identical for any worker count.
pub fn sweep_k(cfg: &ExperimentConfig) -> Result<CampaignReport> {
    let spectrum = cfg.validate()?;
    let thresholds = pilot_thresholds(cfg, &spectrum)?;
    let rates = rate_table(cfg)?;

    let mut per_k = Vec::with_capacity(cfg.nodes.len());
    let mut roc = Vec::with_capacity(cfg.nodes.len());
    let mut trials = Vec::with_capacity(cfg.nodes.len() * cfg.trials);

    for &nodes in &cfg.nodes {
        let records = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|i| {
                run_trial_seeded(
                    cfg,
                    &spectrum,
                    nodes,
                    seed::derive(cfg.master_seed, &[i]),
                    thresholds.operating,
                )
            })
            .collect::<Result<Vec<_>>>()?;

        let mses: Vec<f64> = records.iter().filter_map(|r| r.outcome.mse).collect();
        let (mean_mse, mse_stderr) = mean_stderr(&mses);
        let counts: Vec<_> = records.iter().map(|r| r.outcome.counts).collect();
        let pd = aggregate_pd(&counts, cfg.aggregation);
        let pf = aggregate_pf(&counts, cfg.aggregation);
        per_k.push(KAggregate {
            nodes,
            trials: records.len(),
            mean_mse,
            mse_stderr,
            pd: pd.map_or(f64::NAN, |r| r.value),
            pd_stderr: pd.map_or(f64::NAN, |r| r.stderr),
            pf: pf.map_or(f64::NAN, |r| r.value),
            pf_stderr: pf.map_or(f64::NAN, |r| r.stderr),
            nonconverged: records.iter().filter(|r| !r.report.converged).count(),
        });

        let (x, t): (Vec<Vec<f64>>, Vec<Vec<bool>>) =
            records.iter().map(|r| (r.x_hat.clone(), r.truth.clone())).unzip();
        roc.push((nodes, roc_sweep(&x, &t, &thresholds.grid, cfg.aggregation)?));

        trials.extend(records.iter().map(|r| TrialSummary {
            trial_seed: r.trial_seed,
            nodes,
            outcome: r.outcome,
            converged: r.report.converged,
        }));
    }

    Ok(CampaignReport {
        thresholds,
        per_k,
        roc,
        rates,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_trial, NoiseSpec, SpectrumSpec};

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            spectrum: SpectrumSpec {
                total_bandwidth_hz: 31.0,
                subband_bandwidth_hz: 1.0,
            },
            pu_count: 2,
            nodes: vec![6, 10],
            noise: NoiseSpec::SnrDb(20.0),
            trials: 20,
            ..Default::default()
        }
    }

    #[test]
    fn single_trial_report_matches_run_trial() {
        let mut cfg = small();
        cfg.trials = 1;
        cfg.nodes = vec![10];
        let report = sweep_k(&cfg).unwrap();
        let s = cfg.validate().unwrap();
        let r = run_trial(&cfg, &s, 10, 0, report.thresholds.operating).unwrap();
        let row = report.per_k[0];
        assert_eq!(row.mean_mse, r.outcome.mse.unwrap());
        assert_eq!(Some(row.pd), r.outcome.counts.pd());
        assert_eq!(Some(row.pf), r.outcome.counts.pf());
        assert_eq!(report.trials[0].outcome, r.outcome);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = small();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sweep_k(&cfg)).unwrap();
        let b = four.install(|| sweep_k(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fixed_operating_threshold_is_used() {
        let mut cfg = small();
        cfg.lambda.operating = Some(0.123);
        let report = sweep_k(&cfg).unwrap();
        assert_eq!(report.thresholds.operating, 0.123);
        assert_eq!(report.roc.len(), 2);
        assert_eq!(report.trials.len(), 40);
    }
}
