//! Recovery error, detection/false-alarm rates and ROC sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::fusion::DecisionVector;

/// Normalized l2 error `||x_hat - x|| / ||x||` of one trial.
pub fn mse(x_hat: &[f64], x_true: &[f64]) -> Result<f64> {
    check_len("recovered levels", x_true.len(), x_hat.len())?;
    let denom = x_true.iter().map(|v| v * v).sum::<f64>().sqrt();
    if denom == 0.0 {
        return Err(Error::InvalidParameter(
            "normalized error undefined for an empty spectrum".into(),
        ));
    }
    let num = x_hat
        .iter()
        .zip(x_true)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DetectionCounts {
    pub detect_hits: usize,
    pub busy_count: usize,
    pub false_hits: usize,
    pub idle_count: usize,
}

impl DetectionCounts {
    /// `None` when no subband is busy.
    pub fn pd(&self) -> Option<f64> {
        (self.busy_count > 0).then(|| self.detect_hits as f64 / self.busy_count as f64)
    }

    /// `None` when no subband is idle.
    pub fn pf(&self) -> Option<f64> {
        (self.idle_count > 0).then(|| self.false_hits as f64 / self.idle_count as f64)
    }
}

/// Per-trial record: normalized error (absent for an empty spectrum) and
/// detection counts at the operating threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub mse: Option<f64>,
    pub counts: DetectionCounts,
}

pub fn detection_counts(d_hat: &DecisionVector, d_true: &[bool]) -> Result<DetectionCounts> {
    count_flags(d_hat.flags(), d_true)
}

pub(crate) fn count_flags(d_hat: &[bool], d_true: &[bool]) -> Result<DetectionCounts> {
    check_len("decision vector", d_true.len(), d_hat.len())?;
    let mut c = DetectionCounts::default();
    for (&est, &truth) in d_hat.iter().zip(d_true) {
        if truth {
            c.busy_count += 1;
            c.detect_hits += est as usize;
        } else {
            c.idle_count += 1;
            c.false_hits += est as usize;
        }
    }
    Ok(c)
}

/// How the expectation over trials is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Mean of per-trial ratios.
    #[default]
    PerTrial,
    /// Ratio of summed counts.
    Pooled,
}

/// Mean and standard error of a rate; trials whose denominator is zero are
/// skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub value: f64,
    pub stderr: f64,
    pub trials: usize,
}

pub fn aggregate_pd(counts: &[DetectionCounts], mode: Aggregation) -> Option<RateEstimate> {
    aggregate(counts, mode, |c| (c.detect_hits, c.busy_count))
}

pub fn aggregate_pf(counts: &[DetectionCounts], mode: Aggregation) -> Option<RateEstimate> {
    aggregate(counts, mode, |c| (c.false_hits, c.idle_count))
}

fn aggregate(
    counts: &[DetectionCounts],
    mode: Aggregation,
    pick: impl Fn(&DetectionCounts) -> (usize, usize),
) -> Option<RateEstimate> {
    let pairs: Vec<(usize, usize)> = counts.iter().map(&pick).filter(|p| p.1 > 0).collect();
    if pairs.is_empty() {
        return None;
    }
    let ratios: Vec<f64> = pairs.iter().map(|&(h, n)| h as f64 / n as f64).collect();
    let (mean, stderr) = mean_stderr(&ratios);
    let value = match mode {
        Aggregation::PerTrial => mean,
        Aggregation::Pooled => {
            let hits: usize = pairs.iter().map(|p| p.0).sum();
            let total: usize = pairs.iter().map(|p| p.1).sum();
            hits as f64 / total as f64
        }
    };
    Some(RateEstimate {
        value,
        stderr,
        trials: pairs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub lambda: f64,
    pub pf: f64,
    pub pd: f64,
}

/// Operating points sorted by ascending threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Best point reaching `pd >= min_pd` with `pf <= max_pf`, if any.
    pub fn corner(&self, min_pd: f64, max_pf: f64) -> Option<RocPoint> {
        self.points
            .iter()
            .filter(|p| p.pd >= min_pd && p.pf <= max_pf)
            .max_by(|a, b| (a.pd - a.pf).total_cmp(&(b.pd - b.pf)))
            .copied()
    }

    /// Lowest-threshold point whose false-alarm rate is within `max_pf`.
    pub fn at_false_alarm(&self, max_pf: f64) -> Option<RocPoint> {
        self.points.iter().find(|p| p.pf <= max_pf).copied()
    }

    /// Point maximizing `pd - pf`; the lowest threshold wins ties.
    pub fn youden(&self) -> Option<RocPoint> {
        let mut best: Option<RocPoint> = None;
        for p in &self.points {
            if best.is_none_or(|b| p.pd - p.pf > b.pd - b.pf) {
                best = Some(*p);
            }
        }
        best
    }
}

/// Threshold sweep over many trials.
///
/// Each trial's busy and idle levels are sorted once and then walked with
/// the ascending grid, so a trial costs `O(L log L + grid)`.
pub fn roc_sweep(
    x_hat_trials: &[Vec<f64>],
    truth_trials: &[Vec<bool>],
    lambda_grid: &[f64],
    mode: Aggregation,
) -> Result<RocCurve> {
    if x_hat_trials.is_empty() {
        return Err(Error::InvalidParameter("ROC sweep needs at least one trial".into()));
    }
    check_len("truth trials", x_hat_trials.len(), truth_trials.len())?;
    if lambda_grid.is_empty() {
        return Err(Error::InvalidParameter("threshold grid is empty".into()));
    }
    if lambda_grid.windows(2).any(|w| w[0] > w[1]) || lambda_grid.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("threshold grid must be sorted ascending".into()));
    }

    let mut per_trial: Vec<Vec<DetectionCounts>> = Vec::with_capacity(x_hat_trials.len());
    for (x_hat, truth) in x_hat_trials.iter().zip(truth_trials) {
        check_len("truth flags", x_hat.len(), truth.len())?;
        let mut busy: Vec<f64> = Vec::new();
        let mut idle: Vec<f64> = Vec::new();
        for (&v, &t) in x_hat.iter().zip(truth) {
            if t {
                busy.push(v);
            } else {
                idle.push(v);
            }
        }
        busy.sort_by(f64::total_cmp);
        idle.sort_by(f64::total_cmp);
        let (mut bi, mut ii) = (0, 0);
        let counts = lambda_grid
            .iter()
            .map(|&lam| {
                while bi < busy.len() && busy[bi] <= lam {
                    bi += 1;
                }
                while ii < idle.len() && idle[ii] <= lam {
                    ii += 1;
                }
                DetectionCounts {
                    detect_hits: busy.len() - bi,
                    busy_count: busy.len(),
                    false_hits: idle.len() - ii,
                    idle_count: idle.len(),
                }
            })
            .collect();
        per_trial.push(counts);
    }

    let points = lambda_grid
        .iter()
        .enumerate()
        .map(|(g, &lambda)| {
            let column: Vec<DetectionCounts> = per_trial.iter().map(|t| t[g]).collect();
            RocPoint {
                lambda,
                pf: aggregate_pf(&column, mode).map_or(0.0, |r| r.value),
                pd: aggregate_pd(&column, mode).map_or(0.0, |r| r.value),
            }
        })
        .collect();
    Ok(RocCurve { points })
}

/// `points` thresholds log-spaced over `[low, high] * reference`.
pub fn lambda_grid(reference: f64, points: usize, low_factor: f64, high_factor: f64) -> Result<Vec<f64>> {
    if !(reference > 0.0 && low_factor > 0.0 && high_factor >= low_factor && points >= 1) {
        return Err(Error::InvalidParameter(format!(
            "bad threshold grid: reference {reference}, factors [{low_factor}, {high_factor}], {points} points"
        )));
    }
    if points == 1 {
        return Ok(vec![reference * low_factor]);
    }
    let (a, b) = (low_factor.ln(), high_factor.ln());
    Ok((0..points)
        .map(|i| reference * (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Pairwise summation; fixed association order for a given length.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        v.iter().sum()
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = pairwise_sum(v) / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    Some(if s.len().is_multiple_of(2) {
        0.5 * (s[mid - 1] + s[mid])
    } else {
        s[mid]
    })
}
