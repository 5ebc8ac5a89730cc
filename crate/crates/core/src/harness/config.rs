use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::SolverOptions;
use crate::metrics::Aggregation;
use crate::spectrum::{Fading, LevelRange, SpectrumConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    pub total_bandwidth_hz: f64,
    pub subband_bandwidth_hz: f64,
}

/// Noise level, either absolute or relative to the clean measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSpec {
    /// Per-measurement SNR `||A X||^2 / (K sigma_w^2)` in dB, resolved per trial.
    SnrDb(f64),
    SigmaW(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementMode {
    #[default]
    Linear,
    MagnitudeAveraged,
}

/// How the pilot run turns its ROC into one operating threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatingRule {
    /// Most sensitive threshold whose pilot false-alarm rate is at most
    /// `max_pf` (constant false-alarm rate).
    FalseAlarmBudget { max_pf: f64 },
    /// Maximize `Pd - Pf`.
    Youden,
}

impl Default for OperatingRule {
    fn default() -> Self {
        OperatingRule::FalseAlarmBudget { max_pf: 0.05 }
    }
}

/// Threshold grid and operating-point selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaSpec {
    pub points: usize,
    pub low_factor: f64,
    pub high_factor: f64,
    /// Trials in the pilot run that sets the grid scale and operating point.
    pub pilot_trials: usize,
    pub rule: OperatingRule,
    /// Skip the pilot's choice and use this operating threshold.
    pub operating: Option<f64>,
}

impl Default for LambdaSpec {
    fn default() -> Self {
        Self {
            points: 64,
            low_factor: 1e-3,
            high_factor: 10.0,
            pilot_trials: 200,
            rule: OperatingRule::default(),
            operating: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spectrum: SpectrumSpec,
    /// `J`
    pub pu_count: usize,
    /// Node counts `K`, strictly ascending.
    pub nodes: Vec<usize>,
    pub noise: NoiseSpec,
    pub trials: usize,
    pub master_seed: u64,
    pub lambda: LambdaSpec,
    pub solver: SolverOptions,
    pub fading: Fading,
    pub measurement: MeasurementMode,
    /// Frequency bins per subband for the magnitude-averaged mode.
    pub texture_bins: usize,
    pub levels: LevelRange,
    pub aggregation: Aggregation,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            spectrum: SpectrumSpec {
                total_bandwidth_hz: 6e9,
                subband_bandwidth_hz: 30e6,
            },
            pu_count: 15,
            nodes: vec![25, 30, 35, 40, 45, 50, 60],
            noise: NoiseSpec::SnrDb(10.0),
            trials: 10_000,
            master_seed: 1,
            lambda: LambdaSpec::default(),
            solver: SolverOptions::default(),
            fading: Fading::Identity,
            measurement: MeasurementMode::Linear,
            texture_bins: 16,
            levels: LevelRange::default(),
            aggregation: Aggregation::PerTrial,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks every downstream precondition and returns the partition.
    pub fn validate(&self) -> Result<SpectrumConfig> {
        let cfg = |e: Error| Error::Config(e.to_string());
        let spectrum = SpectrumConfig::new(
            self.spectrum.total_bandwidth_hz,
            self.spectrum.subband_bandwidth_hz,
        )
        .map_err(cfg)?;
        if self.pu_count > spectrum.half_count() {
            return Err(cfg(Error::TooManyUsers {
                requested: self.pu_count,
                available: spectrum.half_count(),
            }));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.nodes.is_empty() || self.nodes.contains(&0) {
            return Err(Error::Config("node counts must be non-empty and positive".into()));
        }
        if self.nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("node counts must be strictly ascending".into()));
        }
        match self.noise {
            NoiseSpec::SnrDb(db) if !db.is_finite() => {
                return Err(Error::Config(format!("SNR {db} dB is not finite")))
            }
            NoiseSpec::SigmaW(s) if !(s.is_finite() && s >= 0.0) => {
                return Err(Error::Config(format!("noise std {s} must be nonnegative")))
            }
            _ => {}
        }
        self.levels.validate().map_err(cfg)?;
        if let Fading::RayleighMagnitude { scale } = self.fading {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::Config(format!("rayleigh scale {scale} must be positive")));
            }
        }
        let l = &self.lambda;
        if l.points == 0 || !(l.low_factor > 0.0 && l.high_factor >= l.low_factor) {
            return Err(Error::Config("threshold grid needs points >= 1 and 0 < low <= high".into()));
        }
        if l.operating.is_none() && l.pilot_trials == 0 {
            return Err(Error::Config("pilot_trials must be positive without a fixed operating threshold".into()));
        }
        if matches!(l.rule, OperatingRule::FalseAlarmBudget { max_pf } if !(0.0..=1.0).contains(&max_pf)) {
            return Err(Error::Config("false-alarm budget must lie in [0, 1]".into()));
        }
        if matches!(l.operating, Some(v) if !(v >= 0.0)) {
            return Err(Error::Config("operating threshold must be nonnegative".into()));
        }
        let s = &self.solver;
        if s.max_iters == 0 || !(s.kkt_tol > 0.0) || !(s.feas_tol >= 0.0) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        if matches!(s.epsilon, Some(e) if !(e.is_finite() && e >= 0.0)) {
            return Err(Error::Config("solver epsilon must be nonnegative".into()));
        }
        if self.measurement == MeasurementMode::MagnitudeAveraged
            && (self.texture_bins == 0 || self.texture_bins % 2 == 1)
        {
            return Err(Error::Config("texture_bins must be even and positive".into()));
        }
        Ok(spectrum)
    }
}
