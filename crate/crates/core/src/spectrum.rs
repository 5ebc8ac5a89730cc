//! Ground-truth wideband environment.
//!
//! All per-subband vectors in this crate share one layout: position `i`
//! holds subband `l = L0 - i`, so index 0 is the highest positive subband
//! and index `L - 1` is `-L0`. Real-signal symmetry makes every generated
//! vector a palindrome under this layout.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partition of a zero-centred band of width `W` into `L = 2*L0 + 1`
/// subbands of width `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumConfig {
    total_bandwidth_hz: f64,
    subband_bandwidth_hz: f64,
    subband_count: usize,
    half_count: usize,
}

impl SpectrumConfig {
    /// Builds the partition with `L0 = ceil((W - B) / 2B)`.
    ///
    /// `W / B` must be a positive integer. An odd ratio tiles the band
    /// exactly; an even ratio gets one extra subband split across the two
    /// band edges (6 GHz / 30 MHz gives 201 subbands).
    pub fn new(total_bandwidth_hz: f64, subband_bandwidth_hz: f64) -> Result<Self> {
        let (w, b) = (total_bandwidth_hz, subband_bandwidth_hz);
        if !(w.is_finite() && b.is_finite() && w > 0.0 && b > 0.0) {
            return Err(Error::InvalidPartition(format!(
                "bandwidths must be positive and finite (W={w}, B={b})"
            )));
        }
        let ratio = w / b;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::InvalidPartition(format!(
                "W/B = {ratio} is not a positive integer"
            )));
        }
        let n = n as usize;
        // ceil((n - 1) / 2) without going through floating point
        let half_count = n / 2;
        Ok(Self {
            total_bandwidth_hz: w,
            subband_bandwidth_hz: b,
            subband_count: 2 * half_count + 1,
            half_count,
        })
    }

    /// Partition with `L` subbands of unit width (handy for small test
    /// instances).
    pub fn with_subbands(subband_count: usize) -> Result<Self> {
        if subband_count.is_multiple_of(2) {
            return Err(Error::InvalidPartition(format!(
                "subband count {subband_count} must be odd"
            )));
        }
        Self::new(subband_count as f64, 1.0)
    }

    pub fn total_bandwidth_hz(&self) -> f64 {
        self.total_bandwidth_hz
    }

    pub fn subband_bandwidth_hz(&self) -> f64 {
        self.subband_bandwidth_hz
    }

    /// `L`
    pub fn subband_count(&self) -> usize {
        self.subband_count
    }

    /// `L0`
    pub fn half_count(&self) -> usize {
        self.half_count
    }

    /// Storage position of subband `l`.
    pub fn index_of(&self, l: i64) -> usize {
        debug_assert!(l.unsigned_abs() as usize <= self.half_count);
        (self.half_count as i64 - l) as usize
    }

    /// Subband number stored at position `idx`.
    pub fn subband_at(&self, idx: usize) -> i64 {
        self.half_count as i64 - idx as i64
    }

    /// Subband numbers in storage order, `L0` down to `-L0`.
    pub fn subbands(&self) -> impl Iterator<Item = i64> {
        let l0 = self.half_count as i64;
        (0..self.subband_count as i64).map(move |i| l0 - i)
    }
}

/// Busy/idle flags per subband.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyPattern {
    flags: Vec<bool>,
    pu_count: usize,
}

impl OccupancyPattern {
    /// Validates a hand-built pattern: odd length, palindromic, DC idle.
    pub fn from_flags(flags: Vec<bool>) -> Result<Self> {
        let n = flags.len();
        if n.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "occupancy length {n} must be odd"
            )));
        }
        if flags[n / 2] {
            return Err(Error::InvalidParameter("DC subband cannot be occupied".into()));
        }
        if !is_palindrome(&flags) {
            return Err(Error::InvalidParameter("occupancy must be symmetric".into()));
        }
        let pu_count = flags.iter().filter(|&&f| f).count() / 2;
        Ok(Self { flags, pu_count })
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// `J`, the number of independent primary users (half the busy count).
    pub fn pu_count(&self) -> usize {
        self.pu_count
    }

    pub fn busy_count(&self) -> usize {
        2 * self.pu_count
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Nonnegative average spectral level per subband.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandLevels {
    levels: Vec<f64>,
}

impl SubbandLevels {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "levels must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { levels })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.levels
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Flat per-subband magnitude gains `H_l`, shared by every node.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    gains: Vec<f64>,
}

impl ChannelProfile {
    pub fn identity(cfg: &SpectrumConfig) -> Self {
        Self {
            gains: vec![1.0; cfg.subband_count()],
        }
    }

    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidParameter(
                "channel gains must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { gains })
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }
}

/// Standard deviation of the additive noise on each node's scalar report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma_w: f64,
}

impl NoiseModel {
    pub fn new(sigma_w: f64) -> Result<Self> {
        if !(sigma_w.is_finite() && sigma_w >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise std {sigma_w} must be finite and nonnegative"
            )));
        }
        Ok(Self { sigma_w })
    }

    pub fn noiseless() -> Self {
        Self { sigma_w: 0.0 }
    }

    pub fn sigma_w(&self) -> f64 {
        self.sigma_w
    }
}

/// Interval for the uniform primary-user level draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRange {
    pub low: f64,
    pub high: f64,
}

impl Default for LevelRange {
    fn default() -> Self {
        Self {
            low: 0.5,
            high: 2.0,
        }
    }
}

impl LevelRange {
    pub fn validate(&self) -> Result<()> {
        if !(self.low.is_finite() && self.high.is_finite() && self.low > 0.0 && self.high >= self.low)
        {
            return Err(Error::InvalidParameter(format!(
                "level range [{}, {}] needs 0 < low <= high",
                self.low, self.high
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Fading {
    #[default]
    Identity,
    /// Magnitude of a circular complex Gaussian with per-component std `scale`.
    RayleighMagnitude { scale: f64 },
}

pub fn make_config(total_bandwidth_hz: f64, subband_bandwidth_hz: f64) -> Result<SpectrumConfig> {
    SpectrumConfig::new(total_bandwidth_hz, subband_bandwidth_hz)
}

/// Draws `pu_count` distinct positive subbands uniformly from `1..=L0` and
/// occupies each together with its mirror image.
pub fn draw_occupancy<R: Rng + ?Sized>(
    cfg: &SpectrumConfig,
    pu_count: usize,
    rng: &mut R,
) -> Result<OccupancyPattern> {
    let l0 = cfg.half_count();
    if pu_count > l0 {
        return Err(Error::TooManyUsers {
            requested: pu_count,
            available: l0,
        });
    }
    let mut flags = vec![false; cfg.subband_count()];
    for pick in index::sample(rng, l0, pu_count) {
        let l = pick as i64 + 1;
        flags[cfg.index_of(l)] = true;
        flags[cfg.index_of(-l)] = true;
    }
    Ok(OccupancyPattern { flags, pu_count })
}

/// One uniform level per occupied pair, mirrored across DC.
pub fn draw_levels<R: Rng + ?Sized>(
    occ: &OccupancyPattern,
    range: LevelRange,
    rng: &mut R,
) -> Result<SubbandLevels> {
    range.validate()?;
    let n = occ.len();
    let mut levels = vec![0.0; n];
    // positive subbands sit at indices 0..n/2
    for i in 0..n / 2 {
        if occ.flags[i] {
            let v = if range.low == range.high {
                range.low
            } else {
                rng.random_range(range.low..=range.high)
            };
            levels[i] = v;
            levels[n - 1 - i] = v;
        }
    }
    Ok(SubbandLevels { levels })
}

pub fn draw_channel<R: Rng + ?Sized>(
    cfg: &SpectrumConfig,
    fading: Fading,
    rng: &mut R,
) -> Result<ChannelProfile> {
    match fading {
        Fading::Identity => Ok(ChannelProfile::identity(cfg)),
        Fading::RayleighMagnitude { scale } => {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "rayleigh scale {scale} must be positive"
                )));
            }
            let n = cfg.subband_count();
            let mut draw = || {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                scale * re.hypot(im)
            };
            let mut gains = vec![0.0; n];
            gains[n / 2] = draw();
            for i in 0..n / 2 {
                let g = draw();
                gains[i] = g;
                gains[n - 1 - i] = g;
            }
            Ok(ChannelProfile { gains })
        }
    }
}

/// Occupancy flags recovered from a level vector (`level > 0`).
pub fn occupancy_of(levels: &SubbandLevels) -> Vec<bool> {
    levels.as_slice().iter().map(|&v| v > 0.0).collect()
}

pub(crate) fn is_palindrome<T: PartialEq>(v: &[T]) -> bool {
    v.iter().eq(v.iter().rev())
}
