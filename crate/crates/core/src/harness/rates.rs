use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Sampling rates in Hz, per node and summed over the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub nyquist_rate_hz: f64,
    /// Four times the occupied bandwidth (`2J` subbands), the usual
    /// single-node compressive rate.
    pub existing_cs_rate_hz: f64,
    pub per_node_rate_hz: f64,
    /// `(K, K * B)` for every configured node count.
    pub sum_rate_hz: Vec<(usize, f64)>,
}

pub fn rate_table(cfg: &ExperimentConfig) -> Result<RateTable> {
    let w = cfg.spectrum.total_bandwidth_hz;
    let b = cfg.spectrum.subband_bandwidth_hz;
    if !(w > 0.0 && b > 0.0 && w.is_finite()) {
        return Err(Error::Config(format!("bandwidths {w} / {b} must be positive")));
    }
    let occupied = (2 * cfg.pu_count) as f64 * b;
    Ok(RateTable {
        nyquist_rate_hz: w,
        existing_cs_rate_hz: 4.0 * occupied,
        per_node_rate_hz: b,
        sum_rate_hz: cfg.nodes.iter().map(|&k| (k, k as f64 * b)).collect(),
    })
}
