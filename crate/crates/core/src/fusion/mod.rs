//! Fusion center: measurement-matrix assembly, sparse recovery and the
//! per-subband busy/idle decision.

mod bp;
mod oracle;

pub use bp::{bp_recover, default_epsilon, RecoveredLevels, SolverOptions, SolverReport};
pub use oracle::{oracle_recover, ORACLE_SUPPORT_LIMIT};

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::sampler::{chip_shape_coeff, draw_mixing, fourier_coeffs, MixingSequence};
use crate::spectrum::{ChannelProfile, SpectrumConfig};

/// The four factors of `A = S * F * D * H`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFactors {
    /// `K x L` chip signs, one row per node.
    pub signs: DMatrix<f64>,
    /// `L x L` roots of unity, `F[m, i] = theta^{l m}` with `l` the subband at column `i`.
    pub roots: DMatrix<Complex64>,
    /// Diagonal of `D`: chip-shape factors `d_l`.
    pub shape: DVector<Complex64>,
    /// Diagonal of `H`: channel gains.
    pub gains: DVector<f64>,
}

impl MatrixFactors {
    pub fn product(&self) -> DMatrix<Complex64> {
        let signs = self.signs.map(|s| Complex64::new(s, 0.0));
        let mut a = signs * &self.roots;
        for (mut col, (d, h)) in a
            .column_iter_mut()
            .zip(self.shape.iter().zip(self.gains.iter()))
        {
            col *= *d * *h;
        }
        a
    }
}

/// Complex `K x L` measurement matrix, with its factorization when built
/// from mixing sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    entries: DMatrix<Complex64>,
    factors: Option<MatrixFactors>,
}

impl MeasurementMatrix {
    /// Arbitrary complex matrix without a factorization.
    pub fn from_entries(entries: DMatrix<Complex64>) -> Self {
        Self {
            entries,
            factors: None,
        }
    }

    /// Builds `A = S F D H` from the nodes' chip sequences and the shared
    /// channel.
    pub fn from_sequences(
        cfg: &SpectrumConfig,
        sequences: &[MixingSequence],
        channel: &ChannelProfile,
    ) -> Result<Self> {
        let l_count = cfg.subband_count();
        check_len("channel gains", l_count, channel.len())?;
        if sequences.is_empty() {
            return Err(Error::InvalidParameter("at least one node is required".into()));
        }
        for s in sequences {
            check_len("mixing chips", l_count, s.len())?;
        }
        let k = sequences.len();
        if k > l_count {
            log::debug!("{k} nodes for {l_count} subbands: measurement is not compressive");
        }
        let signs = DMatrix::from_fn(k, l_count, |r, m| sequences[r].chips()[m] as f64);
        let subbands: Vec<i64> = cfg.subbands().collect();
        let roots = DMatrix::from_fn(l_count, l_count, |m, i| {
            let e = (subbands[i] * m as i64).rem_euclid(l_count as i64);
            Complex64::from_polar(1.0, -2.0 * PI * e as f64 / l_count as f64)
        });
        let shape = DVector::from_iterator(
            l_count,
            subbands.iter().map(|&l| chip_shape_coeff(l, l_count)),
        );
        let gains = DVector::from_column_slice(channel.gains());
        let factors = MatrixFactors {
            signs,
            roots,
            shape,
            gains,
        };
        Ok(Self {
            entries: factors.product(),
            factors: Some(factors),
        })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn factors(&self) -> Option<&MatrixFactors> {
        self.factors.as_ref()
    }

    /// `K`
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    /// `L`
    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    /// Real `2K x L` system `[Re A; Im A]`.
    pub fn realified(&self) -> DMatrix<f64> {
        let (k, l) = self.entries.shape();
        DMatrix::from_fn(2 * k, l, |r, c| {
            if r < k {
                self.entries[(r, c)].re
            } else {
                self.entries[(r - k, c)].im
            }
        })
    }

    /// `||A x - y||_2` for a real level vector and real measurements.
    pub fn residual_norm(&self, x: &[f64], y: &[f64]) -> f64 {
        let xs = DVector::from_iterator(x.len(), x.iter().map(|&v| Complex64::new(v, 0.0)));
        let ax = &self.entries * xs;
        ax.iter()
            .zip(y)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Row-by-row assembly from each node's Fourier coefficients:
/// `A[k, l] = c^k_l * H_l`.
pub fn rows_from_coefficients(
    sequences: &[MixingSequence],
    channel: &ChannelProfile,
) -> DMatrix<Complex64> {
    let l_count = channel.len();
    let rows: Vec<Vec<Complex64>> = sequences
        .iter()
        .map(|s| {
            fourier_coeffs(s)
                .as_slice()
                .iter()
                .zip(channel.gains())
                .map(|(c, h)| c * h)
                .collect()
        })
        .collect();
    DMatrix::from_fn(sequences.len(), l_count, |r, c| rows[r][c])
}

/// Regenerates each node's chips from `(mixing_seed, node_id)` and builds
/// the factored matrix.
///
/// The fusion center cannot tell whether a node actually used these chips;
/// seeds are assumed to be agreed out of band.
pub fn assemble_matrix(
    cfg: &SpectrumConfig,
    mixing_seed: u64,
    node_ids: &[u64],
    channel: &ChannelProfile,
) -> Result<MeasurementMatrix> {
    let sequences = node_ids
        .iter()
        .map(|&id| draw_mixing(id, cfg.subband_count(), mixing_seed))
        .collect::<Result<Vec<_>>>()?;
    MeasurementMatrix::from_sequences(cfg, &sequences, channel)
}

/// Stacked per-node reports.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    y: Vec<f64>,
}

impl MeasurementVector {
    pub fn new(y: Vec<f64>) -> Self {
        Self { y }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionVector {
    d_hat: Vec<bool>,
    threshold: f64,
}

impl DecisionVector {
    pub fn flags(&self) -> &[bool] {
        &self.d_hat
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// Busy iff `x_hat[l] > lambda`; a level exactly at the threshold is idle.
pub fn decide(x_hat: &[f64], lambda: f64) -> Result<DecisionVector> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "threshold {lambda} must be nonnegative"
        )));
    }
    Ok(DecisionVector {
        d_hat: x_hat.iter().map(|&v| v > lambda).collect(),
        threshold: lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{draw_channel, Fading};
    use crate::seed;

    #[test]
    fn single_all_ones_node_selects_dc() {
        let cfg = SpectrumConfig::with_subbands(9).unwrap();
        let seq = MixingSequence::from_chips(1, vec![1; 9]).unwrap();
        let a = MeasurementMatrix::from_sequences(&cfg, &[seq], &ChannelProfile::identity(&cfg)).unwrap();
        for (i, v) in a.entries().iter().enumerate() {
            let want = if i == 4 { 1.0 } else { 0.0 };
            assert!((v - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn factor_product_matches_row_assembly() {
        let cfg = SpectrumConfig::with_subbands(31).unwrap();
        let ch = draw_channel(&cfg, Fading::RayleighMagnitude { scale: 1.0 }, &mut seed::stream(4, &[])).unwrap();
        let seqs: Vec<_> = (1..=12).map(|k| draw_mixing(k, 31, 8).unwrap()).collect();
        let a = MeasurementMatrix::from_sequences(&cfg, &seqs, &ch).unwrap();
        let direct = rows_from_coefficients(&seqs, &ch);
        let worst = (a.entries() - direct).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst <= 1e-12, "{worst}");
    }

    #[test]
    fn zero_gain_zeroes_column() {
        let cfg = SpectrumConfig::with_subbands(7).unwrap();
        let mut g = vec![1.0; 7];
        g[2] = 0.0;
        let ch = ChannelProfile::new(g).unwrap();
        let a = assemble_matrix(&cfg, 3, &[1, 2, 3], &ch).unwrap();
        assert!(a.entries().column(2).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn assemble_reproduces_node_chips() {
        let cfg = SpectrumConfig::with_subbands(7).unwrap();
        let a = assemble_matrix(&cfg, 42, &[5, 6], &ChannelProfile::identity(&cfg)).unwrap();
        let s = &a.factors().unwrap().signs;
        assert_eq!(
            s.row(1).iter().map(|&v| v as i8).collect::<Vec<_>>(),
            draw_mixing(6, 7, 42).unwrap().chips()
        );
    }

    #[test]
    fn realified_stacks_parts() {
        let cfg = SpectrumConfig::with_subbands(5).unwrap();
        let a = assemble_matrix(&cfg, 1, &[1, 2], &ChannelProfile::identity(&cfg)).unwrap();
        let r = a.realified();
        assert_eq!(r.shape(), (4, 5));
        assert_eq!(r[(3, 1)], a.entries()[(1, 1)].im);
    }

    #[test]
    fn decide_examples() {
        let d = decide(&[0.9, 0.1, 0.5], 0.5).unwrap();
        assert_eq!(d.flags(), &[true, false, false]);
        let d = decide(&[0.0, 0.2], 0.0).unwrap();
        assert_eq!(d.flags(), &[false, true]);
        let d = decide(&[1e300, 0.2], f64::INFINITY).unwrap();
        assert_eq!(d.flags(), &[false, false]);
        assert!(decide(&[1.0], -0.1).is_err());
        assert!(decide(&[1.0], f64::NAN).is_err());
    }
}
