//! One sensor node's compressed sampler.
//!
//! A node multiplies its input by a `T_s`-periodic ±1 chip waveform with
//! `L` chips per period, low-pass filters to `B/2` and samples at `f_s = B`.
//! Every subband is folded onto baseband with weight `c_l`, the `l`-th
//! Fourier-series coefficient of the chip waveform.

mod reference;

pub use reference::{timedomain_reference, AliasingCheck};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::seed;
use crate::spectrum::{ChannelProfile, NoiseModel, SpectrumConfig, SubbandLevels};

/// Periodic ±1 chip pattern of one node, one chip per subband slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixingSequence {
    node_id: u64,
    seed: u64,
    chips: Vec<i8>,
}

impl MixingSequence {
    /// Wraps explicit chips. Every entry must be `+1` or `-1` and the length
    /// odd.
    pub fn from_chips(node_id: u64, chips: Vec<i8>) -> Result<Self> {
        if chips.is_empty() || chips.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "chip count {} must be odd and positive",
                chips.len()
            )));
        }
        if chips.iter().any(|&c| c != 1 && c != -1) {
            return Err(Error::InvalidParameter("chips must be +1 or -1".into()));
        }
        Ok(Self {
            node_id,
            seed: 0,
            chips,
        })
    }

    pub fn node_id(&self) -> u64 {
        self.node_id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn chips(&self) -> &[i8] {
        &self.chips
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }
}

/// Fourier-series coefficients `c_l` of a chip waveform, `l = L0 ... -L0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffRow {
    coeffs: Vec<Complex64>,
}

impl FourierCoeffRow {
    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Draws i.i.d. equiprobable chips from the substream `(seed, node_id)`.
///
/// The fusion center regenerates the same chips from the same pair.
pub fn draw_mixing(node_id: u64, subband_count: usize, seed: u64) -> Result<MixingSequence> {
    if subband_count == 0 || subband_count.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "chip count {subband_count} must be odd and positive"
        )));
    }
    let mut rng = seed::stream(seed, &[node_id]);
    let chips = (0..subband_count)
        .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
        .collect();
    Ok(MixingSequence {
        node_id,
        seed,
        chips,
    })
}

/// `e^{-j 2 pi k / L}` for `k = 0 .. L-1`.
pub(crate) fn roots_of_unity(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// Chip-shape factor `d_l = (1/T_s) * integral_0^{T_s/L} e^{-j 2 pi l t / T_s} dt`.
///
/// Closed form: `1/L` at `l = 0`, otherwise `(1 - theta^l) / (j 2 pi l)`
/// with `theta = e^{-j 2 pi / L}`.
pub fn chip_shape_coeff(l: i64, subband_count: usize) -> Complex64 {
    if l == 0 {
        return Complex64::new(1.0 / subband_count as f64, 0.0);
    }
    let theta_l = Complex64::from_polar(1.0, -2.0 * PI * l as f64 / subband_count as f64);
    (Complex64::new(1.0, 0.0) - theta_l) / Complex64::new(0.0, 2.0 * PI * l as f64)
}

/// `c_l = d_l * sum_m alpha_m theta^{l m}` for every subband.
pub fn fourier_coeffs(seq: &MixingSequence) -> FourierCoeffRow {
    let n = seq.len();
    let half = (n / 2) as i64;
    let roots = roots_of_unity(n);
    let coeffs = (0..n as i64)
        .map(|i| {
            let l = half - i;
            let sum: Complex64 = seq
                .chips
                .iter()
                .enumerate()
                .map(|(m, &a)| roots[(l * m as i64).rem_euclid(n as i64) as usize] * a as f64)
                .sum();
            chip_shape_coeff(l, n) * sum
        })
        .collect();
    FourierCoeffRow { coeffs }
}

/// Noise-free aliased level `Re(sum_l c_l H_l X_l)`.
///
/// The sum is real whenever `c` is Hermitian and `H * X` symmetric; a
/// residual imaginary part above `1e-9` relative to the term magnitudes is
/// reported as a numerical error.
pub fn clean_measurement(
    c: &FourierCoeffRow,
    channel: &ChannelProfile,
    levels: &SubbandLevels,
) -> Result<f64> {
    let n = c.len();
    check_len("channel gains", n, channel.len())?;
    check_len("subband levels", n, levels.len())?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for ((ci, h), x) in c.coeffs.iter().zip(channel.gains()).zip(levels.as_slice()) {
        let term = ci * (h * x);
        scale += term.norm();
        acc += term;
    }
    if acc.im.abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::Numerical(format!(
            "aliased measurement has imaginary residue {:e}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// One node's report: the aliased level plus Gaussian noise of std `sigma_w`.
///
/// A standard normal is always drawn so the generator advances identically
/// whatever the noise level.
pub fn node_measurement<R: Rng + ?Sized>(
    c: &FourierCoeffRow,
    channel: &ChannelProfile,
    levels: &SubbandLevels,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<f64> {
    let clean = clean_measurement(c, channel, levels)?;
    let z: f64 = StandardNormal.sample(rng);
    Ok(clean + noise.sigma_w() * z)
}

/// Random within-subband phase texture for the magnitude-averaged mode.
///
/// Holds `bins` unit phasors per subband over a baseband grid symmetric
/// about DC, arranged so that the composite spectrum stays Hermitian:
/// `u_{-l}(f_g) = conj(u_l(f_{G-1-g}))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandTexture {
    bins: usize,
    phasors: Vec<Vec<Complex64>>,
}

impl SubbandTexture {
    pub fn draw<R: Rng + ?Sized>(cfg: &SpectrumConfig, bins: usize, rng: &mut R) -> Result<Self> {
        if bins == 0 || bins % 2 == 1 {
            return Err(Error::InvalidParameter(format!(
                "texture bin count {bins} must be even and positive"
            )));
        }
        let n = cfg.subband_count();
        let mut phasors = vec![vec![Complex64::new(0.0, 0.0); bins]; n];
        let mut phase = || Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
        for i in 0..n / 2 {
            for g in 0..bins {
                let u = phase();
                phasors[i][g] = u;
                phasors[n - 1 - i][bins - 1 - g] = u.conj();
            }
        }
        let dc = n / 2;
        for g in 0..bins / 2 {
            let u = phase();
            phasors[dc][g] = u;
            phasors[dc][bins - 1 - g] = u.conj();
        }
        Ok(Self { bins, phasors })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }
}

/// Modulus-then-average variant of a node's report:
/// `(1/G) sum_g |sum_l c_l H_l X_l u_l(f_g)| + w`.
///
/// Nonlinear in `X`; exposed for comparing against the linear model the
/// fusion center inverts.
pub fn magnitude_averaged_measurement<R: Rng + ?Sized>(
    c: &FourierCoeffRow,
    channel: &ChannelProfile,
    levels: &SubbandLevels,
    texture: &SubbandTexture,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<f64> {
    let n = c.len();
    check_len("channel gains", n, channel.len())?;
    check_len("subband levels", n, levels.len())?;
    check_len("texture subbands", n, texture.phasors.len())?;
    let weights: Vec<Complex64> = c
        .coeffs
        .iter()
        .zip(channel.gains())
        .zip(levels.as_slice())
        .map(|((ci, h), x)| ci * (h * x))
        .collect();
    let mut total = 0.0;
    for g in 0..texture.bins {
        let y: Complex64 = weights
            .iter()
            .zip(&texture.phasors)
            .map(|(w, u)| w * u[g])
            .sum();
        total += y.norm();
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(total / texture.bins as f64 + noise.sigma_w() * z)
}
