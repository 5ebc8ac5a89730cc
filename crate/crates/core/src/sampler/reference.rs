//! Discrete-time reference for the aliasing relation.
//!
//! The input is a real multitone signal whose tones sit on the grid
//! `k / (Q T_s)` of an observation window of `Q` mixing periods (`Q` odd, so
//! no tone falls on a subband edge). It is generated on a Nyquist-rate grid
//! with `oversample` points per `T_s`, reinterpolated to continuous time
//! from that grid, multiplied by the chip waveform and integrated exactly
//! over every chip interval. The product's in-band Fourier coefficients go
//! through a brick-wall low-pass at `B/2`, are sampled at `f_s = B` and
//! transformed back with a `Q`-point DFT.
//!
//! The result is compared against `sum_l c_l X(f - lB)` built from
//! [`fourier_coeffs`](super::fourier_coeffs). Both sides are exact, so the
//! relative error sits at rounding level.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use super::{fourier_coeffs, MixingSequence};
use crate::error::{check_len, Error, Result};
use crate::seed;
use crate::spectrum::{SpectrumConfig, SubbandLevels};

#[derive(Debug, Clone, PartialEq)]
pub struct AliasingCheck {
    /// Baseband spectrum after mixing, filtering and decimation, bins
    /// `-(Q-1)/2 ..= (Q-1)/2`.
    pub measured_spectrum: Vec<Complex64>,
    /// `sum_l c_l X(f - lB)` on the same bins.
    pub model_spectrum: Vec<Complex64>,
    /// `||measured - model|| / ||model||`, zero when both vanish.
    pub rel_error: f64,
}

/// Runs the reference sampler on random tones with per-subband amplitude
/// scale `levels`.
///
/// `levels` may carry energy in the DC subband; occupancy is read as
/// `level > 0`. `periods` is the window length `Q` in mixing periods and
/// must be odd; `oversample` is the grid density per `T_s` and must be at
/// least `L` for the grid to carry the band.
pub fn timedomain_reference(
    cfg: &SpectrumConfig,
    levels: &SubbandLevels,
    seq: &MixingSequence,
    oversample: usize,
    periods: usize,
    tone_seed: u64,
) -> Result<AliasingCheck> {
    let l_count = cfg.subband_count();
    check_len("subband levels", l_count, levels.len())?;
    check_len("mixing chips", l_count, seq.len())?;
    if oversample < l_count {
        return Err(Error::InvalidParameter(format!(
            "grid of {oversample} points per period cannot carry {l_count} subbands"
        )));
    }
    if periods == 0 || periods.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "window of {periods} periods puts tones on subband edges; use an odd count"
        )));
    }

    let q = periods;
    let half_q = (q / 2) as i64;
    let band_half = ((l_count * q) / 2) as i64;
    let grid_len = oversample * q;

    let tones = draw_tones(cfg, levels.as_slice(), q, tone_seed);

    // Nyquist-rate samples of x over the window.
    let mut planner = FftPlanner::<f64>::new();
    let mut grid = vec![Complex64::new(0.0, 0.0); grid_len];
    for (j, amp) in tones.iter().enumerate() {
        let bin = j as i64 - band_half;
        grid[bin.rem_euclid(grid_len as i64) as usize] = *amp;
    }
    planner.plan_fft_inverse(grid_len).process(&mut grid);
    let imag_peak = grid.iter().fold(0.0f64, |m, s| m.max(s.im.abs()));
    let real_peak = grid.iter().fold(0.0f64, |m, s| m.max(s.re.abs()));
    if imag_peak > 1e-9 * real_peak.max(1.0) {
        return Err(Error::Numerical("synthesized signal is not real".into()));
    }
    let samples: Vec<f64> = grid.iter().map(|s| s.re).collect();

    // Continuous-time interpolant of the grid: its Fourier series on the window.
    let mut series: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    planner.plan_fft_forward(grid_len).process(&mut series);
    let inv_n = 1.0 / grid_len as f64;
    let series: Vec<(i64, Complex64)> = series
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let j = if i <= grid_len / 2 { i as i64 } else { i as i64 - grid_len as i64 };
            (j, v * inv_n)
        })
        .collect();

    // Mix with the chip waveform and integrate each chip interval exactly.
    let intervals = q * l_count;
    let phase_table: Vec<Complex64> = (0..intervals)
        .map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / intervals as f64))
        .collect();
    let chips = seq.chips();
    let mut lowpassed = Vec::with_capacity(q);
    for k in -half_q..=half_q {
        let mut zk = Complex64::new(0.0, 0.0);
        for &(j, xj) in &series {
            if xj == Complex64::new(0.0, 0.0) {
                continue;
            }
            let delta = j - k;
            let interval_integral = if delta == 0 {
                Complex64::new(1.0 / intervals as f64, 0.0)
            } else {
                (phase_table[delta.rem_euclid(intervals as i64) as usize] - 1.0)
                    / Complex64::new(0.0, 2.0 * PI * delta as f64)
            };
            let mut chip_sum = Complex64::new(0.0, 0.0);
            for i in 0..intervals {
                let idx = (delta * i as i64).rem_euclid(intervals as i64) as usize;
                chip_sum += phase_table[idx] * chips[i % l_count] as f64;
            }
            zk += xj * interval_integral * chip_sum;
        }
        lowpassed.push(zk);
    }

    // Sample at f_s = B: Q samples across the window.
    let mut decimated = vec![Complex64::new(0.0, 0.0); q];
    for (offset, zk) in lowpassed.iter().enumerate() {
        let k = offset as i64 - half_q;
        decimated[k.rem_euclid(q as i64) as usize] = *zk;
    }
    planner.plan_fft_inverse(q).process(&mut decimated);

    // DFT of the low-rate samples.
    planner.plan_fft_forward(q).process(&mut decimated);
    let measured_spectrum: Vec<Complex64> = (-half_q..=half_q)
        .map(|k| decimated[k.rem_euclid(q as i64) as usize] / q as f64)
        .collect();

    let c = fourier_coeffs(seq);
    let model_spectrum: Vec<Complex64> = (-half_q..=half_q)
        .map(|k| {
            cfg.subbands()
                .zip(c.as_slice())
                .map(|(l, cl)| {
                    let j = k - l * q as i64;
                    if j.abs() > band_half {
                        Complex64::new(0.0, 0.0)
                    } else {
                        cl * tones[(j + band_half) as usize]
                    }
                })
                .sum()
        })
        .collect();

    let diff: f64 = measured_spectrum
        .iter()
        .zip(&model_spectrum)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let model_norm: f64 = model_spectrum.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let rel_error = if model_norm == 0.0 {
        diff
    } else {
        diff / model_norm
    };

    Ok(AliasingCheck {
        measured_spectrum,
        model_spectrum,
        rel_error,
    })
}

/// Hermitian tone amplitudes on bins `-(LQ-1)/2 ..= (LQ-1)/2`.
fn draw_tones(cfg: &SpectrumConfig, levels: &[f64], q: usize, tone_seed: u64) -> Vec<Complex64> {
    let band_half = ((cfg.subband_count() * q) / 2) as i64;
    let mut rng = seed::stream(tone_seed, &[seed::tag::TONES]);
    let mut tones = vec![Complex64::new(0.0, 0.0); (2 * band_half + 1) as usize];
    let subband_of = |j: i64| -> i64 {
        // Q odd: bin j lies in subband round(j / Q)
        (j + (q as i64) / 2).div_euclid(q as i64)
    };
    for j in 0..=band_half {
        let level = levels[cfg.index_of(subband_of(j))];
        if level <= 0.0 {
            continue;
        }
        let re: f64 = StandardNormal.sample(&mut rng);
        let amp = if j == 0 {
            Complex64::new(level * re, 0.0)
        } else {
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im) * (level / 2f64.sqrt())
        };
        tones[(j + band_half) as usize] = amp;
        tones[(band_half - j) as usize] = amp.conj();
    }
    tones
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::draw_mixing;

    #[test]
    fn all_ones_chips_pass_only_baseband() {
        let cfg = SpectrumConfig::with_subbands(7).unwrap();
        let seq = MixingSequence::from_chips(0, vec![1; 7]).unwrap();
        let levels = SubbandLevels::new(vec![1.0, 0.0, 0.7, 1.5, 0.7, 0.0, 1.0]).unwrap();
        let r = timedomain_reference(&cfg, &levels, &seq, 16, 5, 3).unwrap();
        assert!(r.rel_error <= 1e-9, "{}", r.rel_error);
        // baseband tones alone: the model picks only l = 0
        let tones = draw_tones(&cfg, levels.as_slice(), 5, 3);
        let mid = tones.len() / 2;
        for (k, v) in r.measured_spectrum.iter().enumerate() {
            assert!((v - tones[mid - 2 + k]).norm() < 1e-9);
        }
    }

    #[test]
    fn random_chips_match_model() {
        let cfg = SpectrumConfig::with_subbands(15).unwrap();
        let mut levels = vec![0.0; 15];
        for l in [2i64, 5] {
            levels[cfg.index_of(l)] = 1.0;
            levels[cfg.index_of(-l)] = 1.0;
        }
        let levels = SubbandLevels::new(levels).unwrap();
        let seq = draw_mixing(1, 15, 77).unwrap();
        let r = timedomain_reference(&cfg, &levels, &seq, 64, 7, 5).unwrap();
        assert!(r.rel_error <= 1e-6, "{}", r.rel_error);
        assert!(r.model_spectrum.iter().any(|v| v.norm() > 1e-3));
    }

    #[test]
    fn zero_signal_has_zero_error() {
        let cfg = SpectrumConfig::with_subbands(5).unwrap();
        let levels = SubbandLevels::new(vec![0.0; 5]).unwrap();
        let seq = draw_mixing(1, 5, 1).unwrap();
        let r = timedomain_reference(&cfg, &levels, &seq, 8, 3, 0).unwrap();
        assert_eq!(r.rel_error, 0.0);
        assert!(r.measured_spectrum.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn rejects_non_commensurate_grid() {
        let cfg = SpectrumConfig::with_subbands(5).unwrap();
        let levels = SubbandLevels::new(vec![0.0; 5]).unwrap();
        let seq = draw_mixing(1, 5, 1).unwrap();
        assert!(timedomain_reference(&cfg, &levels, &seq, 4, 3, 0).is_err());
        assert!(timedomain_reference(&cfg, &levels, &seq, 8, 4, 0).is_err());
    }
}
