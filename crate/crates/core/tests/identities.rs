//! Closed forms checked against independent computations.

mod common;

use common::{gauss_legendre, shape_by_quadrature};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dcws_core::fusion::{assemble_matrix, MeasurementMatrix};
use dcws_core::sampler::{chip_shape_coeff, draw_mixing, fourier_coeffs, MixingSequence};
use dcws_core::spectrum::{ChannelProfile, SpectrumConfig};

#[test]
fn quadrature_rule_integrates_polynomials() {
    let rule = gauss_legendre(30);
    let total: f64 = rule.iter().map(|&(_, w)| w).sum();
    assert!((total - 2.0).abs() < 1e-14);
    let x8: f64 = rule.iter().map(|&(x, w)| w * x.powi(8)).sum();
    assert!((x8 - 2.0 / 9.0).abs() < 1e-14);
}

#[test]
fn shape_factor_matches_quadrature() {
    let subbands = 201;
    for l in -100i64..=100 {
        let closed = chip_shape_coeff(l, subbands);
        let quad = shape_by_quadrature(l, subbands);
        assert!((closed.norm() - quad.norm()).abs() <= 1e-12, "l={l}");
        assert!((closed - quad).norm() <= 1e-12, "l={l}");
        // |d_l| = sin(pi l / L) / (pi |l|)
        if l != 0 {
            let sinc = (PI * l as f64 / subbands as f64).sin().abs() / (PI * l.abs() as f64);
            assert!((closed.norm() - sinc).abs() <= 1e-15, "l={l}");
        }
    }
}

#[test]
fn all_ones_chips_pass_only_dc() {
    for subbands in [3usize, 15, 201] {
        let seq = MixingSequence::from_chips(0, vec![1; subbands]).unwrap();
        let c = fourier_coeffs(&seq);
        for (i, v) in c.as_slice().iter().enumerate() {
            let want = if i == subbands / 2 { 1.0 } else { 0.0 };
            assert!((v - Complex64::new(want, 0.0)).norm() <= 1e-12, "L={subbands} i={i} {v}");
        }
    }
}

/// Direct DFT-free evaluation: `c_l = (1/T) * sum_m alpha_m * integral over chip m`.
fn coeff_by_chip_integrals(chips: &[i8], l: i64) -> Complex64 {
    let n = chips.len();
    chips
        .iter()
        .enumerate()
        .map(|(m, &a)| {
            let lo = m as f64 / n as f64;
            let hi = (m + 1) as f64 / n as f64;
            if l == 0 {
                Complex64::new(a as f64 * (hi - lo), 0.0)
            } else {
                let w = -2.0 * PI * l as f64;
                let f = |t: f64| Complex64::from_polar(1.0, w * t) / Complex64::new(0.0, w);
                (f(hi) - f(lo)) * a as f64
            }
        })
        .sum()
}

#[test]
fn coefficients_are_hermitian_and_match_chip_integrals() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for subbands in [5usize, 15, 63] {
        for _ in 0..10 {
            let chips: Vec<i8> = (0..subbands).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
            let c = fourier_coeffs(&MixingSequence::from_chips(0, chips.clone()).unwrap());
            let c = c.as_slice();
            let half = (subbands / 2) as i64;
            for i in 0..subbands {
                let l = half - i as i64;
                assert!((c[i] - coeff_by_chip_integrals(&chips, l)).norm() < 1e-13);
                assert!((c[i] - c[subbands - 1 - i].conj()).norm() < 1e-13);
            }
        }
    }
}

#[test]
fn coefficient_energy_is_bounded_by_parseval() {
    // sum over all l of |c_l|^2 equals the mean square of the waveform (1);
    // the in-band part can only be smaller
    let seq = draw_mixing(3, 101, 17).unwrap();
    let in_band: f64 = fourier_coeffs(&seq).as_slice().iter().map(|v| v.norm_sqr()).sum();
    let wide: f64 = (-20_000i64..=20_000)
        .map(|l| coeff_by_chip_integrals(seq.chips(), l).norm_sqr())
        .sum();
    assert!(in_band < wide);
    assert!((wide - 1.0).abs() < 1e-3, "{wide}");
}

#[test]
fn factorization_matches_direct_assembly() {
    let gap = common::factorization_gap(100, 11);
    assert!(gap <= 1e-12, "{gap}");
}

#[test]
fn zero_gain_zeroes_a_column() {
    let cfg = SpectrumConfig::with_subbands(9).unwrap();
    let mut gains = vec![1.0; 9];
    gains[2] = 0.0;
    gains[6] = 0.0;
    let channel = ChannelProfile::new(gains).unwrap();
    let a = assemble_matrix(&cfg, 4, &[1, 2, 3], &channel).unwrap();
    assert!(a.entries().column(2).iter().all(|v| v.norm() == 0.0));
    assert!(a.entries().column(6).iter().all(|v| v.norm() == 0.0));
}

#[test]
fn realified_system_stacks_parts() {
    let cfg = SpectrumConfig::with_subbands(5).unwrap();
    let a = assemble_matrix(&cfg, 1, &[1, 2], &ChannelProfile::identity(&cfg)).unwrap();
    let r = a.realified();
    assert_eq!(r.shape(), (4, 5));
    for i in 0..2 {
        for j in 0..5 {
            assert_eq!(r[(i, j)], a.entries()[(i, j)].re);
            assert_eq!(r[(i + 2, j)], a.entries()[(i, j)].im);
        }
    }
    let plain = MeasurementMatrix::from_entries(a.entries().clone());
    assert!(plain.factors().is_none());
}
