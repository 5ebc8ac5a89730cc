//! Oracles and invariant checks shared by the test targets.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dcws_core::fusion::{
    assemble_matrix, bp_recover, decide, rows_from_coefficients, MeasurementMatrix, MeasurementVector,
    SolverOptions,
};
use dcws_core::metrics::{lambda_grid, roc_sweep, Aggregation};
use dcws_core::sampler::draw_mixing;
use dcws_core::spectrum::{
    draw_channel, draw_levels, draw_occupancy, Fading, LevelRange, NoiseModel, SpectrumConfig,
};

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `integral_0^{1/L} e^{-j 2 pi l u} du` by 30-point Gauss-Legendre.
pub fn shape_by_quadrature(l: i64, subbands: usize) -> Complex64 {
    let half = 0.5 / subbands as f64;
    gauss_legendre(30)
        .into_iter()
        .map(|(x, w)| {
            let u = half * (x + 1.0);
            Complex64::from_polar(w * half, -2.0 * PI * l as f64 * u)
        })
        .sum()
}

/// Largest elementwise gap between the factored and the row-by-row
/// matrices over `instances` random draws with `L <= 63`.
pub fn factorization_gap(instances: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for instance in 0..instances {
        let half = rng.random_range(1..=31usize);
        let cfg = SpectrumConfig::with_subbands(2 * half + 1).unwrap();
        let nodes = rng.random_range(1..=2 * cfg.subband_count());
        let fading = if instance % 2 == 0 {
            Fading::Identity
        } else {
            Fading::RayleighMagnitude { scale: 1.0 }
        };
        let channel = draw_channel(&cfg, fading, &mut rng).unwrap();
        let seed = rng.random::<u64>();
        let ids: Vec<u64> = (1..=nodes as u64).collect();
        let factored = assemble_matrix(&cfg, seed, &ids, &channel).unwrap();
        let seqs: Vec<_> = ids
            .iter()
            .map(|&id| draw_mixing(id, cfg.subband_count(), seed).unwrap())
            .collect();
        let direct = rows_from_coefficients(&seqs, &channel);
        let product = factored.factors().unwrap().product();
        let gap = (factored.entries() - &direct)
            .iter()
            .chain((product - &direct).iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        worst = worst.max(gap);
    }
    worst
}

fn palindrome<T: PartialEq>(v: &[T]) -> bool {
    (0..v.len()).all(|i| v[i] == v[v.len() - 1 - i])
}

pub fn decide_case() -> impl Strategy<Value = (Vec<f64>, f64, f64)> {
    (prop::collection::vec(0.0f64..5.0, 1..64), 0.0f64..6.0, 0.0f64..6.0)
}

pub fn check_decide_monotone((x, a, b): (Vec<f64>, f64, f64)) -> Result<(), TestCaseError> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let d_lo = decide(&x, lo).unwrap();
    let d_hi = decide(&x, hi).unwrap();
    for ((&l, &h), &v) in d_lo.flags().iter().zip(d_hi.flags()).zip(&x) {
        prop_assert!(!h || l, "raising the threshold turned an idle flag busy");
        prop_assert_eq!(h, v > hi);
    }
    Ok(())
}

pub fn roc_case() -> impl Strategy<Value = (u64, usize, usize, usize, bool)> {
    (any::<u64>(), 1usize..12, 3usize..40, 2usize..40, any::<bool>())
}

pub fn check_roc_monotone(
    (seed, trials, len, points, pooled): (u64, usize, usize, usize, bool),
) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..trials)
        .map(|_| {
            (0..len)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() * 2.0 })
                .collect()
        })
        .collect();
    let t: Vec<Vec<bool>> = (0..trials)
        .map(|_| (0..len).map(|_| rng.random_bool(0.4)).collect())
        .collect();
    let grid = lambda_grid(0.5, points, 1e-3, 5.0).unwrap();
    let mode = if pooled { Aggregation::Pooled } else { Aggregation::PerTrial };
    let roc = roc_sweep(&x, &t, &grid, mode).unwrap();
    prop_assert_eq!(roc.points.len(), points);
    for w in roc.points.windows(2) {
        prop_assert!(w[0].lambda < w[1].lambda);
        prop_assert!(w[1].pd <= w[0].pd + 1e-15);
        prop_assert!(w[1].pf <= w[0].pf + 1e-15);
    }
    for p in &roc.points {
        prop_assert!((0.0..=1.0).contains(&p.pd) && (0.0..=1.0).contains(&p.pf));
    }
    Ok(())
}

pub fn spectrum_case() -> impl Strategy<Value = (usize, f64, u64, bool)> {
    (1usize..60, 0.0f64..=1.0, any::<u64>(), any::<bool>())
}

pub fn check_spectrum_symmetric(
    (half, frac, seed, rayleigh): (usize, f64, u64, bool),
) -> Result<(), TestCaseError> {
    let cfg = SpectrumConfig::with_subbands(2 * half + 1).unwrap();
    let j = (frac * half as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let occ = draw_occupancy(&cfg, j, &mut rng).unwrap();
    let levels = draw_levels(&occ, LevelRange::default(), &mut rng).unwrap();
    let fading = if rayleigh {
        Fading::RayleighMagnitude { scale: 1.0 }
    } else {
        Fading::Identity
    };
    let channel = draw_channel(&cfg, fading, &mut rng).unwrap();

    prop_assert!(palindrome(occ.flags()));
    prop_assert!(!occ.flags()[half], "DC must stay idle");
    prop_assert_eq!(occ.flags().iter().filter(|&&f| f).count(), 2 * j);
    // bit-identical mirror values
    let bits: Vec<u64> = levels.as_slice().iter().map(|v| v.to_bits()).collect();
    prop_assert!(palindrome(&bits));
    let gbits: Vec<u64> = channel.gains().iter().map(|v| v.to_bits()).collect();
    prop_assert!(palindrome(&gbits));
    for (&f, &v) in occ.flags().iter().zip(levels.as_slice()) {
        prop_assert_eq!(f, v > 0.0);
    }
    Ok(())
}

pub fn scaling_case() -> impl Strategy<Value = (u64, f64, f64)> {
    (any::<u64>(), 0.05f64..20.0, 0.0f64..0.5)
}

pub fn check_scale_covariance((seed, c, eps_frac): (u64, f64, f64)) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (k, l) = (6, 15);
    let a = MeasurementMatrix::from_entries(DMatrix::from_fn(k, l, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    }));
    let y: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 2.0 - 0.5).collect();
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let eps = eps_frac * y_norm;
    let solve = |y: Vec<f64>, eps: f64| {
        let opts = SolverOptions {
            epsilon: Some(eps),
            ..Default::default()
        };
        bp_recover(&a, &MeasurementVector::new(y), NoiseModel::noiseless(), &opts).unwrap()
    };
    let base = solve(y.clone(), eps);
    let scaled = solve(y.iter().map(|v| c * v).collect(), c * eps);
    let scale = 1.0 + base.x_hat().iter().cloned().fold(0.0, f64::max);
    for (s, b) in scaled.x_hat().iter().zip(base.x_hat()) {
        prop_assert!((s - c * b).abs() <= 1e-6 * c * scale, "{} vs {}", s, c * b);
    }
    prop_assert_eq!(scaled.report().feasible, base.report().feasible);
    Ok(())
}
