//! Exhaustive-support reference recovery for small instances.

use nalgebra::{DMatrix, DVector};

use super::{MeasurementMatrix, MeasurementVector, RecoveredLevels, SolverReport};
use crate::error::{check_len, Error, Result};

/// Largest number of candidate supports the oracle will enumerate.
pub const ORACLE_SUPPORT_LIMIT: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

struct Candidate {
    support: Vec<usize>,
    values: Vec<f64>,
    residual: f64,
    l1: f64,
}

/// Tries every support of size `0..=s_max`, fits nonnegative least squares
/// on it and keeps the smallest residual. Near-ties (relative `1e-9`) go to
/// the smaller l1 norm, then the smaller support, then the lexicographically
/// first one.
pub fn oracle_recover(
    a: &MeasurementMatrix,
    y: &MeasurementVector,
    s_max: usize,
) -> Result<RecoveredLevels> {
    let k = a.rows();
    let n = a.cols();
    check_len("measurements", k, y.len())?;
    let s_max = s_max.min(n);
    let total: u128 = (0..=s_max).map(|s| binomial(n, s)).sum();
    if total > ORACLE_SUPPORT_LIMIT {
        return Err(Error::CombinatorialGuard(total));
    }

    let m = a.realified();
    let mut rhs = DVector::zeros(2 * k);
    rhs.rows_mut(0, k).copy_from_slice(y.as_slice());
    let y_norm = rhs.norm();
    let res_tol = 1e-9 * (1.0 + y_norm);

    let mut best = Candidate {
        support: Vec::new(),
        values: Vec::new(),
        residual: y_norm,
        l1: 0.0,
    };
    let mut evaluated = 1usize;

    for size in 1..=s_max.min(m.nrows()) {
        let mut support: Vec<usize> = (0..size).collect();
        loop {
            evaluated += 1;
            if let Some(c) = fit_support(&m, &rhs, &support) {
                let better = if c.residual < best.residual - res_tol {
                    true
                } else if (c.residual - best.residual).abs() <= res_tol {
                    c.l1 < best.l1 - 1e-9 * (1.0 + best.l1)
                } else {
                    false
                };
                if better {
                    best = c;
                }
            }
            if !next_combination(&mut support, n) {
                break;
            }
        }
    }

    let mut x_hat = vec![0.0; n];
    for (&i, &v) in best.support.iter().zip(&best.values) {
        x_hat[i] = v;
    }
    let residual_norm = a.residual_norm(&x_hat, y.as_slice());
    let report = SolverReport {
        iterations: evaluated,
        residual_norm,
        l1_norm: best.l1,
        converged: true,
        feasible: true,
        kkt_residual: 0.0,
        epsilon: 0.0,
    };
    Ok(RecoveredLevels::new(x_hat, report))
}

/// Least squares restricted to `support`; `None` unless the fit is full
/// rank with strictly positive coefficients (a fit touching zero is covered
/// by a smaller support).
fn fit_support(m: &DMatrix<f64>, y: &DVector<f64>, support: &[usize]) -> Option<Candidate> {
    let sub = m.select_columns(support);
    let qr = sub.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if r.diagonal().iter().any(|d| d.abs() <= 1e-12 * scale.max(1e-300)) {
        return None;
    }
    let qty = qr.q().tr_mul(y);
    let coef = r.solve_upper_triangular(&qty)?;
    if coef.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let residual = (y - &sub * &coef).norm();
    Some(Candidate {
        support: support.to_vec(),
        l1: coef.iter().sum(),
        values: coef.iter().copied().collect(),
        residual,
    })
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::assemble_matrix;
    use crate::spectrum::{ChannelProfile, SpectrumConfig};

    #[test]
    fn combinations_enumerate_all() {
        let mut c = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut c, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
        assert_eq!(binomial(201, 3), 1_333_300);
        assert_eq!(binomial(5, 0), 1);
    }

    #[test]
    fn zero_sparsity_returns_zero() {
        let cfg = SpectrumConfig::with_subbands(7).unwrap();
        let a = assemble_matrix(&cfg, 1, &[1, 2, 3], &ChannelProfile::identity(&cfg)).unwrap();
        let y = MeasurementVector::new(vec![0.3, -0.4, 0.0]);
        let r = oracle_recover(&a, &y, 0).unwrap();
        assert!(r.x_hat().iter().all(|&v| v == 0.0));
        assert!((r.report().residual_norm - 0.5).abs() < 1e-15);
    }

    #[test]
    fn guard_trips() {
        let cfg = SpectrumConfig::with_subbands(201).unwrap();
        let a = assemble_matrix(&cfg, 1, &[1, 2], &ChannelProfile::identity(&cfg)).unwrap();
        let y = MeasurementVector::new(vec![0.0; 2]);
        assert!(matches!(oracle_recover(&a, &y, 3), Err(Error::CombinatorialGuard(_))));
    }

    #[test]
    fn single_column_recovered_exactly() {
        use rand::Rng;
        use rand_distr::StandardNormal;
        use num_complex::Complex64;
        for s in 0..100u64 {
            let mut rng = crate::seed::stream(s, &[]);
            let a = MeasurementMatrix::from_entries(DMatrix::from_fn(2, 15, |_, _| {
                Complex64::new(rng.sample(StandardNormal), 0.0)
            }));
            let col = rng.random_range(0..15);
            let y: Vec<f64> = (0..2).map(|r| a.entries()[(r, col)].re * 1.3).collect();
            let r = oracle_recover(&a, &MeasurementVector::new(y), 1).unwrap();
            let support: Vec<usize> = (0..15).filter(|&i| r.x_hat()[i] > 0.0).collect();
            assert_eq!(support, vec![col]);
            assert!((r.x_hat()[col] - 1.3).abs() < 1e-9);
            assert!(r.report().residual_norm < 1e-9);
        }
    }
}
