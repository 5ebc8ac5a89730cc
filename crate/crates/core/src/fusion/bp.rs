//! Nonnegative basis pursuit denoising,
//! `min sum(x)  s.t.  ||M x - y||_2 <= eps,  x >= 0`.
//!
//! Solved by following the nonnegative LASSO path
//! `x(lam) = argmin 0.5 ||M x - y||^2 + lam * sum(x)` from `lam = max(M^T y)`
//! downwards. The path is piecewise linear and its residual norm decreases
//! monotonically, so the constrained solution is the point on the path where
//! `||r|| = eps`. Each segment costs one small Cholesky solve on the active
//! set; breakpoints are found in closed form, so the result is exact up to
//! rounding.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{MeasurementMatrix, MeasurementVector};
use crate::error::{check_len, Error, Result};
use crate::spectrum::NoiseModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Cap on path segments.
    pub max_iters: usize,
    /// Largest tolerated optimality violation, relative to the starting
    /// multiplier `max(M^T y)`.
    pub kkt_tol: f64,
    /// Relative slack on the residual bound.
    pub feas_tol: f64,
    /// Solve for `L0 + 1` mirrored levels instead of `L` free ones.
    pub fold_symmetry: bool,
    /// Residual bound; `None` uses [`default_epsilon`].
    pub epsilon: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            kkt_tol: 1e-7,
            feas_tol: 1e-6,
            fold_symmetry: false,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// `||A x_hat - y||_2` on the complex system.
    pub residual_norm: f64,
    pub l1_norm: f64,
    pub converged: bool,
    /// False when no nonnegative point meets the residual bound; `x_hat` is
    /// then the end of the path (least residual, least l1 among those).
    pub feasible: bool,
    pub kkt_residual: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredLevels {
    x_hat: Vec<f64>,
    report: SolverReport,
}

impl RecoveredLevels {
    pub(crate) fn new(x_hat: Vec<f64>, report: SolverReport) -> Self {
        Self { x_hat, report }
    }

    pub fn x_hat(&self) -> &[f64] {
        &self.x_hat
    }

    pub fn report(&self) -> &SolverReport {
        &self.report
    }

    pub fn into_parts(self) -> (Vec<f64>, SolverReport) {
        (self.x_hat, self.report)
    }
}

/// `sigma_w * sqrt(2K)`: the residual bound on the realified `2K`-row system.
pub fn default_epsilon(noise: NoiseModel, nodes: usize) -> f64 {
    noise.sigma_w() * ((2 * nodes) as f64).sqrt()
}

pub fn bp_recover(
    a: &MeasurementMatrix,
    y: &MeasurementVector,
    noise: NoiseModel,
    opts: &SolverOptions,
) -> Result<RecoveredLevels> {
    let k = a.rows();
    let l_count = a.cols();
    check_len("measurements", k, y.len())?;
    let eps = opts.epsilon.unwrap_or_else(|| default_epsilon(noise, k));
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "residual bound {eps} must be finite and nonnegative"
        )));
    }
    if opts.fold_symmetry && l_count.is_multiple_of(2) {
        return Err(Error::InvalidParameter(
            "symmetry folding needs an odd subband count".into(),
        ));
    }

    let real = a.realified();
    let mut rhs = DVector::zeros(2 * k);
    rhs.rows_mut(0, k).copy_from_slice(y.as_slice());

    let (x_hat, path) = if opts.fold_symmetry {
        // x_l = x_{-l} = w_l / 2 for l > 0 keeps the objective a plain sum
        let half = l_count / 2;
        let folded = DMatrix::from_fn(2 * k, half + 1, |r, j| {
            if j == half {
                real[(r, half)]
            } else {
                0.5 * (real[(r, j)] + real[(r, l_count - 1 - j)])
            }
        });
        let (w, path) = nonneg_bpdn(&folded, &rhs, eps, opts);
        let mut x = vec![0.0; l_count];
        for j in 0..half {
            x[j] = 0.5 * w[j];
            x[l_count - 1 - j] = 0.5 * w[j];
        }
        x[half] = w[half];
        (x, path)
    } else {
        nonneg_bpdn(&real, &rhs, eps, opts)
    };

    if x_hat.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("recovered levels are not finite".into()));
    }
    let residual_norm = a.residual_norm(&x_hat, y.as_slice());
    let y_norm = y.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    let report = SolverReport {
        iterations: path.iterations,
        residual_norm,
        l1_norm: x_hat.iter().sum(),
        converged: path.terminated && path.kkt_residual <= opts.kkt_tol,
        feasible: residual_norm <= eps * (1.0 + opts.feas_tol) + 1e-10 * y_norm,
        kkt_residual: path.kkt_residual,
        epsilon: eps,
    };
    Ok(RecoveredLevels::new(x_hat, report))
}

#[derive(Debug, Clone, Copy)]
struct PathOutcome {
    iterations: usize,
    terminated: bool,
    kkt_residual: f64,
}

impl PathOutcome {
    fn trivial() -> Self {
        Self {
            iterations: 0,
            terminated: true,
            kkt_residual: 0.0,
        }
    }
}

/// Residual counted as meeting the bound, relative to `||y||`.
const RESIDUAL_SLACK: f64 = 1e-13;

enum Event {
    LambdaZero,
    Join(usize),
    Leave(usize),
    ResidualBound,
}

/// Path-following solver on a real system. Returns the solution and the
/// path summary.
fn nonneg_bpdn(
    m: &DMatrix<f64>,
    y: &DVector<f64>,
    eps: f64,
    opts: &SolverOptions,
) -> (Vec<f64>, PathOutcome) {
    let n = m.ncols();
    let gram = m.tr_mul(m);
    let b = m.tr_mul(y);
    let mut x = vec![0.0; n];
    let y_norm = y.norm();

    if y_norm <= eps {
        return (x, PathOutcome::trivial());
    }
    let (first, lambda0) = b
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    if n == 0 || lambda0 <= 0.0 {
        // no nonnegative direction lowers the residual
        return (x, PathOutcome::trivial());
    }

    let mut lambda = lambda0;
    let mut active = vec![first];
    let mut is_active = vec![false; n];
    is_active[first] = true;
    let mut corr = b.clone();
    let mut resid = y.clone();
    let mut last_dropped: Option<usize> = None;
    let mut iterations = 0;
    let mut terminated = false;

    while iterations < opts.max_iters {
        iterations += 1;
        let s = active.len();
        let g = DMatrix::from_fn(s, s, |i, j| gram[(active[i], active[j])]);
        let ones = DVector::from_element(s, 1.0);
        let dir = match g.clone().cholesky() {
            Some(ch) => ch.solve(&ones),
            None => match g.lu().solve(&ones) {
                Some(v) => v,
                None => break,
            },
        };
        let mut u = DVector::zeros(m.nrows());
        let mut slope = DVector::zeros(n);
        for (p, &i) in active.iter().enumerate() {
            u.axpy(dir[p], &m.column(i), 1.0);
            slope.axpy(dir[p], &gram.column(i), 1.0);
        }

        let mut gamma = lambda;
        let mut event = Event::LambdaZero;
        for j in 0..n {
            if is_active[j] || Some(j) == last_dropped || slope[j] >= 1.0 - 1e-12 {
                continue;
            }
            let step = ((lambda - corr[j]) / (1.0 - slope[j])).max(0.0);
            if step < gamma {
                gamma = step;
                event = Event::Join(j);
            }
        }
        for (p, &i) in active.iter().enumerate() {
            if dir[p] < 0.0 {
                let step = (-x[i] / dir[p]).max(0.0);
                if step < gamma {
                    gamma = step;
                    event = Event::Leave(p);
                }
            }
        }
        let uu = u.norm_squared();
        let ru = resid.dot(&u);
        if uu > 0.0 && ru > 0.0 {
            let rr = resid.norm_squared();
            let reach = eps + RESIDUAL_SLACK * y_norm;
            // smallest residual along this segment's ray
            if rr - ru * ru / uu <= reach * reach {
                let excess = (rr - eps * eps).max(0.0);
                let disc = ru * ru - uu * excess;
                // near a double root the quadratic formula loses half the digits;
                // the tangent point is then the accurate answer
                let step = if disc > 1e-12 * ru * ru {
                    excess / (ru + disc.sqrt())
                } else {
                    ru / uu
                };
                if step <= gamma {
                    gamma = step;
                    event = Event::ResidualBound;
                }
            }
        }

        for (p, &i) in active.iter().enumerate() {
            x[i] += gamma * dir[p];
        }
        lambda -= gamma;
        last_dropped = None;
        match event {
            Event::Join(j) => {
                active.push(j);
                is_active[j] = true;
            }
            Event::Leave(p) => {
                let i = active.remove(p);
                is_active[i] = false;
                x[i] = 0.0;
                last_dropped = Some(i);
            }
            Event::LambdaZero | Event::ResidualBound => terminated = true,
        }

        // refresh from x to keep rounding from accumulating along the path
        resid.copy_from(y);
        corr.copy_from(&b);
        for &i in &active {
            resid.axpy(-x[i], &m.column(i), 1.0);
            corr.axpy(-x[i], &gram.column(i), 1.0);
        }
        // the bound event needs a nonnegative discriminant, which rounding
        // denies once the residual is at noise level; stop on the residual itself
        if resid.norm() <= eps + RESIDUAL_SLACK * y_norm {
            terminated = true;
        }
        if terminated {
            break;
        }
    }

    for v in x.iter_mut() {
        *v = v.max(0.0);
    }
    let lambda = lambda.max(0.0);
    let kkt = (0..n)
        .map(|j| {
            if x[j] > 0.0 {
                (corr[j] - lambda).abs()
            } else {
                (corr[j] - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
        / lambda0;
    (
        x,
        PathOutcome {
            iterations,
            terminated,
            kkt_residual: kkt,
        },
    )
}
