//! ADMM for `min_u (1/T) sum_i phi((A u)_i, y_i)`, split as
//! `min f(v) s.t. A u - v = 0` with a proximal term on the `u` step.
//!
//! Each iteration performs
//!
//! ```text
//! u+ = (beta A'A + alpha I)^-1 [alpha u + beta A'v - A'w]
//! v+ = argmin_v f(v) + <w, A u+ - v> + beta/2 |A u+ - v|^2     (per coordinate)
//! w+ = w + beta (A u+ - v+)
//! ```
//!
//! starting from `u = v = w = 0`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{check_labels, LossKind};
use crate::error::{ensure_finite, IplError, Result};

/// Residuals above this are treated as divergence.
const DIVERGENCE_LIMIT: f64 = 1e12;

/// Solver settings. `alpha` and `beta` default to values scaled to the
/// problem, see [`AdmmConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub newton_max_iters: usize,
    pub newton_tol: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            alpha: None,
            beta: None,
            max_iters: 5000,
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            newton_max_iters: 50,
            newton_tol: 1e-12,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(IplError::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        if let Some(a) = self.alpha {
            positive(a, "alpha")?;
        }
        if let Some(b) = self.beta {
            positive(b, "beta")?;
        }
        positive(self.tol_primal, "tol_primal")?;
        positive(self.tol_dual, "tol_dual")?;
        positive(self.newton_tol, "newton_tol")?;
        if self.max_iters == 0 || self.newton_max_iters == 0 {
            return Err(IplError::InvalidParameter("iteration limits must be positive".into()));
        }
        Ok(())
    }

    /// Effective `(alpha, beta)` for a `T x n` matrix `A`:
    /// `beta = 1/T` matches the curvature scale of the `1/T`-weighted loss,
    /// `alpha = 1e-12 * beta * trace(A'A) / n` keeps the proximal term far
    /// below the smallest curvature direction of typical kernel matrices.
    pub fn resolve(&self, a: &DMatrix<f64>) -> (f64, f64) {
        let t = a.nrows().max(1) as f64;
        let n = a.ncols().max(1) as f64;
        let beta = self.beta.unwrap_or(1.0 / t);
        let alpha = self.alpha.unwrap_or_else(|| {
            let trace = a.norm_squared();
            let scale = if trace > 0.0 { trace / n } else { 1.0 };
            1e-12 * beta * scale
        });
        (alpha, beta)
    }
}

/// Diagnostics from one ADMM run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub iterations: usize,
    pub converged: bool,
    pub alpha: f64,
    pub beta: f64,
    /// `|A u - v|_2` after the final iteration.
    pub primal_residual: f64,
    /// `beta |v+ - v|_2` after the final iteration.
    pub dual_residual: f64,
    /// Mean loss at `u = 0`.
    pub initial_objective: f64,
    /// Mean loss `(1/T) sum phi((A u^k)_i, y_i)` per iteration.
    pub objective_trace: Vec<f64>,
    pub primal_trace: Vec<f64>,
    pub dual_trace: Vec<f64>,
    pub wall_time_secs: f64,
}

impl FitReport {
    pub fn final_objective(&self) -> f64 {
        self.objective_trace
            .last()
            .copied()
            .unwrap_or(self.initial_objective)
    }
}

/// Factorization of `beta A'A + alpha I` shared by every `u` step.
///
/// The upper-triangular factor `R` (with `R'R = beta A'A + alpha I`) is
/// taken from a thin QR of the stacked matrix `[sqrt(beta) A; sqrt(alpha) I]`,
/// so `A'A` is never formed and the conditioning of the solve is that of
/// `A` rather than `A'A`.
#[derive(Debug, Clone)]
pub struct UStep {
    q_top: DMatrix<f64>,
    q_bottom: DMatrix<f64>,
    r: DMatrix<f64>,
    alpha: f64,
    beta: f64,
}

impl UStep {
    pub fn new(a: &DMatrix<f64>, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(IplError::InvalidParameter(
                "alpha and beta must be positive".into(),
            ));
        }
        ensure_finite(a.as_slice(), "kernel matrix")?;
        let (t, n) = a.shape();
        let mut stacked = DMatrix::zeros(t + n, n);
        stacked.view_mut((0, 0), (t, n)).copy_from(&(a * beta.sqrt()));
        for j in 0..n {
            stacked[(t + j, j)] = alpha.sqrt();
        }
        let qr = stacked.qr();
        let q = qr.q();
        let r = qr.r();
        if r.diagonal().iter().any(|d| !d.is_finite() || *d == 0.0) {
            return Err(IplError::Factorization("u-step factor is singular"));
        }
        Ok(Self {
            q_top: q.rows(0, t).into_owned(),
            q_bottom: q.rows(t, n).into_owned(),
            r,
            alpha,
            beta,
        })
    }

    /// `(beta A'A + alpha I)^-1 [alpha u + beta A'v - A'w]`.
    pub fn apply(&self, u_prev: &DVector<f64>, v: &DVector<f64>, w: &DVector<f64>) -> Result<DVector<f64>> {
        let scaled = (v * self.beta - w) / self.beta.sqrt();
        let rhs = self.q_top.tr_mul(&scaled) + self.q_bottom.tr_mul(&(u_prev * self.alpha.sqrt()));
        self.r
            .solve_upper_triangular(&rhs)
            .ok_or(IplError::Factorization("triangular solve"))
    }
}

/// One proximal `u` update, factorizing from scratch.
pub fn u_update(
    u_prev: &DVector<f64>,
    v: &DVector<f64>,
    w: &DVector<f64>,
    a: &DMatrix<f64>,
    alpha: f64,
    beta: f64,
) -> Result<DVector<f64>> {
    check_len(a.ncols(), u_prev.len(), "u")?;
    check_len(a.nrows(), v.len(), "v")?;
    check_len(a.nrows(), w.len(), "w")?;
    UStep::new(a, alpha, beta)?.apply(u_prev, v, w)
}

/// Per-coordinate `v` update for twice differentiable losses: solves
/// `(1/T) phi'(v_i, y_i) + beta (v_i - b_i) = 0` for every `i`.
///
/// Squared loss has the closed form `(2 y_i / T + beta b_i) / (2/T + beta)`.
/// Logistic loss runs Newton from `v_i = b_i`; if Newton fails to settle it
/// falls back to bisection on `[b_i - 1/(T beta), b_i + 1/(T beta)]`, which
/// brackets the root because `|phi'| <= 1`.
pub fn v_update_newton(
    b: &[f64],
    y: &[f64],
    loss: LossKind,
    t: usize,
    beta: f64,
    cfg: &AdmmConfig,
) -> Result<Vec<f64>> {
    check_len(b.len(), y.len(), "targets")?;
    let t = t as f64;
    match loss {
        LossKind::Squared => Ok(b
            .iter()
            .zip(y)
            .map(|(&bi, &yi)| (2.0 * yi / t + beta * bi) / (2.0 / t + beta))
            .collect()),
        LossKind::Logistic => {
            check_labels(y)?;
            Ok(b.par_iter()
                .zip(y.par_iter())
                .map(|(&bi, &yi)| logistic_coordinate(bi, yi, t, beta, cfg))
                .collect())
        }
        LossKind::Hinge => Err(IplError::InvalidParameter(
            "hinge loss is not differentiable; use the proximal update".into(),
        )),
    }
}

fn logistic_coordinate(b: f64, y: f64, t: f64, beta: f64, cfg: &AdmmConfig) -> f64 {
    let grad = |v: f64| LossKind::Logistic.derivative(v, y) / t + beta * (v - b);
    let mut v = b;
    for _ in 0..cfg.newton_max_iters {
        let s = super::loss::sigmoid(y * v);
        let num = y / t * (s - 1.0) + beta * (v - b);
        let den = s * (1.0 - s) / t + beta;
        let step = num / den;
        if !step.is_finite() {
            break;
        }
        v -= step;
        if step.abs() <= cfg.newton_tol * (1.0 + v.abs()) {
            return v;
        }
    }
    // bisection fallback
    let radius = 1.0 / (t * beta);
    let (mut lo, mut hi) = (b - radius, b + radius);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if grad(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= cfg.newton_tol * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Exact minimizer of `(1/T) max(0, 1 - y_i v) + beta/2 (v - b_i)^2`.
///
/// With `mu = 1/(T beta)` and `a = y_i b_i`: `v = b_i` when `a >= 1`,
/// `v = b_i + mu y_i` when `a <= 1 - mu`, otherwise `v = y_i` (the kink).
pub fn v_update_prox_hinge(b: &[f64], y: &[f64], t: usize, beta: f64) -> Result<Vec<f64>> {
    check_len(b.len(), y.len(), "targets")?;
    check_labels(y)?;
    let mu = 1.0 / (t as f64 * beta);
    Ok(b.iter()
        .zip(y)
        .map(|(&bi, &yi)| hinge_prox(bi, yi, mu))
        .collect())
}

#[inline]
pub(crate) fn hinge_prox(b: f64, y: f64, mu: f64) -> f64 {
    let a = y * b;
    if a >= 1.0 {
        b
    } else if a <= 1.0 - mu {
        b + mu * y
    } else {
        y
    }
}

/// `w + beta (A u - v)`, given `A u` precomputed.
pub fn w_update(w: &DVector<f64>, au: &DVector<f64>, v: &DVector<f64>, beta: f64) -> Result<DVector<f64>> {
    check_len(w.len(), au.len(), "A u")?;
    check_len(w.len(), v.len(), "v")?;
    Ok(w + (au - v) * beta)
}

fn check_len(expected: usize, found: usize, context: &'static str) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(IplError::DimensionMismatch {
            expected,
            found,
            context,
        })
    }
}

/// Runs ADMM until both residuals satisfy
/// `|Au - v| <= tol_primal sqrt(T)` and `beta |v+ - v| <= tol_dual sqrt(T)`,
/// or `max_iters` is reached.
pub fn fit_admm(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    loss: LossKind,
    cfg: &AdmmConfig,
) -> Result<(DVector<f64>, FitReport)> {
    let start = Instant::now();
    cfg.validate()?;
    let (t, n) = a.shape();
    check_len(t, y.len(), "targets")?;
    ensure_finite(a.as_slice(), "kernel matrix")?;
    ensure_finite(y.as_slice(), "targets")?;
    if t == 0 || n == 0 {
        return Err(IplError::Empty("ADMM needs a non-empty kernel matrix"));
    }
    if loss.is_classification() {
        check_labels(y.as_slice())?;
    }
    if t < n {
        log::warn!("ADMM problem has fewer rows ({t}) than unknowns ({n})");
    }
    let (alpha, beta) = cfg.resolve(a);
    let ustep = UStep::new(a, alpha, beta)?;

    let mut u = DVector::zeros(n);
    let mut v = DVector::zeros(t);
    let mut w = DVector::zeros(t);
    let scale = (t as f64).sqrt();
    let initial_objective = loss.mean(&vec![0.0; t], y.as_slice());

    let mut objective_trace = Vec::new();
    let mut primal_trace = Vec::new();
    let mut dual_trace = Vec::new();
    let mut converged = false;

    for iter in 0..cfg.max_iters {
        u = ustep.apply(&u, &v, &w)?;
        let au = a * &u;
        let b: Vec<f64> = au.iter().zip(w.iter()).map(|(x, wi)| x + wi / beta).collect();
        let v_next = DVector::from_vec(match loss {
            LossKind::Hinge => v_update_prox_hinge(&b, y.as_slice(), t, beta)?,
            _ => v_update_newton(&b, y.as_slice(), loss, t, beta, cfg)?,
        });
        let primal = (&au - &v_next).norm();
        let dual = beta * (&v_next - &v).norm();
        w = w_update(&w, &au, &v_next, beta)?;
        v = v_next;

        objective_trace.push(loss.mean(au.as_slice(), y.as_slice()));
        primal_trace.push(primal);
        dual_trace.push(dual);

        if !primal.is_finite() || !dual.is_finite() || primal > DIVERGENCE_LIMIT {
            return Err(IplError::Diverged {
                iteration: iter + 1,
                residual: primal,
            });
        }
        if primal <= cfg.tol_primal * scale && dual <= cfg.tol_dual * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        log::info!(
            "ADMM stopped at max_iters={} (primal {:e}, dual {:e})",
            cfg.max_iters,
            primal_trace.last().copied().unwrap_or(f64::NAN),
            dual_trace.last().copied().unwrap_or(f64::NAN)
        );
    }
    let report = FitReport {
        iterations: objective_trace.len(),
        converged,
        alpha,
        beta,
        primal_residual: primal_trace.last().copied().unwrap_or(0.0),
        dual_residual: dual_trace.last().copied().unwrap_or(0.0),
        initial_objective,
        objective_trace,
        primal_trace,
        dual_trace,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    Ok((u, report))
}
