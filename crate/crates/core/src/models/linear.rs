//! Poisson GLM (log link, IRLS) and ElasticNet (cyclic coordinate descent).
//!
//! Both work on standardized columns; constant columns are left out of the
//! solve and keep a zero coefficient.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::linalg::solve_spd;
use super::{DesignMatrix, Family, Hyperparams, ModelParams, ScalerParams, TrainedModel, SCHEMA_VERSION};
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonParams {
    /// Ridge weight on the slopes (intercept unpenalized).
    pub l2: f64,
    /// Convergence threshold on the change in penalized deviance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PoissonParams {
    fn default() -> Self {
        PoissonParams { l2: 1e-6, tol: 1e-8, max_iter: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoissonDiagnostics {
    /// Penalized deviance `D + 2 l2 |beta|^2` after the start point and each accepted step.
    pub deviance_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Euclidean norm of the penalized log-likelihood gradient at the solution.
    pub gradient_norm: f64,
}

fn active_columns(scaler: &ScalerParams) -> Vec<usize> {
    (0..scaler.constant_flags.len()).filter(|&j| !scaler.constant_flags[j]).collect()
}

fn poisson_deviance(y: &[f64], eta: &[f64]) -> f64 {
    2.0 * y
        .iter()
        .zip(eta)
        .map(|(&yi, &e)| {
            let mu = math::exp(e);
            let t = if yi > 0.0 { yi * (math::ln(yi) - e) } else { 0.0 };
            t - (yi - mu)
        })
        .sum::<f64>()
}

pub fn fit_poisson(data: &DesignMatrix, params: &PoissonParams) -> Result<TrainedModel> {
    fit_poisson_detailed(data, params).map(|(m, _)| m)
}

/// Maximizes `sum(y*eta - exp(eta)) - l2*|beta|^2` by Newton/IRLS steps with
/// step halving on the penalized deviance.
pub fn fit_poisson_detailed(data: &DesignMatrix, params: &PoissonParams) -> Result<(TrainedModel, PoissonDiagnostics)> {
    if !(params.l2 >= 0.0) || !(params.tol > 0.0) {
        return Err(Error::domain("poisson needs l2 >= 0 and tol > 0"));
    }
    let y = data.targets();
    if y.iter().any(|v| *v < 0.0) {
        return Err(Error::domain("poisson targets must be non-negative"));
    }
    let ybar = y.iter().sum::<f64>() / y.len() as f64;
    if ybar <= 0.0 {
        return Err(Error::domain("all targets are zero; the poisson intercept is unbounded below"));
    }
    let scaler = ScalerParams::fit(data);
    let active = active_columns(&scaler);
    let z: Vec<Vec<f64>> =
        scaler.transform_matrix(data).into_iter().map(|r| active.iter().map(|&j| r[j]).collect()).collect();
    let q = active.len() + 1;

    // theta[0] intercept, theta[1..] active slopes
    let mut theta = alloc::vec![0.0; q];
    theta[0] = math::ln(ybar);
    let eta_of = |th: &[f64]| -> Vec<f64> {
        z.iter().map(|r| th[0] + r.iter().zip(&th[1..]).map(|(a, b)| a * b).sum::<f64>()).collect()
    };
    let penalized = |th: &[f64], eta: &[f64]| {
        poisson_deviance(y, eta) + 2.0 * params.l2 * th[1..].iter().map(|b| b * b).sum::<f64>()
    };
    // gradient of the penalized negative log-likelihood and its Hessian
    let grad_hess = |th: &[f64], eta: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut g = alloc::vec![0.0; q];
        let mut h = alloc::vec![0.0; q * q];
        let mut xi = alloc::vec![0.0; q];
        for (i, r) in z.iter().enumerate() {
            let mu = math::exp(eta[i]);
            xi[0] = 1.0;
            xi[1..].copy_from_slice(r);
            for a in 0..q {
                g[a] += (mu - y[i]) * xi[a];
                for b in 0..=a {
                    h[a * q + b] += mu * xi[a] * xi[b];
                }
            }
        }
        for a in 1..q {
            g[a] += 2.0 * params.l2 * th[a];
            h[a * q + a] += 2.0 * params.l2;
        }
        for a in 0..q {
            for b in (a + 1)..q {
                h[a * q + b] = h[b * q + a];
            }
        }
        (g, h)
    };

    let mut eta = eta_of(&theta);
    let mut dev = penalized(&theta, &eta);
    let mut trace = alloc::vec![dev];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iter {
        iterations += 1;
        let (g, h) = grad_hess(&theta, &eta);
        let step =
            solve_spd(&h, &g, q).ok_or_else(|| Error::Numeric("singular weighted system in poisson IRLS".into()))?;
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t - scale * s).collect();
            let cand_eta = eta_of(&cand);
            let cand_dev = penalized(&cand, &cand_eta);
            if cand_dev.is_finite() && cand_dev <= dev {
                accepted = Some((cand, cand_eta, cand_dev));
                break;
            }
            scale *= 0.5;
        }
        let Some((cand, cand_eta, cand_dev)) = accepted else {
            // No descent left at floating-point resolution.
            converged = true;
            break;
        };
        let change = dev - cand_dev;
        theta = cand;
        eta = cand_eta;
        dev = cand_dev;
        trace.push(dev);
        if change < params.tol {
            converged = true;
            break;
        }
    }
    let (g, _) = grad_hess(&theta, &eta);
    let gradient_norm = math::sqrt(g.iter().map(|v| v * v).sum());

    let mut coefficients = alloc::vec![0.0; scaler.means.len()];
    for (k, &j) in active.iter().enumerate() {
        coefficients[j] = theta[k + 1];
    }
    let model = TrainedModel {
        schema_version: SCHEMA_VERSION,
        family: Family::Poisson,
        feature_names: data.names().to_vec(),
        scaler,
        params: ModelParams::Linear { intercept: theta[0], coefficients },
        hyperparams: Hyperparams::Poisson(*params),
        seed: 0,
    };
    Ok((model, PoissonDiagnostics { deviance_trace: trace, iterations, converged, gradient_norm }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticNetParams {
    pub alpha: f64,
    /// 1 is pure lasso, 0 pure ridge.
    pub l1_ratio: f64,
    /// Stop when no coefficient moves more than this in a sweep.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for ElasticNetParams {
    fn default() -> Self {
        ElasticNetParams { alpha: 1.0, l1_ratio: 0.5, tol: 1e-7, max_sweeps: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticNetDiagnostics {
    /// Objective at the start and after every sweep.
    pub objective_trace: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

pub fn fit_elasticnet(data: &DesignMatrix, params: &ElasticNetParams) -> Result<TrainedModel> {
    fit_elasticnet_detailed(data, params).map(|(m, _)| m)
}

/// Minimizes `(1/2n)|y - b0 - Z b|^2 + alpha*(l1*|b|_1 + (1-l1)/2*|b|^2)` on
/// standardized `Z` by cyclic coordinate descent.
pub fn fit_elasticnet_detailed(
    data: &DesignMatrix,
    params: &ElasticNetParams,
) -> Result<(TrainedModel, ElasticNetDiagnostics)> {
    if !(params.alpha >= 0.0) || !(0.0..=1.0).contains(&params.l1_ratio) || !(params.tol > 0.0) {
        return Err(Error::domain("elasticnet needs alpha >= 0, l1_ratio in [0, 1], tol > 0"));
    }
    let scaler = ScalerParams::fit(data);
    let active = active_columns(&scaler);
    let z = scaler.transform_matrix(data);
    let y = data.targets();
    let n = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    let p = scaler.means.len();

    let l1 = params.alpha * params.l1_ratio;
    let l2 = params.alpha * (1.0 - params.l1_ratio);
    let col_sq: Vec<f64> = (0..p).map(|j| z.iter().map(|r| r[j] * r[j]).sum::<f64>() / n).collect();
    let mut beta = alloc::vec![0.0; p];
    let mut resid: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let objective = |beta: &[f64], resid: &[f64]| {
        resid.iter().map(|r| r * r).sum::<f64>() / (2.0 * n)
            + l1 * beta.iter().map(|b| math::abs(*b)).sum::<f64>()
            + l2 / 2.0 * beta.iter().map(|b| b * b).sum::<f64>()
    };

    let mut trace = alloc::vec![objective(&beta, &resid)];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < params.max_sweeps {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for &j in &active {
            let rho = z.iter().zip(&resid).map(|(r, e)| r[j] * e).sum::<f64>() / n + col_sq[j] * beta[j];
            let new = soft_threshold(rho, l1) / (col_sq[j] + l2);
            let delta = new - beta[j];
            if delta != 0.0 {
                for (e, r) in resid.iter_mut().zip(&z) {
                    *e -= r[j] * delta;
                }
                beta[j] = new;
                max_change = max_change.max(math::abs(delta));
            }
        }
        trace.push(objective(&beta, &resid));
        if max_change < params.tol {
            converged = true;
            break;
        }
    }

    let model = TrainedModel {
        schema_version: SCHEMA_VERSION,
        family: Family::ElasticNet,
        feature_names: data.names().to_vec(),
        scaler,
        params: ModelParams::Linear { intercept: ybar, coefficients: beta },
        hyperparams: Hyperparams::ElasticNet(*params),
        seed: 0,
    };
    Ok((model, ElasticNetDiagnostics { objective_trace: trace, sweeps, converged }))
}
