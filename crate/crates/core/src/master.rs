//! One-class SVM master: accepts a slave output when its feature vector
//! falls inside the region learned from correctly classified training
//! snapshots.
//!
//! The dual problem
//!
//! ```text
//! min  1/2 * sum_ij a_i a_j K(x_i, x_j)
//! s.t. 0 <= a_i <= 1 / (nu * N),  sum_i a_i = 1
//! ```
//!
//! is solved by pairwise coordinate descent (SMO) with maximal-violating
//! pair selection; the decision function is
//! `f(x) = sum_i a_i K(x_i, x) - rho` and `f(x) >= 0` accepts.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TeaserError};

pub const DEFAULT_NU: f64 = 0.05;
pub const DEFAULT_GAMMA_GRID: [f64; 7] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
pub const KKT_TOLERANCE: f64 = 1e-4;
pub const MAX_PAIR_UPDATES: usize = 100_000;

const TAU: f64 = 1e-12;

pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(TeaserError::InvalidArgument(format!(
            "kernel dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(TeaserError::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    Ok(rbf(x, y, gamma))
}

#[inline]
fn rbf(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * sq).exp()
}

/// Solution of the one-class dual on the full training set.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub upper_bound: f64,
    pub objective: f64,
    /// Final maximal KKT violation `max G_low - min G_up`.
    pub kkt_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// SMO on the one-class dual. `features` must be non-empty.
pub fn solve_dual(features: &[Vec<f64>], nu: f64, gamma: f64) -> DualSolution {
    let n = features.len();
    let c = 1.0 / (nu * n as f64);
    let kernel: Vec<Vec<f64>> = features
        .iter()
        .map(|x| features.iter().map(|y| rbf(x, y, gamma)).collect())
        .collect();

    let mut alphas = vec![0.0; n];
    let mut remaining = 1.0;
    for a in alphas.iter_mut() {
        if remaining <= 0.0 {
            break;
        }
        *a = c.min(remaining);
        remaining -= *a;
    }
    let mut grad: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| kernel[i][j] * alphas[j]).sum())
        .collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut kkt_gap = 0.0;
    while iterations < MAX_PAIR_UPDATES {
        // `up` may still grow, `low` may still shrink.
        let Some(up) = (0..n)
            .filter(|&i| alphas[i] < c)
            .min_by(|&a, &b| grad[a].total_cmp(&grad[b]))
        else {
            converged = true;
            break;
        };
        let max_low = (0..n)
            .filter(|&j| alphas[j] > 0.0)
            .map(|j| grad[j])
            .fold(f64::NEG_INFINITY, f64::max);
        kkt_gap = max_low - grad[up];
        if kkt_gap < KKT_TOLERANCE {
            converged = true;
            break;
        }
        let low = (0..n)
            .filter(|&j| alphas[j] > 0.0 && grad[j] > grad[up])
            .max_by(|&a, &b| {
                let gain = |j: usize| {
                    let diff = grad[j] - grad[up];
                    diff * diff / curvature(&kernel, up, j)
                };
                gain(a).total_cmp(&gain(b)).then(b.cmp(&a))
            })
            .unwrap();

        let step = (grad[low] - grad[up]) / curvature(&kernel, up, low);
        let room_up = c - alphas[up];
        let room_low = alphas[low];
        let t = step.min(room_up).min(room_low);
        if t == room_up {
            alphas[up] = c;
        } else {
            alphas[up] += t;
        }
        if t == room_low {
            alphas[low] = 0.0;
        } else {
            alphas[low] -= t;
        }
        for (k, g) in grad.iter_mut().enumerate() {
            *g += t * (kernel[k][up] - kernel[k][low]);
        }
        iterations += 1;
    }

    let objective = 0.5 * alphas.iter().zip(&grad).map(|(a, g)| a * g).sum::<f64>();
    DualSolution {
        alphas,
        upper_bound: c,
        objective,
        kkt_gap,
        iterations,
        converged,
    }
}

fn curvature(kernel: &[Vec<f64>], i: usize, j: usize) -> f64 {
    let eta = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
    if eta > TAU {
        eta
    } else {
        TAU
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneClassSvm {
    pub support: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub rho: f64,
    pub gamma: f64,
    pub nu: f64,
    pub n_train: usize,
    pub converged: bool,
}

impl OneClassSvm {
    /// `sum_i a_i K(x_i, x)` over the support vectors.
    pub fn kernel_sum(&self, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.alphas)
            .map(|(s, a)| a * rbf(s, x, self.gamma))
            .sum()
    }

    pub fn upper_bound(&self) -> f64 {
        1.0 / (self.nu * self.n_train as f64)
    }

    pub fn dual_objective(&self) -> f64 {
        0.5 * self
            .support
            .iter()
            .zip(&self.alphas)
            .map(|(s, a)| a * self.kernel_sum(s))
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MasterModel {
    /// Fallback when fewer than two positive samples were available.
    AcceptAll { dim: usize },
    OneClass(OneClassSvm),
}

impl MasterModel {
    pub fn train(features: &[Vec<f64>], nu: f64, gamma: f64) -> Result<MasterModel> {
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(TeaserError::InvalidArgument(format!("nu must lie in (0, 1], got {nu}")));
        }
        if gamma.is_nan() || gamma <= 0.0 {
            return Err(TeaserError::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        let dim = features.first().map_or(0, Vec::len);
        if features.iter().any(|f| f.len() != dim) {
            return Err(TeaserError::InvalidArgument("feature vectors differ in length".into()));
        }
        if features.len() < 2 {
            return Ok(MasterModel::AcceptAll { dim });
        }

        let sol = solve_dual(features, nu, gamma);
        let (support, alphas): (Vec<Vec<f64>>, Vec<f64>) = features
            .iter()
            .zip(&sol.alphas)
            .filter(|(_, &a)| a > 0.0)
            .map(|(f, &a)| (f.clone(), a))
            .unzip();
        let mut svm = OneClassSvm {
            support,
            alphas,
            rho: 0.0,
            gamma,
            nu,
            n_train: features.len(),
            converged: sol.converged,
        };

        let c = sol.upper_bound;
        let margin: Vec<f64> = svm
            .support
            .iter()
            .zip(&svm.alphas)
            .filter(|(_, &a)| a < c)
            .map(|(s, _)| svm.kernel_sum(s))
            .collect();
        svm.rho = if margin.is_empty() {
            svm.support
                .iter()
                .map(|s| svm.kernel_sum(s))
                .fold(f64::INFINITY, f64::min)
        } else {
            margin.iter().sum::<f64>() / margin.len() as f64
        };
        Ok(MasterModel::OneClass(svm))
    }

    pub fn dim(&self) -> usize {
        match self {
            MasterModel::AcceptAll { dim } => *dim,
            MasterModel::OneClass(svm) => svm.support[0].len(),
        }
    }

    pub fn is_fallback(&self) -> bool {
        matches!(self, MasterModel::AcceptAll { .. })
    }

    /// Decision value `f(x)`; the fallback model scores everything 0.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(TeaserError::InvalidArgument(format!(
                "master expects {} features, got {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(match self {
            MasterModel::AcceptAll { .. } => 0.0,
            MasterModel::OneClass(svm) => svm.kernel_sum(x) - svm.rho,
        })
    }

    pub fn decide(&self, x: &[f64]) -> Result<bool> {
        self.score(x).map(|f| f >= 0.0)
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            MasterModel::AcceptAll { .. } => None,
            MasterModel::OneClass(svm) => Some(svm.gamma),
        }
    }
}

/// Outcome of the gamma search: the winning width, its score and the master
/// trained with it.
#[derive(Debug, Clone)]
pub struct GammaSelection {
    pub gamma: f64,
    pub objective: f64,
    pub model: MasterModel,
}

/// Picks the gamma maximizing `accepted(correct) - accepted(incorrect)`,
/// with ties going to the smallest gamma.
pub fn select_gamma(
    correct: &[Vec<f64>],
    incorrect: &[Vec<f64>],
    nu: f64,
    grid: &[f64],
) -> Result<GammaSelection> {
    if correct.is_empty() {
        return Err(TeaserError::InvalidArgument("no correctly classified samples".into()));
    }
    if grid.is_empty() {
        return Err(TeaserError::InvalidArgument("empty gamma grid".into()));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let accepted = |model: &MasterModel, xs: &[Vec<f64>]| -> Result<f64> {
        if xs.is_empty() {
            return Ok(0.0);
        }
        let mut n = 0;
        for x in xs {
            if model.decide(x)? {
                n += 1;
            }
        }
        Ok(n as f64 / xs.len() as f64)
    };

    let mut best: Option<GammaSelection> = None;
    for gamma in grid {
        let model = MasterModel::train(correct, nu, gamma)?;
        let objective = accepted(&model, correct)? - accepted(&model, incorrect)?;
        if best.as_ref().is_none_or(|b| objective > b.objective) {
            best = Some(GammaSelection {
                gamma,
                objective,
                model,
            });
        }
    }
    Ok(best.unwrap())
}
