//! Binary logistic regression over sparse named features.
//!
//! The model family is fixed: L2-regularized log-loss with no intercept, so
//! an all-zero weight vector predicts exactly 0.5 everywhere and class
//! balance can only enter through the features. Training minimizes
//!
//! ```text
//! J(w) = (1/C) · ½‖w‖² + Σᵢ log(1 + exp(−ỹᵢ·w·xᵢ))
//! ```
//!
//! with a deterministic full-batch L-BFGS (history 10, Armijo backtracking)
//! to gradient-norm 1e-6 or 1000 iterations. `C` is the inverse
//! regularization constant: small C means strong regularization.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{vectorize, FeatureSpace, FeatureVector};
use crate::text;

pub const DEFAULT_C: f64 = 0.1;
pub const GRAD_TOLERANCE: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 1000;
const LBFGS_MEMORY: usize = 10;

/// The default cross-validation grid: 10^-3 … 10^2.
pub const DEFAULT_C_GRID: &[f64] = &[0.001, 0.01, 0.1, 1.0, 10.0, 100.0];

type SparseRow = Vec<(usize, f64)>;

/// A trained acceptability model: a weight per feature name, no bias term.
/// Immutable after training and safe to share across threads.
#[derive(Debug, Clone)]
pub struct AcceptabilityModel {
    space: FeatureSpace,
    weights: Vec<f64>,
    meta: TrainMeta,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainMeta {
    pub c: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    pub feature_space_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    /// Objective value per iteration, including the starting point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objective_history: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    weights: BTreeMap<String, f64>,
    metadata: TrainMeta,
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// log(1 + e^x), stable for large |x|.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn dot(row: &SparseRow, w: &[f64]) -> f64 {
    row.iter().map(|&(i, v)| w[i] * v).sum()
}

/// Regularized log-loss objective and its gradient at `w`. Exposed so the
/// analytic gradient can be checked against finite differences.
pub fn objective_and_gradient(
    examples: &[(FeatureVector, u8)],
    space: &FeatureSpace,
    weights: &[f64],
    c: f64,
) -> Result<(f64, Vec<f64>)> {
    if weights.len() != space.len() {
        return Err(Error::InvalidInput(format!(
            "weight vector length {} does not match feature space size {}",
            weights.len(),
            space.len()
        )));
    }
    let rows: Vec<SparseRow> = examples
        .iter()
        .map(|(v, _)| vectorize(space, v).0)
        .collect();
    let labels: Vec<u8> = examples.iter().map(|&(_, y)| y).collect();
    Ok(objective_and_gradient_sparse(&rows, &labels, weights, c))
}

fn objective_and_gradient_sparse(
    rows: &[SparseRow],
    labels: &[u8],
    w: &[f64],
    c: f64,
) -> (f64, Vec<f64>) {
    let reg = 1.0 / c;
    let mut obj = 0.5 * reg * w.iter().map(|x| x * x).sum::<f64>();
    let mut grad: Vec<f64> = w.iter().map(|x| reg * x).collect();
    for (row, &y) in rows.iter().zip(labels) {
        let z = dot(row, w);
        let y_sign = if y == 1 { 1.0 } else { -1.0 };
        obj += softplus(-y_sign * z);
        let residual = sigmoid(z) - y as f64;
        for &(i, v) in row {
            grad[i] += residual * v;
        }
    }
    (obj, grad)
}

/// L-BFGS with Armijo backtracking; returns weights and the objective trace.
fn minimize(rows: &[SparseRow], labels: &[u8], dim: usize, c: f64) -> (Vec<f64>, TrainStats) {
    let mut w = vec![0.0; dim];
    let (mut obj, mut grad) = objective_and_gradient_sparse(rows, labels, &w, c);
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new(); // (s, y, 1/s·y)
    let mut trace = vec![obj];
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm <= GRAD_TOLERANCE {
            converged = true;
            break;
        }
        iterations += 1;

        // Two-loop recursion.
        let mut d: Vec<f64> = grad.iter().map(|g| -g).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let alpha = rho * s.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= alpha * yi;
            }
            alphas.push(alpha);
        }
        if let Some((s, y, _)) = history.last() {
            let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
            let yy: f64 = y.iter().map(|x| x * x).sum();
            if yy > 0.0 {
                let gamma = sy / yy;
                for di in d.iter_mut() {
                    *di *= gamma;
                }
            }
        }
        for ((s, y, rho), alpha) in history.iter().zip(alphas.into_iter().rev()) {
            let beta = rho * y.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
            for (di, si) in d.iter_mut().zip(s) {
                *di += (alpha - beta) * si;
            }
        }

        let mut slope: f64 = grad.iter().zip(&d).map(|(g, di)| g * di).sum();
        if slope >= 0.0 {
            // Not a descent direction; restart from steepest descent.
            history.clear();
            d = grad.iter().map(|g| -g).collect();
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
        }

        // Armijo backtracking line search.
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let w_new: Vec<f64> = w.iter().zip(&d).map(|(wi, di)| wi + step * di).collect();
            let (obj_new, grad_new) = objective_and_gradient_sparse(rows, labels, &w_new, c);
            if obj_new <= obj + 1e-4 * step * slope {
                accepted = Some((w_new, obj_new, grad_new));
                break;
            }
            step *= 0.5;
        }
        let Some((w_new, obj_new, grad_new)) = accepted else {
            break; // no decrease possible at machine precision
        };

        let s: Vec<f64> = w_new.iter().zip(&w).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = grad_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            if history.len() == LBFGS_MEMORY {
                history.remove(0);
            }
            history.push((s, y, 1.0 / sy));
        }
        w = w_new;
        obj = obj_new;
        grad = grad_new;
        trace.push(obj);
    }

    (
        w,
        TrainStats {
            iterations,
            final_objective: obj,
            converged,
            trace,
        },
    )
}

struct TrainStats {
    iterations: usize,
    final_objective: f64,
    converged: bool,
    trace: Vec<f64>,
}

/// Train on labeled feature vectors with inverse regularization constant `C`.
pub fn train(examples: &[(FeatureVector, u8)], c: f64) -> Result<AcceptabilityModel> {
    if examples.is_empty() {
        return Err(Error::InvalidInput("no training examples".into()));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidInput(format!("C must be positive, got {c}")));
    }
    let mut has = [false, false];
    for (v, y) in examples {
        if *y > 1 {
            return Err(Error::InvalidInput(format!("label {y} is not binary")));
        }
        has[*y as usize] = true;
        if v.values().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
    }
    if !(has[0] && has[1]) {
        return Err(Error::DegenerateData(
            "training data contains a single class".into(),
        ));
    }

    let space = FeatureSpace::fit(examples.iter().map(|(v, _)| v));
    let rows: Vec<SparseRow> = examples
        .iter()
        .map(|(v, _)| vectorize(&space, v).0)
        .collect();
    let labels: Vec<u8> = examples.iter().map(|&(_, y)| y).collect();
    let (weights, stats) = minimize(&rows, &labels, space.len(), c);

    let hash = space.fingerprint();
    Ok(AcceptabilityModel {
        space,
        weights,
        meta: TrainMeta {
            c,
            tolerance: GRAD_TOLERANCE,
            iterations: stats.iterations,
            final_objective: stats.final_objective,
            converged: stats.converged,
            feature_space_hash: hash,
            seed: None,
            config_hash: None,
            objective_history: stats.trace,
        },
    })
}

impl AcceptabilityModel {
    /// Build directly from a weight map (fixtures, hand-set models).
    pub fn from_weights(weights: BTreeMap<String, f64>) -> AcceptabilityModel {
        let space = FeatureSpace::from_names(weights.keys().cloned().collect());
        let w: Vec<f64> = space
            .names()
            .iter()
            .map(|n| weights[n])
            .collect();
        let hash = space.fingerprint();
        AcceptabilityModel {
            space,
            weights: w,
            meta: TrainMeta {
                c: 0.0,
                tolerance: 0.0,
                iterations: 0,
                final_objective: 0.0,
                converged: true,
                feature_space_hash: hash,
                seed: None,
                config_hash: None,
                objective_history: Vec::new(),
            },
        }
    }

    /// Endorsement probability for a feature vector. Names absent from the
    /// trained space contribute nothing, so an all-unseen vector scores 0.5.
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        let mut z = 0.0;
        for (name, &v) in x {
            if let Some(i) = self.space.index_of(name) {
                z += self.weights[i] * v;
            }
        }
        sigmoid(z)
    }

    pub fn weight(&self, name: &str) -> Option<f64> {
        self.space.index_of(name).map(|i| self.weights[i])
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn meta(&self) -> &TrainMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut TrainMeta {
        &mut self.meta
    }

    /// Weight map in sorted name order.
    pub fn weight_map(&self) -> BTreeMap<String, f64> {
        self.space
            .names()
            .iter()
            .cloned()
            .zip(self.weights.iter().copied())
            .collect()
    }

    /// Serialize to JSON: the weight map plus a metadata block.
    pub fn to_json<W: Write>(&self, mut w: W) -> Result<()> {
        let file = ModelFile {
            weights: self.weight_map(),
            metadata: self.meta.clone(),
        };
        serde_json::to_writer_pretty(&mut w, &file)?;
        writeln!(w)?;
        Ok(())
    }

    /// Load a model file. Returns the model and whether the stored
    /// feature-space hash matches the recomputed one; a mismatch is a
    /// warning for the caller, not an error.
    pub fn from_json<R: BufRead>(r: R) -> Result<(AcceptabilityModel, bool)> {
        let file: ModelFile = serde_json::from_reader(r)?;
        let mut model = AcceptabilityModel::from_weights(file.weights);
        let hash_ok = model.space.fingerprint() == file.metadata.feature_space_hash;
        model.meta = file.metadata;
        Ok((model, hash_ok))
    }
}

/// Cross-validation outcome over a C grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    pub best_c: f64,
    pub per_c: Vec<CvEntry>,
    pub folds: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvEntry {
    pub c: f64,
    pub mean_auc: f64,
    pub fold_aucs: Vec<f64>,
}

/// 5-fold (by default) cross validation over a grid of C values.
///
/// Folds are assigned by hashing the pair id with the recorded seed, so all
/// judgments of one (s, c) pair land in the same fold and assignment is
/// reproducible. Ties in mean AUC break toward smaller C.
pub fn cross_validate(
    examples: &[(String, FeatureVector, u8)],
    folds: usize,
    grid: &[f64],
    seed: u64,
) -> Result<CvReport> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty C grid".into()));
    }
    if folds < 2 {
        return Err(Error::InvalidInput("need at least 2 folds".into()));
    }
    if examples.len() < folds {
        return Err(Error::InvalidInput(format!(
            "{} examples cannot fill {} folds",
            examples.len(),
            folds
        )));
    }

    let space = FeatureSpace::fit(examples.iter().map(|(_, v, _)| v));
    let rows: Vec<SparseRow> = examples
        .iter()
        .map(|(_, v, _)| vectorize(&space, v).0)
        .collect();
    let labels: Vec<u8> = examples.iter().map(|&(_, _, y)| y).collect();
    let fold_of: Vec<usize> = examples
        .iter()
        .map(|(pair_id, _, _)| (text::fnv1a64(seed, pair_id.as_bytes()) % folds as u64) as usize)
        .collect();

    let mut grid_sorted: Vec<f64> = grid.to_vec();
    grid_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut per_c = Vec::with_capacity(grid_sorted.len());
    let mut best: Option<(f64, f64)> = None; // (c, mean_auc)
    for &c in &grid_sorted {
        let mut fold_aucs = Vec::new();
        for f in 0..folds {
            let mut train_rows = Vec::new();
            let mut train_labels = Vec::new();
            let mut held = Vec::new();
            for i in 0..rows.len() {
                if fold_of[i] == f {
                    held.push(i);
                } else {
                    train_rows.push(rows[i].clone());
                    train_labels.push(labels[i]);
                }
            }
            if held.is_empty()
                || !train_labels.contains(&0)
                || !train_labels.contains(&1)
            {
                continue;
            }
            let held_has_both =
                held.iter().any(|&i| labels[i] == 0) && held.iter().any(|&i| labels[i] == 1);
            if !held_has_both {
                continue;
            }
            let (w, _) = minimize(&train_rows, &train_labels, space.len(), c);
            let scored: Vec<(f64, bool)> = held
                .iter()
                .map(|&i| (sigmoid(dot(&rows[i], &w)), labels[i] == 1))
                .collect();
            fold_aucs.push(crate::metrics::roc_auc_scores(&scored)?);
        }
        if fold_aucs.is_empty() {
            return Err(Error::UndefinedMetric(
                "no fold had both classes in train and validation".into(),
            ));
        }
        let mean = fold_aucs.iter().sum::<f64>() / fold_aucs.len() as f64;
        per_c.push(CvEntry {
            c,
            mean_auc: mean,
            fold_aucs,
        });
        match best {
            Some((_, best_auc)) if mean <= best_auc => {}
            _ => best = Some((c, mean)),
        }
    }

    Ok(CvReport {
        best_c: best.unwrap().0,
        per_c,
        folds,
        seed,
    })
}
