//! Soft-margin support vector machine with linear, polynomial and RBF kernels,
//! combined one-vs-all for the three protocol classes.

mod kernel;
mod smo;

use serde::{Deserialize, Serialize};

pub use kernel::{kernel_eval, median_heuristic, KernelKind, KernelSpec};
pub use smo::{train_binary, BinarySvmModel};

use crate::error::{Error, Result};
use crate::features::{FeatureSet, LabeledDataset, Standardization};
use crate::signal::ProtocolLabel;

pub const DEFAULT_C: f64 = 10.0;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_PASSES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: KernelSpec,
    pub c_reg: f64,
    pub tol: f64,
    pub max_passes: usize,
}

impl SvmParams {
    pub fn new(kernel: KernelSpec) -> Self {
        Self {
            kernel,
            c_reg: DEFAULT_C,
            tol: DEFAULT_TOL,
            max_passes: DEFAULT_MAX_PASSES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassModel {
    pub label: ProtocolLabel,
    pub model: BinarySvmModel,
}

/// One binary model per label, in label-code order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiClassSvmModel {
    pub kernel: KernelSpec,
    pub c_reg: f64,
    pub tol: f64,
    pub features: FeatureSet,
    pub standardization: Standardization,
    pub classes: Vec<ClassModel>,
}

impl MultiClassSvmModel {
    pub fn converged(&self) -> bool {
        self.classes.iter().all(|c| c.model.converged)
    }

    /// Decision value of each class model, indexed by label code.
    pub fn decision_values(&self, x: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for c in &self.classes {
            out[c.label.index()] = c.model.decision_value(x);
        }
        out
    }

    /// Standardized input projected onto `self.features`.
    pub fn predict(&self, x: &[f64]) -> ProtocolLabel {
        argmax_label(&self.decision_values(x))
    }
}

/// Largest value wins; ties go to the smallest label code.
pub fn argmax_label(values: &[f64; 3]) -> ProtocolLabel {
    let mut best = 0;
    for i in 1..3 {
        if values[i] > values[best] {
            best = i;
        }
    }
    ProtocolLabel::ALL[best]
}

/// Trains class-vs-rest models on a standardized dataset. All three problems
/// share one kernel matrix.
pub fn train_one_vs_all(
    ds: &LabeledDataset,
    features: FeatureSet,
    params: &SvmParams,
) -> Result<MultiClassSvmModel> {
    let standardization = ds
        .standardization
        .ok_or_else(|| Error::InvalidInput("training data must be standardized".into()))?;
    let counts = ds.class_counts();
    if let Some(l) = ProtocolLabel::ALL
        .into_iter()
        .find(|l| counts[l.index()] == 0)
    {
        return Err(Error::MissingClass(l));
    }
    let rows: Vec<Vec<f64>> = ds.rows.iter().map(|r| r.features.point(features)).collect();
    let first_targets: Vec<f64> = targets_for(ds, ProtocolLabel::Wifi);
    smo::check_inputs(
        &rows,
        &first_targets,
        &params.kernel,
        params.c_reg,
        params.tol,
    )?;

    let gram = smo::Gram::new(&rows, &params.kernel);
    let classes = ProtocolLabel::ALL
        .into_iter()
        .map(|label| ClassModel {
            label,
            model: smo::train_with_gram(
                &rows,
                &targets_for(ds, label),
                &gram,
                &params.kernel,
                params.c_reg,
                params.tol,
                params.max_passes,
            ),
        })
        .collect();
    Ok(MultiClassSvmModel {
        kernel: params.kernel,
        c_reg: params.c_reg,
        tol: params.tol,
        features,
        standardization,
        classes,
    })
}

fn targets_for(ds: &LabeledDataset, label: ProtocolLabel) -> Vec<f64> {
    ds.rows
        .iter()
        .map(|r| if r.label == label { 1.0 } else { -1.0 })
        .collect()
}
