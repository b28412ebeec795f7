//! Experiment harness: train/test splits, classifier wrappers, confusion
//! matrices, the clean-train/noisy-test SNR sweep and report serialization.

mod corpus;
mod matching;
mod noise;
mod report;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use corpus::{build_corpus, compare_methods, CorpusConfig, CorpusSummary};
pub use matching::{label_detections, match_detections, score_detections, DetectionScore};
pub use noise::{run_noise_study, NoiseStudyConfig, TestRecording};
pub use report::{emit_report, parse_report_csv, ReportFormat, ReportRow};

use crate::error::{Error, Result};
use crate::features::{
    standardize, FeatureSet, FeatureVector, LabeledDataset, ScalingOptions, Standardization,
};
use crate::knn::{KnnModel, DEFAULT_K};
use crate::signal::ProtocolLabel;
use crate::svm::{
    median_heuristic, train_one_vs_all, KernelSpec, MultiClassSvmModel, SvmParams, DEFAULT_C,
    DEFAULT_MAX_PASSES, DEFAULT_TOL,
};
use crate::util::extended_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "svm-linear")]
    SvmLinear,
    #[serde(rename = "svm-poly")]
    SvmPoly,
    #[serde(rename = "svm-rbf")]
    SvmRbf,
    #[serde(rename = "knn")]
    Knn,
}

impl Method {
    pub const ALL: [Method; 4] = [Self::SvmLinear, Self::SvmPoly, Self::SvmRbf, Self::Knn];

    pub fn name(self) -> &'static str {
        match self {
            Self::SvmLinear => "svm-linear",
            Self::SvmPoly => "svm-poly",
            Self::SvmRbf => "svm-rbf",
            Self::Knn => "knn",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "svm-linear" | "linear" => Ok(Self::SvmLinear),
            "svm-poly" | "poly" | "polynomial" => Ok(Self::SvmPoly),
            "svm-rbf" | "rbf" | "gaussian" => Ok(Self::SvmRbf),
            "knn" => Ok(Self::Knn),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Everything needed to train one classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodSpec {
    pub method: Method,
    pub features: FeatureSet,
    pub c_reg: f64,
    pub tol: f64,
    pub max_passes: usize,
    pub poly_c: f64,
    pub poly_p: u32,
    /// `None` selects the median heuristic on the training points.
    pub rbf_c: Option<f64>,
    pub k: usize,
    /// Applied when training on raw rows; must match pre-scaled rows.
    pub scaling: ScalingOptions,
}

impl Default for MethodSpec {
    fn default() -> Self {
        Self {
            method: Method::SvmRbf,
            features: FeatureSet::TimePlusPapr,
            c_reg: DEFAULT_C,
            tol: DEFAULT_TOL,
            max_passes: DEFAULT_MAX_PASSES,
            poly_c: 1.0,
            poly_p: 3,
            rbf_c: None,
            k: DEFAULT_K,
            scaling: ScalingOptions::default(),
        }
    }
}

impl MethodSpec {
    pub fn new(method: Method, features: FeatureSet) -> Self {
        Self {
            method,
            features,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Classifier {
    Svm(MultiClassSvmModel),
    Knn(KnnModel),
}

/// A fitted classifier together with the spec and data size that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: MethodSpec,
    pub n_train: usize,
    pub classifier: Classifier,
}

impl TrainedModel {
    pub fn method(&self) -> Method {
        self.spec.method
    }

    pub fn features(&self) -> FeatureSet {
        self.spec.features
    }

    pub fn standardization(&self) -> &Standardization {
        match &self.classifier {
            Classifier::Svm(m) => &m.standardization,
            Classifier::Knn(m) => &m.standardization,
        }
    }

    /// Classifies an already standardized feature vector.
    pub fn predict(&self, x: &FeatureVector) -> ProtocolLabel {
        let p = x.point(self.features());
        match &self.classifier {
            Classifier::Svm(m) => m.predict(&p),
            Classifier::Knn(m) => m.predict(&p),
        }
    }

    /// Classifies a raw feature vector using the training statistics.
    pub fn predict_raw(&self, x: &FeatureVector) -> ProtocolLabel {
        self.predict(&self.standardization().apply(x))
    }

    pub fn converged(&self) -> bool {
        match &self.classifier {
            Classifier::Svm(m) => m.converged(),
            Classifier::Knn(_) => true,
        }
    }
}

/// Trains `spec` on `train`. Raw data is scaled with statistics fitted on
/// itself under `spec.scaling` first.
pub fn train_model(spec: &MethodSpec, train: &LabeledDataset) -> Result<TrainedModel> {
    let owned;
    let ds = match &train.standardization {
        Some(s) if s.options() == spec.scaling => train,
        Some(s) => {
            return Err(Error::Config(format!(
                "dataset scaling {:?} differs from the method's {:?}",
                s.options(),
                spec.scaling
            )))
        }
        None => {
            let stats = Standardization::fit_with(&train.features(), &spec.scaling)?;
            owned = standardize(train, Some(&stats))?;
            &owned
        }
    };
    let classifier = match spec.method {
        Method::Knn => Classifier::Knn(KnnModel::new(ds, spec.features, spec.k)?),
        m => {
            let kernel = match m {
                Method::SvmLinear => KernelSpec::linear(),
                Method::SvmPoly => KernelSpec::polynomial(spec.poly_c, spec.poly_p),
                _ => {
                    let c = spec.rbf_c.unwrap_or_else(|| {
                        let pts: Vec<Vec<f64>> = ds
                            .rows
                            .iter()
                            .map(|r| r.features.point(spec.features))
                            .collect();
                        median_heuristic(&pts)
                    });
                    KernelSpec::rbf(c)
                }
            };
            let params = SvmParams {
                kernel,
                c_reg: spec.c_reg,
                tol: spec.tol,
                max_passes: spec.max_passes,
            };
            Classifier::Svm(train_one_vs_all(ds, spec.features, &params)?)
        }
    };
    Ok(TrainedModel {
        spec: *spec,
        n_train: ds.len(),
        classifier,
    })
}

/// Rows are truth, columns predicted, both indexed by label code.
pub type Confusion = [[usize; 3]; 3];

pub fn confusion_accuracy(c: &Confusion) -> Option<f64> {
    let total: usize = c.iter().flatten().sum();
    (total > 0).then(|| (0..3).map(|i| c[i][i]).sum::<usize>() as f64 / total as f64)
}

/// Correctly classified detections per truth frame, so missed frames count
/// as errors.
pub fn frame_accuracy(c: &Confusion, truth_frames: usize) -> Option<f64> {
    (truth_frames > 0).then(|| (0..3).map(|i| c[i][i]).sum::<usize>() as f64 / truth_frames as f64)
}

/// One point of a noise sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    #[serde(with = "extended_f64")]
    pub snr_db: f64,
    /// All detections, false alarms included.
    pub detected_frames: usize,
    /// Detections inheriting a truth label.
    pub matched_frames: usize,
    pub false_alarms: usize,
    pub truth_frames: usize,
    pub confusion: Confusion,
    /// Over classified detections; absent when none were classified.
    pub accuracy: Option<f64>,
    /// Over truth frames; absent without truth.
    pub frame_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub features_used: FeatureSet,
    pub accuracy: f64,
    pub confusion: Confusion,
    pub n_train: usize,
    pub n_test: usize,
    #[serde(default)]
    pub per_snr: Vec<SnrPoint>,
}

/// Confusion matrix of `model` on `test`, which must carry the model's
/// standardization.
pub fn confusion_of(model: &TrainedModel, test: &LabeledDataset) -> Result<Confusion> {
    match &test.standardization {
        Some(s) if s == model.standardization() => {}
        Some(s) => {
            return Err(Error::StatsMismatch {
                model: model.standardization().hash(),
                dataset: s.hash(),
            })
        }
        None => {
            return Err(Error::InvalidInput(
                "test data must be standardized with the model's statistics".into(),
            ))
        }
    }
    let mut c = [[0; 3]; 3];
    for r in &test.rows {
        c[r.label.index()][model.predict(&r.features).index()] += 1;
    }
    Ok(c)
}

pub fn evaluate(model: &TrainedModel, test: &LabeledDataset) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let confusion = confusion_of(model, test)?;
    Ok(EvalReport {
        method: model.method().name().to_owned(),
        features_used: model.features(),
        accuracy: confusion_accuracy(&confusion).unwrap_or(0.0),
        confusion,
        n_train: model.n_train,
        n_test: test.len(),
        per_snr: Vec::new(),
    })
}

/// Splits into `(train, test)` with `floor(N * test_fraction)` test rows, at
/// least one. Stratified mode allots test rows per class by largest remainder.
/// Both halves keep the input row order.
pub fn split_train_test(
    ds: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = ds.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "need at least two rows to split".into(),
        ));
    }
    let n_test = ((n as f64 * test_fraction).floor() as usize).clamp(1, n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_test = vec![false; n];

    if stratified {
        let counts = ds.class_counts();
        if let Some(l) = ProtocolLabel::ALL
            .into_iter()
            .find(|l| (1..2).contains(&counts[l.index()]))
        {
            return Err(Error::InvalidInput(format!(
                "class {l} needs at least two rows for a stratified split"
            )));
        }
        let quota = stratified_quota(&counts, n_test);
        for l in ProtocolLabel::ALL {
            let mut idx: Vec<usize> = (0..n).filter(|&i| ds.rows[i].label == l).collect();
            idx.shuffle(&mut rng);
            for &i in &idx[..quota[l.index()]] {
                is_test[i] = true;
            }
        }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        for &i in &idx[..n_test] {
            is_test[i] = true;
        }
    }

    let pick = |want: bool| LabeledDataset {
        rows: ds
            .rows
            .iter()
            .zip(&is_test)
            .filter(|(_, &t)| t == want)
            .map(|(r, _)| *r)
            .collect(),
        standardization: ds.standardization,
    };
    Ok((pick(false), pick(true)))
}

/// Per-class test counts summing to `n_test`, each within one row of its
/// proportional share and never taking a whole class.
fn stratified_quota(counts: &[usize; 3], n_test: usize) -> [usize; 3] {
    let n: usize = counts.iter().sum();
    let share = |c: usize| c as f64 * n_test as f64 / n as f64;
    let mut q: [usize; 3] = std::array::from_fn(|i| share(counts[i]).floor() as usize);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let fa = share(counts[a]) - q[a] as f64;
        let fb = share(counts[b]) - q[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut left = n_test - q.iter().sum::<usize>();
    for &i in order.iter().cycle().take(6) {
        if left == 0 {
            break;
        }
        if q[i] + 1 < counts[i] {
            q[i] += 1;
            left -= 1;
        }
    }
    q
}
