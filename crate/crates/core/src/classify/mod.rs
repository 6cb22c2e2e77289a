//! The four classifier families behind one train/predict contract, plus a
//! versioned text format for persisting trained models.

mod discriminant;
mod knn;
mod linalg;
mod model_io;
mod svm;

pub use discriminant::{
    discriminant_predict, lda_score, lda_train, qda_score, qda_train, LdaModel, QdaModel, Ridge,
    NUM_CLASSES,
};
pub use knn::{knn_distance, knn_predict, knn_train, KnnModel, Metric};
pub use model_io::{load_model, save_model};
pub use svm::{
    kernel_eval, kkt_residuals, svm_predict, svm_train, KernelSpec, SvmModel, SvmTrainParams,
};

use crate::features::Dataset;
use crate::{Error, Result};

/// The classifier families of the toolkit, as named on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Lda,
    Qda,
    SvmRbf,
    SvmPoly,
    Knn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::Lda,
        ClassifierKind::Qda,
        ClassifierKind::SvmRbf,
        ClassifierKind::SvmPoly,
        ClassifierKind::Knn,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Lda => "lda",
            ClassifierKind::Qda => "qda",
            ClassifierKind::SvmRbf => "svm-rbf",
            ClassifierKind::SvmPoly => "svm-poly",
            ClassifierKind::Knn => "knn",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lda" => Ok(ClassifierKind::Lda),
            "qda" => Ok(ClassifierKind::Qda),
            "svm-rbf" => Ok(ClassifierKind::SvmRbf),
            "svm-poly" => Ok(ClassifierKind::SvmPoly),
            "knn" => Ok(ClassifierKind::Knn),
            other => Err(Error::Config(format!(
                "unknown classifier {other:?}; expected lda, qda, svm-rbf, svm-poly, or knn"
            ))),
        }
    }
}

/// Classifier choice plus hyperparameters, before the feature dimension is
/// known. `gamma = None` resolves to 1/p at training time.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierChoice {
    pub kind: ClassifierKind,
    pub c: f64,
    pub gamma: Option<f64>,
    pub degree: u32,
    pub coef0: f64,
    pub k: usize,
    pub metric: Metric,
    pub ridge: Ridge,
    pub tol: f64,
    pub max_passes: usize,
}

impl ClassifierChoice {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            c: 1.0,
            gamma: None,
            degree: 2,
            coef0: 1.0,
            k: 3,
            metric: Metric::Euclidean,
            ridge: Ridge::Auto,
            tol: 1e-3,
            max_passes: 1000,
        }
    }

    pub fn gamma_for(&self, p: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / p as f64)
    }

    /// Human-readable hyperparameter echo for report headers.
    pub fn describe(&self, p: usize) -> String {
        match self.kind {
            ClassifierKind::Lda | ClassifierKind::Qda => match self.ridge {
                Ridge::Auto => format!("{} ridge=auto", self.kind.name()),
                Ridge::Value(v) => format!("{} ridge={v}", self.kind.name()),
            },
            ClassifierKind::SvmRbf => format!(
                "{} C={} gamma={} tol={}",
                self.kind.name(),
                self.c,
                self.gamma_for(p),
                self.tol
            ),
            ClassifierKind::SvmPoly => format!(
                "{} C={} degree={} coef0={} tol={}",
                self.kind.name(),
                self.c,
                self.degree,
                self.coef0,
                self.tol
            ),
            ClassifierKind::Knn => {
                format!("{} k={} metric={}", self.kind.name(), self.k, self.metric.name())
            }
        }
    }
}

/// A trained model of any family.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Lda(LdaModel),
    Qda(QdaModel),
    Svm(SvmModel),
    Knn(KnnModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::Lda(_) => ClassifierKind::Lda,
            TrainedModel::Qda(_) => ClassifierKind::Qda,
            TrainedModel::Svm(m) => match m.kernel {
                KernelSpec::Rbf { .. } => ClassifierKind::SvmRbf,
                KernelSpec::Polynomial { .. } => ClassifierKind::SvmPoly,
            },
            TrainedModel::Knn(_) => ClassifierKind::Knn,
        }
    }

    /// Feature dimension the model expects.
    pub fn dim(&self) -> usize {
        match self {
            TrainedModel::Lda(m) => m.p,
            TrainedModel::Qda(m) => m.p,
            TrainedModel::Svm(m) => m.p,
            TrainedModel::Knn(m) => m.p,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        match self {
            TrainedModel::Lda(m) => Ok(discriminant_predict(&lda_score(m, x)?)),
            TrainedModel::Qda(m) => Ok(discriminant_predict(&qda_score(m, x)?)),
            TrainedModel::Svm(m) => svm_predict(m, x),
            TrainedModel::Knn(m) => knn_predict(m, x),
        }
    }
}

/// Trains the chosen classifier on `data`. `seed` feeds the SMO scan order
/// and is ignored by the deterministic trainers.
pub fn train(choice: &ClassifierChoice, data: &Dataset, seed: u64) -> Result<TrainedModel> {
    Ok(match choice.kind {
        ClassifierKind::Lda => TrainedModel::Lda(lda_train(data, choice.ridge)?),
        ClassifierKind::Qda => TrainedModel::Qda(qda_train(data, choice.ridge)?),
        ClassifierKind::SvmRbf => {
            let kernel = KernelSpec::Rbf { gamma: choice.gamma_for(data.p()) };
            let params = SvmTrainParams {
                c: choice.c,
                tol: choice.tol,
                max_passes: choice.max_passes,
                seed,
            };
            TrainedModel::Svm(svm_train(data, kernel, &params)?)
        }
        ClassifierKind::SvmPoly => {
            let kernel = KernelSpec::Polynomial {
                degree: choice.degree,
                coef0: choice.coef0,
            };
            let params = SvmTrainParams {
                c: choice.c,
                tol: choice.tol,
                max_passes: choice.max_passes,
                seed,
            };
            TrainedModel::Svm(svm_train(data, kernel, &params)?)
        }
        ClassifierKind::Knn => TrainedModel::Knn(knn_train(data, choice.k, choice.metric)?),
    })
}
