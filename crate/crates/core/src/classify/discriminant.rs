//! Gaussian discriminant classifiers: LDA with a pooled covariance and QDA
//! with per-class covariances. Scores are the standard discriminant
//! functions; prediction is argmax with ties broken toward the smaller
//! class index.

use super::linalg;
use crate::features::Dataset;
use crate::{Error, Result};

/// Number of classes. The toolkit is binary end to end; the models keep a
/// class axis anyway so the math reads like the general case.
pub const NUM_CLASSES: usize = 2;

/// Ridge added to a covariance before inversion. `Auto` uses
/// 1e-6 * trace(Sigma) / p, scaling with the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ridge {
    Auto,
    Value(f64),
}

impl Ridge {
    pub(crate) fn resolve(self, cov: &[f64], p: usize) -> Result<f64> {
        let r = match self {
            Ridge::Auto => 1e-6 * linalg::trace(cov, p) / p as f64,
            Ridge::Value(v) => v,
        };
        if !(r >= 0.0) {
            return Err(Error::Config(format!("ridge must be nonnegative, got {r}")));
        }
        Ok(r)
    }
}

impl Default for Ridge {
    fn default() -> Self {
        Ridge::Auto
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    /// Per-class mean vectors, NUM_CLASSES x p.
    pub class_means: Vec<Vec<f64>>,
    /// Inverse of the (ridged) pooled covariance, row-major p x p.
    pub pooled_cov_inverse: Vec<f64>,
    pub log_priors: Vec<f64>,
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QdaModel {
    pub class_means: Vec<Vec<f64>>,
    /// Per-class inverse covariances, each row-major p x p.
    pub cov_inverses: Vec<Vec<f64>>,
    /// log|Sigma_k| of the ridged covariances.
    pub log_dets: Vec<f64>,
    pub log_priors: Vec<f64>,
    pub p: usize,
}

fn singular_error(cov: &[f64], p: usize, what: &str) -> Error {
    let rank = linalg::estimate_rank(cov, p);
    Error::Train(format!(
        "{what} is singular even after ridging: {} of {p} dimensions are degenerate; \
         increase --ridge or reduce the feature count",
        p - rank
    ))
}

fn class_stats(data: &Dataset) -> ([Vec<usize>; 2], Vec<Vec<f64>>, Vec<f64>) {
    let classes = data.class_indices();
    let means: Vec<Vec<f64>> = classes
        .iter()
        .map(|idx| linalg::mean_of_rows(data.raw(), data.p(), idx))
        .collect();
    let log_priors: Vec<f64> = classes
        .iter()
        .map(|idx| (idx.len() as f64 / data.n() as f64).ln())
        .collect();
    (classes, means, log_priors)
}

/// Fits class means, the pooled within-class covariance with denominator
/// (n - S), and class-frequency priors.
pub fn lda_train(data: &Dataset, ridge: Ridge) -> Result<LdaModel> {
    data.require_both_classes(2)?;
    let p = data.p();
    let (classes, means, log_priors) = class_stats(data);

    let mut pooled = vec![0.0; p * p];
    for (idx, mean) in classes.iter().zip(&means) {
        linalg::accumulate_scatter(data.raw(), p, idx, mean, &mut pooled);
    }
    let denom = (data.n() - NUM_CLASSES) as f64;
    for v in &mut pooled {
        *v /= denom;
    }

    let ridge = ridge.resolve(&pooled, p)?;
    linalg::add_ridge(&mut pooled, p, ridge);
    let l = linalg::cholesky(&pooled, p)
        .ok_or_else(|| singular_error(&pooled, p, "pooled covariance"))?;
    Ok(LdaModel {
        class_means: means,
        pooled_cov_inverse: linalg::inverse_from_cholesky(&l, p),
        log_priors,
        p,
    })
}

/// As [`lda_train`] but with per-class covariances (denominator n_k - 1)
/// and their log-determinants.
pub fn qda_train(data: &Dataset, ridge: Ridge) -> Result<QdaModel> {
    data.require_both_classes(2)?;
    let p = data.p();
    let (classes, means, log_priors) = class_stats(data);

    let mut cov_inverses = Vec::with_capacity(NUM_CLASSES);
    let mut log_dets = Vec::with_capacity(NUM_CLASSES);
    for (k, (idx, mean)) in classes.iter().zip(&means).enumerate() {
        let mut cov = vec![0.0; p * p];
        linalg::accumulate_scatter(data.raw(), p, idx, mean, &mut cov);
        let denom = (idx.len() - 1) as f64;
        for v in &mut cov {
            *v /= denom;
        }
        let r = ridge.resolve(&cov, p)?;
        linalg::add_ridge(&mut cov, p, r);
        let l = linalg::cholesky(&cov, p)
            .ok_or_else(|| singular_error(&cov, p, &format!("class-{k} covariance")))?;
        log_dets.push(linalg::log_det_from_cholesky(&l, p));
        cov_inverses.push(linalg::inverse_from_cholesky(&l, p));
    }
    Ok(QdaModel {
        class_means: means,
        cov_inverses,
        log_dets,
        log_priors,
        p,
    })
}

/// Linear discriminant scores
/// delta_k(x) = x^T Sigma^{-1} mu_k - mu_k^T Sigma^{-1} mu_k / 2 + log(pi_k).
pub fn lda_score(model: &LdaModel, x: &[f64]) -> Result<Vec<f64>> {
    linalg::check_dim(model.p, x)?;
    let mut scores = Vec::with_capacity(model.class_means.len());
    for (mu, log_pi) in model.class_means.iter().zip(&model.log_priors) {
        let x_term = linalg::bilinear(&model.pooled_cov_inverse, x, mu);
        let mu_term = linalg::bilinear(&model.pooled_cov_inverse, mu, mu);
        scores.push(x_term - 0.5 * mu_term + log_pi);
    }
    Ok(scores)
}

/// Quadratic discriminant scores
/// delta_k(x) = -log|Sigma_k|/2 - (x-mu_k)^T Sigma_k^{-1} (x-mu_k)/2 + log(pi_k).
pub fn qda_score(model: &QdaModel, x: &[f64]) -> Result<Vec<f64>> {
    linalg::check_dim(model.p, x)?;
    let mut scores = Vec::with_capacity(model.class_means.len());
    for ((mu, inv), (log_det, log_pi)) in model
        .class_means
        .iter()
        .zip(&model.cov_inverses)
        .zip(model.log_dets.iter().zip(&model.log_priors))
    {
        let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
        let quad = linalg::bilinear(inv, &diff, &diff);
        scores.push(-0.5 * log_det - 0.5 * quad + log_pi);
    }
    Ok(scores)
}

/// Argmax over discriminant scores; ties go to the smaller class index.
pub fn discriminant_predict(scores: &[f64]) -> u8 {
    let mut best = 0usize;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best as u8
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Dataset;
    use crate::rng::SplitMix64;

    fn one_d(class0: &[f64], class1: &[f64]) -> Dataset {
        let rows: Vec<(&[f64], u8)> = class0
            .iter()
            .map(|v| (std::slice::from_ref(v), 0u8))
            .chain(class1.iter().map(|v| (std::slice::from_ref(v), 1u8)))
            .collect();
        Dataset::from_rows(&rows).unwrap()
    }

    #[test]
    fn lda_estimates_means_and_priors() {
        let data = one_d(&[0.0, 0.1, -0.1], &[4.0, 4.1, 3.9]);
        let model = lda_train(&data, Ridge::Value(0.0)).unwrap();
        assert!((model.class_means[0][0]).abs() < 1e-12);
        assert!((model.class_means[1][0] - 4.0).abs() < 1e-12);
        assert!((model.log_priors[0] - 0.5f64.ln()).abs() < 1e-15);
        assert!((model.log_priors[1] - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_data_covariance_is_exactly_ridge() {
        // identical points within each class: zero scatter, so the ridged
        // pooled covariance is ridge * I and its inverse is 1/ridge * I
        let data = one_d(&[2.0, 2.0, 2.0], &[5.0, 5.0, 5.0]);
        let ridge = 1e-6;
        let model = lda_train(&data, Ridge::Value(ridge)).unwrap();
        assert!((model.pooled_cov_inverse[0] - 1.0 / ridge).abs() / (1.0 / ridge) < 1e-12);
    }

    #[test]
    fn degenerate_data_without_ridge_is_singular() {
        let data = one_d(&[2.0, 2.0, 2.0], &[5.0, 5.0, 5.0]);
        let err = lda_train(&data, Ridge::Value(0.0)).unwrap_err().to_string();
        assert!(err.contains("1 of 1 dimensions"), "{err}");
        // Auto resolves to 0 here as well (zero trace)
        assert!(lda_train(&data, Ridge::Auto).is_err());
    }

    #[test]
    fn pooled_covariance_tracks_generating_covariance() {
        // isotropic 2-D clusters; fixed-seed Monte-Carlo estimate must land
        // within 20% of the generating covariance
        let mut rng = SplitMix64::new(2024);
        let sigma = 1.5f64;
        let mut data = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2u8 {
            let center = if class == 0 { -2.0 } else { 2.0 };
            for _ in 0..200 {
                data.push(center + sigma * rng.normal());
                data.push(-center + sigma * rng.normal());
                labels.push(class);
            }
        }
        let data = Dataset::new(data, labels, 2).unwrap();
        let model = lda_train(&data, Ridge::Value(0.0)).unwrap();
        // invert the inverse analytically for p=2
        let inv = &model.pooled_cov_inverse;
        let det = inv[0] * inv[3] - inv[1] * inv[2];
        let cov = [inv[3] / det, -inv[1] / det, -inv[2] / det, inv[0] / det];
        let var = sigma * sigma;
        assert!((cov[0] - var).abs() / var < 0.2, "var0 {}", cov[0]);
        assert!((cov[3] - var).abs() / var < 0.2, "var1 {}", cov[3]);
        assert!(cov[1].abs() < 0.2 * var, "cov01 {}", cov[1]);
    }

    fn toy_model() -> LdaModel {
        LdaModel {
            class_means: vec![vec![0.0], vec![4.0]],
            pooled_cov_inverse: vec![1.0],
            log_priors: vec![0.5f64.ln(), 0.5f64.ln()],
            p: 1,
        }
    }

    #[test]
    fn lda_score_midpoint_rule() {
        let model = toy_model();
        let s = lda_score(&model, &[1.0]).unwrap();
        assert!(s[0] > s[1]);
        let s = lda_score(&model, &[2.0]).unwrap();
        assert!((s[0] - s[1]).abs() < 1e-12);
        let s = lda_score(&model, &[3.0]).unwrap();
        assert!(s[1] > s[0]);
    }

    #[test]
    fn lda_score_difference_is_affine() {
        let mut rng = SplitMix64::new(31);
        let p = 4;
        let data_rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..p).map(|_| rng.range_f64(-2.0, 2.0)).collect())
            .collect();
        let rows: Vec<(&[f64], u8)> = data_rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.as_slice(), (i % 2) as u8))
            .collect();
        let model = lda_train(&Dataset::from_rows(&rows).unwrap(), Ridge::Auto).unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = (0..p).map(|_| rng.range_f64(-3.0, 3.0)).collect();
            let y: Vec<f64> = (0..p).map(|_| rng.range_f64(-3.0, 3.0)).collect();
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| (a + b) / 2.0).collect();
            let d = |q: &[f64]| {
                let s = lda_score(&model, q).unwrap();
                s[0] - s[1]
            };
            let lhs = d(&mid);
            let rhs = (d(&x) + d(&y)) / 2.0;
            assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn qda_with_equal_covariances_matches_lda() {
        let mut rng = SplitMix64::new(55);
        let p = 3;
        let data_rows: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let shift = if i % 2 == 0 { -1.0 } else { 1.0 };
                (0..p).map(|_| shift + rng.normal()).collect()
            })
            .collect();
        let rows: Vec<(&[f64], u8)> = data_rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.as_slice(), (i % 2) as u8))
            .collect();
        let data = Dataset::from_rows(&rows).unwrap();
        let lda = lda_train(&data, Ridge::Value(1e-9)).unwrap();

        // force the per-class covariances equal by building a QDA model from
        // the pooled estimate
        let qda = QdaModel {
            class_means: lda.class_means.clone(),
            cov_inverses: vec![lda.pooled_cov_inverse.clone(), lda.pooled_cov_inverse.clone()],
            log_dets: vec![0.7, 0.7],
            log_priors: lda.log_priors.clone(),
            p,
        };
        for _ in 0..200 {
            let x: Vec<f64> = (0..p).map(|_| rng.range_f64(-3.0, 3.0)).collect();
            let a = discriminant_predict(&lda_score(&lda, &x).unwrap());
            let b = discriminant_predict(&qda_score(&qda, &x).unwrap());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn qda_peaks_at_class_mean() {
        let model = QdaModel {
            class_means: vec![vec![0.0, 0.0], vec![3.0, 3.0]],
            cov_inverses: vec![vec![1.0, 0.0, 0.0, 1.0]; 2],
            log_dets: vec![0.0, 0.0],
            log_priors: vec![0.5f64.ln(), 0.5f64.ln()],
            p: 2,
        };
        let s = qda_score(&model, &[3.0, 3.0]).unwrap();
        assert!(s[1] > s[0]);
        let s = qda_score(&model, &[0.0, 0.0]).unwrap();
        assert!(s[0] > s[1]);
    }

    /// Independent density evaluation for the oracle tests: Gauss-Jordan
    /// inverse and determinant computed from scratch.
    pub(crate) fn gauss_jordan_inverse_det(a: &[f64], p: usize) -> (Vec<f64>, f64) {
        let mut m = a.to_vec();
        let mut inv: Vec<f64> = (0..p * p)
            .map(|i| if i / p == i % p { 1.0 } else { 0.0 })
            .collect();
        let mut det = 1.0;
        for col in 0..p {
            let pivot_row = (col..p)
                .max_by(|&r1, &r2| {
                    m[r1 * p + col]
                        .abs()
                        .partial_cmp(&m[r2 * p + col].abs())
                        .unwrap()
                })
                .unwrap();
            if pivot_row != col {
                for c in 0..p {
                    m.swap(col * p + c, pivot_row * p + c);
                    inv.swap(col * p + c, pivot_row * p + c);
                }
                det = -det;
            }
            let pivot = m[col * p + col];
            det *= pivot;
            for c in 0..p {
                m[col * p + c] /= pivot;
                inv[col * p + c] /= pivot;
            }
            for r in 0..p {
                if r != col {
                    let f = m[r * p + col];
                    for c in 0..p {
                        m[r * p + c] -= f * m[col * p + c];
                        inv[r * p + c] -= f * inv[col * p + c];
                    }
                }
            }
        }
        (inv, det)
    }

    /// log of the Gaussian density of Eq-9 form, via the independent inverse.
    pub(crate) fn log_gaussian_density(x: &[f64], mu: &[f64], cov: &[f64]) -> f64 {
        let p = x.len();
        let (inv, det) = gauss_jordan_inverse_det(cov, p);
        let diff: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
        let quad = linalg::bilinear(&inv, &diff, &diff);
        -0.5 * (p as f64 * (2.0 * std::f64::consts::PI).ln() + det.ln()) - 0.5 * quad
    }

    #[test]
    fn qda_scores_match_density_oracle_up_to_shared_constant() {
        let mut rng = SplitMix64::new(99);
        let p = 3;
        let mut raw = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2u8 {
            let center = if class == 0 { 0.0 } else { 2.5 };
            let spread = if class == 0 { 1.0 } else { 0.5 };
            for _ in 0..50 {
                for d in 0..p {
                    raw.push(center * (d as f64 + 1.0) / 2.0 + spread * rng.normal());
                }
                labels.push(class);
            }
        }
        let data = Dataset::new(raw, labels, p).unwrap();
        let ridge = 1e-8;
        let model = qda_train(&data, Ridge::Value(ridge)).unwrap();

        // recompute per-class moments independently for the oracle
        let classes = data.class_indices();
        let mut covs = Vec::new();
        let mut means = Vec::new();
        for idx in &classes {
            let mean = linalg::mean_of_rows(data.raw(), p, idx);
            let mut cov = vec![0.0; p * p];
            linalg::accumulate_scatter(data.raw(), p, idx, &mean, &mut cov);
            for v in &mut cov {
                *v /= (idx.len() - 1) as f64;
            }
            linalg::add_ridge(&mut cov, p, ridge);
            covs.push(cov);
            means.push(mean);
        }

        for _ in 0..100 {
            let x: Vec<f64> = (0..p).map(|_| rng.range_f64(-2.0, 4.0)).collect();
            let scores = qda_score(&model, &x).unwrap();
            let mut consts = Vec::new();
            for k in 0..2 {
                let log_posterior = model.log_priors[k]
                    + log_gaussian_density(&x, &means[k], &covs[k]);
                consts.push(scores[k] - log_posterior);
            }
            assert!(
                (consts[0] - consts[1]).abs() < 1e-9,
                "constant differs between classes: {consts:?}"
            );
        }
    }

    #[test]
    fn predict_examples() {
        assert_eq!(discriminant_predict(&[0.2, 0.9]), 1);
        assert_eq!(discriminant_predict(&[0.5, 0.5]), 0);
        let scores = [1.3, -0.2];
        let shifted: Vec<f64> = scores.iter().map(|s| s + 17.5).collect();
        assert_eq!(
            discriminant_predict(&scores),
            discriminant_predict(&shifted)
        );
    }

    #[test]
    fn training_requires_two_per_class() {
        let data = one_d(&[1.0], &[2.0, 3.0]);
        assert!(lda_train(&data, Ridge::Auto).is_err());
        assert!(qda_train(&data, Ridge::Auto).is_err());
    }

    #[test]
    fn score_dimension_checked() {
        let model = toy_model();
        assert!(lda_score(&model, &[1.0, 2.0]).is_err());
        assert!(lda_score(&model, &[f64::NAN]).is_err());
    }

    #[test]
    fn permutation_invariance() {
        let mut rng = SplitMix64::new(123);
        let p = 3;
        let rows_data: Vec<(Vec<f64>, u8)> = (0..30)
            .map(|i| {
                let label = (i % 2) as u8;
                let shift = if label == 0 { -1.0 } else { 1.5 };
                ((0..p).map(|_| shift + rng.normal()).collect(), label)
            })
            .collect();
        let rows: Vec<(&[f64], u8)> =
            rows_data.iter().map(|(r, l)| (r.as_slice(), *l)).collect();
        let mut shuffled = rows.clone();
        let mut rng2 = SplitMix64::new(7);
        rng2.shuffle(&mut shuffled);

        let a = lda_train(&Dataset::from_rows(&rows).unwrap(), Ridge::Auto).unwrap();
        let b = lda_train(&Dataset::from_rows(&shuffled).unwrap(), Ridge::Auto).unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = (0..p).map(|_| rng.range_f64(-3.0, 3.0)).collect();
            assert_eq!(
                discriminant_predict(&lda_score(&a, &x).unwrap()),
                discriminant_predict(&lda_score(&b, &x).unwrap())
            );
        }
    }
}
