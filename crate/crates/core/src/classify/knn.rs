//! k-nearest-neighbor classification over stored training points.
//!
//! Tie rules are fixed so predictions are reproducible: neighbor ranking
//! breaks distance ties by lower stored index; vote ties break by smaller
//! cumulative neighbor distance, then by smaller label.

use crate::features::Dataset;
use crate::{Error, Result};

use super::linalg::check_dim;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(Error::Config(format!(
                "unknown metric {other:?}; expected euclidean or manhattan"
            ))),
        }
    }
}

/// Distance between two points of equal dimension.
pub fn knn_distance(metric: Metric, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Data(format!(
            "distance arguments have dimensions {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(match metric {
        Metric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    /// row-major n x p
    pub points: Vec<f64>,
    pub labels: Vec<u8>,
    pub k: usize,
    pub metric: Metric,
    pub n: usize,
    pub p: usize,
}

impl KnnModel {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.p..(i + 1) * self.p]
    }
}

/// "Training" stores the data. k must be odd for the binary label space.
pub fn knn_train(data: &Dataset, k: usize, metric: Metric) -> Result<KnnModel> {
    if k == 0 || k > data.n() {
        return Err(Error::Config(format!(
            "k must be in 1..=n ({}), got {k}",
            data.n()
        )));
    }
    if k % 2 == 0 {
        return Err(Error::Config(format!(
            "k must be odd for binary classification, got {k}"
        )));
    }
    Ok(KnnModel {
        points: data.raw().to_vec(),
        labels: data.labels().to_vec(),
        k,
        metric,
        n: data.n(),
        p: data.p(),
    })
}

/// Majority vote among the k nearest stored points.
pub fn knn_predict(model: &KnnModel, x: &[f64]) -> Result<u8> {
    check_dim(model.p, x)?;
    let mut ranked: Vec<(f64, usize)> = (0..model.n)
        .map(|i| (knn_distance(model.metric, model.point(i), x).unwrap(), i))
        .collect();
    ranked.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let neighbors = &ranked[..model.k];

    // per-label vote count and cumulative distance
    let mut votes = [0usize; 2];
    let mut cum_dist = [0.0f64; 2];
    for &(d, i) in neighbors {
        let l = model.labels[i] as usize;
        votes[l] += 1;
        cum_dist[l] += d;
    }
    Ok(if votes[1] > votes[0] {
        1
    } else if votes[0] > votes[1] {
        0
    } else if cum_dist[1] < cum_dist[0] {
        1
    } else {
        0
    })
}
