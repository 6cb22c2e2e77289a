//! Soft-margin kernel SVM trained by sequential minimal optimization.
//!
//! The dual is optimized by pairwise alpha updates (Platt's SMO with an
//! error cache and a full precomputed Gram matrix) until every training
//! point satisfies the KKT conditions within `tol`. The scan order is
//! drawn from a seeded generator, so training is deterministic given
//! (data, hyperparameters, seed).

use crate::features::Dataset;
use crate::rng::SplitMix64;
use crate::{Error, Result};

use super::linalg::check_dim;

/// Kernel family and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// exp(-gamma * ||a - b||^2)
    Rbf { gamma: f64 },
    /// (a . b + coef0)^degree
    Polynomial { degree: u32, coef0: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Rbf { gamma } => {
                if !(gamma > &0.0) {
                    return Err(Error::Config(format!("rbf gamma must be positive, got {gamma}")));
                }
            }
            KernelSpec::Polynomial { degree, .. } => {
                if *degree < 1 {
                    return Err(Error::Config("polynomial degree must be >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Evaluates the kernel on two points of equal dimension.
pub fn kernel_eval(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Data(format!(
            "kernel arguments have dimensions {} and {}",
            a.len(),
            b.len()
        )));
    }
    spec.validate()?;
    Ok(kernel_raw(spec, a, b))
}

#[inline]
fn kernel_raw(spec: &KernelSpec, a: &[f64], b: &[f64]) -> f64 {
    match spec {
        KernelSpec::Rbf { gamma } => {
            let mut d2 = 0.0;
            for (x, y) in a.iter().zip(b) {
                let d = x - y;
                d2 += d * d;
            }
            (-gamma * d2).exp()
        }
        KernelSpec::Polynomial { degree, coef0 } => {
            let mut dot = 0.0;
            for (x, y) in a.iter().zip(b) {
                dot += x * y;
            }
            (dot + coef0).powi(*degree as i32)
        }
    }
}

/// SMO hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmTrainParams {
    /// Box constraint C.
    pub c: f64,
    /// KKT tolerance.
    pub tol: f64,
    /// Cap on optimization passes over the data before giving up.
    pub max_passes: usize,
    /// Seed for the working-pair scan order.
    pub seed: u64,
}

impl Default for SvmTrainParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            max_passes: 1000,
            seed: 0,
        }
    }
}

/// A trained SVM: only the points with alpha > 0 are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// Support vectors, row-major n_sv x p.
    pub support_vectors: Vec<f64>,
    /// Labels in {-1, +1}.
    pub support_labels: Vec<f64>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
    pub p: usize,
}

impl SvmModel {
    pub fn n_support(&self) -> usize {
        self.alphas.len()
    }

    pub fn support_vector(&self, i: usize) -> &[f64] {
        &self.support_vectors[i * self.p..(i + 1) * self.p]
    }

    /// The signed decision value sum_i alpha_i y_i K(x_i, x) + b.
    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.p, x)?;
        let mut acc = self.bias;
        for i in 0..self.n_support() {
            acc += self.alphas[i]
                * self.support_labels[i]
                * kernel_raw(&self.kernel, self.support_vector(i), x);
        }
        Ok(acc)
    }
}

/// Predicted label: positive decision value -> 1, otherwise 0 (an exact
/// zero breaks toward 0).
pub fn svm_predict(model: &SvmModel, x: &[f64]) -> Result<u8> {
    Ok(if model.decision(x)? > 0.0 { 1 } else { 0 })
}

struct Smo {
    y: Vec<f64>,
    gram: Vec<f64>,
    alpha: Vec<f64>,
    /// errors[i] = f(x_i) - y_i, kept exact after every step
    errors: Vec<f64>,
    bias: f64,
    c: f64,
    /// internal examine gate; half the user tolerance so the final model
    /// (whose bias is recomputed from the margin identity) still meets the
    /// full tolerance
    gate_tol: f64,
    user_tol: f64,
    rng: SplitMix64,
    n: usize,
}

impl Smo {
    fn new(data: &Dataset, kernel: &KernelSpec, params: &SvmTrainParams) -> Self {
        let n = data.n();
        let y: Vec<f64> = data.labels().iter().map(|&l| 2.0 * l as f64 - 1.0).collect();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let k = kernel_raw(kernel, data.row(i), data.row(j));
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
        }
        let errors: Vec<f64> = y.iter().map(|yi| -yi).collect();
        Smo {
            y,
            gram,
            alpha: vec![0.0; n],
            errors,
            bias: 0.0,
            c: params.c,
            gate_tol: params.tol / 2.0,
            user_tol: params.tol,
            rng: SplitMix64::new(params.seed),
            n,
        }
    }

    #[inline]
    fn k(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.n + j]
    }

    fn is_unbound(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.c
    }

    /// KKT violation magnitude of point i (0 when satisfied within tol).
    fn violation(&self, i: usize) -> f64 {
        // r = y*f - 1 = y*E
        let r = self.y[i] * self.errors[i];
        if self.alpha[i] < self.c && r < -self.gate_tol {
            -r - self.gate_tol
        } else if self.alpha[i] > 0.0 && r > self.gate_tol {
            r - self.gate_tol
        } else {
            0.0
        }
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1_old, a2_old) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;

        let (lo, hi) = if s < 0.0 {
            ((a2_old - a1_old).max(0.0), (self.c + a2_old - a1_old).min(self.c))
        } else {
            ((a2_old + a1_old - self.c).max(0.0), (a2_old + a1_old).min(self.c))
        };
        if lo >= hi {
            return false;
        }

        let k11 = self.k(i1, i1);
        let k12 = self.k(i1, i2);
        let k22 = self.k(i2, i2);
        let eta = k11 + k22 - 2.0 * k12;

        let mut a2 = if eta > 0.0 {
            (a2_old + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // flat or concave direction: evaluate the dual objective change
            // at both clip bounds and take the better end
            let f1 = y1 * e1 - a1_old * k11 - s * a2_old * k12;
            let f2 = y2 * e2 - a2_old * k22 - s * a1_old * k12;
            let l1 = a1_old + s * (a2_old - lo);
            let h1 = a1_old + s * (a2_old - hi);
            let obj_lo =
                l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12;
            let obj_hi =
                h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if obj_lo < obj_hi - 1e-12 {
                lo
            } else if obj_hi < obj_lo - 1e-12 {
                hi
            } else {
                return false;
            }
        };
        // snap to the box so bound states are exact
        if a2 < 1e-12 {
            a2 = 0.0;
        } else if a2 > self.c - 1e-12 {
            a2 = self.c;
        }
        if (a2 - a2_old).abs() < 1e-14 * (a2 + a2_old + 1e-14) {
            return false;
        }

        let a1 = (a1_old + s * (a2_old - a2)).clamp(0.0, self.c);

        let d1 = y1 * (a1 - a1_old);
        let d2 = y2 * (a2 - a2_old);
        let b1 = self.bias - e1 - d1 * k11 - d2 * k12;
        let b2 = self.bias - e2 - d1 * k12 - d2 * k22;
        let new_bias = if a1 > 0.0 && a1 < self.c {
            b1
        } else if a2 > 0.0 && a2 < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = new_bias - self.bias;
        self.bias = new_bias;
        self.alpha[i1] = a1;
        self.alpha[i2] = a2;
        for i in 0..self.n {
            self.errors[i] += d1 * self.k(i1, i) + d2 * self.k(i2, i) + db;
        }
        true
    }

    fn examine(&mut self, i2: usize) -> bool {
        if self.violation(i2) == 0.0 {
            return false;
        }
        let e2 = self.errors[i2];

        // heuristic 1: maximize |E1 - E2| over unbound points
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.n {
            if self.is_unbound(i) {
                let gap = (self.errors[i] - e2).abs();
                if best.map(|(_, g)| gap > g).unwrap_or(true) {
                    best = Some((i, gap));
                }
            }
        }
        if let Some((i1, _)) = best {
            if self.take_step(i1, i2) {
                return true;
            }
        }

        // heuristic 2: unbound points from a seeded random start
        let start = self.rng.below(self.n as u64) as usize;
        for off in 0..self.n {
            let i1 = (start + off) % self.n;
            if self.is_unbound(i1) && self.take_step(i1, i2) {
                return true;
            }
        }
        // heuristic 3: the whole set from a seeded random start
        let start = self.rng.below(self.n as u64) as usize;
        for off in 0..self.n {
            let i1 = (start + off) % self.n;
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    fn worst_violation(&self) -> f64 {
        (0..self.n)
            .map(|i| self.violation(i))
            .fold(0.0, f64::max)
    }

    fn solve(&mut self, max_passes: usize) -> Result<()> {
        let mut examine_all = true;
        let mut passes = 0usize;
        let mut order: Vec<usize> = (0..self.n).collect();
        loop {
            passes += 1;
            if passes > max_passes {
                return Err(Error::Train(format!(
                    "SMO did not converge within {max_passes} passes; \
                     worst KKT violation {:.3e} (tol {:.1e})",
                    self.worst_violation() + self.gate_tol,
                    self.user_tol
                )));
            }
            self.rng.shuffle(&mut order);
            let mut changed = 0usize;
            for idx in 0..self.n {
                let i2 = order[idx];
                if examine_all || self.is_unbound(i2) {
                    if self.examine(i2) {
                        changed += 1;
                    }
                }
            }
            if examine_all {
                if changed == 0 {
                    return Ok(());
                }
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
        }
    }
}

/// Trains the soft-margin dual by SMO. The bias of the returned model is
/// the mean of y_i - sum_j alpha_j y_j K(x_j, x_i) over the unbound
/// support vectors (falling back to all support vectors, then to the SMO
/// running bias, when none are unbound).
pub fn svm_train(data: &Dataset, kernel: KernelSpec, params: &SvmTrainParams) -> Result<SvmModel> {
    kernel.validate()?;
    if !(params.c > 0.0) {
        return Err(Error::Config(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol > 0.0) {
        return Err(Error::Config(format!("tol must be positive, got {}", params.tol)));
    }
    data.require_both_classes(1)?;

    let mut smo = Smo::new(data, &kernel, params);
    smo.solve(params.max_passes)?;

    let n = data.n();
    let sv_idx: Vec<usize> = (0..n).filter(|&i| smo.alpha[i] > 0.0).collect();

    // recompute the bias from the margin identity on unbound SVs
    let margin_bias = |indices: &[usize]| -> Option<f64> {
        if indices.is_empty() {
            return None;
        }
        let mut acc = 0.0;
        for &i in indices {
            let mut f_no_b = 0.0;
            for &j in &sv_idx {
                f_no_b += smo.alpha[j] * smo.y[j] * smo.k(j, i);
            }
            acc += smo.y[i] - f_no_b;
        }
        Some(acc / indices.len() as f64)
    };
    let unbound: Vec<usize> = sv_idx
        .iter()
        .copied()
        .filter(|&i| smo.alpha[i] < params.c)
        .collect();
    let bias = margin_bias(&unbound)
        .or_else(|| margin_bias(&sv_idx))
        .unwrap_or(smo.bias);

    let p = data.p();
    let mut support_vectors = Vec::with_capacity(sv_idx.len() * p);
    let mut support_labels = Vec::with_capacity(sv_idx.len());
    let mut alphas = Vec::with_capacity(sv_idx.len());
    for &i in &sv_idx {
        support_vectors.extend_from_slice(data.row(i));
        support_labels.push(smo.y[i]);
        alphas.push(smo.alpha[i]);
    }
    Ok(SvmModel {
        support_vectors,
        support_labels,
        alphas,
        bias,
        kernel,
        c: params.c,
        p,
    })
}

/// The three KKT residuals of a trained model on its training set; all are
/// <= 0 at an exact optimum and <= 0 within tol after SMO.
pub fn kkt_residuals(model: &SvmModel, data: &Dataset) -> Result<Vec<f64>> {
    // map training points onto stored alphas: points dropped from the model
    // have alpha = 0
    let mut residuals = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let x = data.row(i);
        let y = 2.0 * data.label(i) as f64 - 1.0;
        let yf = y * model.decision(x)?;
        // locate this point's alpha (0 if not a stored SV)
        let mut alpha = 0.0;
        for s in 0..model.n_support() {
            if model.support_vector(s) == x && model.support_labels[s] == y {
                alpha = model.alphas[s];
                break;
            }
        }
        let r = if alpha <= 0.0 {
            1.0 - yf // must have y f >= 1
        } else if alpha >= model.c {
            yf - 1.0 // must have y f <= 1
        } else {
            (yf - 1.0).abs() // must sit on the margin
        };
        residuals.push(r);
    }
    Ok(residuals)
}
