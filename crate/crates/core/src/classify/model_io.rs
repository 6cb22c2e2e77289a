//! Versioned text format for trained models: key/value lines plus
//! whitespace-separated matrices, floats at 17 significant digits so a
//! reloaded model predicts identically. Lines starting with `#` are
//! comments (the run-config echo) and are ignored on load.

use std::fs;
use std::path::Path;

use super::{KernelSpec, KnnModel, LdaModel, Metric, QdaModel, SvmModel, TrainedModel};
use crate::features::fmt_f64;
use crate::{Error, Result};

const MAGIC: &str = "accent-model";

fn version_line() -> String {
    format!("{MAGIC} v{}", crate::FORMAT_VERSION)
}

fn push_row(out: &mut String, values: &[f64]) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        out.push_str(&fmt_f64(*v));
        first = false;
    }
    out.push('\n');
}

/// Saves a model; `comments` are echoed as `#` lines after the version.
pub fn save_model(
    path: impl AsRef<Path>,
    model: &TrainedModel,
    comments: &[String],
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&version_line());
    out.push('\n');
    for c in comments {
        out.push_str(&format!("#{c}\n"));
    }
    out.push_str(&format!("kind {}\n", model.kind().name()));
    out.push_str(&format!("p {}\n", model.dim()));
    match model {
        TrainedModel::Lda(m) => {
            out.push_str("log_priors ");
            push_row(&mut out, &m.log_priors);
            for (k, mean) in m.class_means.iter().enumerate() {
                out.push_str(&format!("mean {k} "));
                push_row(&mut out, mean);
            }
            out.push_str("pooled_cov_inverse\n");
            for r in 0..m.p {
                push_row(&mut out, &m.pooled_cov_inverse[r * m.p..(r + 1) * m.p]);
            }
        }
        TrainedModel::Qda(m) => {
            out.push_str("log_priors ");
            push_row(&mut out, &m.log_priors);
            out.push_str("log_dets ");
            push_row(&mut out, &m.log_dets);
            for (k, mean) in m.class_means.iter().enumerate() {
                out.push_str(&format!("mean {k} "));
                push_row(&mut out, mean);
            }
            for (k, inv) in m.cov_inverses.iter().enumerate() {
                out.push_str(&format!("cov_inverse {k}\n"));
                for r in 0..m.p {
                    push_row(&mut out, &inv[r * m.p..(r + 1) * m.p]);
                }
            }
        }
        TrainedModel::Svm(m) => {
            match &m.kernel {
                KernelSpec::Rbf { gamma } => {
                    out.push_str(&format!("kernel rbf {}\n", fmt_f64(*gamma)))
                }
                KernelSpec::Polynomial { degree, coef0 } => {
                    out.push_str(&format!("kernel poly {degree} {}\n", fmt_f64(*coef0)))
                }
            }
            out.push_str(&format!("c {}\n", fmt_f64(m.c)));
            out.push_str(&format!("bias {}\n", fmt_f64(m.bias)));
            out.push_str(&format!("n_support {}\n", m.n_support()));
            for i in 0..m.n_support() {
                let y = if m.support_labels[i] > 0.0 { 1 } else { -1 };
                out.push_str(&format!("{y} {} ", fmt_f64(m.alphas[i])));
                push_row(&mut out, m.support_vector(i));
            }
        }
        TrainedModel::Knn(m) => {
            out.push_str(&format!("k {}\n", m.k));
            out.push_str(&format!("metric {}\n", m.metric.name()));
            out.push_str(&format!("n {}\n", m.n));
            for i in 0..m.n {
                out.push_str(&format!("{} ", m.labels[i]));
                push_row(&mut out, m.point(i));
            }
        }
    }
    fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct Lines<'a> {
    iter: std::str::Lines<'a>,
    lineno: usize,
}

impl<'a> Lines<'a> {
    fn next_content(&mut self) -> Result<&'a str> {
        for line in self.iter.by_ref() {
            self.lineno += 1;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Ok(line);
        }
        Err(Error::Model("unexpected end of model file".into()))
    }

    fn expect_key(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_content()?;
        line.strip_prefix(key)
            .map(str::trim)
            .ok_or_else(|| {
                Error::Model(format!(
                    "line {}: expected {key:?}, got {line:?}",
                    self.lineno
                ))
            })
    }
}

fn parse_floats(s: &str, lineno: usize) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Model(format!("line {lineno}: bad float {t:?}")))
        })
        .collect()
}

fn parse_usize(s: &str, lineno: usize) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::Model(format!("line {lineno}: bad integer {s:?}")))
}

fn read_matrix(lines: &mut Lines, rows: usize, cols: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let row = parse_floats(lines.next_content()?, lines.lineno)?;
        if row.len() != cols {
            return Err(Error::Model(format!(
                "line {}: expected {cols} values, got {}",
                lines.lineno,
                row.len()
            )));
        }
        out.extend(row);
    }
    Ok(out)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&text)
}

pub(crate) fn parse_model(text: &str) -> Result<TrainedModel> {
    let mut lines = Lines {
        iter: text.lines(),
        lineno: 0,
    };
    let header = lines.next_content()?;
    if header != version_line() {
        return Err(Error::Model(format!(
            "unknown model version: expected {:?}, got {header:?}",
            version_line()
        )));
    }
    let kind = lines.expect_key("kind")?.to_string();
    let p = parse_usize(lines.expect_key("p")?, lines.lineno)?;
    if p == 0 {
        return Err(Error::Model("model dimension must be positive".into()));
    }

    match kind.as_str() {
        "lda" => {
            let log_priors = parse_floats(lines.expect_key("log_priors")?, lines.lineno)?;
            let mut class_means = Vec::new();
            for k in 0..log_priors.len() {
                let row = parse_floats(lines.expect_key(&format!("mean {k}"))?, lines.lineno)?;
                if row.len() != p {
                    return Err(Error::Model(format!("mean {k} has wrong dimension")));
                }
                class_means.push(row);
            }
            lines.expect_key("pooled_cov_inverse")?;
            let pooled_cov_inverse = read_matrix(&mut lines, p, p)?;
            Ok(TrainedModel::Lda(LdaModel {
                class_means,
                pooled_cov_inverse,
                log_priors,
                p,
            }))
        }
        "qda" => {
            let log_priors = parse_floats(lines.expect_key("log_priors")?, lines.lineno)?;
            let log_dets = parse_floats(lines.expect_key("log_dets")?, lines.lineno)?;
            let n_classes = log_priors.len();
            if log_dets.len() != n_classes {
                return Err(Error::Model("log_dets/log_priors length mismatch".into()));
            }
            let mut class_means = Vec::new();
            for k in 0..n_classes {
                let row = parse_floats(lines.expect_key(&format!("mean {k}"))?, lines.lineno)?;
                if row.len() != p {
                    return Err(Error::Model(format!("mean {k} has wrong dimension")));
                }
                class_means.push(row);
            }
            let mut cov_inverses = Vec::new();
            for k in 0..n_classes {
                lines.expect_key(&format!("cov_inverse {k}"))?;
                cov_inverses.push(read_matrix(&mut lines, p, p)?);
            }
            Ok(TrainedModel::Qda(QdaModel {
                class_means,
                cov_inverses,
                log_dets,
                log_priors,
                p,
            }))
        }
        "svm-rbf" | "svm-poly" => {
            let kernel_line = lines.expect_key("kernel")?;
            let mut parts = kernel_line.split_whitespace();
            let kernel = match parts.next() {
                Some("rbf") => {
                    let gamma = parse_floats(parts.next().unwrap_or(""), lines.lineno)?
                        .first()
                        .copied()
                        .ok_or_else(|| Error::Model("rbf kernel missing gamma".into()))?;
                    KernelSpec::Rbf { gamma }
                }
                Some("poly") => {
                    let degree =
                        parse_usize(parts.next().unwrap_or(""), lines.lineno)? as u32;
                    let coef0 = parse_floats(parts.next().unwrap_or(""), lines.lineno)?
                        .first()
                        .copied()
                        .ok_or_else(|| Error::Model("poly kernel missing coef0".into()))?;
                    KernelSpec::Polynomial { degree, coef0 }
                }
                other => {
                    return Err(Error::Model(format!("unknown kernel {other:?}")));
                }
            };
            let c = parse_floats(lines.expect_key("c")?, lines.lineno)?[0];
            let bias = parse_floats(lines.expect_key("bias")?, lines.lineno)?[0];
            let n_support = parse_usize(lines.expect_key("n_support")?, lines.lineno)?;
            let mut support_vectors = Vec::with_capacity(n_support * p);
            let mut support_labels = Vec::with_capacity(n_support);
            let mut alphas = Vec::with_capacity(n_support);
            for _ in 0..n_support {
                let row = parse_floats(lines.next_content()?, lines.lineno)?;
                if row.len() != p + 2 {
                    return Err(Error::Model(format!(
                        "line {}: support vector row must be label alpha v0..v{}",
                        lines.lineno,
                        p - 1
                    )));
                }
                if row[0] != 1.0 && row[0] != -1.0 {
                    return Err(Error::Model(format!(
                        "line {}: support label must be -1 or 1",
                        lines.lineno
                    )));
                }
                support_labels.push(row[0]);
                alphas.push(row[1]);
                support_vectors.extend_from_slice(&row[2..]);
            }
            Ok(TrainedModel::Svm(SvmModel {
                support_vectors,
                support_labels,
                alphas,
                bias,
                kernel,
                c,
                p,
            }))
        }
        "knn" => {
            let k = parse_usize(lines.expect_key("k")?, lines.lineno)?;
            let metric = Metric::parse(lines.expect_key("metric")?)?;
            let n = parse_usize(lines.expect_key("n")?, lines.lineno)?;
            let mut points = Vec::with_capacity(n * p);
            let mut labels = Vec::with_capacity(n);
            for _ in 0..n {
                let row = parse_floats(lines.next_content()?, lines.lineno)?;
                if row.len() != p + 1 {
                    return Err(Error::Model(format!(
                        "line {}: point row must be label v0..v{}",
                        lines.lineno,
                        p - 1
                    )));
                }
                if row[0] != 0.0 && row[0] != 1.0 {
                    return Err(Error::Model(format!(
                        "line {}: stored label must be 0 or 1",
                        lines.lineno
                    )));
                }
                labels.push(row[0] as u8);
                points.extend_from_slice(&row[1..]);
            }
            if k == 0 || k > n {
                return Err(Error::Model(format!("k={k} out of range for n={n}")));
            }
            Ok(TrainedModel::Knn(KnnModel {
                points,
                labels,
                k,
                metric,
                n,
                p,
            }))
        }
        other => Err(Error::Model(format!("unknown classifier kind {other:?}"))),
    }
}
