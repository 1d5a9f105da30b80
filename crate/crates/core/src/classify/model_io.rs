//! Line-oriented text format for trained models.
//!
//! ```text
//! logistic 1                 svm 1                    kmeans 1
//! w <d> <v0> ... <vd-1>      gamma <g>                <k> <d>
//! b <bias>                   b <bias>                 <c0> ... <cd-1>     (k lines)
//!                            <alpha*y> <v0> ...       map <cluster> <label> (k lines)
//! ```
//!
//! Lines starting with `#` may follow the first line and carry free-form
//! metadata; they are returned to the caller untouched.

use std::io::Write;
use std::path::Path;

use super::{KMeansModel, Label, LogisticModel, Model, SvmModel};
use crate::numfmt::{real, reals};
use crate::{Error, Result};

const VERSION: u32 = 1;

/// A model plus the `#` comment lines stored with it (without the `#`).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: Model,
    pub comments: Vec<String>,
}

pub fn write_model<W: Write>(
    mut out: W,
    model: &Model,
    comments: &[String],
) -> std::io::Result<()> {
    writeln!(out, "{} {VERSION}", model.kind())?;
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    match model {
        Model::Logistic(m) => {
            writeln!(out, "w {} {}", m.weights().len(), reals(m.weights(), " "))?;
            writeln!(out, "b {}", real(m.bias()))?;
        }
        Model::Svm(m) => {
            writeln!(out, "gamma {}", real(m.gamma()))?;
            writeln!(out, "b {}", real(m.bias()))?;
            for (sv, coef) in m.support_vectors().iter().zip(m.dual_coeffs()) {
                writeln!(out, "{} {}", real(*coef), reals(sv, " "))?;
            }
        }
        Model::KMeans(m) => {
            writeln!(out, "{} {}", m.centroids().len(), m.centroids()[0].len())?;
            for c in m.centroids() {
                writeln!(out, "{}", reals(c, " "))?;
            }
            for (i, label) in m.cluster_to_label().iter().enumerate() {
                writeln!(out, "map {i} {}", label.as_u8())?;
            }
        }
    }
    Ok(())
}

pub fn save_model(path: &Path, model: &Model, comments: &[String]) -> Result<()> {
    let mut buf = Vec::new();
    write_model(&mut buf, model, comments).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_model(&text, path)
}

/// Parses a model; `origin` only labels error messages.
pub fn read_model(text: &str, origin: &Path) -> Result<ModelFile> {
    let err = |line: usize, msg: String| Error::parse(origin, line, msg);
    let mut comments = Vec::new();
    let mut body: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, head) = lines
        .next()
        .ok_or_else(|| err(1, "empty model file".into()))?;
    let head: Vec<&str> = head.split_whitespace().collect();
    let (kind, version) = match head.as_slice() {
        [kind, version] => (*kind, *version),
        _ => return Err(err(1, "expected `<model-kind> <version>`".into())),
    };
    if version != VERSION.to_string() {
        return Err(err(1, format!("unsupported model version {version}")));
    }
    for (n, line) in lines {
        let trimmed = line.trim();
        if let Some(c) = trimmed.strip_prefix('#') {
            comments.push(c.trim().to_string());
        } else if !trimmed.is_empty() {
            body.push((n, trimmed.split_whitespace().collect()));
        }
    }

    let num = |line: usize, tok: &str| -> Result<f64> {
        let v: f64 = tok
            .parse()
            .map_err(|_| err(line, format!("`{tok}` is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(err(line, format!("non-finite value `{tok}`")))
        }
    };
    let int = |line: usize, tok: &str| -> Result<usize> {
        tok.parse()
            .map_err(|_| err(line, format!("`{tok}` is not a non-negative integer")))
    };
    let keyed = |idx: usize, key: &str| -> Result<(usize, &[&str])> {
        let (line, toks) = body
            .get(idx)
            .ok_or_else(|| err(0, format!("missing `{key}` line")))?;
        match toks.split_first() {
            Some((k, rest)) if *k == key => Ok((*line, rest)),
            _ => Err(err(*line, format!("expected `{key}` line"))),
        }
    };

    let model = match kind {
        "logistic" => {
            let (line, rest) = keyed(0, "w")?;
            let (&d, values) = rest
                .split_first()
                .ok_or_else(|| err(line, "missing dimension".into()))?;
            let d = int(line, d)?;
            if values.len() != d {
                return Err(err(
                    line,
                    format!("expected {d} weights, found {}", values.len()),
                ));
            }
            let weights = values
                .iter()
                .map(|t| num(line, t))
                .collect::<Result<Vec<_>>>()?;
            let (line, rest) = keyed(1, "b")?;
            let [b] = rest else {
                return Err(err(line, "expected `b <value>`".into()));
            };
            if body.len() > 2 {
                return Err(err(body[2].0, "unexpected trailing line".into()));
            }
            Model::Logistic(LogisticModel::new(weights, num(line, b)?)?)
        }
        "svm" => {
            let (line, rest) = keyed(0, "gamma")?;
            let [g] = rest else {
                return Err(err(line, "expected `gamma <value>`".into()));
            };
            let gamma = num(line, g)?;
            let (line, rest) = keyed(1, "b")?;
            let [b] = rest else {
                return Err(err(line, "expected `b <value>`".into()));
            };
            let bias = num(line, b)?;
            let mut svs = Vec::new();
            let mut coefs = Vec::new();
            for (line, toks) in &body[2..] {
                let values = toks
                    .iter()
                    .map(|t| num(*line, t))
                    .collect::<Result<Vec<_>>>()?;
                let (coef, sv) = values
                    .split_first()
                    .ok_or_else(|| err(*line, "empty support vector line".into()))?;
                coefs.push(*coef);
                svs.push(sv.to_vec());
            }
            Model::Svm(SvmModel::new(svs, coefs, bias, gamma)?)
        }
        "kmeans" => {
            let (line, toks) = body
                .first()
                .ok_or_else(|| err(2, "missing `k d` line".into()))?;
            let [k, d] = toks.as_slice() else {
                return Err(err(*line, "expected `<k> <d>`".into()));
            };
            let (k, d) = (int(*line, k)?, int(*line, d)?);
            if body.len() != 1 + 2 * k {
                return Err(err(
                    *line,
                    format!("expected {k} centroid and {k} map lines"),
                ));
            }
            let mut centroids = Vec::with_capacity(k);
            for (line, toks) in &body[1..=k] {
                if toks.len() != d {
                    return Err(err(*line, format!("centroid needs {d} values")));
                }
                centroids.push(
                    toks.iter()
                        .map(|t| num(*line, t))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            let mut labels = vec![None; k];
            for (line, toks) in &body[k + 1..] {
                let [key, cluster, label] = toks.as_slice() else {
                    return Err(err(*line, "expected `map <cluster> <label>`".into()));
                };
                if *key != "map" {
                    return Err(err(*line, "expected `map <cluster> <label>`".into()));
                }
                let cluster = int(*line, cluster)?;
                let label = int(*line, label)
                    .ok()
                    .and_then(|l| u8::try_from(l).ok())
                    .and_then(Label::from_u8)
                    .ok_or_else(|| err(*line, format!("label must be 0 or 1, got `{label}`")))?;
                let slot = labels
                    .get_mut(cluster)
                    .ok_or_else(|| err(*line, format!("cluster {cluster} out of range")))?;
                if slot.replace(label).is_some() {
                    return Err(err(*line, format!("cluster {cluster} mapped twice")));
                }
            }
            let labels = labels
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::ModelIntegrity("a cluster has no label mapping".into()))?;
            Model::KMeans(KMeansModel::new(centroids, labels)?)
        }
        other => return Err(err(1, format!("unknown model kind `{other}`"))),
    };
    Ok(ModelFile { model, comments })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(model: Model) {
        let mut buf = Vec::new();
        write_model(&mut buf, &model, &["d=2, log=true".to_string()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = read_model(&text, Path::new("mem")).unwrap();
        assert_eq!(back.model, model);
        assert_eq!(back.comments, vec!["d=2, log=true".to_string()]);
    }

    #[test]
    fn all_kinds_round_trip() {
        round_trip(Model::Logistic(
            LogisticModel::new(vec![0.1, -3.0e-7], 1.0 / 3.0).unwrap(),
        ));
        round_trip(Model::Svm(
            SvmModel::new(
                vec![vec![0.5, 0.25], vec![1.0, 2.0]],
                vec![0.7, -0.7],
                -0.01,
                0.5,
            )
            .unwrap(),
        ));
        round_trip(Model::KMeans(
            KMeansModel::new(
                vec![vec![0.0, 1.0], vec![2.0, 3.0]],
                vec![Label::Fake, Label::Real],
            )
            .unwrap(),
        ));
    }

    #[test]
    fn logistic_layout() {
        let mut buf = Vec::new();
        let m = Model::Logistic(LogisticModel::new(vec![1.0, 2.0], 0.5).unwrap());
        write_model(&mut buf, &m, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "logistic 1\nw 2 1.0000000000000000e0 2.0000000000000000e0\nb 5.0000000000000000e-1\n"
        );
    }

    #[test]
    fn svm_without_support_vectors_is_rejected() {
        let err = read_model("svm 1\ngamma 1\nb 0\n", Path::new("m")).unwrap_err();
        assert!(matches!(err, Error::ModelIntegrity(_)));
    }

    #[test]
    fn malformed_files() {
        for text in [
            "",
            "logistic 2\nw 1 1\nb 0\n",
            "logistic 1\nw 2 1\nb 0\n",
            "logistic 1\nw 1 x\nb 0\n",
            "forest 1\n",
            "kmeans 1\n2 1\n0\n1\nmap 0 0\nmap 0 1\n",
            "kmeans 1\n2 1\n0\n1\nmap 0 0\nmap 1 2\n",
        ] {
            assert!(read_model(text, Path::new("m")).is_err(), "{text:?}");
        }
    }
}
