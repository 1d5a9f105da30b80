//! Persisted feature profiles.
//!
//! ```text
//! # sfk feature cache v1
//! # d=92, log=true, norm=true, target_len=0, epsilon=9.9999999999999998e-13, seed=42, band=0:92
//! path,group,label,b0,...,b91
//! real_0000.png,,1,1.0000000000000000e0,...
//! ```
//!
//! `band=a:b` records which native bins the columns hold, so band selection
//! can be composed and replayed at prediction time.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::DatasetManifest;
use crate::classify::{Label, LabeledSample};
use crate::numfmt;
use crate::spectrum::{extract_file, ExtractionConfig};
use crate::{Error, Result};

const MAGIC: &str = "sfk feature cache v1";

#[derive(Debug, Clone, PartialEq)]
pub struct CacheHeader {
    pub config: ExtractionConfig,
    pub dimension: usize,
    pub seed: u64,
    /// Half-open range of extracted bins held by the columns.
    pub band: (usize, usize),
}

impl CacheHeader {
    /// One-line `key=value` echo used in cache, model and result headers.
    pub fn echo(&self) -> String {
        format!(
            "d={}, log={}, norm={}, target_len={}, epsilon={}, seed={}, band={}:{}",
            self.dimension,
            self.config.log_power,
            self.config.normalize_dc,
            self.config.target_length,
            numfmt::real(self.config.epsilon),
            self.seed,
            self.band.0,
            self.band.1
        )
    }

    /// Inverse of [`CacheHeader::echo`].
    pub fn parse_echo(text: &str) -> std::result::Result<Self, String> {
        let mut fields = std::collections::HashMap::new();
        for part in text.split(',') {
            let (k, v) = part
                .trim()
                .split_once('=')
                .ok_or_else(|| format!("`{}` is not key=value", part.trim()))?;
            fields.insert(k.trim(), v.trim());
        }
        fn get<'a>(
            f: &std::collections::HashMap<&str, &'a str>,
            key: &str,
        ) -> std::result::Result<&'a str, String> {
            f.get(key)
                .copied()
                .ok_or_else(|| format!("missing `{key}`"))
        }
        fn parse<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse()
                .map_err(|_| format!("bad value `{v}` for `{key}`"))
        }
        let band = get(&fields, "band")?;
        let (a, b) = band
            .split_once(':')
            .ok_or_else(|| format!("bad band `{band}`"))?;
        let header = CacheHeader {
            config: ExtractionConfig {
                target_length: parse("target_len", get(&fields, "target_len")?)?,
                normalize_dc: parse("norm", get(&fields, "norm")?)?,
                log_power: parse("log", get(&fields, "log")?)?,
                epsilon: parse("epsilon", get(&fields, "epsilon")?)?,
            },
            dimension: parse("d", get(&fields, "d")?)?,
            seed: parse("seed", get(&fields, "seed")?)?,
            band: (parse("band", a)?, parse("band", b)?),
        };
        if header.band.1 < header.band.0 || header.band.1 - header.band.0 != header.dimension {
            return Err(format!(
                "band {}:{} does not span d={}",
                header.band.0, header.band.1, header.dimension
            ));
        }
        header.config.validate().map_err(|e| e.to_string())?;
        Ok(header)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheRow {
    pub path: String,
    pub group: Option<String>,
    pub label: Label,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCache {
    pub header: CacheHeader,
    pub rows: Vec<CacheRow>,
}

/// An image that could not be turned into a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionFailure {
    pub path: String,
    pub reason: String,
}

impl FeatureCache {
    pub fn dimension(&self) -> usize {
        self.header.dimension
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn groups(&self) -> Vec<Option<&str>> {
        self.rows.iter().map(|r| r.group.as_deref()).collect()
    }

    pub fn samples(&self) -> Vec<LabeledSample> {
        self.rows
            .iter()
            .map(|r| LabeledSample::new(r.features.clone(), r.label))
            .collect()
    }

    /// Rows at `indices`, header unchanged.
    pub fn subset(&self, indices: &[usize]) -> FeatureCache {
        FeatureCache {
            header: self.header.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn expect_dimension(&self, d: usize) -> Result<()> {
        if self.dimension() != d {
            return Err(Error::Dimension(format!(
                "cache holds {} features per row, expected {d}",
                self.dimension()
            )));
        }
        Ok(())
    }

    /// Fails unless the cache was extracted with `cfg`.
    pub fn expect_config(&self, cfg: &ExtractionConfig) -> Result<()> {
        if &self.header.config != cfg {
            return Err(Error::Validation(format!(
                "cache was extracted with {:?}, expected {cfg:?}",
                self.header.config
            )));
        }
        Ok(())
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# {MAGIC}")?;
        writeln!(out, "# {}", self.header.echo())?;
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        let mut header = vec!["path".to_string(), "group".to_string(), "label".to_string()];
        header.extend((0..self.dimension()).map(|i| format!("b{i}")));
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(self.dimension() + 3);
        for row in &self.rows {
            record.clear();
            record.push(row.path.clone());
            record.push(row.group.clone().unwrap_or_default());
            record.push(row.label.as_u8().to_string());
            record.extend(row.features.iter().map(|&v| numfmt::real(v)));
            w.write_record(&record)?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf).map_err(|e| Error::io(path, e))?;
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }
}

pub fn load_cache(path: impl AsRef<Path>) -> Result<FeatureCache> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cache(&text, path)
}

pub fn parse_cache(text: &str, origin: &Path) -> Result<FeatureCache> {
    let mut lines = text.lines();
    let magic = lines.next().unwrap_or("");
    if magic.trim_start_matches('#').trim() != MAGIC {
        return Err(Error::parse(origin, 1, format!("expected `# {MAGIC}`")));
    }
    let echo = lines.next().unwrap_or("");
    let echo = echo
        .strip_prefix('#')
        .ok_or_else(|| Error::parse(origin, 2, "missing configuration line"))?;
    let header = CacheHeader::parse_echo(echo).map_err(|m| Error::parse(origin, 2, m))?;
    let d = header.dimension;

    // csv line numbers restart after the two comment lines
    let offset = 2;
    let body_start = text
        .match_indices('\n')
        .nth(1)
        .map_or(text.len(), |(i, _)| i + 1);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(&text.as_bytes()[body_start..]);
    let columns = reader
        .headers()
        .map_err(|e| Error::parse(origin, offset + 1, e.to_string()))?
        .clone();
    if columns.len() != d + 3
        || &columns[0] != "path"
        || &columns[1] != "group"
        || &columns[2] != "label"
    {
        return Err(Error::Dimension(format!(
            "{}: column header does not match d={d}",
            origin.display()
        )));
    }

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(origin, offset, e.to_string()))?;
        let line = offset + record.position().map_or(0, |p| p.line() as usize);
        if record.len() != d + 3 {
            return Err(Error::Dimension(format!(
                "{}:{line}: expected {d} features, found {}",
                origin.display(),
                record.len().saturating_sub(3)
            )));
        }
        let label = record[2]
            .parse::<u8>()
            .ok()
            .and_then(Label::from_u8)
            .ok_or_else(|| Error::parse(origin, line, format!("bad label `{}`", &record[2])))?;
        let features = record
            .iter()
            .skip(3)
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(origin, line, format!("bad feature `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(CacheRow {
            path: record[0].to_string(),
            group: Some(record[1].to_string()).filter(|g| !g.is_empty()),
            label,
            features,
        });
    }
    Ok(FeatureCache { header, rows })
}

/// Extracts every manifest image on a pool of `jobs` threads.
///
/// Rows come back in manifest order. Images that fail to decode or extract
/// are skipped and reported; it is an error if none succeed or if the
/// successful profiles disagree on length.
pub fn build_cache(
    manifest: &DatasetManifest,
    cfg: &ExtractionConfig,
    seed: u64,
    jobs: usize,
) -> Result<(FeatureCache, Vec<ExtractionFailure>)> {
    cfg.validate()?;
    if manifest.is_empty() {
        return Err(Error::Validation("manifest has no entries".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<Vec<f64>>> = pool.install(|| {
        manifest
            .entries()
            .par_iter()
            .map(|e| extract_file(manifest.resolve(e), cfg).map(|p| p.into_vec()))
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (entry, result) in manifest.entries().iter().zip(results) {
        match result {
            Ok(features) => rows.push(CacheRow {
                path: entry.path.clone(),
                group: entry.group.clone(),
                label: entry.label,
                features,
            }),
            Err(e) => failures.push(ExtractionFailure {
                path: entry.path.clone(),
                reason: e.to_string(),
            }),
        }
    }
    let d = match rows.first() {
        Some(r) => r.features.len(),
        None => {
            return Err(Error::Validation(format!(
                "no image could be extracted ({} failures)",
                failures.len()
            )))
        }
    };
    if let Some(bad) = rows.iter().find(|r| r.features.len() != d) {
        return Err(Error::Dimension(format!(
            "{} yields {} bins but {} yields {d}; mixed image sizes need a target length",
            bad.path,
            bad.features.len(),
            rows[0].path
        )));
    }
    let header = CacheHeader {
        config: *cfg,
        dimension: d,
        seed,
        band: (0, d),
    };
    Ok((FeatureCache { header, rows }, failures))
}

/// [`build_cache`] followed by writing the cache to `out_path`.
pub fn write_cache(
    manifest: &DatasetManifest,
    cfg: &ExtractionConfig,
    out_path: &Path,
    seed: u64,
    jobs: usize,
) -> Result<(FeatureCache, Vec<ExtractionFailure>)> {
    let (cache, failures) = build_cache(manifest, cfg, seed, jobs)?;
    cache.save(out_path)?;
    Ok((cache, failures))
}

/// Keeps columns `[from_bin, to_bin)`.
///
/// Bin indices refer to native radial bins, so the cache must not have been
/// resampled to a target length.
pub fn band_select(cache: &FeatureCache, from_bin: usize, to_bin: usize) -> Result<FeatureCache> {
    if cache.header.config.target_length != 0 {
        return Err(Error::Validation(format!(
            "band selection needs native-resolution bins, but the cache was resampled to {}",
            cache.header.config.target_length
        )));
    }
    let d = cache.dimension();
    if from_bin >= to_bin || to_bin > d {
        return Err(Error::Parameter(format!(
            "band [{from_bin}, {to_bin}) is empty or outside [0, {d})"
        )));
    }
    let mut header = cache.header.clone();
    header.dimension = to_bin - from_bin;
    header.band = (cache.header.band.0 + from_bin, cache.header.band.0 + to_bin);
    let rows = cache
        .rows
        .iter()
        .map(|r| CacheRow {
            features: r.features[from_bin..to_bin].to_vec(),
            ..r.clone()
        })
        .collect();
    Ok(FeatureCache { header, rows })
}
