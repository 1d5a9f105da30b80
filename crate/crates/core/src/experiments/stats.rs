//! Per-class mean and spread of spectral profiles.

use std::io::Write;

use crate::classify::Label;
use crate::dataset::FeatureCache;
use crate::numfmt;
use crate::{Error, Result};

/// Indexed by [`Label::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    pub counts: [usize; 2],
    pub mean: [Vec<f64>; 2],
    /// Population standard deviation.
    pub std: [Vec<f64>; 2],
}

impl ClassStats {
    pub fn mean_of(&self, label: Label) -> &[f64] {
        &self.mean[label.index()]
    }

    pub fn std_of(&self, label: Label) -> &[f64] {
        &self.std[label.index()]
    }

    /// `stats.csv`: `bin,real_mean,real_std,fake_mean,fake_std`.
    pub fn write_csv<W: Write>(&self, mut out: W, echo: &[String]) -> std::io::Result<()> {
        for line in echo {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "bin,real_mean,real_std,fake_mean,fake_std")?;
        let (r, f) = (Label::Real.index(), Label::Fake.index());
        for b in 0..self.mean[r].len() {
            writeln!(
                out,
                "{b},{},{},{},{}",
                numfmt::real(self.mean[r][b]),
                numfmt::real(self.std[r][b]),
                numfmt::real(self.mean[f][b]),
                numfmt::real(self.std[f][b])
            )?;
        }
        Ok(())
    }
}

pub fn class_stats(cache: &FeatureCache) -> Result<ClassStats> {
    let d = cache.dimension();
    let mut counts = [0usize; 2];
    let mut sum = [vec![0.0; d], vec![0.0; d]];
    for row in &cache.rows {
        let c = row.label.index();
        counts[c] += 1;
        for (s, v) in sum[c].iter_mut().zip(&row.features) {
            *s += v;
        }
    }
    if let Some(missing) = [Label::Fake, Label::Real]
        .into_iter()
        .find(|l| counts[l.index()] == 0)
    {
        return Err(Error::Validation(format!("no {missing} rows in the cache")));
    }
    let mean = [0, 1].map(|c| {
        sum[c]
            .iter()
            .map(|s| s / counts[c] as f64)
            .collect::<Vec<_>>()
    });
    let mut sq = [vec![0.0; d], vec![0.0; d]];
    for row in &cache.rows {
        let c = row.label.index();
        for ((s, v), m) in sq[c].iter_mut().zip(&row.features).zip(&mean[c]) {
            *s += (v - m) * (v - m);
        }
    }
    let std = [0, 1].map(|c| {
        sq[c]
            .iter()
            .map(|s| (s / counts[c] as f64).sqrt())
            .collect()
    });
    Ok(ClassStats { counts, mean, std })
}
