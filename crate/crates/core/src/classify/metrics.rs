use std::io::Write;

use super::{Classifier, LabeledSample};
use crate::{Error, Result};

/// Test-set scores. `confusion[actual][predicted]`, index 0 = fake, 1 = real.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub confusion: [[usize; 2]; 2],
    /// Per predicted class; 0 when the class was never predicted.
    pub precision: [f64; 2],
    /// Per actual class; 0 when the class is absent from the test set.
    pub recall: [f64; 2],
}

impl Metrics {
    pub fn from_confusion(confusion: [[usize; 2]; 2]) -> Self {
        let total: usize = confusion.iter().flatten().sum();
        let correct = confusion[0][0] + confusion[1][1];
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = [0, 1].map(|c| ratio(confusion[c][c], confusion[0][c] + confusion[1][c]));
        let recall = [0, 1].map(|c| ratio(confusion[c][c], confusion[c][0] + confusion[c][1]));
        Metrics {
            accuracy: ratio(correct, total),
            confusion,
            precision,
            recall,
        }
    }

    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    /// `actual,predicted,count` rows plus per-class precision and recall.
    pub fn write_confusion_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "actual,predicted,count")?;
        for actual in 0..2 {
            for predicted in 0..2 {
                writeln!(
                    out,
                    "{},{},{}",
                    class_name(actual),
                    class_name(predicted),
                    self.confusion[actual][predicted]
                )?;
            }
        }
        writeln!(out)?;
        writeln!(out, "class,precision,recall")?;
        for c in 0..2 {
            writeln!(
                out,
                "{},{},{}",
                class_name(c),
                crate::numfmt::real(self.precision[c]),
                crate::numfmt::real(self.recall[c])
            )?;
        }
        Ok(())
    }
}

fn class_name(i: usize) -> &'static str {
    if i == 0 {
        "fake"
    } else {
        "real"
    }
}

pub fn evaluate<C: Classifier + ?Sized>(model: &C, test: &[LabeledSample]) -> Result<Metrics> {
    if test.is_empty() {
        return Err(Error::Validation(
            "cannot evaluate on an empty test set".into(),
        ));
    }
    let mut confusion = [[0usize; 2]; 2];
    for s in test {
        let predicted = model.predict(&s.features)?;
        confusion[s.label.index()][predicted.index()] += 1;
    }
    Ok(Metrics::from_confusion(confusion))
}
