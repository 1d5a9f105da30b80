//! Seeded, stratified, group-aware train/test partitioning.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DatasetManifest;
use crate::classify::Label;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    /// Split each label separately so both sides keep the class balance.
    pub stratified: bool,
    /// Keep every row of a group on the same side.
    pub group_aware: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.2,
            seed: 42,
            stratified: true,
            group_aware: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Parameter(format!(
                "test fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        Ok(())
    }
}

/// Partitions row indices into `(train, test)`, each sorted ascending.
///
/// Rows are grouped into units (a whole group, or a single ungrouped row),
/// units are shuffled per stratum, and units are moved to the test side
/// while doing so brings the test count closer to `test_fraction` of the
/// stratum. The train side always keeps at least one unit.
pub fn split_indices(
    labels: &[Label],
    groups: &[Option<&str>],
    spec: &SplitSpec,
) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    assert_eq!(labels.len(), groups.len());

    let mut units: Vec<Vec<usize>> = Vec::new();
    let mut group_slot: Vec<(&str, usize)> = Vec::new();
    for (i, g) in groups.iter().enumerate() {
        match g {
            Some(name) if spec.group_aware => {
                if let Some(&(_, u)) = group_slot.iter().find(|(n, _)| n == name) {
                    units[u].push(i);
                } else {
                    group_slot.push((name, units.len()));
                    units.push(vec![i]);
                }
            }
            _ => units.push(vec![i]),
        }
    }
    for unit in &units {
        let first = labels[unit[0]];
        if unit.iter().any(|&i| labels[i] != first) {
            return Err(Error::Validation(format!(
                "group `{}` mixes fake and real rows",
                groups[unit[0]].unwrap_or("")
            )));
        }
    }

    let strata: Vec<Vec<&Vec<usize>>> = if spec.stratified {
        [Label::Fake, Label::Real]
            .iter()
            .map(|&l| {
                units
                    .iter()
                    .filter(|u| labels[u[0]] == l)
                    .collect::<Vec<_>>()
            })
            .filter(|s| !s.is_empty())
            .collect()
    } else {
        vec![units.iter().collect()]
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut test = Vec::new();
    for mut stratum in strata {
        let rows: usize = stratum.iter().map(|u| u.len()).sum();
        if stratum.len() < 2 {
            let label = labels[stratum[0][0]];
            return Err(Error::Validation(format!(
                "cannot split {label} rows: {rows} row(s) in {} unit(s), need at least 2 units",
                stratum.len()
            )));
        }
        stratum.shuffle(&mut rng);
        let target = spec.test_fraction * rows as f64;
        let mut taken = 0usize;
        let mut taken_units = 0usize;
        for unit in &stratum {
            if taken as f64 >= target || taken_units + 1 == stratum.len() {
                break;
            }
            let with = (taken + unit.len()) as f64;
            if taken_units == 0 || (with - target).abs() < (taken as f64 - target).abs() {
                test.extend_from_slice(unit);
                taken += unit.len();
                taken_units += 1;
            }
        }
    }
    test.sort_unstable();
    let mut in_test = vec![false; labels.len()];
    for &i in &test {
        in_test[i] = true;
    }
    let train = (0..labels.len()).filter(|&i| !in_test[i]).collect();
    Ok((train, test))
}

/// Splits a manifest; both halves keep manifest order.
pub fn split(
    manifest: &DatasetManifest,
    spec: &SplitSpec,
) -> Result<(DatasetManifest, DatasetManifest)> {
    let labels: Vec<Label> = manifest.entries().iter().map(|e| e.label).collect();
    let groups: Vec<Option<&str>> = manifest
        .entries()
        .iter()
        .map(|e| e.group.as_deref())
        .collect();
    let (train, test) = split_indices(&labels, &groups, spec)?;
    Ok((manifest.select(&train), manifest.select(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ManifestEntry;
    use proptest::prelude::*;

    fn manifest(fake: usize, real: usize) -> DatasetManifest {
        let entries = (0..fake + real)
            .map(|i| ManifestEntry {
                path: format!("{i}.png"),
                label: if i < fake { Label::Fake } else { Label::Real },
                group: None,
            })
            .collect();
        DatasetManifest::new(entries, ".").unwrap()
    }

    fn count(m: &DatasetManifest, label: Label) -> usize {
        m.entries().iter().filter(|e| e.label == label).count()
    }

    #[test]
    fn ten_and_ten_at_twenty_percent() {
        let (train, test) = split(&manifest(10, 10), &SplitSpec::default()).unwrap();
        assert_eq!(
            (count(&train, Label::Fake), count(&train, Label::Real)),
            (8, 8)
        );
        assert_eq!(
            (count(&test, Label::Fake), count(&test, Label::Real)),
            (2, 2)
        );
    }

    #[test]
    fn same_seed_same_split() {
        let m = manifest(13, 9);
        let a = split(&m, &SplitSpec::default()).unwrap();
        let b = split(&m, &SplitSpec::default()).unwrap();
        assert_eq!(a, b);
        let c = split(
            &m,
            &SplitSpec {
                seed: 7,
                ..SplitSpec::default()
            },
        )
        .unwrap();
        assert_ne!(a.1, c.1);
    }

    #[test]
    fn whole_groups_move_together() {
        // four videos of five frames, all real
        let entries = (0..20)
            .map(|i| ManifestEntry {
                path: format!("f{i}.png"),
                label: Label::Real,
                group: Some(format!("video{}", i / 5)),
            })
            .collect();
        let m = DatasetManifest::new(entries, ".").unwrap();
        for seed in 0..20 {
            let spec = SplitSpec {
                test_fraction: 0.25,
                seed,
                ..SplitSpec::default()
            };
            let (train, test) = split(&m, &spec).unwrap();
            assert_eq!(test.len(), 5);
            assert_eq!(train.len(), 15);
            let g = test.entries()[0].group.clone();
            assert!(test.entries().iter().all(|e| e.group == g));
        }
    }

    #[test]
    fn class_too_small() {
        assert!(matches!(
            split(&manifest(1, 10), &SplitSpec::default()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn mixed_label_group_is_rejected() {
        let entries = vec![
            ManifestEntry {
                path: "a".into(),
                label: Label::Fake,
                group: Some("v".into()),
            },
            ManifestEntry {
                path: "b".into(),
                label: Label::Real,
                group: Some("v".into()),
            },
        ];
        let m = DatasetManifest::new(entries, ".").unwrap();
        assert!(split(&m, &SplitSpec::default()).is_err());
    }

    #[test]
    fn bad_fraction() {
        for f in [0.0, 1.0, -0.1, f64::NAN] {
            let spec = SplitSpec {
                test_fraction: f,
                ..SplitSpec::default()
            };
            assert!(split(&manifest(5, 5), &spec).is_err());
        }
    }

    proptest! {
        #[test]
        fn partition_and_class_balance(
            fake in 2usize..40,
            real in 2usize..40,
            frac in 0.05f64..0.95,
            seed in any::<u64>(),
        ) {
            let labels: Vec<Label> = (0..fake + real)
                .map(|i| if i < fake { Label::Fake } else { Label::Real })
                .collect();
            let groups = vec![None; labels.len()];
            let spec = SplitSpec { test_fraction: frac, seed, ..SplitSpec::default() };
            let (train, test) = split_indices(&labels, &groups, &spec).unwrap();
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for class in [Label::Fake, Label::Real] {
                let n = labels.iter().filter(|&&l| l == class).count();
                let in_test = test.iter().filter(|&&i| labels[i] == class).count();
                let expected = frac * n as f64;
                prop_assert!((in_test as f64 - expected).abs() <= 1.0,
                    "class {:?}: {} of {} in test, expected {}", class, in_test, n, expected);
                prop_assert!(in_test >= 1 && in_test < n);
            }
        }
    }
}
