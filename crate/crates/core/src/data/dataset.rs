use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::daily::DailySeries;
use super::label::ClassLabel;
use crate::error::{Error, Result};
use crate::NUM_CLASSES;

/// Labelled daily series plus balancing metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetFile", into = "DatasetFile")]
pub struct LabeledDataset {
    samples: Vec<DailySeries>,
    balanced: bool,
    seed: Option<u64>,
}

impl LabeledDataset {
    pub fn new(samples: Vec<DailySeries>) -> Self {
        Self {
            samples,
            balanced: false,
            seed: None,
        }
    }

    pub fn samples(&self) -> &[DailySeries] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// True only for datasets produced by [`balance`].
    pub fn is_balanced(&self) -> bool {
        self.balanced
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn per_class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for s in &self.samples {
            counts[s.label.index()] += 1;
        }
        counts
    }

    pub fn class_samples(&self, label: ClassLabel) -> impl Iterator<Item = &DailySeries> {
        self.samples.iter().filter(move |s| s.label == label)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).expect("dataset serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Data(format!("{}: not a dataset file: {e}", path.display())))
    }
}

/// Subsamples every class, uniformly without replacement, down to the
/// smallest class count. Kept samples retain their original order.
pub fn balance(dataset: &LabeledDataset, seed: u64) -> Result<LabeledDataset> {
    let counts = dataset.per_class_counts();
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        let label = ClassLabel::new(empty as u8)?;
        return Err(Error::Balance(format!(
            "class {empty} ({}) has no samples",
            label.description()
        )));
    }
    let target = *counts.iter().min().expect("eight classes");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; dataset.samples.len()];
    for label in ClassLabel::all() {
        let positions: Vec<usize> = dataset
            .samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.label == label)
            .map(|(i, _)| i)
            .collect();
        for chosen in index::sample(&mut rng, positions.len(), target) {
            keep[positions[chosen]] = true;
        }
    }
    let samples = dataset
        .samples
        .iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .map(|(s, _)| s.clone())
        .collect();
    Ok(LabeledDataset {
        samples,
        balanced: true,
        seed: Some(seed),
    })
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    per_class_counts: [usize; NUM_CLASSES],
    balanced: bool,
    seed: Option<u64>,
    samples: Vec<DailySeries>,
}

impl From<LabeledDataset> for DatasetFile {
    fn from(d: LabeledDataset) -> Self {
        DatasetFile {
            per_class_counts: d.per_class_counts(),
            balanced: d.balanced,
            seed: d.seed,
            samples: d.samples,
        }
    }
}

impl TryFrom<DatasetFile> for LabeledDataset {
    type Error = Error;

    fn try_from(f: DatasetFile) -> Result<Self> {
        let d = LabeledDataset {
            samples: f.samples,
            balanced: f.balanced,
            seed: f.seed,
        };
        let counts = d.per_class_counts();
        if counts != f.per_class_counts {
            return Err(Error::Data(format!(
                "declared class counts {:?} disagree with samples {counts:?}",
                f.per_class_counts
            )));
        }
        if d.balanced && counts.iter().any(|&c| c != counts[0]) {
            return Err(Error::Data(
                "dataset marked balanced has unequal class counts".into(),
            ));
        }
        if let Some(bad) = d
            .samples
            .iter()
            .find(|s| s.values.iter().any(|v| !v.is_finite() || *v < 0.0))
        {
            return Err(Error::Data(format!("{}: invalid hourly value", bad.date)));
        }
        Ok(d)
    }
}
