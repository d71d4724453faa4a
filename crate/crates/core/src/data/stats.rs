use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use super::label::ClassLabel;
use crate::error::{Error, Result};
use crate::{NUM_CLASSES, SERIES_LEN};

/// Per-hour statistics of one class. `mean` is the class representative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassBandStats {
    pub class: ClassLabel,
    pub count: usize,
    pub mean: [f64; SERIES_LEN],
    /// Population standard deviation.
    pub stdev: [f64; SERIES_LEN],
    pub min: [f64; SERIES_LEN],
    pub max: [f64; SERIES_LEN],
}

/// Column statistics over a non-empty collection of series (two-pass
/// mean/variance).
pub fn column_stats<'a, I>(class: ClassLabel, series: I) -> Result<ClassBandStats>
where
    I: IntoIterator<Item = &'a [f64; SERIES_LEN]>,
    I::IntoIter: Clone,
{
    let iter = series.into_iter();
    let mut count = 0usize;
    let mut sum = [0.0; SERIES_LEN];
    let mut min = [f64::INFINITY; SERIES_LEN];
    let mut max = [f64::NEG_INFINITY; SERIES_LEN];
    for s in iter.clone() {
        count += 1;
        for h in 0..SERIES_LEN {
            sum[h] += s[h];
            min[h] = min[h].min(s[h]);
            max[h] = max[h].max(s[h]);
        }
    }
    if count == 0 {
        return Err(Error::Stats(format!("class {class} has no samples")));
    }
    let n = count as f64;
    let mut mean = sum.map(|v| v / n);
    let mut sq = [0.0; SERIES_LEN];
    for s in iter {
        for h in 0..SERIES_LEN {
            let d = s[h] - mean[h];
            sq[h] += d * d;
        }
    }
    let mut stdev = sq.map(|v| (v / n).sqrt());
    for h in 0..SERIES_LEN {
        // rounding can push the mean of a constant column off by an ulp
        if min[h] == max[h] {
            mean[h] = min[h];
            stdev[h] = 0.0;
        }
        mean[h] = mean[h].clamp(min[h], max[h]);
    }
    Ok(ClassBandStats {
        class,
        count,
        mean,
        stdev,
        min,
        max,
    })
}

/// Band statistics of one class of a real dataset; needs at least two samples.
pub fn band_stats(dataset: &LabeledDataset, class: ClassLabel) -> Result<ClassBandStats> {
    let rows: Vec<&[f64; SERIES_LEN]> = dataset.class_samples(class).map(|s| &s.values).collect();
    if rows.len() < 2 {
        return Err(Error::Stats(format!(
            "class {class} has {} sample(s); band statistics need at least 2",
            rows.len()
        )));
    }
    column_stats(class, rows)
}

/// Representatives (and bands) for all eight classes, indexed by class id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReps {
    stats: Vec<ClassBandStats>,
}

impl ClassReps {
    pub fn from_dataset(dataset: &LabeledDataset) -> Result<Self> {
        let stats = ClassLabel::all()
            .map(|c| band_stats(dataset, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { stats })
    }

    pub fn from_stats(mut stats: Vec<ClassBandStats>) -> Result<Self> {
        stats.sort_by_key(|s| s.class);
        let ids: Vec<usize> = stats.iter().map(|s| s.class.index()).collect();
        if ids != (0..NUM_CLASSES).collect::<Vec<_>>() {
            return Err(Error::Evaluation(format!(
                "class representatives must cover classes 0..{NUM_CLASSES} exactly once, got {ids:?}"
            )));
        }
        Ok(Self { stats })
    }

    pub fn get(&self, class: ClassLabel) -> &ClassBandStats {
        &self.stats[class.index()]
    }

    pub fn rep(&self, class: ClassLabel) -> &[f64; SERIES_LEN] {
        &self.stats[class.index()].mean
    }

    pub fn iter(&self) -> impl Iterator<Item = &ClassBandStats> {
        self.stats.iter()
    }
}
