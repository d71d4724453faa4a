//! From hourly CSV rows to labelled, balanced daily series and their
//! per-class band statistics.

mod daily;
mod dataset;
mod ingest;
mod label;
mod stats;
pub mod surrogate;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use daily::{build_daily_series, DailyBuild, DailySeries, DroppedDay, MAX_MISSING_HOURS};
pub use dataset::{balance, LabeledDataset};
pub use ingest::{
    ingest_csv, ingest_reader, HourlyRecord, IngestOutcome, RejectedRow, CSV_HEADER,
    MAX_REJECTED_FRACTION,
};
pub use label::{classify, ClassLabel, DayType, Season};
pub use stats::{band_stats, column_stats, ClassBandStats, ClassReps};

use crate::error::Result;
use crate::NUM_CLASSES;

/// Which real samples define the class representatives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepSource {
    /// The balanced training set.
    #[default]
    Balanced,
    /// Every ingested day.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub class: ClassLabel,
    pub season: Season,
    pub day_type: DayType,
    pub samples: usize,
}

/// Summary written next to an ingested dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub records: usize,
    pub rejected_rows: Vec<RejectedRow>,
    pub invalid_values: usize,
    pub days: usize,
    pub dropped_days: Vec<DroppedDay>,
    pub interpolated_cells: usize,
    pub class_counts: Vec<ClassCount>,
}

impl IngestReport {
    pub fn counts(&self) -> [usize; NUM_CLASSES] {
        let mut out = [0; NUM_CLASSES];
        for c in &self.class_counts {
            out[c.class.index()] = c.samples;
        }
        out
    }

    /// Plain-text table: season, day type, class, samples.
    pub fn class_table(&self) -> String {
        let mut s = String::from("season  type of day  class  samples\n");
        for c in &self.class_counts {
            s.push_str(&format!(
                "{:<7} {:<12} {:>5}  {:>7}\n",
                c.season.name(),
                c.day_type.name(),
                c.class,
                c.samples
            ));
        }
        s
    }
}

pub fn class_counts(dataset: &LabeledDataset) -> Vec<ClassCount> {
    let counts = dataset.per_class_counts();
    ClassLabel::all()
        .map(|c| ClassCount {
            class: c,
            season: c.season(),
            day_type: c.day_type(),
            samples: counts[c.index()],
        })
        .collect()
}

/// Reads a normalized CSV and assembles the labelled (unbalanced) dataset.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<(LabeledDataset, IngestReport)> {
    let ingest = ingest_csv(path)?;
    let build = build_daily_series(&ingest.records)?;
    let dataset = LabeledDataset::new(build.series);
    let report = IngestReport {
        records: ingest.records.len(),
        rejected_rows: ingest.rejected,
        invalid_values: ingest.invalid_values,
        days: dataset.len(),
        dropped_days: build.dropped,
        interpolated_cells: build.interpolated_cells,
        class_counts: class_counts(&dataset),
    };
    Ok((dataset, report))
}
