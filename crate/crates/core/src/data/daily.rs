use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::ingest::HourlyRecord;
use super::label::{classify, ClassLabel};
use crate::error::{Error, Result};
use crate::SERIES_LEN;

/// Most missing hours a day may have and still be kept.
pub const MAX_MISSING_HOURS: usize = 2;

/// One day of hourly concentrations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub date: NaiveDate,
    pub values: [f64; SERIES_LEN],
    pub label: ClassLabel,
}

impl DailySeries {
    /// Labels the day with [`classify`].
    pub fn new(date: NaiveDate, values: [f64; SERIES_LEN]) -> Result<Self> {
        if let Some((h, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::Data(format!("{date} hour {h}: invalid value {v}")));
        }
        Ok(Self {
            date,
            values,
            label: classify(date),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedDay {
    pub date: NaiveDate,
    pub missing_hours: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DailyBuild {
    pub series: Vec<DailySeries>,
    pub dropped: Vec<DroppedDay>,
    pub interpolated_cells: usize,
}

/// Groups hourly records into labelled days.
///
/// Days with up to [`MAX_MISSING_HOURS`] missing hours are repaired by
/// linear interpolation between the nearest present hours, or by copying
/// the nearest present value at the start or end of the day. Hours absent
/// from the input count as missing.
pub fn build_daily_series(records: &[HourlyRecord]) -> Result<DailyBuild> {
    let mut days: BTreeMap<NaiveDate, [Option<Option<f64>>; SERIES_LEN]> = BTreeMap::new();
    let mut duplicates = Vec::new();
    for r in records {
        let slots = days.entry(r.date).or_insert([None; SERIES_LEN]);
        let slot = &mut slots[r.hour as usize];
        if slot.is_some() {
            duplicates.push(format!("{} hour {}", r.date, r.hour));
        }
        *slot = Some(r.value);
    }
    if !duplicates.is_empty() {
        let n = duplicates.len();
        duplicates.truncate(10);
        return Err(Error::Data(format!(
            "{n} duplicate (date, hour) pairs: {}{}",
            duplicates.join(", "),
            if n > 10 { ", ..." } else { "" }
        )));
    }

    let mut out = DailyBuild::default();
    for (date, slots) in days {
        let present: Vec<Option<f64>> = slots.iter().map(|s| s.flatten()).collect();
        let missing = present.iter().filter(|v| v.is_none()).count();
        if missing > MAX_MISSING_HOURS {
            out.dropped.push(DroppedDay {
                date,
                missing_hours: missing,
            });
            continue;
        }
        let values = fill_gaps(&present);
        out.interpolated_cells += missing;
        out.series.push(DailySeries::new(date, values)?);
    }
    Ok(out)
}

fn fill_gaps(present: &[Option<f64>]) -> [f64; SERIES_LEN] {
    let mut values = [0.0; SERIES_LEN];
    for h in 0..SERIES_LEN {
        values[h] = match present[h] {
            Some(v) => v,
            None => {
                let prev = (0..h).rev().find_map(|i| present[i].map(|v| (i, v)));
                let next = (h + 1..SERIES_LEN).find_map(|i| present[i].map(|v| (i, v)));
                match (prev, next) {
                    (Some((i0, v0)), Some((i1, v1))) => {
                        let t = (h - i0) as f64 / (i1 - i0) as f64;
                        v0 + t * (v1 - v0)
                    }
                    (Some((_, v)), None) | (None, Some((_, v))) => v,
                    (None, None) => unreachable!("a kept day has present hours"),
                }
            }
        };
    }
    values
}
