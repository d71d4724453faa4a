use std::fmt;

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::NUM_CLASSES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Autumn,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Winter, Season::Spring, Season::Summer, Season::Autumn];

    /// Meteorological seasons: Dec-Feb, Mar-May, Jun-Aug, Sep-Nov.
    ///
    /// All month-to-season decisions go through here.
    pub fn from_month(month: u32) -> Season {
        match month {
            12 | 1 | 2 => Season::Winter,
            3..=5 => Season::Spring,
            6..=8 => Season::Summer,
            9..=11 => Season::Autumn,
            _ => panic!("month out of range: {month}"),
        }
    }

    fn index(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Season::Winter => "winter",
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Autumn => "autumn",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayType {
    Weekend,
    Working,
}

impl DayType {
    pub fn of(date: NaiveDate) -> DayType {
        match date.weekday() {
            Weekday::Sat | Weekday::Sun => DayType::Weekend,
            _ => DayType::Working,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DayType::Weekend => "weekend",
            DayType::Working => "working",
        }
    }
}

/// Class id `2 * season + day_type`, weekend before working day:
///
/// | season | weekend | working |
/// |--------|---------|---------|
/// | winter | 0       | 1       |
/// | spring | 2       | 3       |
/// | summer | 4       | 5       |
/// | autumn | 6       | 7       |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ClassLabel(u8);

impl ClassLabel {
    pub fn new(id: u8) -> Result<Self> {
        if (id as usize) < NUM_CLASSES {
            Ok(Self(id))
        } else {
            Err(Error::Data(format!(
                "class id {id} outside 0..{NUM_CLASSES}"
            )))
        }
    }

    pub fn from_parts(season: Season, day_type: DayType) -> Self {
        let offset = match day_type {
            DayType::Weekend => 0,
            DayType::Working => 1,
        };
        Self(season.index() * 2 + offset)
    }

    pub fn all() -> impl Iterator<Item = ClassLabel> {
        (0..NUM_CLASSES as u8).map(ClassLabel)
    }

    #[inline]
    pub fn id(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn season(self) -> Season {
        Season::ALL[(self.0 / 2) as usize]
    }

    pub fn day_type(self) -> DayType {
        if self.0 % 2 == 0 {
            DayType::Weekend
        } else {
            DayType::Working
        }
    }

    pub fn description(self) -> String {
        format!("{}-{}", self.season().name(), self.day_type().name())
    }
}

impl TryFrom<u8> for ClassLabel {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        ClassLabel::new(id)
    }
}

impl From<ClassLabel> for u8 {
    fn from(label: ClassLabel) -> u8 {
        label.0
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Class of a calendar day. Public holidays count as working days.
pub fn classify(date: NaiveDate) -> ClassLabel {
    ClassLabel::from_parts(Season::from_month(date.month()), DayType::of(date))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn table_encoding() {
        assert_eq!(classify(d(2015, 1, 5)).id(), 1);
        assert_eq!(classify(d(2015, 7, 4)).id(), 4);
        assert_eq!(classify(d(2015, 12, 1)).id(), 1);
        let expected = [
            (Season::Winter, DayType::Weekend, 0),
            (Season::Winter, DayType::Working, 1),
            (Season::Spring, DayType::Weekend, 2),
            (Season::Spring, DayType::Working, 3),
            (Season::Summer, DayType::Weekend, 4),
            (Season::Summer, DayType::Working, 5),
            (Season::Autumn, DayType::Weekend, 6),
            (Season::Autumn, DayType::Working, 7),
        ];
        for (s, t, id) in expected {
            let label = ClassLabel::from_parts(s, t);
            assert_eq!(label.id(), id);
            assert_eq!((label.season(), label.day_type()), (s, t));
        }
    }

    #[test]
    fn every_class_reachable_within_a_year() {
        let ids: HashSet<u8> = d(2019, 1, 1)
            .iter_days()
            .take(365)
            .map(|day| classify(day).id())
            .collect();
        assert_eq!(ids.len(), NUM_CLASSES);
    }

    #[test]
    fn label_bounds_and_serde() {
        assert!(ClassLabel::new(8).is_err());
        let l = ClassLabel::new(6).unwrap();
        assert_eq!(serde_json::to_string(&l).unwrap(), "6");
        assert!(serde_json::from_str::<ClassLabel>("9").is_err());
        assert_eq!(l.description(), "autumn-weekend");
    }
}
