//! Synthetic stand-in for a real station: each class has a smooth
//! double-peaked daily profile (morning and evening traffic), and samples
//! add i.i.d. Gaussian noise per hour, clipped at zero.

use chrono::{Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::daily::DailySeries;
use super::dataset::LabeledDataset;
use super::label::{classify, ClassLabel, DayType, Season};
use crate::error::{Error, Result};
use crate::eval::rmse;
use crate::SERIES_LEN;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateConfig {
    pub per_class: usize,
    /// Standard deviation of the per-hour noise, µg/m³.
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            per_class: 420,
            noise_std: 3.5,
            seed: 0,
        }
    }
}

/// Noise-free daily profile of a class.
pub fn class_profile(label: ClassLabel) -> [f64; SERIES_LEN] {
    // (background, morning peak, evening peak) for a working day
    let (base, am, pm) = match label.season() {
        Season::Winter => (78.0, 30.0, 57.0),
        Season::Spring => (46.0, 35.0, 21.0),
        Season::Summer => (10.0, 27.0, 18.0),
        Season::Autumn => (59.0, 28.0, 50.0),
    };
    let (base, am, pm) = match label.day_type() {
        DayType::Working => (base, am, pm),
        DayType::Weekend => (base * 0.6, am * 0.15, pm * 0.5),
    };
    let bump = |t: f64, centre: f64, width: f64| (-(t - centre).powi(2) / (2.0 * width * width)).exp();
    std::array::from_fn(|h| {
        let t = h as f64;
        // night-time dip around 4h
        let dip = 0.25 * base * bump(t, 4.0, 2.5);
        base - dip + am * bump(t, 8.0, 1.8) + pm * bump(t, 20.0, 2.4)
    })
}

/// Smallest profile-to-profile RMSE between `label` and any other class.
pub fn min_separation(label: ClassLabel) -> f64 {
    let p = class_profile(label);
    ClassLabel::all()
        .filter(|&o| o != label)
        .map(|o| rmse(&p, &class_profile(o)).expect("fixed length"))
        .fold(f64::INFINITY, f64::min)
}

pub fn surrogate_dataset(cfg: &SurrogateConfig) -> Result<LabeledDataset> {
    if cfg.per_class == 0 || !(cfg.noise_std >= 0.0) {
        return Err(Error::Config(format!("invalid surrogate settings {cfg:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_std).map_err(|e| Error::Config(e.to_string()))?;

    // Real calendar dates, so labels agree with `classify`.
    let mut dates: Vec<Vec<NaiveDate>> = vec![Vec::new(); 8];
    let mut day = NaiveDate::from_ymd_opt(1990, 1, 1).expect("valid date");
    while dates.iter().any(|d| d.len() < cfg.per_class) {
        let c = classify(day).index();
        if dates[c].len() < cfg.per_class {
            dates[c].push(day);
        }
        day = day + Days::new(1);
    }

    let mut samples: Vec<DailySeries> = Vec::with_capacity(8 * cfg.per_class);
    for label in ClassLabel::all() {
        let profile = class_profile(label);
        for &date in &dates[label.index()] {
            let values = profile.map(|p| (p + noise.sample(&mut rng)).max(0.0));
            samples.push(DailySeries {
                date,
                values,
                label,
            });
        }
    }
    samples.sort_by_key(|s| s.date);
    Ok(LabeledDataset::new(samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let cfg = SurrogateConfig {
            per_class: 30,
            ..SurrogateConfig::default()
        };
        let a = surrogate_dataset(&cfg).unwrap();
        assert_eq!(a.per_class_counts(), [30; 8]);
        assert_eq!(a, surrogate_dataset(&cfg).unwrap());
        assert!(a.samples().iter().all(|s| classify(s.date) == s.label));
    }

    #[test]
    fn profiles_are_well_separated() {
        let noise = SurrogateConfig::default().noise_std;
        for label in ClassLabel::all() {
            let sep = min_separation(label);
            assert!(sep >= 3.0 * noise, "class {label}: separation {sep}");
            assert!(class_profile(label).iter().all(|&v| v > 0.0));
        }
    }
}
