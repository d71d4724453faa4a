//! Sample-quality evaluation: RMSE of each generated day against its class
//! representative, aggregated per dataset and per class, and ranking of
//! datasets by mean RMSE.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cgan::{latent_matrix, Generator};
use crate::data::{column_stats, ClassBandStats, ClassLabel, ClassReps, LabeledDataset};
use crate::error::{Error, Result};
use crate::{NUM_CLASSES, SERIES_LEN};

/// Root mean squared error between two 24-hour series.
pub fn rmse(rep: &[f64], sample: &[f64]) -> Result<f64> {
    if rep.len() != SERIES_LEN || sample.len() != SERIES_LEN {
        return Err(Error::Shape(format!(
            "rmse needs two {SERIES_LEN}-value series, got {} and {}",
            rep.len(),
            sample.len()
        )));
    }
    Ok(rmse_unchecked(rep, sample))
}

#[inline]
pub(crate) fn rmse_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (ss / a.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FakeSample {
    pub label: ClassLabel,
    pub values: [f64; SERIES_LEN],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationMeta {
    pub checkpoint_id: Option<String>,
    pub seed: u64,
    pub samples_per_class: usize,
}

/// A named set of generated days.
#[derive(Debug, Clone, PartialEq)]
pub struct FakeDataset {
    pub name: String,
    pub samples: Vec<FakeSample>,
    pub meta: GenerationMeta,
}

pub const FAKE_CSV_HEADER: &str = "label,h0,h1,h2,h3,h4,h5,h6,h7,h8,h9,h10,h11,h12,h13,h14,h15,h16,h17,h18,h19,h20,h21,h22,h23";

impl FakeDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut c = [0; NUM_CLASSES];
        for s in &self.samples {
            c[s.label.index()] += 1;
        }
        c
    }

    /// Raw generator values, one row per sample.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.samples.len() * 24 * 20);
        s.push_str(FAKE_CSV_HEADER);
        s.push('\n');
        for sample in &self.samples {
            write!(s, "{}", sample.label).expect("string write");
            for v in &sample.values {
                write!(s, ",{v}").expect("string write");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(name: &str, text: &str, meta: GenerationMeta) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(FAKE_CSV_HEADER) {
            return Err(Error::Data(format!("{name}: expected header `{FAKE_CSV_HEADER}`")));
        }
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || Error::Data(format!("{name} line {}: malformed row", i + 2));
            let mut fields = line.split(',');
            let label: u8 = fields.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
            let label = ClassLabel::new(label)?;
            let vals: Vec<f64> = fields
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            let values: [f64; SERIES_LEN] = vals.try_into().map_err(|_| bad())?;
            if values.iter().any(|v| !v.is_finite()) {
                return Err(bad());
            }
            samples.push(FakeSample { label, values });
        }
        Ok(Self {
            name: name.to_string(),
            samples,
            meta,
        })
    }

    /// Writes `<stem>.csv` and `<stem>.meta.json` next to each other.
    pub fn save(&self, csv_path: impl AsRef<Path>) -> Result<()> {
        let csv_path = csv_path.as_ref();
        fs::write(csv_path, self.to_csv()).map_err(|e| Error::io(csv_path, e))?;
        let meta_path = meta_path_for(csv_path);
        let meta = MetaFile {
            name: self.name.clone(),
            samples: self.samples.len(),
            meta: self.meta.clone(),
        };
        let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
        fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))
    }

    /// Reads a fake-dataset CSV; metadata is picked up when present.
    pub fn load(csv_path: impl AsRef<Path>) -> Result<Self> {
        let csv_path = csv_path.as_ref();
        let text = fs::read_to_string(csv_path).map_err(|e| Error::io(csv_path, e))?;
        let meta_path = meta_path_for(csv_path);
        let stem = csv_path
            .file_stem()
            .map_or_else(|| "fake".to_string(), |s| s.to_string_lossy().into_owned());
        let (name, meta) = match fs::read_to_string(&meta_path) {
            Ok(m) => {
                let f: MetaFile = serde_json::from_str(&m).map_err(|e| {
                    Error::Data(format!("{}: bad metadata: {e}", meta_path.display()))
                })?;
                (f.name, f.meta)
            }
            Err(_) => (
                stem,
                GenerationMeta {
                    checkpoint_id: None,
                    seed: 0,
                    samples_per_class: 0,
                },
            ),
        };
        Self::from_csv(&name, &text, meta)
    }
}

#[derive(Serialize, Deserialize)]
struct MetaFile {
    name: String,
    samples: usize,
    #[serde(flatten)]
    meta: GenerationMeta,
}

fn meta_path_for(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("meta.json")
}

/// `reps_per_class` samples for every class from fresh latent draws.
pub fn generate_fake_dataset(
    gen: &Generator,
    reps_per_class: usize,
    seed: u64,
    name: &str,
    checkpoint_id: Option<String>,
) -> Result<FakeDataset> {
    if reps_per_class == 0 {
        return Err(Error::Config("reps_per_class must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(reps_per_class * NUM_CLASSES);
    const CHUNK: usize = 2048;
    for label in ClassLabel::all() {
        let mut done = 0;
        while done < reps_per_class {
            let m = CHUNK.min(reps_per_class - done);
            let z = latent_matrix(m, gen.latent_dim(), &mut rng);
            let out = gen.generate_batch(&z, &vec![label; m])?;
            for row in out.row_iter() {
                let mut values = [0.0; SERIES_LEN];
                values.copy_from_slice(row);
                samples.push(FakeSample { label, values });
            }
            done += m;
        }
    }
    Ok(FakeDataset {
        name: name.to_string(),
        samples,
        meta: GenerationMeta {
            checkpoint_id,
            seed,
            samples_per_class: reps_per_class,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseSummary {
    pub min: f64,
    pub mean: f64,
    pub stdev: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassRmse {
    pub class: ClassLabel,
    pub count: usize,
    pub mean: f64,
    pub stdev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseReport {
    pub dataset_name: String,
    /// Name the dataset had before being renamed by rank.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub sample_count: usize,
    pub overall: RmseSummary,
    pub per_class: Vec<ClassRmse>,
}

fn mean_stdev(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// RMSE of every labelled series against its class representative.
pub fn evaluate_samples<'a, I>(name: &str, samples: I, reps: &ClassReps) -> Result<RmseReport>
where
    I: IntoIterator<Item = (&'a [f64; SERIES_LEN], ClassLabel)>,
{
    let mut all = Vec::new();
    let mut by_class: Vec<Vec<f64>> = vec![Vec::new(); NUM_CLASSES];
    for (values, label) in samples {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation(format!("{name}: non-finite sample value")));
        }
        let e = rmse_unchecked(reps.rep(label), values);
        all.push(e);
        by_class[label.index()].push(e);
    }
    if let Some(c) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::Evaluation(format!("{name}: class {c} has no samples")));
    }
    let (mean, stdev) = mean_stdev(&all);
    let overall = RmseSummary {
        min: all.iter().copied().fold(f64::INFINITY, f64::min),
        mean,
        stdev,
        max: all.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    let per_class = by_class
        .iter()
        .enumerate()
        .map(|(c, errs)| {
            let (mean, stdev) = mean_stdev(errs);
            ClassRmse {
                class: ClassLabel::new(c as u8).expect("in range"),
                count: errs.len(),
                mean,
                stdev,
            }
        })
        .collect();
    Ok(RmseReport {
        dataset_name: name.to_string(),
        source: None,
        sample_count: all.len(),
        overall,
        per_class,
    })
}

pub fn evaluate(fake: &FakeDataset, reps: &ClassReps) -> Result<RmseReport> {
    evaluate_samples(
        &fake.name,
        fake.samples.iter().map(|s| (&s.values, s.label)),
        reps,
    )
}

/// Real samples scored against the given representatives (usually their own).
pub fn evaluate_real(name: &str, real: &LabeledDataset, reps: &ClassReps) -> Result<RmseReport> {
    evaluate_samples(name, real.samples().iter().map(|s| (&s.values, s.label)), reps)
}

fn rank_order(a: &RmseReport, b: &RmseReport) -> Ordering {
    a.overall
        .mean
        .total_cmp(&b.overall.mean)
        .then(a.overall.stdev.total_cmp(&b.overall.stdev))
        .then_with(|| a.dataset_name.cmp(&b.dataset_name))
}

/// Ascending mean RMSE, then stdev, then name.
pub fn rank_datasets(mut reports: Vec<RmseReport>) -> Vec<RmseReport> {
    reports.sort_by(rank_order);
    reports
}

/// Ranks and renames to `{prefix}-1` (best) .. `{prefix}-N`.
pub fn rank_and_name(reports: Vec<RmseReport>, prefix: &str) -> Vec<RmseReport> {
    rank_datasets(reports)
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.source = Some(std::mem::replace(
                &mut r.dataset_name,
                format!("{prefix}-{}", i + 1),
            ));
            r
        })
        .collect()
}

/// Band statistics of one class of generated samples.
pub fn fake_band_stats(fake: &FakeDataset, class: ClassLabel) -> Result<ClassBandStats> {
    let rows: Vec<&[f64; SERIES_LEN]> = fake
        .samples
        .iter()
        .filter(|s| s.label == class)
        .map(|s| &s.values)
        .collect();
    if rows.is_empty() {
        return Err(Error::Stats(format!(
            "{}: no generated samples for class {class}",
            fake.name
        )));
    }
    column_stats(class, rows)
}

pub const TABLE2_HEADER: &str = "dataset,min,mean,stdev,max";

/// Overall statistics, one row per report.
pub fn table2_csv(reports: &[RmseReport]) -> String {
    let mut s = format!("{TABLE2_HEADER}\n");
    for r in reports {
        let o = &r.overall;
        writeln!(s, "{},{},{},{},{}", r.dataset_name, o.min, o.mean, o.stdev, o.max)
            .expect("string write");
    }
    s
}

/// Per-class `mean±stdev` strings with one decimal.
pub fn table3_csv(reports: &[RmseReport]) -> String {
    let mut s = String::from("dataset");
    for c in 0..NUM_CLASSES {
        write!(s, ",class{c}").expect("string write");
    }
    s.push('\n');
    for r in reports {
        s.push_str(&r.dataset_name);
        for c in &r.per_class {
            write!(s, ",{:.1}±{:.1}", c.mean, c.stdev).expect("string write");
        }
        s.push('\n');
    }
    s
}

/// Per-class means and stdevs at full precision.
pub fn table3_numeric_csv(reports: &[RmseReport]) -> String {
    let mut s = String::from("dataset");
    for c in 0..NUM_CLASSES {
        write!(s, ",class{c}_mean,class{c}_stdev").expect("string write");
    }
    s.push('\n');
    for r in reports {
        s.push_str(&r.dataset_name);
        for c in &r.per_class {
            write!(s, ",{},{}", c.mean, c.stdev).expect("string write");
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DailySeries;
    use chrono::NaiveDate;

    fn summary(mean: f64, stdev: f64) -> RmseSummary {
        RmseSummary {
            min: 0.0,
            mean,
            stdev,
            max: 100.0,
        }
    }

    fn report(name: &str, mean: f64, stdev: f64) -> RmseReport {
        RmseReport {
            dataset_name: name.into(),
            source: None,
            sample_count: 1,
            overall: summary(mean, stdev),
            per_class: vec![],
        }
    }

    fn reps_from(profiles: &[[f64; 24]; 8]) -> ClassReps {
        let samples = profiles
            .iter()
            .enumerate()
            .flat_map(|(c, p)| {
                let label = ClassLabel::new(c as u8).unwrap();
                (0..2).map(move |_| DailySeries {
                    date: NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
                    values: *p,
                    label,
                })
            })
            .collect();
        ClassReps::from_dataset(&LabeledDataset::new(samples)).unwrap()
    }

    #[test]
    fn rmse_basics() {
        let a: [f64; 24] = std::array::from_fn(|h| (h as f64).sin() * 20.0 + 30.0);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let shifted = a.map(|v| v + 5.0);
        assert!((rmse(&a, &shifted).unwrap() - 5.0).abs() < 1e-12);
        assert!(rmse(&a[..23], &a[..23]).is_err());
    }

    #[test]
    fn ranking_examples() {
        let ranked = rank_datasets(vec![
            report("a", 15.3, 1.0),
            report("b", 15.7, 1.0),
            report("c", 15.5, 1.0),
        ]);
        let means: Vec<f64> = ranked.iter().map(|r| r.overall.mean).collect();
        assert_eq!(means, vec![15.3, 15.5, 15.7]);
        assert_eq!(rank_datasets(vec![report("x", 1.0, 1.0)])[0].dataset_name, "x");
        let tied = rank_datasets(vec![report("zeta", 2.0, 1.0), report("alpha", 2.0, 1.0)]);
        assert_eq!(tied[0].dataset_name, "alpha");
        let named = rank_and_name(vec![report("run-02", 9.0, 1.0), report("run-01", 3.0, 1.0)], "fake");
        assert_eq!(named[0].dataset_name, "fake-1");
        assert_eq!(named[0].source.as_deref(), Some("run-01"));
    }

    #[test]
    fn perfect_fake_has_zero_error() {
        let profiles: [[f64; 24]; 8] = std::array::from_fn(|c| [10.0 * c as f64 + 1.0; 24]);
        let reps = reps_from(&profiles);
        let fake = FakeDataset {
            name: "perfect".into(),
            samples: (0..8)
                .flat_map(|c| {
                    (0..3).map(move |_| FakeSample {
                        label: ClassLabel::new(c).unwrap(),
                        values: profiles[c as usize],
                    })
                })
                .collect(),
            meta: GenerationMeta {
                checkpoint_id: None,
                seed: 0,
                samples_per_class: 3,
            },
        };
        let r = evaluate(&fake, &reps).unwrap();
        assert_eq!(
            r.overall,
            RmseSummary {
                min: 0.0,
                mean: 0.0,
                stdev: 0.0,
                max: 0.0
            }
        );
        assert_eq!(r.sample_count, 24);
    }

    #[test]
    fn missing_class_is_an_error() {
        let profiles: [[f64; 24]; 8] = [[1.0; 24]; 8];
        let reps = reps_from(&profiles);
        let fake = FakeDataset {
            name: "partial".into(),
            samples: vec![FakeSample {
                label: ClassLabel::new(0).unwrap(),
                values: [1.0; 24],
            }],
            meta: GenerationMeta {
                checkpoint_id: None,
                seed: 0,
                samples_per_class: 1,
            },
        };
        assert!(matches!(evaluate(&fake, &reps), Err(Error::Evaluation(_))));
    }

    #[test]
    fn fake_bands() {
        let label = ClassLabel::new(4).unwrap();
        let fake = FakeDataset {
            name: "f".into(),
            samples: vec![
                FakeSample { label, values: [10.0; 24] },
                FakeSample { label, values: [20.0; 24] },
            ],
            meta: GenerationMeta {
                checkpoint_id: None,
                seed: 0,
                samples_per_class: 2,
            },
        };
        let s = fake_band_stats(&fake, label).unwrap();
        assert_eq!(s.mean, [15.0; 24]);
        assert_eq!(s.stdev, [5.0; 24]);
        assert!(fake_band_stats(&fake, ClassLabel::new(0).unwrap()).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let label = ClassLabel::new(7).unwrap();
        let values: [f64; 24] = std::array::from_fn(|h| h as f64 * 0.1 - 1.0 / 3.0);
        let meta = GenerationMeta {
            checkpoint_id: Some("run-01".into()),
            seed: 5,
            samples_per_class: 1,
        };
        let fake = FakeDataset {
            name: "f".into(),
            samples: vec![FakeSample { label, values }],
            meta: meta.clone(),
        };
        let back = FakeDataset::from_csv("f", &fake.to_csv(), meta).unwrap();
        assert_eq!(back, fake);
        assert!(FakeDataset::from_csv("f", "label,h0\n1,2\n", fake.meta.clone()).is_err());
    }

    #[test]
    fn table_formats() {
        let mut r = report("real", 17.3, 8.5);
        r.per_class = (0..8)
            .map(|c| ClassRmse {
                class: ClassLabel::new(c).unwrap(),
                count: 1,
                mean: 20.25,
                stdev: 7.06,
            })
            .collect();
        let t2 = table2_csv(std::slice::from_ref(&r));
        assert_eq!(t2.lines().nth(1).unwrap(), "real,0,17.3,8.5,100");
        let t3 = table3_csv(std::slice::from_ref(&r));
        assert!(t3.starts_with("dataset,class0,class1"));
        assert!(t3.lines().nth(1).unwrap().starts_with("real,20.2±7.1,"));
        let t3n = table3_numeric_csv(&[r]);
        assert!(t3n.lines().nth(1).unwrap().starts_with("real,20.25,7.06,"));
    }
}
