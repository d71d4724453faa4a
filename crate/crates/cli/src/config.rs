use std::fs;
use std::path::{Path, PathBuf};

use airgan_core::cgan::TrainConfig;
use airgan_core::data::RepSource;
use airgan_core::plot::PlotSize;
use airgan_core::NUM_CLASSES;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Declarative run configuration, read from `--config <json>`.
///
/// ```json
/// {
///   "input_csv": "station.csv",
///   "output_dir": "out",
///   "runs": 10,
///   "reps_per_class": 5000,
///   "rep_source": "balanced",
///   "train": { "epochs": 2000, "batch_size": 16, "seed": 0 },
///   "plot": { "classes": [0, 1, 2, 3, 4, 5, 6, 7], "width": 640, "height": 400 }
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input_csv: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub train: TrainConfig,
    pub runs: usize,
    pub reps_per_class: usize,
    pub rep_source: RepSource,
    pub plot: PlotConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotConfig {
    pub classes: Vec<u8>,
    pub width: f64,
    pub height: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input_csv: None,
            output_dir: PathBuf::from("out"),
            train: TrainConfig::default(),
            runs: 10,
            reps_per_class: 5000,
            rep_source: RepSource::default(),
            plot: PlotConfig::default(),
        }
    }
}

impl Default for PlotConfig {
    fn default() -> Self {
        let size = PlotSize::default();
        Self {
            classes: (0..NUM_CLASSES as u8).collect(),
            width: size.width,
            height: size.height,
        }
    }
}

impl PlotConfig {
    pub fn size(&self) -> PlotSize {
        PlotSize {
            width: self.width,
            height: self.height,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.runs == 0 {
            return Err(CliError::Usage("runs must be at least 1".into()));
        }
        if self.reps_per_class == 0 {
            return Err(CliError::Usage("reps_per_class must be at least 1".into()));
        }
        if let Some(c) = self.plot.classes.iter().find(|&&c| c as usize >= NUM_CLASSES) {
            return Err(CliError::Usage(format!("plot class {c} is not in 0..{NUM_CLASSES}")));
        }
        self.train.validate()?;
        self.plot.size().validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"runs": 2, "train": {"epochs": 5}}"#).unwrap();
        assert_eq!(cfg.runs, 2);
        assert_eq!(cfg.train.epochs, 5);
        assert_eq!(cfg.train.batch_size, 16);
        assert_eq!(cfg.reps_per_class, 5000);
        assert_eq!(cfg.plot.classes.len(), 8);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"run": 2}"#).is_err());
        let cfg = RunConfig {
            runs: 0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
