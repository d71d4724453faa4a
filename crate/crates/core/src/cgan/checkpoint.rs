//! JSON checkpoints. Floats are written in shortest round-trip form and
//! parsed back exactly, so a save/load cycle is bit-for-bit lossless.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Architecture, Discriminator, Generator, Scaler};
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::ndcore::{Activation, DenseLayer, Matrix, MlpParams};

pub const FORMAT_VERSION: u32 = 1;

const RNG_NOTE: &str = "generator stream not stored; resume is not supported. \
Training used ChaCha8 seeded from train_config.seed (stream 0 for training, stream 1 for evaluation).";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub generator: Generator,
    pub discriminator: Discriminator,
    pub train_config: TrainConfig,
    pub epochs_completed: usize,
    /// Index of the run within a multi-run training session.
    pub run_index: Option<usize>,
}

impl Checkpoint {
    pub fn architecture(&self) -> Architecture {
        let sizes = self.generator.params().layer_sizes();
        Architecture {
            latent_dim: self.generator.latent_dim(),
            hidden: sizes[1..sizes.len() - 1].to_vec(),
            leaky_slope: self.generator.params().leaky_slope(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CheckpointFile::from(self)).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct VersionProbe {
            format_version: Option<u32>,
        }
        let probe: VersionProbe = serde_json::from_str(text)
            .map_err(|e| Error::Checkpoint(format!("unreadable checkpoint: {e}")))?;
        match probe.format_version {
            Some(FORMAT_VERSION) => {}
            Some(v) => {
                return Err(Error::Checkpoint(format!(
                    "unsupported format_version {v} (expected {FORMAT_VERSION})"
                )))
            }
            None => return Err(Error::Checkpoint("missing format_version".into())),
        }
        let file: CheckpointFile = serde_json::from_str(text)
            .map_err(|e| Error::Checkpoint(format!("malformed checkpoint: {e}")))?;
        file.into_checkpoint()
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, checkpoint.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_json(&text)
        .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
}

/// Loads a checkpoint and insists on a particular architecture.
pub fn load_checkpoint_expecting(path: impl AsRef<Path>, arch: &Architecture) -> Result<Checkpoint> {
    let ckpt = load_checkpoint(path)?;
    let found = ckpt.architecture();
    if &found != arch {
        return Err(Error::Shape(format!(
            "checkpoint architecture {found:?} differs from expected {arch:?}"
        )));
    }
    Ok(ckpt)
}

#[derive(Serialize, Deserialize)]
struct NetShape {
    layer_sizes: Vec<usize>,
    activations: Vec<Activation>,
}

#[derive(Serialize, Deserialize)]
struct ArchitectureFile {
    generator: NetShape,
    discriminator: NetShape,
    leaky_slope: f64,
}

#[derive(Serialize, Deserialize)]
struct NetWeights {
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format_version: u32,
    architecture: ArchitectureFile,
    scaler: Option<Scaler>,
    generator: NetWeights,
    discriminator: NetWeights,
    train_config: TrainConfig,
    epochs_completed: usize,
    run_index: Option<usize>,
    rng_state_note: String,
}

fn shape_of(p: &MlpParams) -> NetShape {
    NetShape {
        layer_sizes: p.layer_sizes(),
        activations: p.activations(),
    }
}

fn weights_of(p: &MlpParams) -> NetWeights {
    NetWeights {
        weights: p.layers().iter().map(|l| l.weight.clone()).collect(),
        biases: p.layers().iter().map(|l| l.bias.clone()).collect(),
    }
}

fn rebuild(name: &str, shape: NetShape, w: NetWeights, slope: f64) -> Result<MlpParams> {
    let n = shape.activations.len();
    if shape.layer_sizes.len() != n + 1 || w.weights.len() != n || w.biases.len() != n {
        return Err(Error::Shape(format!(
            "{name}: {} layer sizes, {} activations, {} weight matrices, {} bias vectors",
            shape.layer_sizes.len(),
            n,
            w.weights.len(),
            w.biases.len()
        )));
    }
    let mut layers = Vec::with_capacity(n);
    for (k, ((weight, bias), act)) in w
        .weights
        .into_iter()
        .zip(w.biases)
        .zip(shape.activations)
        .enumerate()
    {
        let expected = (shape.layer_sizes[k + 1], shape.layer_sizes[k]);
        if weight.shape() != expected {
            return Err(Error::Shape(format!(
                "{name} layer {k}: weight is {:?}, architecture says {expected:?}",
                weight.shape()
            )));
        }
        layers.push(DenseLayer {
            weight,
            bias,
            activation: act,
        });
    }
    let params = MlpParams::new(layers, slope)?;
    if !params.is_finite() {
        return Err(Error::Checkpoint(format!("{name} has non-finite parameters")));
    }
    Ok(params)
}

impl From<&Checkpoint> for CheckpointFile {
    fn from(c: &Checkpoint) -> Self {
        CheckpointFile {
            format_version: FORMAT_VERSION,
            architecture: ArchitectureFile {
                generator: shape_of(c.generator.params()),
                discriminator: shape_of(c.discriminator.params()),
                leaky_slope: c.generator.params().leaky_slope(),
            },
            scaler: c.generator.scaler(),
            generator: weights_of(c.generator.params()),
            discriminator: weights_of(c.discriminator.params()),
            train_config: c.train_config.clone(),
            epochs_completed: c.epochs_completed,
            run_index: c.run_index,
            rng_state_note: RNG_NOTE.to_string(),
        }
    }
}

impl CheckpointFile {
    fn into_checkpoint(self) -> Result<Checkpoint> {
        let slope = self.architecture.leaky_slope;
        let g = rebuild("generator", self.architecture.generator, self.generator, slope)?;
        let d = rebuild(
            "discriminator",
            self.architecture.discriminator,
            self.discriminator,
            slope,
        )?;
        Ok(Checkpoint {
            generator: Generator::from_params(g, self.scaler)?,
            discriminator: Discriminator::from_params(d, self.scaler)?,
            train_config: self.train_config,
            epochs_completed: self.epochs_completed,
            run_index: self.run_index,
        })
    }
}
