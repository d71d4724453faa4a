use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{d_loss_from_probs, d_loss_grad, g_loss_from_probs, g_loss_grad, LossMode};
use super::model::{
    condition_matrix, latent_matrix, Architecture, Discriminator, Generator, Scaler,
    DEFAULT_HIDDEN, DEFAULT_LATENT_DIM, DEFAULT_LEAKY_SLOPE,
};
use crate::data::{ClassLabel, ClassReps, LabeledDataset};
use crate::error::{Error, Result};
use crate::eval::rmse_unchecked;
use crate::ndcore::{
    mlp_forward, mlp_input_gradient, mlp_param_gradients, AdamConfig, Matrix, OptimizerState,
};
use crate::{NUM_CLASSES, SERIES_LEN};

/// RNG stream used for per-epoch evaluation samples; training uses stream 0.
const EVAL_STREAM: u64 = 1;

/// Rows per generator call during evaluation.
const EVAL_CHUNK: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub latent_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub leaky_slope: f64,
    pub loss_mode: LossMode,
    pub seed: u64,
    pub eval_samples_per_epoch: usize,
    pub scale_inputs: bool,
    pub decay_1: f64,
    pub decay_2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        Self {
            learning_rate: 2e-4,
            batch_size: 16,
            epochs: 2000,
            latent_dim: DEFAULT_LATENT_DIM,
            hidden_layers: DEFAULT_HIDDEN.to_vec(),
            leaky_slope: DEFAULT_LEAKY_SLOPE,
            loss_mode: LossMode::PaperSaturating,
            seed: 0,
            eval_samples_per_epoch: 10_000,
            scale_inputs: false,
            decay_1: adam.decay_1,
            decay_2: adam.decay_2,
            epsilon: adam.epsilon,
        }
    }
}

impl TrainConfig {
    pub fn architecture(&self) -> Architecture {
        Architecture {
            latent_dim: self.latent_dim,
            hidden: self.hidden_layers.clone(),
            leaky_slope: self.leaky_slope,
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            decay_1: self.decay_1,
            decay_2: self.decay_2,
            epsilon: self.epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            problems.push("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            problems.push("batch_size must be positive");
        }
        if self.latent_dim == 0 {
            problems.push("latent_dim must be positive");
        }
        if self.hidden_layers.contains(&0) {
            problems.push("hidden layer sizes must be positive");
        }
        if !(self.leaky_slope > 0.0 && self.leaky_slope < 1.0) {
            problems.push("leaky_slope must lie in (0, 1)");
        }
        if self.eval_samples_per_epoch == 0 {
            problems.push("eval_samples_per_epoch must be positive");
        }
        if !(0.0..1.0).contains(&self.decay_1) || !(0.0..1.0).contains(&self.decay_2) {
            problems.push("decays must lie in [0, 1)");
        }
        if !(self.epsilon >= 0.0) {
            problems.push("epsilon must be non-negative");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean discriminator loss over the epoch's batches.
    pub d_loss: f64,
    /// Mean generator loss over the epoch's batches.
    pub g_loss: f64,
    pub mean_rmse: f64,
    /// Wall-clock duration of the epoch, evaluation included. Not written
    /// to the history CSV, which must be reproducible.
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainingHistory {
    pub const CSV_HEADER: &'static str = "epoch,d_loss,g_loss,mean_rmse";

    /// CSV export without timings; read back, `seconds` is 0.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            writeln!(s, "{},{},{},{}", r.epoch, r.d_loss, r.g_loss, r.mean_rmse)
                .expect("string write");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(Self::CSV_HEADER) {
            return Err(Error::Data(format!(
                "history must start with `{}`",
                Self::CSV_HEADER
            )));
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| s.trim().parse::<f64>();
            let rec = match f.as_slice() {
                [e, d, g, r] => (|| {
                    Some(EpochRecord {
                        epoch: e.trim().parse().ok()?,
                        d_loss: parse(d).ok()?,
                        g_loss: parse(g).ok()?,
                        mean_rmse: parse(r).ok()?,
                        seconds: 0.0,
                    })
                })(),
                _ => None,
            };
            records.push(rec.ok_or_else(|| {
                Error::Data(format!("history line {}: cannot parse `{line}`", i + 2))
            })?);
        }
        Ok(Self { records })
    }

    pub fn total_seconds(&self) -> f64 {
        self.records.iter().map(|r| r.seconds).sum()
    }
}

/// Real samples in network space: scaled values and one-hot conditions.
struct RealData {
    values: Matrix,
    labels: Vec<ClassLabel>,
}

impl RealData {
    fn batch(&self, idx: &[usize]) -> (Matrix, Vec<ClassLabel>) {
        let mut m = Matrix::zeros(idx.len(), SERIES_LEN);
        for (r, &i) in idx.iter().enumerate() {
            m.row_mut(r).copy_from_slice(self.values.row(i));
        }
        (m, idx.iter().map(|&i| self.labels[i]).collect())
    }
}

fn check_balanced(dataset: &LabeledDataset) -> Result<()> {
    let counts = dataset.per_class_counts();
    if counts[0] == 0 || counts.iter().any(|&c| c != counts[0]) {
        return Err(Error::Config(format!(
            "training needs a balanced dataset with every class present, got counts {counts:?}"
        )));
    }
    Ok(())
}

fn uniform_labels<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<ClassLabel> {
    (0..n)
        .map(|_| ClassLabel::new(rng.random_range(0..NUM_CLASSES as u8)).expect("in range"))
        .collect()
}

/// One discriminator update on network-space inputs (`[x | y]` rows).
///
/// Returns the loss measured before the update.
pub fn discriminator_step(
    disc: &mut Discriminator,
    opt: &mut OptimizerState,
    real_input: &Matrix,
    fake_input: &Matrix,
) -> Result<f64> {
    let stacked = real_input.vcat(fake_input)?;
    let (probs, cache) = mlp_forward(disc.params(), &stacked)?;
    let (pr, pf) = probs.as_slice().split_at(real_input.rows());
    let loss = d_loss_from_probs(pr, pf);
    let (gr, gf) = d_loss_grad(pr, pf);
    let grad = Matrix::from_vec(stacked.rows(), 1, [gr, gf].concat())?;
    let grads = mlp_param_gradients(disc.params(), &cache, &grad)?;
    opt.step(disc.params_mut(), &grads)?;
    Ok(loss)
}

/// One generator update through a frozen discriminator.
///
/// Returns the loss measured before the update.
pub fn generator_step(
    gen: &mut Generator,
    opt: &mut OptimizerState,
    disc: &Discriminator,
    latent: &Matrix,
    labels: &[ClassLabel],
    mode: LossMode,
) -> Result<f64> {
    let cond = condition_matrix(labels);
    let (fake, g_cache) = mlp_forward(gen.params(), &latent.hcat(&cond)?)?;
    let (probs, d_cache) = mlp_forward(disc.params(), &fake.hcat(&cond)?)?;
    let loss = g_loss_from_probs(probs.as_slice(), mode);
    let grad = Matrix::from_vec(probs.rows(), 1, g_loss_grad(probs.as_slice(), mode))?;
    let d_input = mlp_input_gradient(disc.params(), &d_cache, &grad)?;
    let d_fake = d_input.columns(0, SERIES_LEN);
    let grads = mlp_param_gradients(gen.params(), &g_cache, &d_fake)?;
    opt.step(gen.params_mut(), &grads)?;
    Ok(loss)
}

/// Mean RMSE of `n` generated samples (labels cycling through the classes)
/// against the class representatives.
pub fn mean_generated_rmse<R: Rng + ?Sized>(
    gen: &Generator,
    reps: &ClassReps,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut total = 0.0;
    let mut done = 0;
    while done < n {
        let m = EVAL_CHUNK.min(n - done);
        let labels: Vec<ClassLabel> = (done..done + m)
            .map(|i| ClassLabel::new((i % NUM_CLASSES) as u8).expect("in range"))
            .collect();
        let z = latent_matrix(m, gen.latent_dim(), rng);
        let out = gen.generate_batch(&z, &labels)?;
        for (row, label) in out.row_iter().zip(&labels) {
            total += rmse_unchecked(reps.rep(*label), row);
        }
        done += m;
    }
    Ok(total / n as f64)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub generator: Generator,
    pub discriminator: Discriminator,
    pub history: TrainingHistory,
}

/// Epoch-by-epoch adversarial training.
pub struct Trainer {
    cfg: TrainConfig,
    real: RealData,
    reps: ClassReps,
    gen: Generator,
    disc: Discriminator,
    opt_g: OptimizerState,
    opt_d: OptimizerState,
    rng: ChaCha8Rng,
    eval_rng: ChaCha8Rng,
    order: Vec<usize>,
    history: TrainingHistory,
}

impl Trainer {
    pub fn new(dataset: &LabeledDataset, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        check_balanced(dataset)?;
        if cfg.batch_size > dataset.len() {
            return Err(Error::Config(format!(
                "batch size {} exceeds dataset size {}",
                cfg.batch_size,
                dataset.len()
            )));
        }
        let reps = ClassReps::from_dataset(dataset)?;
        let scaler = if cfg.scale_inputs {
            Some(Scaler::fit(
                dataset.samples().iter().flat_map(|s| s.values.iter()),
            )?)
        } else {
            None
        };
        let rows: Vec<[f64; SERIES_LEN]> = dataset
            .samples()
            .iter()
            .map(|s| match scaler {
                Some(sc) => s.values.map(|v| sc.forward(v)),
                None => s.values,
            })
            .collect();
        let real = RealData {
            values: Matrix::from_rows(&rows)?,
            labels: dataset.samples().iter().map(|s| s.label).collect(),
        };

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut eval_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        eval_rng.set_stream(EVAL_STREAM);
        let arch = cfg.architecture();
        let gen = Generator::init(&arch, scaler, &mut rng)?;
        let disc = Discriminator::init(&arch, scaler, &mut rng)?;
        let opt_g = OptimizerState::new(cfg.adam(), gen.params())?;
        let opt_d = OptimizerState::new(cfg.adam(), disc.params())?;
        Ok(Self {
            cfg: cfg.clone(),
            order: (0..dataset.len()).collect(),
            real,
            reps,
            gen,
            disc,
            opt_g,
            opt_d,
            rng,
            eval_rng,
            history: TrainingHistory::default(),
        })
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.order.len().div_ceil(self.cfg.batch_size)
    }

    pub fn epochs_completed(&self) -> usize {
        self.history.records.len()
    }

    pub fn generator(&self) -> &Generator {
        &self.gen
    }

    pub fn discriminator(&self) -> &Discriminator {
        &self.disc
    }

    pub fn history(&self) -> &TrainingHistory {
        &self.history
    }

    pub fn reps(&self) -> &ClassReps {
        &self.reps
    }

    pub fn run_epoch(&mut self) -> Result<EpochRecord> {
        let start = Instant::now();
        let epoch = self.epochs_completed() + 1;
        let bs = self.cfg.batch_size;
        let latent_dim = self.gen.latent_dim();
        self.order.shuffle(&mut self.rng);
        let order = std::mem::take(&mut self.order);

        let mut d_sum = 0.0;
        let mut g_sum = 0.0;
        let mut batches = 0usize;
        for (b, idx) in order.chunks(bs).enumerate() {
            let (x_real, y_real) = self.real.batch(idx);
            let real_input = x_real.hcat(&condition_matrix(&y_real))?;

            let n = idx.len();
            let y_fake = uniform_labels(n, &mut self.rng);
            let z = latent_matrix(n, latent_dim, &mut self.rng);
            let fake_cond = condition_matrix(&y_fake);
            let x_fake = self.gen.generate_model_space(&z.hcat(&fake_cond)?)?;
            let fake_input = x_fake.hcat(&fake_cond)?;
            let d_loss =
                discriminator_step(&mut self.disc, &mut self.opt_d, &real_input, &fake_input)?;

            let y_gen = uniform_labels(n, &mut self.rng);
            let z_gen = latent_matrix(n, latent_dim, &mut self.rng);
            let g_loss = generator_step(
                &mut self.gen,
                &mut self.opt_g,
                &self.disc,
                &z_gen,
                &y_gen,
                self.cfg.loss_mode,
            )?;

            if !d_loss.is_finite() || !g_loss.is_finite() {
                self.order = order;
                return Err(Error::NonFinite {
                    epoch,
                    batch: b + 1,
                    detail: format!("d_loss = {d_loss}, g_loss = {g_loss}"),
                });
            }
            d_sum += d_loss;
            g_sum += g_loss;
            batches += 1;
        }
        self.order = order;

        if !self.gen.params().is_finite() || !self.disc.params().is_finite() {
            return Err(Error::NonFinite {
                epoch,
                batch: batches,
                detail: "non-finite network parameters".into(),
            });
        }
        let mean_rmse = mean_generated_rmse(
            &self.gen,
            &self.reps,
            self.cfg.eval_samples_per_epoch,
            &mut self.eval_rng,
        )?;
        if !mean_rmse.is_finite() {
            return Err(Error::NonFinite {
                epoch,
                batch: batches,
                detail: format!("evaluation RMSE = {mean_rmse}"),
            });
        }
        let record = EpochRecord {
            epoch,
            d_loss: d_sum / batches as f64,
            g_loss: g_sum / batches as f64,
            mean_rmse,
            seconds: start.elapsed().as_secs_f64(),
        };
        self.history.records.push(record);
        Ok(record)
    }

    pub fn finish(self) -> TrainOutcome {
        TrainOutcome {
            generator: self.gen,
            discriminator: self.disc,
            history: self.history,
        }
    }
}

/// Trains for `cfg.epochs` epochs.
pub fn train(dataset: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with(dataset, cfg, |_, _| {})
}

/// Like [`train`], calling `on_epoch` after every completed epoch.
pub fn train_with(
    dataset: &LabeledDataset,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&Trainer, &EpochRecord),
) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(dataset, cfg)?;
    for _ in 0..cfg.epochs {
        let rec = trainer.run_epoch()?;
        on_epoch(&trainer, &rec);
    }
    Ok(trainer.finish())
}
