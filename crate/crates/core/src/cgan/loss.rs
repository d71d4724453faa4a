//! Binary cross-entropy losses of the two players, with batch-mean
//! reduction and log arguments clamped at [`LOG_FLOOR`].

use serde::{Deserialize, Serialize};

use super::model::Discriminator;
use crate::data::ClassLabel;
use crate::error::{Error, Result};
use crate::SERIES_LEN;

pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    /// Minimize `E[log(1 - D(G(z, y), y))]`.
    #[default]
    PaperSaturating,
    /// Minimize `-E[log D(G(z, y), y)]`.
    NonSaturating,
}

#[inline]
fn safe_ln(p: f64) -> f64 {
    p.max(LOG_FLOOR).ln()
}

fn mean(v: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = v.len() as f64;
    v.sum::<f64>() / n
}

/// `-1/2 mean log D(real) - 1/2 mean log(1 - D(fake))`
pub fn d_loss_from_probs(real: &[f64], fake: &[f64]) -> f64 {
    -0.5 * mean(real.iter().map(|&p| safe_ln(p))) - 0.5 * mean(fake.iter().map(|&p| safe_ln(1.0 - p)))
}

/// dL_d/dp for each real and fake probability.
pub fn d_loss_grad(real: &[f64], fake: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nr = real.len() as f64;
    let nf = fake.len() as f64;
    (
        real.iter().map(|&p| -0.5 / (nr * p.max(LOG_FLOOR))).collect(),
        fake.iter()
            .map(|&p| 0.5 / (nf * (1.0 - p).max(LOG_FLOOR)))
            .collect(),
    )
}

pub fn g_loss_from_probs(fake: &[f64], mode: LossMode) -> f64 {
    match mode {
        LossMode::PaperSaturating => mean(fake.iter().map(|&p| safe_ln(1.0 - p))),
        LossMode::NonSaturating => -mean(fake.iter().map(|&p| safe_ln(p))),
    }
}

/// dL_g/dp for each fake probability.
pub fn g_loss_grad(fake: &[f64], mode: LossMode) -> Vec<f64> {
    let n = fake.len() as f64;
    match mode {
        LossMode::PaperSaturating => fake
            .iter()
            .map(|&p| -1.0 / (n * (1.0 - p).max(LOG_FLOOR)))
            .collect(),
        LossMode::NonSaturating => fake.iter().map(|&p| -1.0 / (n * p.max(LOG_FLOOR))).collect(),
    }
}

pub type LabeledSeries = ([f64; SERIES_LEN], ClassLabel);

/// Discriminator loss on a real batch and a batch of generated samples.
pub fn d_loss(disc: &Discriminator, real: &[LabeledSeries], fake: &[LabeledSeries]) -> Result<f64> {
    if real.is_empty() || fake.is_empty() {
        return Err(Error::Shape("loss batches must be non-empty".into()));
    }
    let pr = disc.discriminate_batch(real)?;
    let pf = disc.discriminate_batch(fake)?;
    Ok(d_loss_from_probs(&pr, &pf))
}

/// Generator loss on a batch of generated samples.
pub fn g_loss(disc: &Discriminator, fake: &[LabeledSeries], mode: LossMode) -> Result<f64> {
    if fake.is_empty() {
        return Err(Error::Shape("loss batch must be non-empty".into()));
    }
    let pf = disc.discriminate_batch(fake)?;
    Ok(g_loss_from_probs(&pf, mode))
}
