//! Conditional GAN: label-conditioned generator and discriminator MLPs,
//! their BCE losses, the alternating training loop and checkpoints.

mod checkpoint;
mod loss;
mod model;
mod train;

pub use checkpoint::{
    load_checkpoint, load_checkpoint_expecting, save_checkpoint, Checkpoint, FORMAT_VERSION,
};
pub use loss::{
    d_loss, d_loss_from_probs, d_loss_grad, g_loss, g_loss_from_probs, g_loss_grad, LabeledSeries,
    LossMode, LOG_FLOOR,
};
pub use model::{
    condition_matrix, latent_matrix, one_hot, sample_latent, Architecture, ConditionVector,
    Discriminator, Generator, LatentVector, Scaler, DEFAULT_HIDDEN, DEFAULT_LATENT_DIM,
    DEFAULT_LEAKY_SLOPE,
};
pub use train::{
    discriminator_step, generator_step, mean_generated_rmse, train, train_with, EpochRecord,
    TrainConfig, TrainOutcome, Trainer, TrainingHistory,
};
