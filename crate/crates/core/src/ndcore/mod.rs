//! Dense numeric core: matrices, MLP forward/backward passes and the
//! adaptive-moment optimizer used by both GAN players.

mod activation;
mod gradcheck;
mod matrix;
mod mlp;
mod optim;

pub use activation::{leaky_relu, sigmoid, Activation};
pub use matrix::Matrix;
pub use mlp::{
    mlp_backward, mlp_forward, mlp_input_gradient, mlp_param_gradients, mlp_predict, DenseLayer,
    ForwardCache, GradientSet, LayerGradient, MlpParams,
};
pub use optim::{AdamConfig, OptimizerState};
pub use gradcheck::{gradient_check, GradCheckReport};
