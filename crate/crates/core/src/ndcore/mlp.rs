//! Fully connected networks with hand-written backpropagation.
//!
//! Layer `k` computes `a_k = act_k(a_{k-1} W_k^T + b_k)` on a batch laid out
//! as rows. Weights are stored `[out x in]`.

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use super::activation::Activation;
use super::matrix::{matmul, matmul_at, matmul_bt, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weight: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    #[inline]
    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }
}

/// Parameters of one multilayer perceptron.
///
/// Hidden layers always use LeakyReLU; the output layer is Sigmoid or Linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    layers: Vec<DenseLayer>,
    leaky_slope: f64,
}

impl MlpParams {
    pub fn new(layers: Vec<DenseLayer>, leaky_slope: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        if !(leaky_slope > 0.0 && leaky_slope < 1.0) {
            return Err(Error::Config(format!(
                "leaky slope must lie in (0, 1), got {leaky_slope}"
            )));
        }
        let last = layers.len() - 1;
        for (k, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.out_dim() {
                return Err(Error::Shape(format!(
                    "layer {k}: bias has {} entries for {} outputs",
                    layer.bias.len(),
                    layer.out_dim()
                )));
            }
            if k > 0 && layers[k - 1].out_dim() != layer.in_dim() {
                return Err(Error::Shape(format!(
                    "layer {k}: expects {} inputs but layer {} produces {}",
                    layer.in_dim(),
                    k - 1,
                    layers[k - 1].out_dim()
                )));
            }
            let ok = if k == last {
                matches!(layer.activation, Activation::Sigmoid | Activation::Linear)
            } else {
                layer.activation == Activation::LeakyRelu
            };
            if !ok {
                return Err(Error::Config(format!(
                    "layer {k}: activation {} not allowed at this position",
                    layer.activation.name()
                )));
            }
        }
        Ok(Self {
            layers,
            leaky_slope,
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(
        sizes: &[usize],
        output: Activation,
        leaky_slope: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Config(format!(
                "layer sizes must have at least two positive entries, got {sizes:?}"
            )));
        }
        let n = sizes.len() - 1;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
                let weight = Matrix::from_fn(fan_out, fan_in, |_, _| dist.sample(rng));
                DenseLayer {
                    weight,
                    bias: vec![0.0; fan_out],
                    activation: if k + 1 == n {
                        output
                    } else {
                        Activation::LeakyRelu
                    },
                }
            })
            .collect();
        Self::new(layers, leaky_slope)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn leaky_slope(&self) -> f64 {
        self.leaky_slope
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// `[in, hidden.., out]`
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim()];
        sizes.extend(self.layers.iter().map(DenseLayer::out_dim));
        sizes
    }

    pub fn activations(&self) -> Vec<Activation> {
        self.layers.iter().map(|l| l.activation).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.as_slice().len() + l.bias.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }
}

/// Per-layer intermediate values of a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input fed to each layer (`inputs[0]` is the network input).
    inputs: Vec<Matrix>,
    /// Pre-activations of each layer.
    pre: Vec<Matrix>,
    output: Matrix,
}

impl ForwardCache {
    pub fn output(&self) -> &Matrix {
        &self.output
    }

    pub fn batch_size(&self) -> usize {
        self.output.rows()
    }

    /// Pre-activation values of layer `k`.
    pub fn pre_activation(&self, k: usize) -> &Matrix {
        &self.pre[k]
    }

    /// Activation output of layer `k`.
    fn activation_out(&self, k: usize) -> &Matrix {
        self.inputs.get(k + 1).unwrap_or(&self.output)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

/// Gradients shaped like the [`MlpParams`] they were computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<LayerGradient>,
}

impl GradientSet {
    pub fn zeros_like(params: &MlpParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weight: Matrix::zeros(l.out_dim(), l.in_dim()),
                    bias: vec![0.0; l.out_dim()],
                })
                .collect(),
        }
    }

    pub fn is_congruent(&self, params: &MlpParams) -> bool {
        self.layers.len() == params.layers.len()
            && self.layers.iter().zip(&params.layers).all(|(g, l)| {
                g.weight.shape() == l.weight.shape() && g.bias.len() == l.bias.len()
            })
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.iter().all(|b| b.is_finite()))
    }

    pub fn max_abs(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weight.as_slice().iter().chain(&l.bias))
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

pub fn mlp_forward(params: &MlpParams, input: &Matrix) -> Result<(Matrix, ForwardCache)> {
    let slope = params.leaky_slope;
    let mut inputs = Vec::with_capacity(params.layers.len());
    let mut pre = Vec::with_capacity(params.layers.len());
    let mut current = input.clone();
    for (k, layer) in params.layers.iter().enumerate() {
        if current.cols() != layer.in_dim() {
            return Err(Error::Shape(format!(
                "layer {k} expects {} inputs, got {}",
                layer.in_dim(),
                current.cols()
            )));
        }
        let mut z = matmul_bt(&current, &layer.weight);
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&layer.bias) {
                *v += b;
            }
        }
        let mut a = z.clone();
        let act = layer.activation;
        a.map_inplace(|x| act.apply(x, slope));
        inputs.push(current);
        pre.push(z);
        current = a;
    }
    let cache = ForwardCache {
        inputs,
        pre,
        output: current.clone(),
    };
    Ok((current, cache))
}

/// Forward pass without keeping intermediates.
pub fn mlp_predict(params: &MlpParams, input: &Matrix) -> Result<Matrix> {
    let slope = params.leaky_slope;
    let mut current: Option<Matrix> = None;
    for (k, layer) in params.layers.iter().enumerate() {
        let x = current.as_ref().unwrap_or(input);
        if x.cols() != layer.in_dim() {
            return Err(Error::Shape(format!(
                "layer {k} expects {} inputs, got {}",
                layer.in_dim(),
                x.cols()
            )));
        }
        let mut z = matmul_bt(x, &layer.weight);
        let act = layer.activation;
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&layer.bias) {
                *v = act.apply(*v + b, slope);
            }
        }
        current = Some(z);
    }
    Ok(current.expect("at least one layer"))
}

/// Backpropagates `output_gradient` (dL/d output) through the network.
///
/// Returns the parameter gradients and dL/d input.
pub fn mlp_backward(
    params: &MlpParams,
    cache: &ForwardCache,
    output_gradient: &Matrix,
) -> Result<(GradientSet, Matrix)> {
    let (grads, input_grad) = backward(params, cache, output_gradient, true, true)?;
    Ok((grads.expect("requested"), input_grad.expect("requested")))
}

/// Parameter gradients only; skips the product that would yield dL/d input.
pub fn mlp_param_gradients(
    params: &MlpParams,
    cache: &ForwardCache,
    output_gradient: &Matrix,
) -> Result<GradientSet> {
    let (grads, _) = backward(params, cache, output_gradient, true, false)?;
    Ok(grads.expect("requested"))
}

/// dL/d input only; skips all weight-gradient products.
pub fn mlp_input_gradient(
    params: &MlpParams,
    cache: &ForwardCache,
    output_gradient: &Matrix,
) -> Result<Matrix> {
    let (_, input_grad) = backward(params, cache, output_gradient, false, true)?;
    Ok(input_grad.expect("requested"))
}

fn backward(
    params: &MlpParams,
    cache: &ForwardCache,
    output_gradient: &Matrix,
    want_params: bool,
    want_input: bool,
) -> Result<(Option<GradientSet>, Option<Matrix>)> {
    if cache.pre.len() != params.layers.len() {
        return Err(Error::Shape(format!(
            "cache holds {} layers, network has {}",
            cache.pre.len(),
            params.layers.len()
        )));
    }
    if output_gradient.shape() != cache.output.shape() {
        return Err(Error::Shape(format!(
            "output gradient is {}x{}, network output is {}x{}",
            output_gradient.rows(),
            output_gradient.cols(),
            cache.output.rows(),
            cache.output.cols()
        )));
    }
    let slope = params.leaky_slope;
    let mut layer_grads: Vec<LayerGradient> = Vec::new();
    let mut upstream = output_gradient.clone();
    for k in (0..params.layers.len()).rev() {
        let layer = &params.layers[k];
        let z = &cache.pre[k];
        if z.cols() != layer.out_dim() || cache.inputs[k].cols() != layer.in_dim() {
            return Err(Error::Shape(format!(
                "layer {k}: cache does not match parameter shapes"
            )));
        }
        let a = cache.activation_out(k);
        // dL/dz = dL/da * act'(z)
        let act = layer.activation;
        if act != Activation::Linear {
            for ((g, &zv), &av) in upstream
                .as_mut_slice()
                .iter_mut()
                .zip(z.as_slice())
                .zip(a.as_slice())
            {
                *g *= act.derivative(zv, av, slope);
            }
        }
        if want_params {
            let weight = matmul_at(&upstream, &cache.inputs[k]);
            let mut bias = vec![0.0; layer.out_dim()];
            for row in upstream.row_iter() {
                for (b, g) in bias.iter_mut().zip(row) {
                    *b += g;
                }
            }
            layer_grads.push(LayerGradient { weight, bias });
        }
        if k > 0 || want_input {
            upstream = matmul(&upstream, &layer.weight);
        }
    }
    layer_grads.reverse();
    Ok((
        want_params.then_some(GradientSet {
            layers: layer_grads,
        }),
        want_input.then_some(upstream),
    ))
}
