//! Central finite-difference check of [`mlp_backward`] on a random linear
//! scalarization `L = sum(c * output)`.

use rand::seq::index::sample;
use rand::Rng;

use super::activation::Activation;
use super::matrix::Matrix;
use super::mlp::{mlp_backward, mlp_forward, MlpParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, floor)`.
    pub max_rel_error: f64,
    /// Coordinates compared (parameters and inputs).
    pub checked: usize,
    /// Coordinates skipped because the perturbation crossed a LeakyReLU kink.
    pub skipped_kinks: usize,
}

/// Denominator floor for the relative error, so that exact zeros compare.
const REL_FLOOR: f64 = 1e-8;

/// Compares analytic parameter and input gradients with central differences
/// of step `h`. At most `max_coords` parameter coordinates are sampled
/// (all of them when the network is small enough); every input coordinate
/// is checked.
pub fn gradient_check<R: Rng + ?Sized>(
    params: &MlpParams,
    input: &Matrix,
    h: f64,
    max_coords: usize,
    rng: &mut R,
) -> Result<GradCheckReport> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {h}")));
    }
    let (out, cache) = mlp_forward(params, input)?;
    let coeffs = Matrix::from_fn(out.rows(), out.cols(), |_, _| rng.random_range(-1.0..1.0));
    let (grads, input_grad) = mlp_backward(params, &cache, &coeffs)?;

    let loss = |p: &MlpParams, x: &Matrix| -> Result<(f64, Vec<bool>)> {
        let (o, c) = mlp_forward(p, x)?;
        let l = o.as_slice().iter().zip(coeffs.as_slice()).map(|(a, b)| a * b).sum();
        let signs = (0..p.layers().len())
            .filter(|&k| p.layers()[k].activation == Activation::LeakyRelu)
            .flat_map(|k| c.pre_activation(k).as_slice().iter().map(|v| *v >= 0.0).collect::<Vec<_>>())
            .collect();
        Ok((l, signs))
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped_kinks: 0,
    };
    let mut record = |analytic: f64, plus: (f64, Vec<bool>), minus: (f64, Vec<bool>)| {
        if plus.1 != minus.1 {
            report.skipped_kinks += 1;
            return;
        }
        let numeric = (plus.0 - minus.0) / (2.0 * h);
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR);
        report.max_rel_error = report.max_rel_error.max(rel);
        report.checked += 1;
    };

    // (layer, is_bias, flat index)
    let mut coords = Vec::new();
    for (k, layer) in params.layers().iter().enumerate() {
        coords.extend((0..layer.weight.as_slice().len()).map(|i| (k, false, i)));
        coords.extend((0..layer.bias.len()).map(|i| (k, true, i)));
    }
    let picked: Vec<usize> = if coords.len() <= max_coords {
        (0..coords.len()).collect()
    } else {
        sample(rng, coords.len(), max_coords).into_vec()
    };
    let mut p = params.clone();
    for ci in picked {
        let (k, is_bias, i) = coords[ci];
        let original = *slot(&mut p, k, is_bias, i);
        *slot(&mut p, k, is_bias, i) = original + h;
        let plus = loss(&p, input)?;
        *slot(&mut p, k, is_bias, i) = original - h;
        let minus = loss(&p, input)?;
        *slot(&mut p, k, is_bias, i) = original;
        let g = &grads.layers[k];
        let analytic = if is_bias { g.bias[i] } else { g.weight.as_slice()[i] };
        record(analytic, plus, minus);
    }

    let mut x = input.clone();
    for i in 0..x.as_slice().len() {
        let original = x.as_slice()[i];
        x.as_mut_slice()[i] = original + h;
        let plus = loss(params, &x)?;
        x.as_mut_slice()[i] = original - h;
        let minus = loss(params, &x)?;
        x.as_mut_slice()[i] = original;
        record(input_grad.as_slice()[i], plus, minus);
    }
    Ok(report)
}

fn slot(p: &mut MlpParams, k: usize, is_bias: bool, i: usize) -> &mut f64 {
    let l = &mut p.layers_mut()[k];
    if is_bias {
        &mut l.bias[i]
    } else {
        &mut l.weight.as_mut_slice()[i]
    }
}
