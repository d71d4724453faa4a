use serde::{Deserialize, Serialize};

use super::mlp::{GradientSet, MlpParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub decay_1: f64,
    pub decay_2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 2e-4,
            decay_1: 0.5,
            decay_2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }

    /// Plain gradient descent: `p -= lr * g`.
    pub fn sgd(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            decay_1: 0.0,
            decay_2: 0.0,
            epsilon: 0.0,
        }
    }

    fn is_plain_descent(&self) -> bool {
        self.decay_1 == 0.0 && self.decay_2 == 0.0
    }

    fn validate(&self) -> Result<()> {
        let in_unit = |d: f64| (0.0..1.0).contains(&d);
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite())
            || !in_unit(self.decay_1)
            || !in_unit(self.decay_2)
            || !(self.epsilon >= 0.0)
        {
            return Err(Error::Config(format!("invalid optimizer settings {self:?}")));
        }
        Ok(())
    }
}

/// Adaptive-moment optimizer state for one network.
///
/// Both decays set to zero select plain gradient descent, where the moment
/// accumulators are still tracked but the update is `lr * g`.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    config: AdamConfig,
    step_count: u64,
    first_moment: GradientSet,
    second_moment: GradientSet,
}

impl OptimizerState {
    pub fn new(config: AdamConfig, params: &MlpParams) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            step_count: 0,
            first_moment: GradientSet::zeros_like(params),
            second_moment: GradientSet::zeros_like(params),
        })
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &GradientSet {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &GradientSet {
        &self.second_moment
    }

    /// Applies one update in place.
    pub fn step(&mut self, params: &mut MlpParams, grads: &GradientSet) -> Result<()> {
        if !grads.is_congruent(params) || !self.first_moment.is_congruent(params) {
            return Err(Error::Shape(
                "gradients, optimizer state and parameters are not congruent".into(),
            ));
        }
        self.step_count += 1;
        let AdamConfig {
            learning_rate: lr,
            decay_1: b1,
            decay_2: b2,
            epsilon: eps,
        } = self.config;
        let plain = self.config.is_plain_descent();
        let t = self.step_count as i32;
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);

        let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
            for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                if plain {
                    *p -= lr * g;
                } else {
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        };

        for (((layer, g), m), v) in params
            .layers_mut()
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first_moment.layers)
            .zip(&mut self.second_moment.layers)
        {
            update(
                layer.weight.as_mut_slice(),
                g.weight.as_slice(),
                m.weight.as_mut_slice(),
                v.weight.as_mut_slice(),
            );
            update(&mut layer.bias, &g.bias, &mut m.bias, &mut v.bias);
        }
        Ok(())
    }
}
