use serde::{Deserialize, Serialize};

/// Largest `f64` strictly below one.
const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    LeakyRelu,
    Sigmoid,
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64, slope: f64) -> f64 {
        match self {
            Activation::LeakyRelu => leaky_relu(x, slope),
            Activation::Sigmoid => sigmoid(x),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the pre-activation `x` and the
    /// activation output `y`.
    #[inline]
    pub fn derivative(self, x: f64, y: f64, slope: f64) -> f64 {
        match self {
            Activation::LeakyRelu => {
                if x >= 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Linear => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::LeakyRelu => "leaky_relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Linear => "linear",
        }
    }
}

#[inline]
pub fn leaky_relu(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

/// Logistic function, evaluated without overflow for any finite input.
///
/// The result is kept inside the open interval (0, 1): saturated inputs
/// return the nearest representable value instead of exactly 0 or 1.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let y = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    y.clamp(f64::MIN_POSITIVE, ONE_MINUS_ULP)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaky_relu_branches() {
        assert_eq!(leaky_relu(5.0, 0.2), 5.0);
        assert_eq!(leaky_relu(-1.0, 0.2), -0.2);
        assert_eq!(leaky_relu(0.0, 0.2), 0.0);
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        // 1 / (1 + e^-1), 20 significant digits
        assert!((sigmoid(1.0) - 0.731_058_578_630_004_9).abs() < 1e-15);
        let hi = sigmoid(500.0);
        assert!(hi < 1.0 && 1.0 - hi < 1e-15);
        let lo = sigmoid(-700.0);
        assert!(lo > 0.0 && lo < 1e-300);
        assert!(sigmoid(-1e308) > 0.0);
        assert!(sigmoid(1e308) < 1.0);
    }

    #[test]
    fn sigmoid_is_odd_around_half() {
        for &x in &[0.1, 1.0, 3.7, 20.0] {
            assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-15);
        }
    }
}
