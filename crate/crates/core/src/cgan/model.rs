use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::data::ClassLabel;
use crate::error::{Error, Result};
use crate::ndcore::{mlp_predict, Activation, Matrix, MlpParams};
use crate::{NUM_CLASSES, SERIES_LEN};

pub const DEFAULT_LATENT_DIM: usize = 64;
pub const DEFAULT_HIDDEN: [usize; 2] = [256, 256];
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.2;

/// One latent draw `z`, entries in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVector(Vec<f64>);

impl LatentVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::Shape(
                "latent vector must be non-empty with entries in [-1, 1]".into(),
            ));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One-hot class condition `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionVector([f64; NUM_CLASSES]);

impl ConditionVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn argmax(&self) -> ClassLabel {
        let idx = self
            .0
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty");
        ClassLabel::new(idx as u8).expect("index below NUM_CLASSES")
    }
}

pub fn one_hot(label: ClassLabel) -> ConditionVector {
    let mut v = [0.0; NUM_CLASSES];
    v[label.index()] = 1.0;
    ConditionVector(v)
}

/// `n x dim` matrix of i.i.d. U[-1, 1] draws, filled row by row.
pub fn latent_matrix<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Matrix {
    let dist = Uniform::new_inclusive(-1.0, 1.0).expect("finite bounds");
    Matrix::from_fn(n, dim, |_, _| dist.sample(rng))
}

/// `n` latent vectors; consumes the rng exactly like [`latent_matrix`].
pub fn sample_latent<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Vec<LatentVector> {
    latent_matrix(n, dim, rng)
        .row_iter()
        .map(|r| LatentVector(r.to_vec()))
        .collect()
}

/// `labels.len() x 8` one-hot rows.
pub fn condition_matrix(labels: &[ClassLabel]) -> Matrix {
    let mut m = Matrix::zeros(labels.len(), NUM_CLASSES);
    for (r, l) in labels.iter().enumerate() {
        m.set(r, l.index(), 1.0);
    }
    m
}

/// Min-max map of concentrations onto [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: f64,
    pub max: f64,
}

impl Scaler {
    pub fn fit<'a>(values: impl IntoIterator<Item = &'a f64>) -> Result<Self> {
        let (min, max) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::Config(format!(
                "cannot scale data with range [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    #[inline]
    pub fn forward(&self, x: f64) -> f64 {
        2.0 * (x - self.min) / (self.max - self.min) - 1.0
    }

    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        (y + 1.0) * 0.5 * (self.max - self.min) + self.min
    }
}

/// Network shapes shared by a generator/discriminator pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub latent_dim: usize,
    pub hidden: Vec<usize>,
    pub leaky_slope: f64,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            latent_dim: DEFAULT_LATENT_DIM,
            hidden: DEFAULT_HIDDEN.to_vec(),
            leaky_slope: DEFAULT_LEAKY_SLOPE,
        }
    }
}

impl Architecture {
    /// `[latent + 8, hidden.., 24]`
    pub fn generator_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.latent_dim + NUM_CLASSES];
        s.extend(&self.hidden);
        s.push(SERIES_LEN);
        s
    }

    /// `[24 + 8, hidden.., 1]`
    pub fn discriminator_sizes(&self) -> Vec<usize> {
        let mut s = vec![SERIES_LEN + NUM_CLASSES];
        s.extend(&self.hidden);
        s.push(1);
        s
    }
}

/// Maps `[z | y]` to a day of concentrations.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    params: MlpParams,
    scaler: Option<Scaler>,
}

impl Generator {
    pub fn init<R: Rng + ?Sized>(
        arch: &Architecture,
        scaler: Option<Scaler>,
        rng: &mut R,
    ) -> Result<Self> {
        let params = MlpParams::init(
            &arch.generator_sizes(),
            Activation::Linear,
            arch.leaky_slope,
            rng,
        )?;
        Ok(Self { params, scaler })
    }

    pub fn from_params(params: MlpParams, scaler: Option<Scaler>) -> Result<Self> {
        if params.input_dim() <= NUM_CLASSES
            || params.output_dim() != SERIES_LEN
            || params.layers().last().map(|l| l.activation) != Some(Activation::Linear)
        {
            return Err(Error::Shape(format!(
                "generator must map latent+{NUM_CLASSES} inputs to {SERIES_LEN} linear outputs, got {:?}",
                params.layer_sizes()
            )));
        }
        Ok(Self { params, scaler })
    }

    pub fn params(&self) -> &MlpParams {
        &self.params
    }

    pub(crate) fn params_mut(&mut self) -> &mut MlpParams {
        &mut self.params
    }

    pub fn scaler(&self) -> Option<Scaler> {
        self.scaler
    }

    pub fn latent_dim(&self) -> usize {
        self.params.input_dim() - NUM_CLASSES
    }

    /// One synthetic day, in concentration units.
    pub fn generate(&self, z: &LatentVector, y: &ConditionVector) -> Result<[f64; SERIES_LEN]> {
        if z.len() != self.latent_dim() {
            return Err(Error::Shape(format!(
                "latent vector has {} entries, generator expects {}",
                z.len(),
                self.latent_dim()
            )));
        }
        let mut input = z.0.clone();
        input.extend_from_slice(&y.0);
        let out = self.generate_model_space(&Matrix::from_vec(1, input.len(), input)?)?;
        let mut day = [0.0; SERIES_LEN];
        day.copy_from_slice(out.row(0));
        if let Some(s) = self.scaler {
            day = day.map(|v| s.inverse(v));
        }
        Ok(day)
    }

    /// Batched generation in concentration units; `z` is `n x latent`.
    pub fn generate_batch(&self, z: &Matrix, labels: &[ClassLabel]) -> Result<Matrix> {
        if z.rows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} latent rows for {} labels",
                z.rows(),
                labels.len()
            )));
        }
        let input = z.hcat(&condition_matrix(labels))?;
        let mut out = self.generate_model_space(&input)?;
        if let Some(s) = self.scaler {
            out.map_inplace(|v| s.inverse(v));
        }
        Ok(out)
    }

    /// Raw network output for `[z | y]` rows.
    pub(crate) fn generate_model_space(&self, input: &Matrix) -> Result<Matrix> {
        mlp_predict(&self.params, input)
    }
}

/// Scores `[x | y]` with the probability that `x` is real.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    params: MlpParams,
    scaler: Option<Scaler>,
}

impl Discriminator {
    pub fn init<R: Rng + ?Sized>(
        arch: &Architecture,
        scaler: Option<Scaler>,
        rng: &mut R,
    ) -> Result<Self> {
        let params = MlpParams::init(
            &arch.discriminator_sizes(),
            Activation::Sigmoid,
            arch.leaky_slope,
            rng,
        )?;
        Ok(Self { params, scaler })
    }

    pub fn from_params(params: MlpParams, scaler: Option<Scaler>) -> Result<Self> {
        if params.input_dim() != SERIES_LEN + NUM_CLASSES
            || params.output_dim() != 1
            || params.layers().last().map(|l| l.activation) != Some(Activation::Sigmoid)
        {
            return Err(Error::Shape(format!(
                "discriminator must map {} inputs to one sigmoid output, got {:?}",
                SERIES_LEN + NUM_CLASSES,
                params.layer_sizes()
            )));
        }
        Ok(Self { params, scaler })
    }

    pub fn params(&self) -> &MlpParams {
        &self.params
    }

    pub(crate) fn params_mut(&mut self) -> &mut MlpParams {
        &mut self.params
    }

    pub fn scaler(&self) -> Option<Scaler> {
        self.scaler
    }

    /// D(x, y) for a day `x` in concentration units.
    pub fn discriminate(&self, x: &[f64], y: &ConditionVector) -> Result<f64> {
        if x.len() != SERIES_LEN {
            return Err(Error::Shape(format!(
                "series has {} values, expected {SERIES_LEN}",
                x.len()
            )));
        }
        let mut input: Vec<f64> = match self.scaler {
            Some(s) => x.iter().map(|&v| s.forward(v)).collect(),
            None => x.to_vec(),
        };
        input.extend_from_slice(&y.0);
        let p = mlp_predict(&self.params, &Matrix::from_vec(1, input.len(), input)?)?;
        Ok(p.get(0, 0))
    }

    /// Probabilities for concentration-unit series with their labels.
    pub fn discriminate_batch(&self, batch: &[([f64; SERIES_LEN], ClassLabel)]) -> Result<Vec<f64>> {
        let input = self.model_input(batch)?;
        Ok(mlp_predict(&self.params, &input)?.into_vec())
    }

    pub(crate) fn model_input(&self, batch: &[([f64; SERIES_LEN], ClassLabel)]) -> Result<Matrix> {
        let rows: Vec<[f64; SERIES_LEN]> = batch
            .iter()
            .map(|(x, _)| match self.scaler {
                Some(s) => x.map(|v| s.forward(v)),
                None => *x,
            })
            .collect();
        let labels: Vec<ClassLabel> = batch.iter().map(|(_, l)| *l).collect();
        Matrix::from_rows(&rows)?.hcat(&condition_matrix(&labels))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndcore::DenseLayer;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn label(i: u8) -> ClassLabel {
        ClassLabel::new(i).unwrap()
    }

    #[test]
    fn one_hot_layout() {
        assert_eq!(one_hot(label(3)).as_slice(), &[0., 0., 0., 1., 0., 0., 0., 0.]);
        assert_eq!(one_hot(label(0)).as_slice(), &[1., 0., 0., 0., 0., 0., 0., 0.]);
        for l in ClassLabel::all() {
            assert_eq!(one_hot(l).argmax(), l);
            assert_eq!(one_hot(l).as_slice().iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn latent_range_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let zs = sample_latent(3, 64, &mut rng);
        assert_eq!(zs.len(), 3);
        assert!(zs.iter().all(|z| z.len() == 64));
        assert!(zs
            .iter()
            .flat_map(|z| z.as_slice())
            .all(|v| (-1.0..=1.0).contains(v)));
        let again = sample_latent(3, 64, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(zs, again);
        let m = latent_matrix(3, 64, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(m.row(2), zs[2].as_slice());
    }

    #[test]
    fn latent_moments_match_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let n = 100_000;
        let m = latent_matrix(n, 64, &mut rng);
        for c in 0..64 {
            let col: Vec<f64> = (0..n).map(|r| m.get(r, c)).collect();
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            assert!(mean.abs() < 0.02, "coordinate {c} mean {mean}");
            assert!((var - 1.0 / 3.0).abs() < 0.02, "coordinate {c} var {var}");
        }
    }

    #[test]
    fn default_architecture_sizes() {
        let arch = Architecture::default();
        assert_eq!(arch.generator_sizes(), vec![72, 256, 256, 24]);
        assert_eq!(arch.discriminator_sizes(), vec![32, 256, 256, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = Generator::init(&arch, None, &mut rng).unwrap();
        let d = Discriminator::init(&arch, None, &mut rng).unwrap();
        assert_eq!(g.params().layer_sizes(), vec![72, 256, 256, 24]);
        assert_eq!(d.params().layer_sizes(), vec![32, 256, 256, 1]);
        assert_eq!(
            g.params().activations(),
            vec![Activation::LeakyRelu, Activation::LeakyRelu, Activation::Linear]
        );
        assert_eq!(
            d.params().activations(),
            vec![Activation::LeakyRelu, Activation::LeakyRelu, Activation::Sigmoid]
        );
    }

    fn zero_generator(bias: [f64; 24]) -> Generator {
        let arch = Architecture::default();
        let mut g = Generator::init(&arch, None, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for layer in g.params_mut().layers_mut() {
            layer.weight.map_inplace(|_| 0.0);
            layer.bias.iter_mut().for_each(|b| *b = 0.0);
        }
        g.params_mut().layers_mut().last_mut().unwrap().bias = bias.to_vec();
        g
    }

    #[test]
    fn zero_weight_generator_outputs_bias() {
        let b: [f64; 24] = std::array::from_fn(|h| h as f64 * 1.5 - 4.0);
        let g = zero_generator(b);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for z in sample_latent(4, 64, &mut rng) {
            for l in ClassLabel::all() {
                assert_eq!(g.generate(&z, &one_hot(l)).unwrap(), b);
            }
        }
    }

    #[test]
    fn generation_is_pure_and_label_sensitive() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = Generator::init(&Architecture::default(), None, &mut rng).unwrap();
        let z = sample_latent(1, 64, &mut rng).remove(0);
        let a = g.generate(&z, &one_hot(label(2))).unwrap();
        assert_eq!(a, g.generate(&z, &one_hot(label(2))).unwrap());
        // Glorot init gives nonzero label columns in the first layer
        let first = &g.params().layers()[0].weight;
        assert!((64..72).all(|c| (0..first.rows()).any(|r| first.get(r, c) != 0.0)));
        let b = g.generate(&z, &one_hot(label(5))).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn generate_rejects_wrong_latent_size() {
        let g = zero_generator([0.0; 24]);
        let z = LatentVector::new(vec![0.0; 10]).unwrap();
        assert!(matches!(g.generate(&z, &one_hot(label(0))), Err(Error::Shape(_))));
    }

    #[test]
    fn zero_discriminator_is_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut d = Discriminator::init(&Architecture::default(), None, &mut rng).unwrap();
        for layer in d.params_mut().layers_mut() {
            layer.weight.map_inplace(|_| 0.0);
        }
        assert_eq!(d.discriminate(&[123.0; 24], &one_hot(label(7))).unwrap(), 0.5);
        assert!(d.discriminate(&[1.0; 23], &one_hot(label(7))).is_err());
    }

    #[test]
    fn discriminator_output_in_open_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = Discriminator::init(&Architecture::default(), None, &mut rng).unwrap();
        for &v in &[-1e6, -10.0, 0.0, 55.5, 1e6] {
            let p = d.discriminate(&[v; 24], &one_hot(label(1))).unwrap();
            assert!(p > 0.0 && p < 1.0, "{p}");
        }
    }

    #[test]
    fn one_hidden_unit_discriminator_by_hand() {
        let w1: Vec<f64> = (0..32).map(|i| if i % 3 == 0 { 0.05 } else { -0.02 }).collect();
        let params = MlpParams::new(
            vec![
                DenseLayer {
                    weight: Matrix::from_vec(1, 32, w1.clone()).unwrap(),
                    bias: vec![0.3],
                    activation: Activation::LeakyRelu,
                },
                DenseLayer {
                    weight: Matrix::from_vec(1, 1, vec![-1.7]).unwrap(),
                    bias: vec![0.4],
                    activation: Activation::Sigmoid,
                },
            ],
            0.2,
        )
        .unwrap();
        let d = Discriminator::from_params(params, None).unwrap();
        let x: [f64; 24] = std::array::from_fn(|h| 10.0 + h as f64);
        let y = one_hot(label(6));
        let mut input = x.to_vec();
        input.extend_from_slice(y.as_slice());
        let pre: f64 = input.iter().zip(&w1).map(|(a, b)| a * b).sum::<f64>() + 0.3;
        let hidden = if pre >= 0.0 { pre } else { 0.2 * pre };
        let expected = 1.0 / (1.0 + (-(-1.7 * hidden + 0.4)).exp());
        let got = d.discriminate(&x, &y).unwrap();
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
    }

    #[test]
    fn scaler_roundtrip() {
        let s = Scaler::fit(&[3.0, 7.0, 11.0]).unwrap();
        assert_eq!(s.forward(3.0), -1.0);
        assert_eq!(s.forward(11.0), 1.0);
        assert!((s.inverse(s.forward(5.5)) - 5.5).abs() < 1e-12);
        assert!(Scaler::fit(&[2.0, 2.0]).is_err());
    }
}
