use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::texture::{LbpFeature512, FEATURE_LEN};
use crate::FloodLabel;

/// Widths of every layer, input first. Each hidden layer halves the previous one.
pub const LAYER_DIMS: [usize; 8] = [512, 256, 128, 64, 32, 16, 8, 1];

/// Number of weighted (dense) layers.
pub const N_LAYERS: usize = LAYER_DIMS.len() - 1;

/// Scores strictly above this are flooded.
pub const SCORE_THRESHOLD: f64 = 0.5;

/// Fully connected flood classifier with ReLU hidden layers and a sigmoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub(crate) weights: Vec<Vec<f64>>,
    pub(crate) biases: Vec<Vec<f64>>,
    pub(crate) dropout_rate: f64,
    pub(crate) seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub dropout_rate: f64,
    pub seed: u64,
    /// Mini-batch gradients whose global L2 norm exceeds this are rescaled
    /// to it before the update. `None` disables clipping.
    #[serde(default)]
    pub max_grad_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 200,
            batch_size: 16,
            dropout_rate: 0.2,
            seed: 0,
            max_grad_norm: Some(5.0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidParameter(format!("learning rate {}", self.learning_rate)));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter(format!(
                "epochs = {}, batch_size = {}",
                self.epochs, self.batch_size
            )));
        }
        if let Some(c) = self.max_grad_norm {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidParameter(format!("max gradient norm {c}")));
            }
        }
        check_dropout(self.dropout_rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloodDecision {
    pub score: f64,
    pub label: FloodLabel,
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input; `activations[l + 1]` is the output of
    /// layer `l` after ReLU and dropout (sigmoid for the last layer).
    pub activations: Vec<Vec<f64>>,
    /// Pre-activation of every layer.
    pub pre_activations: Vec<Vec<f64>>,
    /// Inverted-dropout multipliers per hidden layer (0 or 1/(1-p); all 1 at inference).
    pub dropout_scales: Vec<Vec<f64>>,
}

fn check_dropout(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidDropout(p))
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy evaluated from the logit.
pub(crate) fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// He-uniform initialised model (bound `sqrt(6 / fan_in)`), zero biases.
pub fn mlp_init(seed: u64, dropout_rate: f64) -> Result<MlpModel> {
    check_dropout(dropout_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::with_capacity(N_LAYERS);
    let mut biases = Vec::with_capacity(N_LAYERS);
    for w in LAYER_DIMS.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let bound = (6.0 / fan_in as f64).sqrt();
        weights.push((0..fan_in * fan_out).map(|_| rng.random_range(-bound..bound)).collect());
        biases.push(vec![0.0; fan_out]);
    }
    Ok(MlpModel {
        weights,
        biases,
        dropout_rate,
        seed,
    })
}

impl MlpModel {
    /// Builds a model from explicit parameters, checking the fixed architecture.
    pub fn from_parts(weights: Vec<Vec<f64>>, biases: Vec<Vec<f64>>, dropout_rate: f64) -> Result<Self> {
        check_dropout(dropout_rate)?;
        if weights.len() != N_LAYERS || biases.len() != N_LAYERS {
            return Err(Error::Shape(format!(
                "expected {N_LAYERS} layers, got {} weight / {} bias blocks",
                weights.len(),
                biases.len()
            )));
        }
        for l in 0..N_LAYERS {
            let (cols, rows) = (LAYER_DIMS[l], LAYER_DIMS[l + 1]);
            if weights[l].len() != rows * cols || biases[l].len() != rows {
                return Err(Error::Shape(format!("layer {l} is not {rows}x{cols}")));
            }
        }
        Ok(Self {
            weights,
            biases,
            dropout_rate,
            seed: 0,
        })
    }

    /// All-zero weights and biases; scores exactly 0.5 on every input.
    pub fn zeros(dropout_rate: f64) -> Result<Self> {
        let weights = LAYER_DIMS.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect();
        let biases = LAYER_DIMS.windows(2).map(|w| vec![0.0; w[1]]).collect();
        Self::from_parts(weights, biases, dropout_rate)
    }

    pub fn layer_dims(&self) -> &'static [usize] {
        &LAYER_DIMS
    }

    /// Row-major `(out, in)` weight matrix of layer `l`.
    pub fn weights(&self, l: usize) -> &[f64] {
        &self.weights[l]
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        &self.biases[l]
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    /// Seed used at initialisation (0 for models built from parts or loaded from disk).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_parameters(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Mutable view of parameter `i` in the flat order
    /// (layer 0 weights, layer 0 biases, layer 1 weights, ...).
    pub(crate) fn param_mut(&mut self, mut i: usize) -> &mut f64 {
        for l in 0..N_LAYERS {
            if i < self.weights[l].len() {
                return &mut self.weights[l][i];
            }
            i -= self.weights[l].len();
            if i < self.biases[l].len() {
                return &mut self.biases[l][i];
            }
            i -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    /// Runs the network. In `train_mode` hidden units are dropped with
    /// probability `dropout_rate` and survivors scaled by `1 / (1 - p)`.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        x: &LbpFeature512,
        train_mode: bool,
        rng: &mut R,
    ) -> Result<(f64, ForwardCache)> {
        self.forward_slice(x.values(), train_mode, rng)
    }

    pub(crate) fn forward_slice<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        train_mode: bool,
        rng: &mut R,
    ) -> Result<(f64, ForwardCache)> {
        if x.len() != FEATURE_LEN {
            return Err(Error::mismatch(FEATURE_LEN, x.len()));
        }
        let p = self.dropout_rate;
        let keep_scale = 1.0 / (1.0 - p);
        let mut activations = Vec::with_capacity(N_LAYERS + 1);
        let mut pre_activations = Vec::with_capacity(N_LAYERS);
        let mut dropout_scales = Vec::with_capacity(N_LAYERS - 1);
        activations.push(x.to_vec());

        for l in 0..N_LAYERS {
            let (cols, rows) = (LAYER_DIMS[l], LAYER_DIMS[l + 1]);
            let input = &activations[l];
            let w = &self.weights[l];
            let z: Vec<f64> = (0..rows)
                .map(|r| {
                    let row = &w[r * cols..(r + 1) * cols];
                    self.biases[l][r] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect();
            let out = if l + 1 == N_LAYERS {
                z.iter().map(|&v| sigmoid(v)).collect()
            } else {
                let scales: Vec<f64> = if train_mode && p > 0.0 {
                    (0..rows)
                        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep_scale })
                        .collect()
                } else {
                    vec![1.0; rows]
                };
                let out = z.iter().zip(&scales).map(|(&v, &s)| v.max(0.0) * s).collect();
                dropout_scales.push(scales);
                out
            };
            pre_activations.push(z);
            activations.push(out);
        }
        let score = activations[N_LAYERS][0];
        Ok((
            score,
            ForwardCache {
                activations,
                pre_activations,
                dropout_scales,
            },
        ))
    }

    /// Inference score in (0, 1); never applies dropout.
    pub fn score(&self, x: &LbpFeature512) -> Result<f64> {
        let mut unused = ChaCha8Rng::seed_from_u64(0);
        Ok(self.forward(x, false, &mut unused)?.0)
    }

    /// Output logit at inference, used by the loss.
    pub(crate) fn logit(&self, x: &[f64]) -> Result<f64> {
        let mut unused = ChaCha8Rng::seed_from_u64(0);
        let (_, cache) = self.forward_slice(x, false, &mut unused)?;
        Ok(cache.pre_activations[N_LAYERS - 1][0])
    }

    /// Adds `scale * dLoss/dparam` for one sample into `grads` (flat parameter order).
    pub(crate) fn accumulate_gradient(&self, cache: &ForwardCache, y: f64, scale: f64, grads: &mut Gradients) {
        let mut delta = vec![cache.activations[N_LAYERS][0] - y];
        for l in (0..N_LAYERS).rev() {
            let (cols, rows) = (LAYER_DIMS[l], LAYER_DIMS[l + 1]);
            let input = &cache.activations[l];
            let gw = &mut grads.weights[l];
            for r in 0..rows {
                let d = delta[r] * scale;
                if d == 0.0 {
                    continue;
                }
                for (g, a) in gw[r * cols..(r + 1) * cols].iter_mut().zip(input) {
                    *g += d * a;
                }
                grads.biases[l][r] += d;
            }
            if l == 0 {
                break;
            }
            // back through layer l's weights into hidden layer l-1
            let w = &self.weights[l];
            let z_prev = &cache.pre_activations[l - 1];
            let s_prev = &cache.dropout_scales[l - 1];
            let mut next = vec![0.0; cols];
            for (r, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (n, wv) in next.iter_mut().zip(&w[r * cols..(r + 1) * cols]) {
                    *n += d * wv;
                }
            }
            for ((n, &z), &s) in next.iter_mut().zip(z_prev).zip(s_prev) {
                *n *= if z > 0.0 { s } else { 0.0 };
            }
            delta = next;
        }
    }
}

/// Per-parameter gradient buffers with the model's layout.
#[derive(Debug, Clone)]
pub(crate) struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros() -> Self {
        Self {
            weights: LAYER_DIMS.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect(),
            biases: LAYER_DIMS.windows(2).map(|w| vec![0.0; w[1]]).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().chain(&self.biases).flatten().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn clear(&mut self) {
        self.weights.iter_mut().chain(self.biases.iter_mut()).for_each(|v| v.fill(0.0));
    }

    pub fn flat(&self, mut i: usize) -> f64 {
        for l in 0..N_LAYERS {
            if i < self.weights[l].len() {
                return self.weights[l][i];
            }
            i -= self.weights[l].len();
            if i < self.biases[l].len() {
                return self.biases[l][i];
            }
            i -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }
}

fn label_value(label: FloodLabel) -> f64 {
    if label.is_flooded() {
        1.0
    } else {
        0.0
    }
}

/// Mini-batch SGD on binary cross-entropy.
///
/// Returns the trained copy and the mean training loss of every epoch. The
/// shuffle order and dropout masks are drawn from `cfg.seed`.
pub fn train(
    model: &MlpModel,
    data: &[(LbpFeature512, FloodLabel)],
    cfg: &TrainConfig,
) -> Result<(MlpModel, Vec<f64>)> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    cfg.validate()?;
    let positives = data.iter().filter(|(_, l)| l.is_flooded()).count();
    if positives == 0 || positives == data.len() {
        log::warn!("training data holds a single class ({positives} of {} flooded)", data.len());
    }

    let mut model = model.clone();
    model.dropout_rate = cfg.dropout_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grads = Gradients::zeros();
    let mut history = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.clear();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (x, label) = &data[i];
                let y = label_value(*label);
                let (_, cache) = model.forward(x, true, &mut rng)?;
                epoch_loss += bce_from_logit(cache.pre_activations[N_LAYERS - 1][0], y);
                model.accumulate_gradient(&cache, y, scale, &mut grads);
            }
            let mut lr = cfg.learning_rate;
            if let Some(max) = cfg.max_grad_norm {
                let norm = grads.norm();
                if norm > max {
                    lr *= max / norm;
                }
            }
            for l in 0..N_LAYERS {
                for (w, g) in model.weights[l].iter_mut().zip(&grads.weights[l]) {
                    *w -= lr * g;
                }
                for (b, g) in model.biases[l].iter_mut().zip(&grads.biases[l]) {
                    *b -= lr * g;
                }
            }
        }
        history.push(epoch_loss / data.len() as f64);
    }
    Ok((model, history))
}

/// Flooded iff the inference score is strictly above 0.5.
pub fn predict(model: &MlpModel, x: &LbpFeature512) -> Result<FloodDecision> {
    let score = model.score(x)?;
    Ok(FloodDecision {
        score,
        label: FloodLabel::from_flag(score > SCORE_THRESHOLD),
    })
}

/// Largest relative disagreement between backpropagated gradients and
/// central finite differences (step `1e-5`) over 200 sampled parameters.
///
/// Dropout is disabled for the check; `sample_seed` picks the parameters.
pub fn gradient_check(model: &MlpModel, x: &LbpFeature512, label: FloodLabel, sample_seed: u64) -> Result<f64> {
    const STEP: f64 = 1e-5;
    const SAMPLES: usize = 200;
    let y = label_value(label);
    let mut unused = ChaCha8Rng::seed_from_u64(0);
    let (_, cache) = model.forward(x, false, &mut unused)?;
    let mut grads = Gradients::zeros();
    model.accumulate_gradient(&cache, y, 1.0, &mut grads);

    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let total = model.n_parameters();
    let picks = rand::seq::index::sample(&mut rng, total, SAMPLES.min(total));
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for i in picks.iter() {
        let original = *probe.param_mut(i);
        *probe.param_mut(i) = original + STEP;
        let up = bce_from_logit(probe.logit(x.values())?, y);
        *probe.param_mut(i) = original - STEP;
        let down = bce_from_logit(probe.logit(x.values())?, y);
        *probe.param_mut(i) = original;
        let numeric = (up - down) / (2.0 * STEP);
        let analytic = grads.flat(i);
        let denom = analytic.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic - numeric).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_feature(seed: u64) -> LbpFeature512 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..FEATURE_LEN).map(|_| rng.random::<f64>()).collect();
        for half in v.chunks_mut(256) {
            let s: f64 = half.iter().sum();
            half.iter_mut().for_each(|x| *x /= s);
        }
        LbpFeature512::new(v).unwrap()
    }

    fn toy_set() -> Vec<(LbpFeature512, FloodLabel)> {
        (0..20)
            .map(|i| {
                let mut v = vec![0.0; FEATURE_LEN];
                let flooded = i % 2 == 0;
                v[if flooded { 40 } else { 255 }] = 1.0;
                v[if flooded { 300 } else { 511 }] = 1.0;
                (LbpFeature512::new(v).unwrap(), FloodLabel::from_flag(flooded))
            })
            .collect()
    }

    #[test]
    fn init_is_deterministic_with_fixed_shape() {
        let a = mlp_init(42, 0.2).unwrap();
        let b = mlp_init(42, 0.2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.layer_dims(), &[512, 256, 128, 64, 32, 16, 8, 1]);
        for l in 0..N_LAYERS {
            assert_eq!(a.weights(l).len(), LAYER_DIMS[l] * LAYER_DIMS[l + 1]);
            assert!(a.biases(l).iter().all(|&b| b == 0.0));
            let bound = (6.0 / LAYER_DIMS[l] as f64).sqrt();
            assert!(a.weights(l).iter().all(|w| w.abs() <= bound));
        }
        assert_ne!(a, mlp_init(43, 0.2).unwrap());
        assert!(matches!(mlp_init(0, 1.0), Err(Error::InvalidDropout(_))));
        assert!(matches!(mlp_init(0, -0.1), Err(Error::InvalidDropout(_))));
    }

    #[test]
    fn zero_model_scores_half_and_predicts_dry() {
        let m = MlpModel::zeros(0.2).unwrap();
        let x = random_feature(1);
        assert_eq!(m.score(&x).unwrap(), 0.5);
        let d = predict(&m, &x).unwrap();
        assert_eq!(d.label, FloodLabel::NonFlooded);
    }

    #[test]
    fn strict_score_threshold() {
        // Single positive path through the net: bias on the output alone.
        let mut m = MlpModel::zeros(0.0).unwrap();
        m.biases[N_LAYERS - 1][0] = 2.586689344097; // sigmoid ~ 0.93
        let d = predict(&m, &random_feature(2)).unwrap();
        assert!((d.score - 0.93).abs() < 1e-9);
        assert_eq!(d.label, FloodLabel::Flooded);
    }

    #[test]
    fn forward_matches_straight_line_evaluation() {
        let m = mlp_init(7, 0.3).unwrap();
        let x = random_feature(3);
        // independent evaluation with explicit index loops
        let mut act = x.values().to_vec();
        for l in 0..N_LAYERS {
            let (cols, rows) = (LAYER_DIMS[l], LAYER_DIMS[l + 1]);
            let mut next = vec![0.0; rows];
            for r in 0..rows {
                let mut z = m.biases[l][r];
                for c in 0..cols {
                    z += m.weights[l][r * cols + c] * act[c];
                }
                next[r] = if l == N_LAYERS - 1 {
                    1.0 / (1.0 + (-z).exp())
                } else if z > 0.0 {
                    z
                } else {
                    0.0
                };
            }
            act = next;
        }
        let got = m.score(&x).unwrap();
        assert!((got - act[0]).abs() < 1e-12, "{got} vs {}", act[0]);
        assert_eq!(got, m.score(&x).unwrap());
        assert!(got > 0.0 && got < 1.0);
    }

    #[test]
    fn forward_shapes_and_input_check() {
        let m = mlp_init(1, 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, cache) = m.forward(&random_feature(4), true, &mut rng).unwrap();
        let dims: Vec<usize> = cache.activations.iter().map(Vec::len).collect();
        assert_eq!(dims, LAYER_DIMS.to_vec());
        assert!(m.forward_slice(&[0.0; 10], false, &mut rng).is_err());
        assert!(LbpFeature512::new(vec![0.0; 511]).is_err());
    }

    #[test]
    fn gradients_agree_with_finite_differences() {
        for s in 0..3 {
            let m = mlp_init(100 + s, 0.2).unwrap();
            let label = FloodLabel::from_flag(s % 2 == 0);
            let err = gradient_check(&m, &random_feature(s), label, s).unwrap();
            assert!(err < 1e-4, "seed {s}: {err}");
            assert_eq!(err, gradient_check(&m, &random_feature(s), label, s).unwrap());
        }
    }

    #[test]
    fn zero_model_output_bias_gradient() {
        let m = MlpModel::zeros(0.0).unwrap();
        let x = random_feature(9);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, cache) = m.forward(&x, false, &mut rng).unwrap();
        let mut g = Gradients::zeros();
        m.accumulate_gradient(&cache, 1.0, 1.0, &mut g);
        let analytic = g.biases[N_LAYERS - 1][0];
        let mut probe = m.clone();
        let h = 1e-5;
        probe.biases[N_LAYERS - 1][0] = h;
        let up = bce_from_logit(probe.logit(x.values()).unwrap(), 1.0);
        probe.biases[N_LAYERS - 1][0] = -h;
        let down = bce_from_logit(probe.logit(x.values()).unwrap(), 1.0);
        assert!((analytic - (up - down) / (2.0 * h)).abs() < 1e-7);
        assert_eq!(analytic, -0.5);
    }

    #[test]
    fn inverted_dropout_preserves_expectation() {
        let m = mlp_init(5, 0.2).unwrap();
        let x = random_feature(5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, clean) = m.forward(&x, false, &mut rng).unwrap();
        let unit = (0..256).find(|&u| clean.activations[1][u] > 0.0).unwrap();
        let target = clean.activations[1][unit];
        let n = 10_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| m.forward(&x, true, &mut rng).unwrap().1.activations[1][unit])
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - target).abs() <= 3.0 * se, "mean {mean} target {target} se {se}");
    }

    #[test]
    fn toy_set_is_learned() {
        let data = toy_set();
        let cfg = TrainConfig::default();
        let model = mlp_init(3, cfg.dropout_rate).unwrap();
        let (trained, history) = train(&model, &data, &cfg).unwrap();
        assert_eq!(history.len(), 200);
        assert!(history[199] < history[0]);
        let correct = data
            .iter()
            .filter(|(x, l)| predict(&trained, x).unwrap().label == *l)
            .count();
        assert_eq!(correct, data.len());
        // untouched input model
        assert_eq!(model, mlp_init(3, cfg.dropout_rate).unwrap());
    }

    #[test]
    fn clipped_step_is_bounded() {
        let data = toy_set();
        let cfg = TrainConfig {
            epochs: 1,
            batch_size: data.len(),
            dropout_rate: 0.0,
            max_grad_norm: Some(1e-3),
            ..TrainConfig::default()
        };
        let model = mlp_init(6, 0.0).unwrap();
        let (trained, _) = train(&model, &data, &cfg).unwrap();
        let step: f64 = trained
            .weights
            .iter()
            .chain(&trained.biases)
            .flatten()
            .zip(model.weights.iter().chain(&model.biases).flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(step > 0.0 && step <= cfg.learning_rate * 1e-3 * (1.0 + 1e-9), "{step}");
        let bad = TrainConfig { max_grad_norm: Some(0.0), ..cfg };
        assert!(train(&model, &data, &bad).is_err());
    }

    #[test]
    fn zero_learning_rate_keeps_weights() {
        let data = toy_set();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 1,
            ..TrainConfig::default()
        };
        let model = mlp_init(4, cfg.dropout_rate).unwrap();
        let (trained, _) = train(&model, &data, &cfg).unwrap();
        assert_eq!(trained.weights, model.weights);
        assert_eq!(trained.biases, model.biases);
    }

    #[test]
    fn training_is_reproducible() {
        let data = toy_set();
        let cfg = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        let model = mlp_init(4, cfg.dropout_rate).unwrap();
        let (a, ha) = train(&model, &data, &cfg).unwrap();
        let (b, hb) = train(&model, &data, &cfg).unwrap();
        assert_eq!(ha, hb);
        assert_eq!(a, b);
        assert!(matches!(train(&model, &[], &cfg), Err(Error::EmptyDataset)));
    }
}
