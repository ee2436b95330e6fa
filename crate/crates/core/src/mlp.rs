//! Multilayer-perceptron predictor with a Levenberg-Marquardt trainer and a
//! warm-started multistart initializer.
//!
//! The network maps the last `inputs` samples (most recent last) to a
//! prediction of the next one through a single hidden layer:
//!
//! ```text
//! y = w2 · act(w1 · x + b1) + b2
//! ```
//!
//! Parameters are also viewed as one flat vector in the fixed order
//! `w1` (row-major, one row per hidden unit), `b1`, `w2`, `b2`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_INPUTS: usize = 10;
pub const DEFAULT_HIDDEN: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative expressed through the activation output `h`.
    #[inline]
    fn derivative_from_output(self, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Sigmoid => h * (1.0 - h),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub inputs: usize,
    pub hidden: usize,
    pub activation: Activation,
}

impl Default for Topology {
    fn default() -> Self {
        Self {
            inputs: DEFAULT_INPUTS,
            hidden: DEFAULT_HIDDEN,
            activation: Activation::Tanh,
        }
    }
}

impl Topology {
    pub fn param_count(&self) -> usize {
        self.hidden * (self.inputs + 2) + 1
    }

    fn validate(&self) -> Result<()> {
        if self.inputs == 0 || self.hidden == 0 {
            return Err(Error::Config(
                "network needs at least one input and one hidden unit".into(),
            ));
        }
        Ok(())
    }
}

/// Structured view of the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpLayers {
    /// `hidden` rows of `inputs` weights.
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpWeights {
    topology: Topology,
    params: Vec<f64>,
}

impl MlpWeights {
    pub fn zeros(topology: Topology) -> Self {
        Self {
            params: vec![0.0; topology.param_count()],
            topology,
        }
    }

    pub fn from_flat(topology: Topology, params: Vec<f64>) -> Result<Self> {
        topology.validate()?;
        if params.len() != topology.param_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} parameters, got {}",
                topology.param_count(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("non-finite network parameter".into()));
        }
        Ok(Self { topology, params })
    }

    pub fn from_layers(activation: Activation, layers: &MlpLayers) -> Result<Self> {
        let hidden = layers.w1.len();
        let inputs = layers.w1.first().map_or(0, Vec::len);
        if layers.w1.iter().any(|row| row.len() != inputs)
            || layers.b1.len() != hidden
            || layers.w2.len() != hidden
        {
            return Err(Error::InvalidInput("inconsistent layer shapes".into()));
        }
        let mut params: Vec<f64> = layers.w1.iter().flatten().copied().collect();
        params.extend_from_slice(&layers.b1);
        params.extend_from_slice(&layers.w2);
        params.push(layers.b2);
        Self::from_flat(
            Topology {
                inputs,
                hidden,
                activation,
            },
            params,
        )
    }

    /// Uniform initialization in `[-range, range]` per parameter.
    pub fn random(topology: Topology, range: f64, rng: &mut impl Rng) -> Self {
        let params = (0..topology.param_count())
            .map(|_| rng.random_range(-range..=range))
            .collect();
        Self { topology, params }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn flat(&self) -> &[f64] {
        &self.params
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.params
    }

    pub fn layers(&self) -> MlpLayers {
        let Topology { inputs, hidden, .. } = self.topology;
        let (w1, rest) = self.params.split_at(inputs * hidden);
        let (b1, rest) = rest.split_at(hidden);
        let (w2, b2) = rest.split_at(hidden);
        MlpLayers {
            w1: w1.chunks(inputs).map(<[f64]>::to_vec).collect(),
            b1: b1.to_vec(),
            w2: w2.to_vec(),
            b2: b2[0],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.params.iter().all(|&p| p == 0.0)
    }

    /// Decimal snapshot of the flat parameter vector, one value per line.
    ///
    /// Values use the shortest representation that parses back exactly.
    pub fn to_snapshot(&self) -> String {
        let mut out = String::new();
        for p in &self.params {
            out.push_str(&format!("{p:?}\n"));
        }
        out
    }

    /// Parses a snapshot; values may be separated by whitespace or commas.
    pub fn from_snapshot(topology: Topology, text: &str) -> Result<Self> {
        let params = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::InvalidInput(format!("bad weight '{t}': {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_flat(topology, params)
    }

    #[inline]
    fn w1_row(&self, j: usize) -> &[f64] {
        let n = self.topology.inputs;
        &self.params[j * n..(j + 1) * n]
    }

    #[inline]
    fn b1(&self, j: usize) -> f64 {
        self.params[self.topology.inputs * self.topology.hidden + j]
    }

    #[inline]
    fn w2(&self, j: usize) -> f64 {
        self.params[(self.topology.inputs + 1) * self.topology.hidden + j]
    }

    #[inline]
    fn b2(&self) -> f64 {
        self.params[self.params.len() - 1]
    }

    /// Network output. `input.len()` must equal the topology's input count.
    #[inline]
    pub fn forward(&self, input: &[f64]) -> f64 {
        debug_assert_eq!(input.len(), self.topology.inputs);
        let act = self.topology.activation;
        let mut y = self.b2();
        for j in 0..self.topology.hidden {
            let z = dot(self.w1_row(j), input) + self.b1(j);
            y += self.w2(j) * act.apply(z);
        }
        y
    }

    /// Writes `∂y/∂θ` for one input into `row` (length `param_count`) and
    /// returns the output `y`.
    fn jacobian_row(&self, input: &[f64], row: &mut [f64]) -> f64 {
        let Topology {
            inputs,
            hidden,
            activation,
        } = self.topology;
        let mut y = self.b2();
        for j in 0..hidden {
            let h = activation.apply(dot(self.w1_row(j), input) + self.b1(j));
            let w2 = self.w2(j);
            y += w2 * h;
            let back = w2 * activation.derivative_from_output(h);
            for (slot, x) in row[j * inputs..(j + 1) * inputs].iter_mut().zip(input) {
                *slot = back * x;
            }
            row[inputs * hidden + j] = back;
            row[(inputs + 1) * hidden + j] = h;
        }
        row[row.len() - 1] = 1.0;
        y
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Input/target pairs cut from a signal window by sliding a context of
/// `context` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    context: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl TrainingSet {
    /// Pattern `k` has input `window[k..k+context]` and target `window[k+context]`.
    pub fn from_window(window: &[f64], context: usize) -> Result<Self> {
        if context == 0 || window.len() <= context {
            return Err(Error::InvalidInput(format!(
                "window of {} samples yields no patterns for context {context}",
                window.len()
            )));
        }
        let count = window.len() - context;
        let mut inputs = Vec::with_capacity(count * context);
        for k in 0..count {
            inputs.extend_from_slice(&window[k..k + context]);
        }
        Ok(Self {
            context,
            inputs,
            targets: window[context..].to_vec(),
        })
    }

    pub fn from_pairs(context: usize, pairs: &[(Vec<f64>, f64)]) -> Result<Self> {
        if pairs.is_empty() || context == 0 {
            return Err(Error::InvalidInput("training set must be nonempty".into()));
        }
        let mut inputs = Vec::with_capacity(pairs.len() * context);
        for (x, _) in pairs {
            if x.len() != context {
                return Err(Error::InvalidInput(
                    "pattern length differs from context".into(),
                ));
            }
            inputs.extend_from_slice(x);
        }
        Ok(Self {
            context,
            inputs,
            targets: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn context(&self) -> usize {
        self.context
    }

    pub fn input(&self, k: usize) -> &[f64] {
        &self.inputs[k * self.context..(k + 1) * self.context]
    }

    pub fn target(&self, k: usize) -> f64 {
        self.targets[k]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    fn check(&self, weights: &MlpWeights) -> Result<()> {
        if self.context != weights.topology.inputs {
            return Err(Error::InvalidInput(format!(
                "training context {} does not match network inputs {}",
                self.context, weights.topology.inputs
            )));
        }
        Ok(())
    }
}

pub fn mlp_forward(weights: &MlpWeights, input: &[f64]) -> f64 {
    weights.forward(input)
}

/// Sum of squared one-step prediction errors over a training set.
pub fn sse(weights: &MlpWeights, data: &TrainingSet) -> f64 {
    (0..data.len())
        .map(|k| {
            let e = data.target(k) - weights.forward(data.input(k));
            e * e
        })
        .sum()
}

/// Jacobian of the network output with respect to the flat parameters, one
/// row per pattern.
pub fn mlp_jacobian(weights: &MlpWeights, data: &TrainingSet) -> Result<DMatrix<f64>> {
    data.check(weights)?;
    let p = weights.topology.param_count();
    let mut j = DMatrix::zeros(data.len(), p);
    let mut row = vec![0.0; p];
    for k in 0..data.len() {
        weights.jacobian_row(data.input(k), &mut row);
        for (c, v) in row.iter().enumerate() {
            j[(k, c)] = *v;
        }
    }
    Ok(j)
}

/// Accumulates `JᵀJ` and `Jᵀe` without materializing `J`.
fn normal_equations(weights: &MlpWeights, data: &TrainingSet) -> (DMatrix<f64>, DVector<f64>) {
    let p = weights.topology.param_count();
    let mut jtj = DMatrix::<f64>::zeros(p, p);
    let mut jte = DVector::<f64>::zeros(p);
    let mut row = vec![0.0; p];
    for k in 0..data.len() {
        let y = weights.jacobian_row(data.input(k), &mut row);
        let e = data.target(k) - y;
        for a in 0..p {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            jte[a] += ra * e;
            for b in a..p {
                jtj[(a, b)] += ra * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            jtj[(a, b)] = jtj[(b, a)];
        }
    }
    (jtj, jte)
}

/// Levenberg-Marquardt schedule. One epoch is one full-batch step, accepted
/// or exhausted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub lambda_max: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 6,
            lambda_init: 1e-2,
            lambda_up: 10.0,
            lambda_down: 0.1,
            lambda_max: 1e10,
        }
    }
}

impl TrainConfig {
    pub fn with_epochs(self, epochs: usize) -> Self {
        Self { epochs, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_init > 0.0 && self.lambda_max > 0.0) {
            return Err(Error::Config(
                "lambda_init and lambda_max must be positive".into(),
            ));
        }
        if !(self.lambda_down > 0.0 && self.lambda_down < 1.0 && self.lambda_up > 1.0) {
            return Err(Error::Config("need 0 < lambda_down < 1 < lambda_up".into()));
        }
        Ok(())
    }
}

/// Trains with Levenberg-Marquardt. Returns the lowest-SSE weights seen and
/// their SSE; a step is only taken when it strictly lowers the SSE.
pub fn lm_train(
    weights: &MlpWeights,
    data: &TrainingSet,
    config: &TrainConfig,
) -> Result<(MlpWeights, f64)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    data.check(weights)?;

    let p = weights.topology.param_count();
    let mut current = weights.clone();
    let mut current_sse = sse(&current, data);
    if !current_sse.is_finite() {
        return Err(Error::Numerical("initial SSE is not finite".into()));
    }
    let mut lambda = config.lambda_init;
    let mut trial = current.clone();

    for _ in 0..config.epochs {
        if current_sse == 0.0 {
            break;
        }
        let (jtj, jte) = normal_equations(&current, data);
        if jtj.iter().any(|v| !v.is_finite()) || jte.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite Jacobian".into()));
        }
        if jte.iter().all(|&g| g == 0.0) {
            break;
        }

        let mut accepted = false;
        while lambda <= config.lambda_max {
            let mut damped = jtj.clone();
            for d in 0..p {
                damped[(d, d)] += lambda;
            }
            let chol = damped.cholesky().ok_or_else(|| {
                Error::Numerical(format!(
                    "damped normal matrix is singular at lambda {lambda:e}"
                ))
            })?;
            let step = chol.solve(&jte);
            for (t, (c, s)) in trial
                .params
                .iter_mut()
                .zip(current.params.iter().zip(step.iter()))
            {
                *t = c + s;
            }
            let trial_sse = if trial.params.iter().all(|v| v.is_finite()) {
                sse(&trial, data)
            } else {
                f64::INFINITY
            };
            if trial_sse < current_sse {
                std::mem::swap(&mut current, &mut trial);
                current_sse = trial_sse;
                lambda *= config.lambda_down;
                accepted = true;
                break;
            }
            lambda *= config.lambda_up;
        }
        if !accepted {
            // Damping exhausted: later epochs would start above lambda_max too.
            break;
        }
    }
    Ok((current, current_sse))
}

/// Candidate budget and schedules for [`multistart_train`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultistartConfig {
    pub topology: Topology,
    pub n_random: usize,
    pub epochs_random: usize,
    pub epochs_prev: usize,
    /// Random candidates draw each parameter uniformly from `[-init_range, init_range]`.
    pub init_range: f64,
    pub train: TrainConfig,
}

impl Default for MultistartConfig {
    fn default() -> Self {
        Self {
            topology: Topology::default(),
            n_random: 3,
            epochs_random: 6,
            epochs_prev: 3,
            init_range: 0.2,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistartOutcome {
    pub weights: MlpWeights,
    pub selected_prev: bool,
    /// Score of the winner (lower is better; open-loop SSE by default).
    pub score: f64,
    pub failed_candidates: usize,
}

/// Initial weights of random candidate `index` for a given seed. Each
/// candidate has its own stream, so adding candidates never changes the
/// existing ones.
pub fn random_candidate(topology: Topology, range: f64, seed: u64, index: usize) -> MlpWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    MlpWeights::random(topology, range, &mut rng)
}

/// Trains the previous-frame weights (if any) and `n_random` random
/// initializations, then keeps the one with the lowest SSE on `eval`.
pub fn multistart_train(
    prev: Option<&MlpWeights>,
    data: &TrainingSet,
    eval: &TrainingSet,
    config: &MultistartConfig,
    seed: u64,
) -> Result<MultistartOutcome> {
    multistart_train_scored(prev, data, config, seed, |w| sse(w, eval))
}

/// As [`multistart_train`] with a caller-supplied score (lower is better).
/// Ties go to the previous weights, then to the lowest random index.
pub fn multistart_train_scored<F>(
    prev: Option<&MlpWeights>,
    data: &TrainingSet,
    config: &MultistartConfig,
    seed: u64,
    score: F,
) -> Result<MultistartOutcome>
where
    F: Fn(&MlpWeights) -> f64 + Sync,
{
    if config.n_random == 0 && prev.is_none() {
        return Err(Error::Config(
            "multistart needs at least one random candidate or previous weights".into(),
        ));
    }
    config.topology.validate()?;
    if let Some(p) = prev {
        if p.topology != config.topology {
            return Err(Error::InvalidInput(
                "previous weights have a different topology".into(),
            ));
        }
    }

    let mut starts: Vec<(MlpWeights, usize, bool)> = Vec::with_capacity(config.n_random + 1);
    if let Some(p) = prev {
        starts.push((p.clone(), config.epochs_prev, true));
    }
    for i in 0..config.n_random {
        starts.push((
            random_candidate(config.topology, config.init_range, seed, i),
            config.epochs_random,
            false,
        ));
    }

    let trained: Vec<Option<(MlpWeights, f64, bool)>> = starts
        .into_par_iter()
        .map(|(init, epochs, is_prev)| {
            let cfg = config.train.with_epochs(epochs);
            let (w, _) = lm_train(&init, data, &cfg).ok()?;
            let s = score(&w);
            s.is_finite().then_some((w, s, is_prev))
        })
        .collect();

    let failed_candidates = trained.iter().filter(|t| t.is_none()).count();
    let mut best: Option<(MlpWeights, f64, bool)> = None;
    for cand in trained.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| cand.1 < b.1) {
            best = Some(cand);
        }
    }
    let (weights, score, selected_prev) =
        best.ok_or_else(|| Error::Numerical("every multistart candidate failed".into()))?;
    Ok(MultistartOutcome {
        weights,
        selected_prev,
        score,
        failed_candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layers_10x2(row0: [f64; 10], w2: [f64; 2], b2: f64) -> MlpWeights {
        MlpWeights::from_layers(
            Activation::Tanh,
            &MlpLayers {
                w1: vec![row0.to_vec(), vec![0.0; 10]],
                b1: vec![0.0, 0.0],
                w2: w2.to_vec(),
                b2,
            },
        )
        .unwrap()
    }

    #[test]
    fn param_count_is_25() {
        assert_eq!(Topology::default().param_count(), 25);
    }

    #[test]
    fn forward_examples() {
        let zero = MlpWeights::zeros(Topology::default());
        assert_eq!(zero.forward(&[0.4; 10]), 0.0);

        let w = layers_10x2([0.0; 10], [3.0, -1.0], 0.5);
        assert_eq!(w.forward(&[0.9; 10]), 0.5);

        let mut row = [0.0; 10];
        row[0] = 1.0;
        let w = layers_10x2(row, [2.0, 0.0], 0.0);
        let mut x = [0.0; 10];
        x[0] = 0.3;
        assert!((w.forward(&x) - 0.582_625_224_9).abs() < 1e-9);
    }

    #[test]
    fn sigmoid_forward() {
        let t = Topology {
            activation: Activation::Sigmoid,
            ..Topology::default()
        };
        // hidden outputs are 0.5 at zero weights
        let mut p = vec![0.0; 25];
        p[22] = 1.0;
        p[23] = 1.0;
        let w = MlpWeights::from_flat(t, p).unwrap();
        assert_eq!(w.forward(&[0.7; 10]), 1.0);
    }

    #[test]
    fn jacobian_bias_column_and_zero_point() {
        let data =
            TrainingSet::from_window(&(0..30).map(|i| (i as f64).sin()).collect::<Vec<_>>(), 10)
                .unwrap();
        let j = mlp_jacobian(&MlpWeights::zeros(Topology::default()), &data).unwrap();
        for k in 0..data.len() {
            assert_eq!(j[(k, 24)], 1.0);
            for c in 0..22 {
                assert_eq!(j[(k, c)], 0.0);
            }
        }
    }

    #[test]
    fn training_set_layout() {
        let w: Vec<f64> = (0..14).map(f64::from).collect();
        let t = TrainingSet::from_window(&w, 10).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.input(2), &w[2..12]);
        assert_eq!(t.target(2), 12.0);
        assert!(TrainingSet::from_window(&w[..10], 10).is_err());
    }

    #[test]
    fn zero_epochs_is_identity() {
        let data = TrainingSet::from_window(
            &(0..40).map(|i| (i as f64 * 0.3).sin()).collect::<Vec<_>>(),
            10,
        )
        .unwrap();
        let w0 = random_candidate(Topology::default(), 0.2, 1, 0);
        let (w, s) = lm_train(&w0, &data, &TrainConfig::default().with_epochs(0)).unwrap();
        assert_eq!(w, w0);
        assert_eq!(s, sse(&w0, &data));
    }

    #[test]
    fn single_pattern_is_fitted() {
        let data = TrainingSet::from_pairs(
            10,
            &[(
                vec![0.1, -0.2, 0.3, 0.0, 0.5, 0.2, -0.1, 0.4, 0.0, 0.3],
                0.37,
            )],
        )
        .unwrap();
        let w0 = random_candidate(Topology::default(), 0.2, 3, 0);
        let (_, s) = lm_train(&w0, &data, &TrainConfig::default()).unwrap();
        assert!(s < 1e-6, "sse {s}");
    }

    #[test]
    fn bad_schedule_is_rejected() {
        let bad = TrainConfig {
            lambda_up: 0.5,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn multistart_requires_a_candidate() {
        let data = TrainingSet::from_window(&[0.1; 20], 10).unwrap();
        let cfg = MultistartConfig {
            n_random: 0,
            ..MultistartConfig::default()
        };
        assert!(multistart_train(None, &data, &data, &cfg, 0).is_err());
    }

    #[test]
    fn multistart_prev_only() {
        let data = TrainingSet::from_window(
            &(0..60)
                .map(|i| (i as f64 * 0.2).sin() * 0.5)
                .collect::<Vec<_>>(),
            10,
        )
        .unwrap();
        let prev = random_candidate(Topology::default(), 0.2, 11, 0);
        let cfg = MultistartConfig {
            n_random: 0,
            ..MultistartConfig::default()
        };
        let out = multistart_train(Some(&prev), &data, &data, &cfg, 5).unwrap();
        assert!(out.selected_prev);
        let (expected, _) = lm_train(&prev, &data, &cfg.train.with_epochs(3)).unwrap();
        assert_eq!(out.weights, expected);
    }

    #[test]
    fn snapshot_round_trip() {
        let w = random_candidate(Topology::default(), 0.2, 99, 4);
        let back = MlpWeights::from_snapshot(Topology::default(), &w.to_snapshot()).unwrap();
        assert_eq!(back, w);
        assert!(MlpWeights::from_snapshot(Topology::default(), "1 2 3").is_err());
    }
}
