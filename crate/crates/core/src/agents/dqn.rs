//! A small DQN teacher for the poker games: a dense ReLU Q-network trained
//! with uniform experience replay, a periodically synced target network,
//! ε-greedy exploration against a random opponent, and plain SGD on the
//! squared TD error. Weights serialize as portable JSON.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::features::{encode_features, feature_width};
use crate::agents::{Policy, RandomPolicy};
use crate::cards::Game;
use crate::engine::{Action, GameState, Observation};
use crate::poker::holdem::NL_ACTION_SPACE;
use crate::poker::leduc::ROUND_ACTION_SPACE;

#[derive(Debug, Error)]
pub enum DqnError {
    #[error("{0} is not a DQN-trainable game")]
    UnsupportedGame(Game),
    #[error("training diverged at update {step}: loss is not finite")]
    DivergenceDetected { step: usize },
    #[error("model file error: {0}")]
    ModelIo(String),
}

/// Training hyperparameters. The defaults are the recorded baseline
/// configuration used by the shipped teachers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub discount: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub warmup_steps: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_steps: usize,
    pub target_sync_interval: usize,
    pub learning_rate: f64,
    pub train_steps: usize,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            hidden: vec![64, 64],
            discount: 0.99,
            batch_size: 32,
            replay_capacity: 20_000,
            warmup_steps: 1_000,
            epsilon_start: 1.0,
            epsilon_end: 0.1,
            epsilon_decay_steps: 20_000,
            target_sync_interval: 1_000,
            learning_rate: 5e-4,
            train_steps: 120_000,
        }
    }
}

/// Dense network with rectifier hidden layers and a linear output head.
/// `weights[l]` is row-major with shape (layers[l+1], layers[l]).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QNetwork {
    pub layers: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Per-parameter gradients, same shapes as the network.
#[derive(Debug, Clone)]
pub struct Gradients {
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl QNetwork {
    pub fn random(layers: &[usize], rng: &mut ChaCha8Rng) -> QNetwork {
        assert!(layers.len() >= 2, "need input and output layers");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layers.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        QNetwork { layers: layers.to_vec(), weights, biases }
    }

    fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Activations per layer, input first; hidden layers rectified, output
    /// linear.
    fn forward_trace(&self, input: &[f64]) -> Vec<Vec<f64>> {
        assert_eq!(input.len(), self.layers[0], "input width");
        let mut activations = vec![input.to_vec()];
        for (l, (weights, biases)) in self.weights.iter().zip(&self.biases).enumerate() {
            let (fan_in, fan_out) = (self.layers[l], self.layers[l + 1]);
            let prev = &activations[l];
            let last = l + 1 == self.layers.len() - 1;
            let mut out = vec![0.0; fan_out];
            for (o, slot) in out.iter_mut().enumerate() {
                let row = &weights[o * fan_in..(o + 1) * fan_in];
                let mut sum = biases[o];
                for (w, x) in row.iter().zip(prev) {
                    sum += w * x;
                }
                *slot = if last { sum } else { sum.max(0.0) };
            }
            activations.push(out);
        }
        activations
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.forward_trace(input).pop().expect("output layer")
    }

    /// Accumulate the gradient of 0.5·(Q(s, action) − target)² into `grads`
    /// and return the squared-error loss term.
    fn accumulate_td_gradient(
        &self,
        input: &[f64],
        action: usize,
        target: f64,
        grads: &mut Gradients,
    ) -> f64 {
        let activations = self.forward_trace(input);
        let output = activations.last().expect("output");
        let error = output[action] - target;

        let mut delta = vec![0.0; output.len()];
        delta[action] = error;
        for l in (0..self.weights.len()).rev() {
            let fan_in = self.layers[l];
            let prev = &activations[l];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                let row = &mut grads.weights[l][o * fan_in..(o + 1) * fan_in];
                for (slot, x) in row.iter_mut().zip(prev) {
                    *slot += d * x;
                }
                grads.biases[l][o] += d;
            }
            if l > 0 {
                let mut next_delta = vec![0.0; fan_in];
                for (o, d) in delta.iter().enumerate() {
                    if *d == 0.0 {
                        continue;
                    }
                    let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
                    for (i, w) in row.iter().enumerate() {
                        next_delta[i] += d * w;
                    }
                }
                // Rectifier derivative: active where the activation is
                // positive.
                for (slot, a) in next_delta.iter_mut().zip(prev) {
                    if *a <= 0.0 {
                        *slot = 0.0;
                    }
                }
                delta = next_delta;
            }
        }
        0.5 * error * error
    }

    fn apply_gradients(&mut self, grads: &Gradients, scale: f64) {
        for (w, g) in self.weights.iter_mut().zip(&grads.weights) {
            for (slot, grad) in w.iter_mut().zip(g) {
                *slot -= scale * grad;
            }
        }
        for (b, g) in self.biases.iter_mut().zip(&grads.biases) {
            for (slot, grad) in b.iter_mut().zip(g) {
                *slot -= scale * grad;
            }
        }
    }

    /// Flat parameter view, for finite-difference checks.
    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn parameter(&self, index: usize) -> f64 {
        *self.parameter_slots().nth(index).expect("parameter index")
    }

    pub fn set_parameter(&mut self, index: usize, value: f64) {
        let mut remaining = index;
        for block in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            if remaining < block.len() {
                block[remaining] = value;
                return;
            }
            remaining -= block.len();
        }
        panic!("parameter index out of range");
    }

    fn parameter_slots(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(self.biases.iter()).flatten()
    }

    /// TD loss and its gradient as a flat vector aligned with the flat
    /// parameter view.
    pub fn td_loss_and_flat_gradient(
        &self,
        input: &[f64],
        action: usize,
        target: f64,
    ) -> (f64, Vec<f64>) {
        let mut grads = self.zero_gradients();
        let loss = self.accumulate_td_gradient(input, action, target, &mut grads);
        let flat = grads
            .weights
            .iter()
            .chain(grads.biases.iter())
            .flatten()
            .copied()
            .collect();
        (loss, flat)
    }
}

/// One stored step of experience.
#[derive(Debug, Clone)]
pub struct Transition {
    pub features: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_features: Vec<f64>,
    pub terminal: bool,
    pub next_legal_mask: Vec<bool>,
}

/// Fixed-capacity ring buffer with uniform sampling.
pub struct ReplayBuffer {
    capacity: usize,
    ring: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> ReplayBuffer {
        assert!(capacity > 0);
        ReplayBuffer { capacity, ring: Vec::new(), next: 0 }
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn push(&mut self, transition: Transition) {
        if self.ring.len() < self.capacity {
            self.ring.push(transition);
        } else {
            self.ring[self.next] = transition;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    pub fn sample<'a>(&'a self, batch: usize, rng: &mut ChaCha8Rng) -> Vec<&'a Transition> {
        assert!(!self.ring.is_empty(), "sampling an empty replay buffer");
        (0..batch)
            .map(|_| &self.ring[rng.gen_range(0..self.ring.len())])
            .collect()
    }
}

/// The fixed action list indexed by the Q-network output head.
pub fn action_space(game: Game) -> Result<Vec<Action>, DqnError> {
    match game {
        Game::Leduc | Game::LimitHoldem => {
            Ok(ROUND_ACTION_SPACE.iter().map(|a| Action::Bet(*a)).collect())
        }
        Game::NoLimitHoldem => Ok(NL_ACTION_SPACE.iter().map(|a| Action::NoLimit(*a)).collect()),
        other => Err(DqnError::UnsupportedGame(other)),
    }
}

fn legal_mask(space: &[Action], legal: &[Action]) -> Vec<bool> {
    space.iter().map(|a| legal.contains(a)).collect()
}

fn masked_argmax(q: &[f64], mask: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, value) in q.iter().enumerate() {
        if !mask[i] {
            continue;
        }
        if best.is_none_or(|b| *value > q[b]) {
            best = Some(i);
        }
    }
    best
}

/// A trained greedy Q-policy.
#[derive(Debug)]
pub struct DqnPolicy {
    pub game: Game,
    pub net: QNetwork,
    pub config: DqnConfig,
    space: Vec<Action>,
}

impl DqnPolicy {
    pub fn new(game: Game, net: QNetwork, config: DqnConfig) -> Result<DqnPolicy, DqnError> {
        let space = action_space(game)?;
        Ok(DqnPolicy { game, net, config, space })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), DqnError> {
        let file = ModelFile {
            game: self.game.to_string(),
            layers: self.net.layers.clone(),
            weights: self.net.weights.clone(),
            biases: self.net.biases.clone(),
            config: self.config.clone(),
        };
        let text = serde_json::to_string(&file).map_err(|e| DqnError::ModelIo(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| DqnError::ModelIo(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<DqnPolicy, DqnError> {
        let text = std::fs::read_to_string(path).map_err(|e| DqnError::ModelIo(e.to_string()))?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| DqnError::ModelIo(e.to_string()))?;
        let game = Game::from_str(&file.game).map_err(DqnError::ModelIo)?;
        let net = QNetwork { layers: file.layers, weights: file.weights, biases: file.biases };
        if net.layers.first() != Some(&feature_width(game).map_err(|e| DqnError::ModelIo(e.to_string()))?) {
            return Err(DqnError::ModelIo("input width does not match the game".into()));
        }
        DqnPolicy::new(game, net, file.config)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    game: String,
    layers: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    config: DqnConfig,
}

impl Policy for DqnPolicy {
    fn choose(&self, obs: &Observation, legal: &[Action], _rng: &mut ChaCha8Rng) -> Action {
        let features = encode_features(obs).expect("poker observation");
        let q = self.net.forward(&features);
        let mask = legal_mask(&self.space, legal);
        match masked_argmax(&q, &mask) {
            Some(index) => self.space[index].clone(),
            None => legal[0].clone(),
        }
    }

    fn name(&self) -> &'static str {
        "dqn"
    }
}

/// Train a DQN teacher for one poker game against a random opponent,
/// alternating seats between episodes.
pub fn train_dqn(game: Game, config: DqnConfig, seed: u64) -> Result<DqnPolicy, DqnError> {
    let mut trainer = Trainer::new(game, config, seed)?;
    while !trainer.done() {
        trainer.run_episode()?;
    }
    let Trainer { game, config, online, .. } = trainer;
    DqnPolicy::new(game, online, config)
}

/// Bootstrapped Q-learning target: the reward alone at terminals, otherwise
/// reward + discount × best legal target-network value in the next state.
pub fn td_target(discount: f64, target_net: &QNetwork, transition: &Transition) -> f64 {
    if transition.terminal {
        return transition.reward;
    }
    let next_q = target_net.forward(&transition.next_features);
    let best = masked_argmax(&next_q, &transition.next_legal_mask)
        .map(|i| next_q[i])
        .unwrap_or(0.0);
    transition.reward + discount * best
}

struct Trainer {
    game: Game,
    config: DqnConfig,
    space: Vec<Action>,
    online: QNetwork,
    target: QNetwork,
    replay: ReplayBuffer,
    rng: ChaCha8Rng,
    seed: u64,
    episode: u64,
    act_steps: usize,
    updates: usize,
}

impl Trainer {
    fn new(game: Game, config: DqnConfig, seed: u64) -> Result<Trainer, DqnError> {
        let space = action_space(game)?;
        let width = feature_width(game).map_err(|_| DqnError::UnsupportedGame(game))?;
        let mut layers = vec![width];
        layers.extend(&config.hidden);
        layers.push(space.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD9_0000);
        let online = QNetwork::random(&layers, &mut rng);
        let target = online.clone();
        let replay = ReplayBuffer::new(config.replay_capacity);
        Ok(Trainer {
            game,
            config,
            space,
            online,
            target,
            replay,
            rng,
            seed,
            episode: 0,
            act_steps: 0,
            updates: 0,
        })
    }

    fn done(&self) -> bool {
        self.updates >= self.config.train_steps
    }

    fn epsilon(&self) -> f64 {
        let span = self.config.epsilon_decay_steps.max(1) as f64;
        let progress = (self.act_steps as f64 / span).min(1.0);
        self.config.epsilon_start + (self.config.epsilon_end - self.config.epsilon_start) * progress
    }

    fn run_episode(&mut self) -> Result<(), DqnError> {
        let opponent = RandomPolicy;
        let own_seat = (self.episode % 2) as usize;
        let mut state = GameState::reset(self.game, self.seed, self.episode);
        self.episode += 1;
        let mut pending: Option<(Vec<f64>, usize)> = None;

        while !state.is_terminal() {
            let seat = state.seat_to_act();
            let legal = state.legal_actions();
            if seat != own_seat {
                let obs = state.observe(seat);
                let action = opponent.choose(&obs, &legal, &mut self.rng);
                state.apply(&action).expect("legal action");
                continue;
            }

            let obs = state.observe(seat);
            let features = encode_features(&obs).expect("poker observation");
            let mask = legal_mask(&self.space, &legal);
            if let Some((prev_features, prev_action)) = pending.take() {
                self.replay.push(Transition {
                    features: prev_features,
                    action: prev_action,
                    reward: 0.0,
                    next_features: features.clone(),
                    terminal: false,
                    next_legal_mask: mask.clone(),
                });
            }

            let index = if self.rng.gen_bool(self.epsilon()) {
                let legal_indices: Vec<usize> =
                    (0..mask.len()).filter(|i| mask[*i]).collect();
                legal_indices[self.rng.gen_range(0..legal_indices.len())]
            } else {
                let q = self.online.forward(&features);
                masked_argmax(&q, &mask).expect("non-empty legal set")
            };
            state.apply(&self.space[index]).expect("legal action");
            pending = Some((features, index));
            self.act_steps += 1;

            if self.replay.len() >= self.config.warmup_steps && !self.done() {
                self.update_step()?;
            }
        }

        if let Some((features, action)) = pending {
            let reward = state.payoffs().expect("terminal")[own_seat];
            let width = features.len();
            self.replay.push(Transition {
                features,
                action,
                reward,
                next_features: vec![0.0; width],
                terminal: true,
                next_legal_mask: vec![false; self.space.len()],
            });
        }
        Ok(())
    }

    fn update_step(&mut self) -> Result<(), DqnError> {
        let batch = self.replay.sample(self.config.batch_size, &mut self.rng);
        let mut grads = self.online.zero_gradients();
        let mut loss = 0.0;
        for transition in batch {
            let target_value = td_target(self.config.discount, &self.target, transition);
            loss += self.online.accumulate_td_gradient(
                &transition.features,
                transition.action,
                target_value,
                &mut grads,
            );
        }
        let scale = self.config.learning_rate / self.config.batch_size as f64;
        self.online.apply_gradients(&grads, scale);
        self.updates += 1;
        if !loss.is_finite() {
            return Err(DqnError::DivergenceDetected { step: self.updates });
        }
        if self.updates % self.config.target_sync_interval == 0 {
            self.target = self.online.clone();
        }
        Ok(())
    }
}
