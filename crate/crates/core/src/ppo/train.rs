//! Training loop: parallel rollout collection and synchronous updates.

use super::gae::compute_gae;
use super::mlp::{softmax, Mlp, Optimizer};
use super::update::{ppo_update, Batch, TrainStats};
use super::{PpoConfig, PpoError, Trajectory, Transition};
use crate::env::{EnvError, Observation, SimEnv, StepOutcome};
use crate::seeds::sub_seed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Environment surface the trainer needs. [`SimEnv`] implements it; tests
/// plug in contrived environments.
pub trait RolloutEnv: Send {
    fn reset(&mut self, episode_seed: u64) -> Observation;
    fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError>;
    fn num_actions(&self) -> usize;
    fn obs_len(&self) -> usize;
}

impl RolloutEnv for SimEnv {
    fn reset(&mut self, episode_seed: u64) -> Observation {
        SimEnv::reset(self, episode_seed)
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome, EnvError> {
        SimEnv::step(self, action)
    }

    fn num_actions(&self) -> usize {
        self.fleet_size()
    }

    fn obs_len(&self) -> usize {
        self.observation_len()
    }
}

/// One row of the training log, emitted per completed episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeLog {
    pub iteration: usize,
    pub episode: usize,
    /// Mean per-step reward within the episode.
    pub mean_reward: f64,
    pub entropy: f64,
    pub kl: f64,
    pub clip_fraction: f64,
}

#[derive(Debug)]
pub struct TrainOutput {
    pub policy: Mlp,
    pub value: Mlp,
    pub episodes: Vec<EpisodeLog>,
    pub iterations: Vec<TrainStats>,
}

struct Worker<E> {
    id: usize,
    env: E,
    obs: Observation,
    rng: ChaCha8Rng,
    ep_reward: f64,
    ep_steps: usize,
    ep_count: usize,
}

impl<E: RolloutEnv> Worker<E> {
    fn new(id: usize, mut env: E, master_seed: u64) -> Worker<E> {
        let obs = env.reset(sub_seed(master_seed, &format!("train:w{id}:ep0")));
        let rng = ChaCha8Rng::seed_from_u64(sub_seed(master_seed, &format!("train:rng:w{id}")));
        Worker { id, env, obs, rng, ep_reward: 0.0, ep_steps: 0, ep_count: 0 }
    }
}

fn sample_action(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let r: f64 = rng.random::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Run one fixed-length segment on a worker with frozen networks. Returns
/// the trajectory plus the mean rewards of episodes completed inside it.
fn collect_segment<E: RolloutEnv>(
    worker: &mut Worker<E>,
    policy: &Mlp,
    value: &Mlp,
    steps: usize,
    master_seed: u64,
) -> Result<(Trajectory, Vec<f64>), PpoError> {
    let mut traj = Trajectory::default();
    let mut completed = Vec::new();
    for _ in 0..steps {
        let probs = softmax(&policy.forward(&worker.obs.values));
        let action = sample_action(&probs, &mut worker.rng);
        let log_prob = probs[action].max(1e-300).ln();
        let v = value.forward(&worker.obs.values)[0];
        let out = worker.env.step(action)?;
        traj.steps.push(Transition {
            obs: std::mem::take(&mut worker.obs.values),
            action,
            reward: out.reward,
            log_prob,
            old_probs: probs,
            value: v,
            done: out.done,
        });
        worker.ep_reward += out.reward;
        worker.ep_steps += 1;
        if out.done {
            completed.push(worker.ep_reward / worker.ep_steps.max(1) as f64);
            worker.ep_reward = 0.0;
            worker.ep_steps = 0;
            worker.ep_count += 1;
            let seed = sub_seed(master_seed, &format!("train:w{}:ep{}", worker.id, worker.ep_count));
            worker.obs = worker.env.reset(seed);
        } else {
            worker.obs = out.observation.expect("non-terminal step yields an observation");
        }
    }
    traj.bootstrap_value = if traj.steps.last().map(|t| t.done).unwrap_or(true) {
        0.0
    } else {
        value.forward(&worker.obs.values)[0]
    };
    Ok((traj, completed))
}

/// Train a policy. `factory(w)` must yield an independent environment for
/// worker `w`; rollouts run on `workers` threads with frozen network
/// snapshots, and the learner is the only parameter writer. Deterministic
/// for a fixed config seed: worker streams depend only on their own seeds
/// and results merge in worker order.
pub fn train<E, F>(factory: F, cfg: &PpoConfig) -> Result<TrainOutput, PpoError>
where
    E: RolloutEnv,
    F: Fn(usize) -> E + Sync,
{
    cfg.validate()?;
    let mut workers: Vec<Worker<E>> =
        (0..cfg.workers).map(|w| Worker::new(w, factory(w), cfg.seed)).collect();
    let obs_len = workers[0].env.obs_len();
    let n_actions = workers[0].env.num_actions();

    let mut init_rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, "train:init"));
    let mut policy = Mlp::new(cfg.policy_sizes(obs_len, n_actions), &mut init_rng, true);
    let mut value = Mlp::new(cfg.value_sizes(obs_len), &mut init_rng, false);
    let mut policy_opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, policy.num_params());
    let mut value_opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, value.num_params());

    let steps_per_worker = cfg.train_batch / cfg.workers;
    let mut episodes: Vec<EpisodeLog> = Vec::new();
    let mut iteration_stats: Vec<TrainStats> = Vec::new();
    let mut episode_counter = 0usize;

    for iteration in 0..cfg.iterations {
        // Parallel rollouts against frozen parameter snapshots. Results are
        // joined in worker order, keeping the batch layout deterministic.
        let policy_ref = &policy;
        let value_ref = &value;
        let seed = cfg.seed;
        let results: Vec<Result<(Trajectory, Vec<f64>), PpoError>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = workers
                    .iter_mut()
                    .map(|worker| {
                        scope.spawn(move || {
                            collect_segment(worker, policy_ref, value_ref, steps_per_worker, seed)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("rollout worker panicked")).collect()
            });

        let mut batch = Batch::default();
        let mut completed_this_iter: Vec<f64> = Vec::new();
        for result in results {
            let (traj, completed) = result?;
            completed_this_iter.extend(completed);
            let rewards: Vec<f64> = traj.steps.iter().map(|t| t.reward).collect();
            let mut values: Vec<f64> = traj.steps.iter().map(|t| t.value).collect();
            values.push(traj.bootstrap_value);
            let dones: Vec<bool> = traj.steps.iter().map(|t| t.done).collect();
            let (advantages, returns) = compute_gae(&rewards, &values, &dones, cfg.gamma, cfg.gae_lambda);
            for (t, (adv, ret)) in traj.steps.into_iter().zip(advantages.into_iter().zip(returns)) {
                batch.obs.push(t.obs);
                batch.actions.push(t.action);
                batch.old_log_probs.push(t.log_prob);
                batch.old_probs.push(t.old_probs);
                batch.advantages.push(adv);
                batch.returns.push(ret);
            }
        }

        let mut shuffle_rng =
            ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, &format!("train:shuffle:{iteration}")));
        let stats = ppo_update(
            &mut policy,
            &mut value,
            &mut policy_opt,
            &mut value_opt,
            &batch,
            cfg,
            &mut shuffle_rng,
        )?;
        iteration_stats.push(stats);

        for mean_reward in completed_this_iter {
            episodes.push(EpisodeLog {
                iteration,
                episode: episode_counter,
                mean_reward,
                entropy: stats.entropy,
                kl: stats.kl,
                clip_fraction: stats.clip_fraction,
            });
            episode_counter += 1;
        }
    }

    Ok(TrainOutput { policy, value, episodes, iterations: iteration_stats })
}
