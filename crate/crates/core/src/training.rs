//! Policy-gradient training with a per-video moving-average baseline and Adam.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DurationWindow, Instance};
use crate::policy::{rollout_on_graph, save_checkpoint, PolicyGraph, PolicyParams, RolloutOptions, SampleMode};
use crate::scoring::{reward_breakdown, RewardConfig};
use crate::seeding::{hash_str, rng_for};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Episodes per video (K).
    pub episodes: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub epochs: usize,
    pub reward: RewardConfig,
    pub baseline_decay: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub target_s: f64,
    /// Rescale the batch gradient to at most this norm.
    pub clip_grad_norm: Option<f64>,
    /// Zero the reward of episodes that end below the lower duration bound.
    pub gate_reward_on_min: bool,
}

impl TrainConfig {
    /// Learning rate of the full-size protocol.
    pub const FULL_LR: f64 = 2e-4;
    /// Learning rate used at desk scale, where far fewer updates are made.
    pub const DESK_LR: f64 = 3e-3;

    /// Protocol of the full-size model: K = 8, batch 8, 10 epochs.
    pub fn full(target_s: f64) -> Self {
        TrainConfig {
            episodes: 8,
            batch_size: 8,
            lr: Self::FULL_LR,
            epochs: 10,
            reward: RewardConfig::default(),
            baseline_decay: 0.9,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            target_s,
            clip_grad_norm: None,
            gate_reward_on_min: false,
        }
    }

    /// Same protocol at desk scale: 5 epochs and a larger step size.
    pub fn desk(target_s: f64) -> Self {
        TrainConfig {
            lr: Self::DESK_LR,
            epochs: 5,
            ..Self::full(target_s)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 || self.batch_size == 0 {
            return Err(Error::Config("episodes and batch size must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.lr)));
        }
        if !(0.0..1.0).contains(&self.baseline_decay) {
            return Err(Error::Config(format!(
                "baseline decay {} outside [0, 1)",
                self.baseline_decay
            )));
        }
        if let Some(c) = self.clip_grad_norm {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::Config(format!("clip norm {c} must be positive")));
            }
        }
        self.reward.validate()?;
        DurationWindow::new(self.target_s)?;
        Ok(())
    }

    pub fn window(&self) -> Result<DurationWindow> {
        DurationWindow::new(self.target_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_reward: f64,
    pub mean_imp: f64,
    pub mean_coh: f64,
    pub mean_len: f64,
    pub mean_tau: f64,
    /// Mean batch gradient norm (before clipping).
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochStats>,
    pub batch_grad_norms: Vec<f64>,
}

impl TrainLog {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.epochs {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

/// Per-batch statistics returned by [`Trainer::reinforce_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub episodes: Vec<EpisodeStats>,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeStats {
    pub instance_id: String,
    pub temporal: Vec<usize>,
    pub reward: f64,
    pub imp: f64,
    pub coh: f64,
    pub tau: f64,
    pub advantage: f64,
}

struct Episode {
    stats: EpisodeStats,
    grads: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

/// Mutable training state: parameters, optimizer moments and baselines.
#[derive(Debug, Clone)]
pub struct Trainer {
    params: PolicyParams,
    cfg: TrainConfig,
    adam: Adam,
    baselines: HashMap<String, f64>,
    steps: u64,
}

impl Trainer {
    pub fn new(params: PolicyParams, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let shape: Vec<Vec<f64>> = params.blocks().iter().map(|b| vec![0.0; b.values.len()]).collect();
        Ok(Trainer {
            params,
            cfg,
            adam: Adam {
                m: shape.clone(),
                v: shape,
                t: 0,
            },
            baselines: HashMap::new(),
            steps: 0,
        })
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn into_params(self) -> PolicyParams {
        self.params
    }

    pub fn baseline(&self, instance_id: &str) -> Option<f64> {
        self.baselines.get(instance_id).copied()
    }

    fn run_episode(&self, inst: &Instance, window: &DurationWindow, k: usize) -> Result<Episode> {
        let mut rng = rng_for(self.cfg.seed, &[hash_str(inst.id()), self.steps, k as u64]);
        let mut opts = RolloutOptions::from_config(self.params.config(), inst);
        opts.sample_mode = SampleMode::Sample;
        let mut graph = PolicyGraph::new(&self.params);
        let (ro, logprobs) = rollout_on_graph(&mut graph, inst, window, opts, &mut rng)?;
        let parts = reward_breakdown(inst, &ro.selection.temporal, &self.cfg.reward)?;
        let tau = ro.selection.total_duration_s;
        let reward = if self.cfg.gate_reward_on_min && tau < window.t_min_s {
            0.0
        } else {
            parts.reward
        };
        let grads = if logprobs.is_empty() {
            None
        } else {
            let stacked = graph.tape.concat_rows(&logprobs)?;
            let total = graph.tape.sum(stacked);
            graph.tape.backward(total)?;
            Some(graph.gradients())
        };
        Ok(Episode {
            stats: EpisodeStats {
                instance_id: inst.id().to_owned(),
                temporal: ro.selection.temporal,
                reward,
                imp: parts.imp,
                coh: parts.coh,
                tau,
                advantage: 0.0,
            },
            grads,
        })
    }

    /// One policy-gradient update over `batch`, K episodes per video.
    pub fn reinforce_step(&mut self, batch: &[&Instance]) -> Result<StepStats> {
        self.reinforce_step_at(batch, 0, 0)
    }

    fn reinforce_step_at(&mut self, batch: &[&Instance], epoch: usize, batch_no: usize) -> Result<StepStats> {
        let window = self.cfg.window()?;
        let k = self.cfg.episodes;
        let jobs: Vec<(usize, usize)> = (0..batch.len()).flat_map(|v| (0..k).map(move |e| (v, e))).collect();
        let mut episodes: Vec<Episode> = jobs
            .par_iter()
            .map(|&(v, e)| self.run_episode(batch[v], &window, e))
            .collect::<Result<_>>()?;

        let mut total: Vec<Vec<f64>> = self.params.blocks().iter().map(|b| vec![0.0; b.values.len()]).collect();
        let scale = 1.0 / (k * batch.len()) as f64;
        for (v, chunk) in episodes.chunks_mut(k).enumerate() {
            let mean = chunk.iter().map(|e| e.stats.reward).sum::<f64>() / k as f64;
            let decay = self.cfg.baseline_decay;
            let b = *self
                .baselines
                .entry(batch[v].id().to_owned())
                .and_modify(|b| *b = decay * *b + (1.0 - decay) * mean)
                .or_insert(mean);
            for ep in chunk.iter_mut() {
                let adv = ep.stats.reward - b;
                ep.stats.advantage = adv;
                // loss = -(1/K) sum_k adv_k * sum_t log p, averaged over the batch
                if let (Some(g), true) = (&ep.grads, adv != 0.0) {
                    let w = -adv * scale;
                    for (acc, gb) in total.iter_mut().zip(g) {
                        acc.iter_mut().zip(gb).for_each(|(a, x)| *a += w * x);
                    }
                }
            }
        }

        let norm = total.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(Error::NonFinite {
                epoch,
                batch: batch_no,
                detail: format!("gradient norm {norm}"),
            });
        }
        if let Some(limit) = self.cfg.clip_grad_norm {
            if norm > limit {
                let s = limit / norm;
                total.iter_mut().flatten().for_each(|x| *x *= s);
            }
        }
        self.adam_update(&total);
        self.steps += 1;
        if !self.params.is_finite() {
            return Err(Error::NonFinite {
                epoch,
                batch: batch_no,
                detail: "parameters became non-finite after the update".into(),
            });
        }
        Ok(StepStats {
            episodes: episodes.into_iter().map(|e| e.stats).collect(),
            grad_norm: norm,
        })
    }

    fn adam_update(&mut self, grads: &[Vec<f64>]) {
        let c = &self.cfg;
        self.adam.t += 1;
        let bc1 = 1.0 - c.adam_beta1.powi(self.adam.t);
        let bc2 = 1.0 - c.adam_beta2.powi(self.adam.t);
        let blocks = self.params.blocks_mut();
        for (((block, g), m), v) in blocks.iter_mut().zip(grads).zip(&mut self.adam.m).zip(&mut self.adam.v) {
            for i in 0..g.len() {
                m[i] = c.adam_beta1 * m[i] + (1.0 - c.adam_beta1) * g[i];
                v[i] = c.adam_beta2 * v[i] + (1.0 - c.adam_beta2) * g[i] * g[i];
                if m[i] == 0.0 {
                    continue;
                }
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                block.values[i] -= c.lr * m_hat / (v_hat.sqrt() + c.adam_eps);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: PolicyParams,
    pub log: TrainLog,
}

fn mean_of(stats: &[EpisodeStats], f: impl Fn(&EpisodeStats) -> f64) -> f64 {
    stats.iter().map(f).sum::<f64>() / stats.len().max(1) as f64
}

/// Full training run. With `out_dir`, writes a checkpoint per epoch, the
/// final checkpoint and `train_log.csv`.
pub fn train(
    dataset: &[Instance],
    init: PolicyParams,
    cfg: &TrainConfig,
    out_dir: Option<&Path>,
) -> Result<TrainOutcome> {
    if dataset.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    let mut trainer = Trainer::new(init, *cfg)?;
    let mut log = TrainLog::default();
    for epoch in 1..=cfg.epochs {
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        order.shuffle(&mut rng_for(cfg.seed, &[hash_str("epoch"), epoch as u64]));
        let mut stats = Vec::new();
        let mut norms = Vec::new();
        for (batch_no, idx) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&Instance> = idx.iter().map(|&i| &dataset[i]).collect();
            let step = match trainer.reinforce_step_at(&batch, epoch, batch_no) {
                Ok(step) => step,
                Err(e @ Error::NonFinite { .. }) => {
                    if let Some(dir) = out_dir {
                        save_checkpoint(trainer.params(), &dir.join("diagnostic.ckpt"))?;
                    }
                    return Err(e);
                }
                Err(e) => return Err(e),
            };
            norms.push(step.grad_norm);
            stats.extend(step.episodes);
        }
        log.epochs.push(EpochStats {
            epoch,
            mean_reward: mean_of(&stats, |s| s.reward),
            mean_imp: mean_of(&stats, |s| s.imp),
            mean_coh: mean_of(&stats, |s| s.coh),
            mean_len: mean_of(&stats, |s| s.temporal.len() as f64),
            mean_tau: mean_of(&stats, |s| s.tau),
            grad_norm: norms.iter().sum::<f64>() / norms.len() as f64,
        });
        log.batch_grad_norms.extend(norms);
        if let Some(dir) = out_dir {
            save_checkpoint(trainer.params(), &dir.join(format!("epoch_{epoch:03}.ckpt")))?;
        }
    }
    if let Some(dir) = out_dir {
        save_checkpoint(trainer.params(), &dir.join("final.ckpt"))?;
        log.write_csv(&dir.join("train_log.csv"))?;
    }
    Ok(TrainOutcome {
        params: trainer.into_params(),
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ImportanceLabel, PplMap, Segment};
    use crate::policy::PolicyConfig;

    /// Two 5 s segments under T = 5: exactly one fits, the first is worth more.
    fn bandit() -> Instance {
        let segments = [4u8, 1]
            .iter()
            .enumerate()
            .map(|(i, &l)| Segment {
                index: i,
                duration_s: 5.0,
                features: vec![1.0, -1.0 + i as f64],
                labels: vec![ImportanceLabel::new(l).unwrap()],
                text: None,
            })
            .collect();
        let mut ppl = PplMap::new();
        ppl.insert(0, 1, 1.0).unwrap();
        Instance::new("bandit", segments, ppl, None, false).unwrap()
    }

    fn first_choice_prob(params: &PolicyParams, inst: &Instance) -> f64 {
        let mut g = PolicyGraph::new(params);
        let enc = g.encode(inst).unwrap();
        let start = g.start_token();
        let out = g.decode_step(&enc, enc.init_state, start, &[false, false]).unwrap();
        g.tape.value(out.probs)[0]
    }

    #[test]
    fn zero_advantage_leaves_params_unchanged() {
        // K = 1 and a fresh baseline make every advantage exactly zero.
        let inst = bandit();
        let params = PolicyParams::init(PolicyConfig::with_dims(2, 4, 3, 1), 1).unwrap();
        let cfg = TrainConfig {
            episodes: 1,
            ..TrainConfig::desk(5.0)
        };
        let mut trainer = Trainer::new(params.clone(), cfg).unwrap();
        let stats = trainer.reinforce_step(&[&inst]).unwrap();
        assert_eq!(stats.grad_norm, 0.0);
        assert!(stats.episodes.iter().all(|e| e.advantage == 0.0));
        assert_eq!(trainer.params(), &params);
    }

    #[test]
    fn bandit_probability_rises_monotonically() {
        let inst = bandit();
        let params = PolicyParams::init(PolicyConfig::with_dims(2, 4, 3, 1), 2).unwrap();
        let cfg = TrainConfig {
            episodes: 8,
            lr: 1e-2,
            ..TrainConfig::desk(5.0)
        };
        let mut trainer = Trainer::new(params, cfg).unwrap();
        let mut prev = first_choice_prob(trainer.params(), &inst);
        let start = prev;
        for _ in 0..50 {
            trainer.reinforce_step(&[&inst]).unwrap();
            let p = first_choice_prob(trainer.params(), &inst);
            assert!(p >= prev - 1e-9, "probability fell from {prev} to {p}");
            prev = p;
        }
        assert!(prev > start + 0.2, "{start} -> {prev}");
    }

    #[test]
    fn episode_rewards_match_scoring() {
        let inst = bandit();
        let params = PolicyParams::init(PolicyConfig::with_dims(2, 4, 3, 1), 3).unwrap();
        let cfg = TrainConfig::desk(5.0);
        let mut trainer = Trainer::new(params, cfg).unwrap();
        let stats = trainer.reinforce_step(&[&inst]).unwrap();
        for ep in &stats.episodes {
            let sel = crate::model::Selection::new(&inst, ep.temporal.clone(), "policy").unwrap();
            let r = crate::scoring::composite_reward(&inst, &sel, &cfg.reward).unwrap();
            assert!((r - ep.reward).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let ok = TrainConfig::desk(10.0);
        assert!(ok.validate().is_ok());
        assert!(TrainConfig { episodes: 0, ..ok }.validate().is_err());
        assert!(TrainConfig { lr: 0.0, ..ok }.validate().is_err());
        assert!(TrainConfig { baseline_decay: 1.0, ..ok }.validate().is_err());
        assert!(train(&[], PolicyParams::init(PolicyConfig::desk(2), 0).unwrap(), &ok, None).is_err());
    }

    #[test]
    fn log_csv_has_header() {
        let log = TrainLog {
            epochs: vec![EpochStats {
                epoch: 1,
                mean_reward: 0.5,
                mean_imp: 0.6,
                mean_coh: 0.4,
                mean_len: 3.0,
                mean_tau: 9.5,
                grad_norm: 0.1,
            }],
            batch_grad_norms: vec![0.1],
        };
        let csv = log.to_csv().unwrap();
        assert!(csv.starts_with("epoch,mean_reward,mean_imp,mean_coh,mean_len,mean_tau,grad_norm\n1,0.5,"));
    }
}
