//! Non-learned selection algorithms: two random baselines, graph search with
//! duration pruning (SAM), and an exhaustive oracle.
//!
//! SAM and the oracle score candidates through the same routine in the same
//! summation order, so equal subsets compare bit-for-bit and the shared
//! tie-break (fewer segments, then lexicographically smaller) is exact.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sum_objective, DurationWindow, Instance, Selection};
use crate::scoring::{annotation_score, exp_neg_ppl, reward_breakdown, RewardConfig};
use crate::seeding::{hash_str, rng_for};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    /// Total importance plus adjacent-pair coherence.
    Eq1Sum,
    /// Composite training reward.
    RewardMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CohSource {
    ExpNegPpl,
    Annotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Random,
    RandomCut,
    Sam,
    Oracle,
    Policy,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Random,
        Method::RandomCut,
        Method::Sam,
        Method::Oracle,
        Method::Policy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::RandomCut => "random-cut",
            Method::Sam => "sam",
            Method::Oracle => "oracle",
            Method::Policy => "policy",
        }
    }

    /// Whether the method forces the last segment unless told otherwise.
    pub fn forces_end_by_default(self) -> bool {
        matches!(self, Method::Sam | Method::Oracle | Method::Policy)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub seed: u64,
    pub max_retries: usize,
    /// `None` uses the method default: off for the random baselines, the
    /// instance's own flag for search and the policy.
    pub force_end_segment: Option<bool>,
    pub objective_mode: ObjectiveMode,
    pub coh_source: CohSource,
    pub reward: RewardConfig,
    pub oracle_cap: usize,
    /// Duration pruning in SAM's depth-first search.
    pub prune: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed: 0,
            max_retries: 1000,
            force_end_segment: None,
            objective_mode: ObjectiveMode::Eq1Sum,
            coh_source: CohSource::ExpNegPpl,
            reward: RewardConfig::default(),
            oracle_cap: 22,
            prune: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_retries == 0 {
            return Err(Error::Config("max_retries must be at least 1".into()));
        }
        self.reward.validate()
    }

    pub fn forces_end(&self, method: Method, inst: &Instance) -> bool {
        self.force_end_segment.unwrap_or_else(|| {
            method.forces_end_by_default() && inst.force_end_segment()
        })
    }

    /// Pair coherence under the configured source.
    pub fn pair_coherence(&self, inst: &Instance, i: usize, j: usize) -> Result<f64> {
        match self.coh_source {
            CohSource::ExpNegPpl => exp_neg_ppl(inst, i, j),
            CohSource::Annotation => annotation_score(inst, i, j),
        }
    }

    /// Objective of a sorted index list under `objective_mode`, ignoring the window.
    pub fn score_temporal(&self, inst: &Instance, temporal: &[usize]) -> Result<f64> {
        match self.objective_mode {
            ObjectiveMode::Eq1Sum => {
                sum_objective(inst, temporal, &self.reward, |i, j| self.pair_coherence(inst, i, j))
            }
            ObjectiveMode::RewardMean => Ok(reward_breakdown(inst, temporal, &self.reward)?.reward),
        }
    }

    /// Objective of a selection; `None` when its duration misses the window.
    pub fn objective(
        &self,
        inst: &Instance,
        sel: &Selection,
        window: &DurationWindow,
    ) -> Result<Option<f64>> {
        sel.check_against(inst)?;
        if !window.contains(sel.total_duration_s) {
            return Ok(None);
        }
        self.score_temporal(inst, &sel.temporal).map(Some)
    }
}

fn infeasible(inst: &Instance, reason: impl Into<String>) -> Error {
    Error::Infeasible {
        instance: inst.id().to_owned(),
        reason: reason.into(),
    }
}

/// Picks `r ~ U[1, M]` segments uniformly at random, ignoring the window.
pub fn solve_random(inst: &Instance, _window: &DurationWindow, cfg: &SolverConfig) -> Result<Selection> {
    let mut rng = rng_for(cfg.seed, &[hash_str("random"), hash_str(inst.id())]);
    let m = inst.len();
    let r = rng.random_range(1..=m);
    let indices = if cfg.forces_end(Method::Random, inst) {
        let end = inst.end_index();
        let mut picked = vec![end];
        picked.extend(index::sample(&mut rng, end, r - 1));
        picked
    } else {
        index::sample(&mut rng, m, r).into_vec()
    };
    Selection::new(inst, indices, Method::Random.as_str())
}

/// Adds random unselected segments until the duration enters the window,
/// restarting whenever it overshoots.
pub fn solve_random_cut(inst: &Instance, window: &DurationWindow, cfg: &SolverConfig) -> Result<Selection> {
    cfg.validate()?;
    let mut rng = rng_for(cfg.seed, &[hash_str("random-cut"), hash_str(inst.id())]);
    let force = cfg.forces_end(Method::RandomCut, inst);
    let end = inst.end_index();
    for _ in 0..cfg.max_retries {
        let mut picked = Vec::new();
        let mut pool: Vec<usize> = (0..inst.len()).collect();
        let mut tau = 0.0;
        if force {
            pool.retain(|&i| i != end);
            picked.push(end);
            tau += inst.duration(end);
        }
        loop {
            if window.contains(tau) {
                return Selection::new(inst, picked, Method::RandomCut.as_str());
            }
            if tau > window.t_max_s || pool.is_empty() {
                break;
            }
            let next = pool.swap_remove(rng.random_range(0..pool.len()));
            picked.push(next);
            tau = source_order_duration(inst, &picked);
        }
    }
    Err(infeasible(
        inst,
        format!("random-cut found no feasible subset in {} attempts", cfg.max_retries),
    ))
}

/// Duration summed in source order, matching [`Selection::new`] bit for bit.
fn source_order_duration(inst: &Instance, picked: &[usize]) -> f64 {
    let mut sorted = picked.to_vec();
    sorted.sort_unstable();
    sorted.iter().map(|&i| inst.duration(i)).sum()
}

#[derive(Debug, Clone)]
struct Candidate {
    value: f64,
    temporal: Vec<usize>,
}

/// Total order: higher value, then fewer segments, then lexicographically smaller.
fn compare(a: &Candidate, b: &Candidate) -> Ordering {
    a.value
        .total_cmp(&b.value)
        .then_with(|| b.temporal.len().cmp(&a.temporal.len()))
        .then_with(|| b.temporal.cmp(&a.temporal))
}

fn keep_best(best: &mut Option<Candidate>, cand: Candidate) {
    match best {
        Some(b) if compare(&cand, b) != Ordering::Greater => {}
        _ => *best = Some(cand),
    }
}

struct Search<'a> {
    inst: &'a Instance,
    window: &'a DurationWindow,
    cfg: &'a SolverConfig,
    require: Option<usize>,
    path: Vec<usize>,
    best: Option<Candidate>,
}

impl Search<'_> {
    fn visit(&mut self, start: usize, tau: f64) -> Result<()> {
        for next in start..self.inst.len() {
            let tau_next = tau + self.inst.duration(next);
            if self.cfg.prune && tau_next > self.window.t_max_s {
                continue;
            }
            self.path.push(next);
            let admissible = self.require.is_none_or(|r| self.path.contains(&r));
            if admissible && self.window.contains(tau_next) {
                let value = self.cfg.score_temporal(self.inst, &self.path)?;
                keep_best(
                    &mut self.best,
                    Candidate {
                        value,
                        temporal: self.path.clone(),
                    },
                );
            }
            self.visit(next + 1, tau_next)?;
            self.path.pop();
        }
        Ok(())
    }
}

/// Exact depth-first search over increasing index paths (SAM).
pub fn solve_sam(inst: &Instance, window: &DurationWindow, cfg: &SolverConfig) -> Result<Selection> {
    cfg.validate()?;
    let mut search = Search {
        inst,
        window,
        cfg,
        require: cfg.forces_end(Method::Sam, inst).then(|| inst.end_index()),
        path: Vec::new(),
        best: None,
    };
    search.visit(0, 0.0)?;
    let best = search
        .best
        .ok_or_else(|| infeasible(inst, "no path meets the duration window"))?;
    Selection::new(inst, best.temporal, Method::Sam.as_str())
}

/// Exhaustive enumeration of all subsets; refuses instances above `oracle_cap`.
pub fn solve_oracle(inst: &Instance, window: &DurationWindow, cfg: &SolverConfig) -> Result<Selection> {
    cfg.validate()?;
    let m = inst.len();
    if m > cfg.oracle_cap || m >= 63 {
        return Err(Error::OracleTooLarge {
            segments: m,
            cap: cfg.oracle_cap,
        });
    }
    let required: u64 = if cfg.forces_end(Method::Oracle, inst) {
        1 << inst.end_index()
    } else {
        0
    };
    let durations: Vec<f64> = inst.segments().iter().map(|s| s.duration_s).collect();
    let best = (1u64..1u64 << m)
        .into_par_iter()
        .filter(|mask| mask & required == required)
        .map(|mask| -> Result<Option<Candidate>> {
            let mut tau = 0.0;
            for (i, d) in durations.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    tau += d;
                }
            }
            if !window.contains(tau) {
                return Ok(None);
            }
            let temporal: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let value = cfg.score_temporal(inst, &temporal)?;
            Ok(Some(Candidate { value, temporal }))
        })
        .try_fold(
            || None,
            |mut best, cand| {
                if let Some(c) = cand? {
                    keep_best(&mut best, c);
                }
                Ok::<_, Error>(best)
            },
        )
        .try_reduce(
            || None,
            |a, b| {
                Ok(match (a, b) {
                    (Some(a), Some(b)) => Some(if compare(&b, &a) == Ordering::Greater { b } else { a }),
                    (a, None) => a,
                    (None, b) => b,
                })
            },
        )?;
    let best = best.ok_or_else(|| infeasible(inst, "no subset meets the duration window"))?;
    Selection::new(inst, best.temporal, Method::Oracle.as_str())
}

/// Dispatches to a non-learned solver. The policy is handled by [`crate::policy`].
pub fn solve(method: Method, inst: &Instance, window: &DurationWindow, cfg: &SolverConfig) -> Result<Selection> {
    match method {
        Method::Random => solve_random(inst, window, cfg),
        Method::RandomCut => solve_random_cut(inst, window, cfg),
        Method::Sam => solve_sam(inst, window, cfg),
        Method::Oracle => solve_oracle(inst, window, cfg),
        Method::Policy => Err(Error::Config(
            "the policy needs a checkpoint; use policy::solve_policy".into(),
        )),
    }
}
