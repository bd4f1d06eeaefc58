//! Rewards used during training and the duration-gated evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{temporal_pairs, DurationWindow, ImportanceLabel, Instance, Segment, Selection};

/// How label weights are chosen when a label carries no explicit weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightScheme {
    /// Every group uses `w_default`.
    #[default]
    Uniform,
    /// Group `l` uses `(l / 4)^4`.
    FourthPower,
}

/// Value of the coherence reward for selections with at most one segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyCoherence {
    #[default]
    Zero,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub beta: f64,
    pub w_default: f64,
    pub weight_scheme: WeightScheme,
    pub empty_coherence: EmptyCoherence,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            beta: 0.5,
            w_default: 0.25,
            weight_scheme: WeightScheme::Uniform,
            empty_coherence: EmptyCoherence::Zero,
        }
    }
}

impl RewardConfig {
    pub fn with_beta(beta: f64) -> Result<Self> {
        let cfg = RewardConfig {
            beta,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Config(format!("beta {} outside [0, 1]", self.beta)));
        }
        if !(self.w_default > 0.0 && self.w_default.is_finite()) {
            return Err(Error::Config(format!(
                "default label weight {} must be positive",
                self.w_default
            )));
        }
        Ok(())
    }

    pub fn label_weight(&self, label: &ImportanceLabel) -> f64 {
        label.group_weight.unwrap_or(match self.weight_scheme {
            WeightScheme::Uniform => self.w_default,
            WeightScheme::FourthPower => (f64::from(label.level) / 4.0).powi(4),
        })
    }
}

/// Weighted mean of a segment's label levels. Unlabeled segments score 0.
pub fn segment_importance(seg: &Segment, cfg: &RewardConfig) -> f64 {
    if seg.labels.is_empty() {
        return 0.0;
    }
    let total: f64 = seg
        .labels
        .iter()
        .map(|l| cfg.label_weight(l) * f64::from(l.level))
        .sum();
    total / seg.labels.len() as f64
}

/// Indices of segments that carry no labels (they score importance 0).
pub fn unlabeled_segments(inst: &Instance) -> Vec<usize> {
    inst.segments()
        .iter()
        .filter(|s| s.labels.is_empty())
        .map(|s| s.index)
        .collect()
}

pub fn importance_reward(inst: &Instance, sel: &Selection, cfg: &RewardConfig) -> f64 {
    mean_importance(inst, &sel.temporal, cfg)
}

pub(crate) fn mean_importance(inst: &Instance, temporal: &[usize], cfg: &RewardConfig) -> f64 {
    if temporal.is_empty() {
        return 0.0;
    }
    let total: f64 = temporal
        .iter()
        .map(|&i| segment_importance(&inst.segments()[i], cfg))
        .sum();
    total / temporal.len() as f64
}

pub fn coherence_reward(inst: &Instance, sel: &Selection, cfg: &RewardConfig) -> Result<f64> {
    ppl_coherence(inst, &sel.temporal, cfg)
}

pub(crate) fn ppl_coherence(inst: &Instance, temporal: &[usize], cfg: &RewardConfig) -> Result<f64> {
    if temporal.len() <= 1 {
        return Ok(match cfg.empty_coherence {
            EmptyCoherence::Zero => 0.0,
            EmptyCoherence::One => 1.0,
        });
    }
    let mut total = 0.0;
    for (i, j) in temporal_pairs(temporal) {
        total += inst.ppl().get(i, j).ok_or(Error::MissingPpl(i, j))?;
    }
    Ok((-total / (temporal.len() - 1) as f64).exp())
}

/// `beta * R_imp + (1 - beta) * R_coh`.
pub fn composite_reward(inst: &Instance, sel: &Selection, cfg: &RewardConfig) -> Result<f64> {
    Ok(reward_breakdown(inst, &sel.temporal, cfg)?.reward)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardBreakdown {
    pub reward: f64,
    pub imp: f64,
    pub coh: f64,
}

pub fn reward_breakdown(
    inst: &Instance,
    temporal: &[usize],
    cfg: &RewardConfig,
) -> Result<RewardBreakdown> {
    let imp = mean_importance(inst, temporal, cfg);
    let coh = ppl_coherence(inst, temporal, cfg)?;
    Ok(RewardBreakdown {
        reward: cfg.beta * imp + (1.0 - cfg.beta) * coh,
        imp,
        coh,
    })
}

/// `exp(-PPL(i, j))`, the pair coherence used by graph search.
pub fn exp_neg_ppl(inst: &Instance, i: usize, j: usize) -> Result<f64> {
    inst.ppl()
        .get(i, j)
        .map(|p| (-p).exp())
        .ok_or(Error::MissingPpl(i, j))
}

/// Annotated pair score; unannotated pairs count as uncertain.
pub fn annotation_score(inst: &Instance, i: usize, j: usize) -> Result<f64> {
    let ann = inst.annotations().ok_or_else(|| {
        Error::MetricUnavailable(format!("instance `{}` has no coherence annotations", inst.id()))
    })?;
    Ok(ann.get(i, j).map_or(0.5, |c| c.score()))
}

/// Importance metric at unit scale (0 when the duration misses the window).
pub fn imp_at_t(inst: &Instance, sel: &Selection, window: &DurationWindow, cfg: &RewardConfig) -> f64 {
    if !window.contains(sel.total_duration_s) {
        return 0.0;
    }
    importance_reward(inst, sel, cfg)
}

/// Mean annotated coherence of adjacent pairs, without the duration gate.
fn mean_annotated_coherence(inst: &Instance, sel: &Selection) -> Result<f64> {
    if inst.annotations().is_none() {
        return Err(Error::MetricUnavailable(format!(
            "instance `{}` has no coherence annotations",
            inst.id()
        )));
    }
    if sel.len() <= 1 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (i, j) in temporal_pairs(&sel.temporal) {
        total += annotation_score(inst, i, j)?;
    }
    Ok(total / (sel.len() - 1) as f64)
}

/// Coherence metric at unit scale.
pub fn coh_at_t(inst: &Instance, sel: &Selection, window: &DurationWindow) -> Result<f64> {
    let coh = mean_annotated_coherence(inst, sel)?;
    Ok(if window.contains(sel.total_duration_s) { coh } else { 0.0 })
}

/// Per-instance metrics, scaled by 100.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub imp: f64,
    pub coh: f64,
    pub overall: f64,
    pub feasible: bool,
}

impl MetricReport {
    pub const ZERO: MetricReport = MetricReport {
        imp: 0.0,
        coh: 0.0,
        overall: 0.0,
        feasible: false,
    };
}

pub fn impcoh_at_t(
    inst: &Instance,
    sel: &Selection,
    window: &DurationWindow,
    cfg: &RewardConfig,
) -> Result<MetricReport> {
    sel.check_against(inst)?;
    let coh = mean_annotated_coherence(inst, sel)?;
    if !window.contains(sel.total_duration_s) {
        return Ok(MetricReport::ZERO);
    }
    let imp = importance_reward(inst, sel, cfg);
    Ok(MetricReport {
        imp: imp * 100.0,
        coh: coh * 100.0,
        overall: imp * coh * 100.0,
        feasible: true,
    })
}

/// Dataset-level mean of per-instance reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub imp: f64,
    pub coh: f64,
    pub overall: f64,
    pub feasible_rate: f64,
    pub count: usize,
}

pub fn summarize(reports: &[MetricReport]) -> MetricSummary {
    let n = reports.len();
    if n == 0 {
        return MetricSummary {
            imp: 0.0,
            coh: 0.0,
            overall: 0.0,
            feasible_rate: 0.0,
            count: 0,
        };
    }
    let mean = |f: fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / n as f64;
    MetricSummary {
        imp: mean(|r| r.imp),
        coh: mean(|r| r.coh),
        overall: mean(|r| r.overall),
        feasible_rate: mean(|r| if r.feasible { 1.0 } else { 0.0 }),
        count: n,
    }
}
