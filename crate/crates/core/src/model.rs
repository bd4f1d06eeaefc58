//! Domain types shared by every solver, the policy and the trainer.
//!
//! An [`Instance`] is an already-segmented ad video: an ordered list of
//! [`Segment`]s together with the pairwise PPL table and, for evaluation
//! instances, human coherence annotations. Solvers produce [`Selection`]s,
//! which are always scored in source (temporal) order.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{segment_importance, RewardConfig};

/// A narrative-technique label, reduced to its group level and weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImportanceLabel {
    pub level: u8,
    /// Per-label weight override. `None` defers to the reward config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_weight: Option<f64>,
}

impl ImportanceLabel {
    pub fn new(level: u8) -> Result<Self> {
        Self::build(level, None)
    }

    pub fn weighted(level: u8, group_weight: f64) -> Result<Self> {
        Self::build(level, Some(group_weight))
    }

    fn build(level: u8, group_weight: Option<f64>) -> Result<Self> {
        let label = ImportanceLabel {
            level,
            group_weight,
        };
        label.validate()?;
        Ok(label)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.level) {
            return Err(Error::InvalidInstance(format!(
                "label level {} outside 1..=4",
                self.level
            )));
        }
        if let Some(w) = self.group_weight {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidInstance(format!(
                    "label group weight {w} must be positive"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub index: usize,
    pub duration_s: f64,
    pub features: Vec<f64>,
    pub labels: Vec<ImportanceLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

/// Sparse PPL table over order-preserving pairs `(i, j)` with `i < j`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PplMap {
    entries: BTreeMap<(usize, usize), f64>,
}

impl PplMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i >= j {
            return Err(Error::InvalidInstance(format!(
                "PPL key ({i}, {j}) violates source order"
            )));
        }
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "PPL value {value} at ({i}, {j}) must be finite and >= 0"
            )));
        }
        self.entries.insert((i, j), value);
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries.get(&(i, j)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoherenceClass {
    Coherent,
    Uncertain,
    Incoherent,
}

impl CoherenceClass {
    /// Pair score used by the coherence metric.
    pub fn score(self) -> f64 {
        match self {
            CoherenceClass::Coherent => 1.0,
            CoherenceClass::Uncertain => 0.5,
            CoherenceClass::Incoherent => 0.0,
        }
    }
}

impl fmt::Display for CoherenceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CoherenceClass::Coherent => "coherent",
            CoherenceClass::Uncertain => "uncertain",
            CoherenceClass::Incoherent => "incoherent",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoherenceAnnotation {
    entries: BTreeMap<(usize, usize), CoherenceClass>,
}

impl CoherenceAnnotation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, i: usize, j: usize, class: CoherenceClass) -> Result<()> {
        if i >= j {
            return Err(Error::InvalidInstance(format!(
                "annotation key ({i}, {j}) violates source order"
            )));
        }
        self.entries.insert((i, j), class);
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<CoherenceClass> {
        self.entries.get(&(i, j)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), CoherenceClass)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }
}

/// One segmented video: the unit of optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    id: String,
    segments: Vec<Segment>,
    ppl: PplMap,
    annotations: Option<CoherenceAnnotation>,
    force_end_segment: bool,
}

impl Instance {
    pub fn new(
        id: impl Into<String>,
        segments: Vec<Segment>,
        ppl: PplMap,
        annotations: Option<CoherenceAnnotation>,
        force_end_segment: bool,
    ) -> Result<Self> {
        let inst = Instance {
            id: id.into(),
            segments,
            ppl,
            annotations,
            force_end_segment,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::invalid("segments", "instance has no segments"));
        }
        let dim = self.segments[0].features.len();
        for (pos, seg) in self.segments.iter().enumerate() {
            let path = format!("segments[{pos}]");
            if seg.index != pos {
                return Err(Error::invalid(
                    path,
                    format!("index {} out of sequence (expected {pos})", seg.index),
                ));
            }
            if !(seg.duration_s > 0.0 && seg.duration_s.is_finite()) {
                return Err(Error::invalid(
                    path,
                    format!("duration_s {} must be positive", seg.duration_s),
                ));
            }
            if seg.features.len() != dim {
                return Err(Error::invalid(
                    path,
                    format!("feature dimension {} differs from {dim}", seg.features.len()),
                ));
            }
            if seg.features.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(path, "non-finite feature value"));
            }
            for (k, label) in seg.labels.iter().enumerate() {
                label
                    .validate()
                    .map_err(|e| Error::invalid(format!("segments[{pos}].labels[{k}]"), e.to_string()))?;
            }
        }
        let m = self.segments.len();
        for ((i, j), _) in self.ppl.iter() {
            if j >= m {
                return Err(Error::invalid(
                    "ppl",
                    format!("key ({i}, {j}) references a segment beyond {}", m - 1),
                ));
            }
        }
        if let Some(ann) = &self.annotations {
            for ((i, j), _) in ann.iter() {
                if j >= m {
                    return Err(Error::invalid(
                        "annotations",
                        format!("key ({i}, {j}) references a segment beyond {}", m - 1),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment(&self, index: usize) -> Option<&Segment> {
        self.segments.get(index)
    }

    /// Number of segments.
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.segments[0].features.len()
    }

    pub fn ppl(&self) -> &PplMap {
        &self.ppl
    }

    pub fn annotations(&self) -> Option<&CoherenceAnnotation> {
        self.annotations.as_ref()
    }

    pub fn force_end_segment(&self) -> bool {
        self.force_end_segment
    }

    pub fn end_index(&self) -> usize {
        self.segments.len() - 1
    }

    pub fn duration(&self, index: usize) -> f64 {
        self.segments[index].duration_s
    }

    /// Same instance with annotations removed.
    pub fn without_annotations(&self) -> Instance {
        Instance {
            annotations: None,
            ..self.clone()
        }
    }
}

/// Accepted duration interval `[c1 * T, c2 * T]` around a target `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DurationWindow {
    pub target_s: f64,
    pub t_min_s: f64,
    pub t_max_s: f64,
    pub c1: f64,
    pub c2: f64,
}

impl DurationWindow {
    pub const DEFAULT_C1: f64 = 0.8;
    pub const DEFAULT_C2: f64 = 1.2;

    pub fn new(target_s: f64) -> Result<Self> {
        Self::with_factors(target_s, Self::DEFAULT_C1, Self::DEFAULT_C2)
    }

    pub fn with_factors(target_s: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(target_s > 0.0 && target_s.is_finite()) {
            return Err(Error::Config(format!("target duration {target_s} must be positive")));
        }
        if !(c1 > 0.0 && c1 <= c2 && c2.is_finite()) {
            return Err(Error::Config(format!("window factors need 0 < c1 <= c2, got {c1}, {c2}")));
        }
        Ok(DurationWindow {
            target_s,
            t_min_s: c1 * target_s,
            t_max_s: c2 * target_s,
            c1,
            c2,
        })
    }

    pub fn contains(&self, tau: f64) -> bool {
        self.t_min_s <= tau && tau <= self.t_max_s
    }
}

/// A duplicate-free subset of segments, kept in both selection and source order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub instance_id: String,
    pub indices: Vec<usize>,
    pub temporal: Vec<usize>,
    pub total_duration_s: f64,
    pub solver: String,
}

impl Selection {
    pub fn new(inst: &Instance, indices: Vec<usize>, solver: impl Into<String>) -> Result<Self> {
        let m = inst.len();
        let mut temporal = indices.clone();
        temporal.sort_unstable();
        if let Some(&bad) = temporal.iter().find(|&&i| i >= m) {
            return Err(Error::InvalidSelection(format!(
                "index {bad} out of range for {m} segments"
            )));
        }
        if temporal.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSelection(format!(
                "duplicate index in {indices:?}"
            )));
        }
        let total_duration_s = temporal.iter().map(|&i| inst.duration(i)).sum();
        Ok(Selection {
            instance_id: inst.id().to_owned(),
            indices,
            temporal,
            total_duration_s,
            solver: solver.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.temporal.binary_search(&index).is_ok()
    }

    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        adjacent_pairs(self)
    }

    /// Checks that this selection belongs to `inst` and only names its segments.
    pub fn check_against(&self, inst: &Instance) -> Result<()> {
        if self.instance_id != inst.id() {
            return Err(Error::InvalidSelection(format!(
                "selection for `{}` applied to `{}`",
                self.instance_id,
                inst.id()
            )));
        }
        if let Some(&bad) = self.temporal.iter().find(|&&i| i >= inst.len()) {
            return Err(Error::InvalidSelection(format!(
                "unknown segment index {bad}"
            )));
        }
        Ok(())
    }
}

/// Consecutive pairs of the selection in source order.
pub fn adjacent_pairs(sel: &Selection) -> Vec<(usize, usize)> {
    temporal_pairs(&sel.temporal).collect()
}

pub(crate) fn temporal_pairs(temporal: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    temporal.windows(2).map(|w| (w[0], w[1]))
}

/// Sum-form assemblage objective: total importance plus adjacent-pair coherence.
///
/// Returns `Ok(None)` when the selection's duration falls outside `window`.
pub fn objective_eq1<F>(
    inst: &Instance,
    sel: &Selection,
    window: &DurationWindow,
    cfg: &RewardConfig,
    coh_fn: F,
) -> Result<Option<f64>>
where
    F: Fn(usize, usize) -> Result<f64>,
{
    sel.check_against(inst)?;
    if !window.contains(sel.total_duration_s) {
        return Ok(None);
    }
    sum_objective(inst, &sel.temporal, cfg, coh_fn).map(Some)
}

/// Unchecked sum objective over a sorted index list. Solvers share this so
/// that equal subsets always evaluate to bit-identical values.
pub(crate) fn sum_objective<F>(
    inst: &Instance,
    temporal: &[usize],
    cfg: &RewardConfig,
    coh_fn: F,
) -> Result<f64>
where
    F: Fn(usize, usize) -> Result<f64>,
{
    let imp: f64 = temporal
        .iter()
        .map(|&i| segment_importance(&inst.segments()[i], cfg))
        .sum();
    let mut coh = 0.0;
    for (i, j) in temporal_pairs(temporal) {
        coh += coh_fn(i, j)?;
    }
    Ok(imp + coh)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy_instance(durations: &[f64]) -> Instance {
        let segments = durations
            .iter()
            .enumerate()
            .map(|(i, &d)| Segment {
                index: i,
                duration_s: d,
                features: vec![0.0; 2],
                labels: vec![ImportanceLabel::new(((i % 4) + 1) as u8).unwrap()],
                text: None,
            })
            .collect();
        let mut ppl = PplMap::new();
        for i in 0..durations.len() {
            for j in i + 1..durations.len() {
                ppl.insert(i, j, (i + j) as f64 * 0.1).unwrap();
            }
        }
        Instance::new("toy", segments, ppl, None, false).unwrap()
    }

    fn selection_with_temporal(temporal: Vec<usize>) -> Selection {
        Selection {
            instance_id: "x".into(),
            indices: temporal.clone(),
            temporal,
            total_duration_s: 0.0,
            solver: "test".into(),
        }
    }

    #[test]
    fn adjacent_pairs_follow_source_order() {
        assert_eq!(
            adjacent_pairs(&selection_with_temporal(vec![2, 5, 9])),
            vec![(2, 5), (5, 9)]
        );
        assert!(adjacent_pairs(&selection_with_temporal(vec![7])).is_empty());
        assert_eq!(
            adjacent_pairs(&selection_with_temporal(vec![0, 1])),
            vec![(0, 1)]
        );
    }

    #[test]
    fn selection_sorts_and_sums() {
        let inst = toy_instance(&[1.0, 2.0, 3.0, 4.0]);
        let sel = Selection::new(&inst, vec![3, 0, 2], "t").unwrap();
        assert_eq!(sel.temporal, vec![0, 2, 3]);
        assert_eq!(sel.total_duration_s, 8.0);
        assert!(Selection::new(&inst, vec![1, 1], "t").is_err());
        assert!(Selection::new(&inst, vec![4], "t").is_err());
    }

    #[test]
    fn window_at_ten_seconds_is_eight_to_twelve() {
        let w = DurationWindow::new(10.0).unwrap();
        assert_eq!((w.t_min_s, w.t_max_s), (8.0, 12.0));
        assert!(w.contains(8.0) && w.contains(12.0) && w.contains(9.0));
        assert!(!w.contains(13.0) && !w.contains(7.99));
        assert!(DurationWindow::with_factors(10.0, 1.3, 1.2).is_err());
        assert!(DurationWindow::new(0.0).is_err());
    }

    #[test]
    fn objective_is_infeasible_outside_window() {
        let inst = toy_instance(&[6.0, 7.0, 1.0]);
        let w = DurationWindow::new(10.0).unwrap();
        let cfg = RewardConfig::default();
        let sel = Selection::new(&inst, vec![0, 1], "t").unwrap();
        assert_eq!(sel.total_duration_s, 13.0);
        assert_eq!(objective_eq1(&inst, &sel, &w, &cfg, |_, _| Ok(1.0)).unwrap(), None);
    }

    #[test]
    fn singleton_objective_is_its_importance() {
        // levels [1, 2, 3, 4] each with weight 0.25 -> 0.625
        let labels = (1..=4).map(|l| ImportanceLabel::new(l).unwrap()).collect();
        let seg = Segment {
            index: 0,
            duration_s: 9.0,
            features: vec![],
            labels,
            text: None,
        };
        let inst = Instance::new("one", vec![seg], PplMap::new(), None, false).unwrap();
        let w = DurationWindow::new(10.0).unwrap();
        let sel = Selection::new(&inst, vec![0], "t").unwrap();
        let v = objective_eq1(&inst, &sel, &w, &RewardConfig::default(), |_, _| Ok(99.0))
            .unwrap()
            .unwrap();
        assert_eq!(v, 0.625);
    }

    #[test]
    fn foreign_selection_is_rejected() {
        let inst = toy_instance(&[1.0, 2.0]);
        let mut sel = Selection::new(&inst, vec![0], "t").unwrap();
        sel.instance_id = "other".into();
        let w = DurationWindow::new(1.0).unwrap();
        assert!(matches!(
            objective_eq1(&inst, &sel, &w, &RewardConfig::default(), |_, _| Ok(0.0)),
            Err(Error::InvalidSelection(_))
        ));
    }

    #[test]
    fn instance_validation_catches_bad_input() {
        let seg = |index, d: f64| Segment {
            index,
            duration_s: d,
            features: vec![0.0],
            labels: vec![],
            text: None,
        };
        assert!(Instance::new("e", vec![], PplMap::new(), None, false).is_err());
        assert!(Instance::new("d", vec![seg(0, 1.0), seg(0, 1.0)], PplMap::new(), None, false).is_err());
        assert!(Instance::new("n", vec![seg(0, -1.0)], PplMap::new(), None, false).is_err());
        let mut ppl = PplMap::new();
        ppl.insert(0, 5, 1.0).unwrap();
        assert!(Instance::new("p", vec![seg(0, 1.0), seg(1, 1.0)], ppl, None, false).is_err());
        assert!(PplMap::new().insert(3, 1, 1.0).is_err());
        assert!(PplMap::new().insert(1, 3, -1.0).is_err());
        assert!(ImportanceLabel::new(5).is_err());
        assert!(ImportanceLabel::weighted(2, 0.0).is_err());
    }
}
