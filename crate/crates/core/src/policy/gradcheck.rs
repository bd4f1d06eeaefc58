//! Finite-difference check of the full policy-gradient surrogate loss.

use super::{replay_on_graph, PolicyConfig, PolicyGraph, PolicyParams, RolloutOptions, SampleMode};
use crate::autodiff::gradcheck::{central_difference, max_relative_error, CheckReport, FLOOR, STEP};
use crate::error::Result;
use crate::model::{DurationWindow, ImportanceLabel, Instance, PplMap, Segment};

/// Four 1 s segments whose features depend on position.
pub fn fixture(feature_dim: usize) -> Instance {
    let segments = (0..4)
        .map(|i| Segment {
            index: i,
            duration_s: 1.0 + 0.25 * i as f64,
            features: (0..feature_dim)
                .map(|k| ((i * 5 + k * 3) % 7) as f64 / 7.0 - 0.4)
                .collect(),
            labels: vec![ImportanceLabel::new(1 + i as u8).expect("level in range")],
            text: None,
        })
        .collect();
    let mut ppl = PplMap::new();
    for i in 0..4 {
        for j in i + 1..4 {
            ppl.insert(i, j, 0.5 * (j - i) as f64).expect("ordered pair");
        }
    }
    Instance::new("gradcheck", segments, ppl, None, true).expect("valid fixture")
}

/// Replayed episodes and their advantages; the end segment is forced first.
const EPISODES: [(&[usize], f64); 3] = [(&[1, 0, 2], 0.7), (&[0], -0.4), (&[2, 1], 0.25)];

fn surrogate(params: &PolicyParams, inst: &Instance, window: &DurationWindow) -> Result<(f64, Vec<f64>)> {
    let opts = RolloutOptions {
        sample_mode: SampleMode::Greedy,
        feasibility_mask: params.config().feasibility_mask,
        force_end_segment: true,
    };
    let mut graph = PolicyGraph::new(params);
    let mut terms = Vec::new();
    for (actions, adv) in EPISODES {
        let (_, logprobs) = replay_on_graph(&mut graph, inst, window, opts, actions)?;
        let stacked = graph.tape.concat_rows(&logprobs)?;
        let total = graph.tape.sum(stacked);
        terms.push(graph.tape.scale(total, -adv / EPISODES.len() as f64));
    }
    let stacked = graph.tape.concat_rows(&terms)?;
    let loss = graph.tape.sum(stacked);
    let value = graph.tape.scalar(loss);
    graph.tape.backward(loss)?;
    Ok((value, graph.gradients().concat()))
}

fn with_flat(params: &PolicyParams, flat: &[f64]) -> PolicyParams {
    let mut p = params.clone();
    let mut offset = 0;
    for block in p.blocks_mut() {
        let n = block.values.len();
        block.values.copy_from_slice(&flat[offset..offset + n]);
        offset += n;
    }
    p
}

/// Analytic vs central-difference gradient of the surrogate loss on the
/// 4-segment fixture. `max_coords` evenly subsamples the parameters.
pub fn surrogate_loss_check(cfg: PolicyConfig, seed: u64, max_coords: Option<usize>) -> Result<CheckReport> {
    let params = PolicyParams::init(cfg, seed)?;
    let inst = fixture(cfg.feature_dim);
    let window = DurationWindow::new(10.0)?;
    let (_, analytic) = surrogate(&params, &inst, &window)?;
    let flat: Vec<f64> = params.blocks().iter().flat_map(|b| b.values.iter().copied()).collect();
    let n = flat.len();
    let coords: Vec<usize> = match max_coords {
        Some(k) if k < n => (0..k).map(|i| i * n / k).collect(),
        _ => (0..n).collect(),
    };
    let f = |x: &[f64]| {
        surrogate(&with_flat(&params, x), &inst, &window)
            .map(|(v, _)| v)
            .unwrap_or(f64::NAN)
    };
    let numeric = central_difference(&f, &flat, &coords, STEP);
    let picked: Vec<f64> = coords.iter().map(|&i| analytic[i]).collect();
    Ok(CheckReport {
        name: format!("surrogate_loss[{}]", if cfg.glimpse { "glimpse" } else { "no-glimpse" }),
        coords: coords.len(),
        max_rel_err: max_relative_error(&picked, &numeric, FLOOR),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_policy_loss_matches_on_every_coordinate() {
        let cfg = PolicyConfig::with_dims(3, 4, 2, 2);
        let r = surrogate_loss_check(cfg, 5, None).unwrap();
        assert!(r.passed(), "{r:?}");
        let plain = PolicyConfig { glimpse: false, ..cfg };
        let r = surrogate_loss_check(plain, 5, None).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
