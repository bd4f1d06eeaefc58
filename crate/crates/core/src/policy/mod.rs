//! The assemblage network: a linear embedding, a bidirectional GRU encoder, and
//! a GRU decoder that points at segments through a two-pass (glimpse) bilinear
//! attention with a selection mask.
//!
//! Every forward pass is recorded on a fresh [`Tape`] so the same code path
//! serves sampling, greedy decoding and policy-gradient training.

mod checkpoint;
pub mod gradcheck;

pub use checkpoint::{
    decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor};
use crate::error::{Error, Result};
use crate::model::{DurationWindow, Instance, Selection};
use crate::seeding::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    #[default]
    Sample,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub feature_dim: usize,
    pub embed_dim: usize,
    pub enc_hidden: usize,
    pub enc_layers: usize,
    /// Always `2 * enc_hidden`.
    pub dec_hidden: usize,
    pub sample_mode: SampleMode,
    /// Also mask segments whose addition would overflow the upper bound.
    pub feasibility_mask: bool,
    /// Two-pass attention; `false` points directly with the first attention.
    pub glimpse: bool,
}

impl PolicyConfig {
    /// Desk-scale defaults.
    pub fn desk(feature_dim: usize) -> Self {
        Self::with_dims(feature_dim, 32, 16, 1)
    }

    /// Dimensions of the full-size model.
    pub fn full_scale() -> Self {
        Self::with_dims(2432, 768, 256, 2)
    }

    pub fn with_dims(feature_dim: usize, embed_dim: usize, enc_hidden: usize, enc_layers: usize) -> Self {
        PolicyConfig {
            feature_dim,
            embed_dim,
            enc_hidden,
            enc_layers,
            dec_hidden: 2 * enc_hidden,
            sample_mode: SampleMode::Sample,
            feasibility_mask: false,
            glimpse: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 || self.embed_dim == 0 || self.enc_hidden == 0 || self.enc_layers == 0 {
            return Err(Error::Config(format!("policy dimensions must be positive: {self:?}")));
        }
        if self.dec_hidden != 2 * self.enc_hidden {
            return Err(Error::Config(format!(
                "decoder hidden {} must equal 2 * encoder hidden {}",
                self.dec_hidden, self.enc_hidden
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct GruLayout {
    w_ih: usize,
    w_hh: usize,
    b_ih: usize,
    b_hh: usize,
    hidden: usize,
}

/// Positions of each named block inside [`PolicyParams::blocks`].
#[derive(Debug, Clone)]
struct Layout {
    emb_w: usize,
    emb_b: usize,
    enc: Vec<[GruLayout; 2]>,
    init_w: usize,
    init_b: usize,
    dec: GruLayout,
    dec_start: usize,
    att1: usize,
    att2: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

impl BlockSpec {
    fn new(name: impl Into<String>, rows: usize, cols: usize) -> Self {
        BlockSpec {
            name: name.into(),
            rows,
            cols,
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn is_bias(&self) -> bool {
        self.cols == 1
    }
}

fn build_layout(cfg: &PolicyConfig) -> (Vec<BlockSpec>, Layout) {
    let mut specs = Vec::new();
    let mut add = |spec: BlockSpec| {
        specs.push(spec);
        specs.len() - 1
    };
    let (e, h, d) = (cfg.embed_dim, cfg.enc_hidden, cfg.dec_hidden);
    let emb_w = add(BlockSpec::new("emb.w", e, cfg.feature_dim));
    let emb_b = add(BlockSpec::new("emb.b", e, 1));
    let mut enc = Vec::new();
    for layer in 0..cfg.enc_layers {
        let input = if layer == 0 { e } else { 2 * h };
        let mut gru = |dir: &str| {
            let p = format!("enc.l{layer}.{dir}");
            GruLayout {
                w_ih: add(BlockSpec::new(format!("{p}.w_ih"), 3 * h, input)),
                w_hh: add(BlockSpec::new(format!("{p}.w_hh"), 3 * h, h)),
                b_ih: add(BlockSpec::new(format!("{p}.b_ih"), 3 * h, 1)),
                b_hh: add(BlockSpec::new(format!("{p}.b_hh"), 3 * h, 1)),
                hidden: h,
            }
        };
        let fwd = gru("fwd");
        let bwd = gru("bwd");
        enc.push([fwd, bwd]);
    }
    let init_w = add(BlockSpec::new("init.w", d, 2 * h));
    let init_b = add(BlockSpec::new("init.b", d, 1));
    let dec = GruLayout {
        w_ih: add(BlockSpec::new("dec.w_ih", 3 * d, e)),
        w_hh: add(BlockSpec::new("dec.w_hh", 3 * d, d)),
        b_ih: add(BlockSpec::new("dec.b_ih", 3 * d, 1)),
        b_hh: add(BlockSpec::new("dec.b_hh", 3 * d, 1)),
        hidden: d,
    };
    let dec_start = add(BlockSpec::new("dec.start", e, 1));
    let att1 = add(BlockSpec::new("att1.w", 2 * h, d));
    let att2 = cfg
        .glimpse
        .then(|| add(BlockSpec::new("att2.w", 2 * h, d + 2 * h)));
    let layout = Layout {
        emb_w,
        emb_b,
        enc,
        init_w,
        init_b,
        dec,
        dec_start,
        att1,
        att2,
    };
    (specs, layout)
}

/// Named shape list for a configuration, in storage order.
pub fn manifest(cfg: &PolicyConfig) -> Vec<BlockSpec> {
    build_layout(cfg).0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamBlock {
    pub spec: BlockSpec,
    pub values: Vec<f64>,
}

/// All learnable arrays of the network.
#[derive(Debug, Clone)]
pub struct PolicyParams {
    config: PolicyConfig,
    blocks: Vec<ParamBlock>,
    layout: Layout,
}

impl PartialEq for PolicyParams {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.blocks == other.blocks
    }
}

impl PolicyParams {
    pub fn zeros(config: PolicyConfig) -> Result<Self> {
        config.validate()?;
        let (specs, layout) = build_layout(&config);
        let blocks = specs
            .into_iter()
            .map(|spec| ParamBlock {
                values: vec![0.0; spec.len()],
                spec,
            })
            .collect();
        Ok(PolicyParams {
            config,
            blocks,
            layout,
        })
    }

    /// Glorot-uniform weights and zero biases, seeded.
    pub fn init(config: PolicyConfig, seed: u64) -> Result<Self> {
        let mut params = Self::zeros(config)?;
        let mut rng = rng_for(seed, &[0x1417]);
        for block in &mut params.blocks {
            if block.spec.is_bias() && block.spec.name != "dec.start" {
                continue;
            }
            let bound = (6.0 / (block.spec.rows + block.spec.cols) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            block.values.iter_mut().for_each(|v| *v = dist.sample(&mut rng));
        }
        Ok(params)
    }

    pub(crate) fn from_blocks(config: PolicyConfig, blocks: Vec<ParamBlock>) -> Result<Self> {
        let mut params = Self::zeros(config)?;
        if blocks.len() != params.blocks.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} blocks, found {}",
                params.blocks.len(),
                blocks.len()
            )));
        }
        for (slot, block) in params.blocks.iter_mut().zip(blocks) {
            if slot.spec != block.spec || block.values.len() != block.spec.len() {
                return Err(Error::Checkpoint(format!(
                    "block {:?} does not match manifest entry {:?}",
                    block.spec, slot.spec
                )));
            }
            if block.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Checkpoint(format!("block `{}` has non-finite values", block.spec.name)));
            }
            *slot = block;
        }
        Ok(params)
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn blocks(&self) -> &[ParamBlock] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [ParamBlock] {
        &mut self.blocks
    }

    pub fn block(&self, name: &str) -> Option<&ParamBlock> {
        self.blocks.iter().find(|b| b.spec.name == name)
    }

    pub fn block_mut(&mut self, name: &str) -> Option<&mut ParamBlock> {
        self.blocks.iter_mut().find(|b| b.spec.name == name)
    }

    pub fn num_values(&self) -> usize {
        self.blocks.iter().map(|b| b.values.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| b.values.iter().all(|v| v.is_finite()))
    }

    /// Same config with a different sampling mode or mask option.
    pub fn with_runtime(mut self, sample_mode: SampleMode, feasibility_mask: bool) -> Self {
        self.config.sample_mode = sample_mode;
        self.config.feasibility_mask = feasibility_mask;
        self
    }
}

/// Output of the encoder on a tape.
#[derive(Debug, Clone)]
pub struct Encoded {
    /// Context embeddings, `2h x M`.
    pub h: Tensor,
    /// `H` transposed, `M x 2h`.
    pub h_t: Tensor,
    /// Embedded tokens, one `E x 1` column per segment.
    pub tokens: Vec<Tensor>,
    /// Initial decoder state, `D x 1`.
    pub init_state: Tensor,
}

#[derive(Debug, Clone, Copy)]
pub struct DecodeOutput {
    /// Selection distribution over segments, `M x 1`.
    pub probs: Tensor,
    pub state: Tensor,
}

/// A forward pass of the network recorded on its own tape.
pub struct PolicyGraph<'p> {
    pub tape: Tape,
    params: &'p PolicyParams,
    bound: Vec<Tensor>,
}

impl<'p> PolicyGraph<'p> {
    pub fn new(params: &'p PolicyParams) -> Self {
        let mut tape = Tape::new();
        let bound = params
            .blocks
            .iter()
            .map(|b| {
                tape.leaf((b.spec.rows, b.spec.cols), b.values.clone())
                    .expect("block values match their spec")
            })
            .collect();
        PolicyGraph {
            tape,
            params,
            bound,
        }
    }

    pub fn params(&self) -> &PolicyParams {
        self.params
    }

    /// Tape handle of the block at `index`.
    pub fn param(&self, index: usize) -> Tensor {
        self.bound[index]
    }

    /// Per-block gradients after `tape.backward`.
    pub fn gradients(&self) -> Vec<Vec<f64>> {
        self.bound.iter().map(|&t| self.tape.grad(t)).collect()
    }

    fn linear(&mut self, w: usize, b: usize, x: Tensor) -> Result<Tensor> {
        let wx = self.tape.matmul(self.bound[w], x)?;
        self.tape.add(wx, self.bound[b])
    }

    fn gru_cell(&mut self, g: GruLayout, x: Tensor, h: Tensor) -> Result<Tensor> {
        let n = g.hidden;
        let gi = self.linear(g.w_ih, g.b_ih, x)?;
        let gh = self.linear(g.w_hh, g.b_hh, h)?;
        let t = &mut self.tape;
        let (gi_r, gi_z, gi_n) = (t.slice_rows(gi, 0, n)?, t.slice_rows(gi, n, n)?, t.slice_rows(gi, 2 * n, n)?);
        let (gh_r, gh_z, gh_n) = (t.slice_rows(gh, 0, n)?, t.slice_rows(gh, n, n)?, t.slice_rows(gh, 2 * n, n)?);
        let pre_r = t.add(gi_r, gh_r)?;
        let r = t.sigmoid(pre_r);
        let pre_z = t.add(gi_z, gh_z)?;
        let z = t.sigmoid(pre_z);
        let gated = t.mul(r, gh_n)?;
        let pre_n = t.add(gi_n, gated)?;
        let cand = t.tanh(pre_n);
        let keep = t.one_minus(z);
        let fresh = t.mul(keep, cand)?;
        let carried = t.mul(z, h)?;
        t.add(fresh, carried)
    }

    /// Single GRU step of the decoder; exposed for gradient checks.
    pub fn decoder_cell(&mut self, input: Tensor, state: Tensor) -> Result<Tensor> {
        let dec = self.params.layout.dec;
        self.gru_cell(dec, input, state)
    }

    pub fn encode(&mut self, inst: &Instance) -> Result<Encoded> {
        let cfg = self.params.config;
        if inst.feature_dim() != cfg.feature_dim {
            return Err(Error::Shape {
                op: "encode",
                left: (inst.feature_dim(), 1),
                right: (cfg.feature_dim, 1),
            });
        }
        let layout = self.params.layout.clone();
        let mut tokens = Vec::with_capacity(inst.len());
        for seg in inst.segments() {
            let s = self.tape.column(seg.features.clone());
            tokens.push(self.linear(layout.emb_w, layout.emb_b, s)?);
        }
        let m = tokens.len();
        let h = cfg.enc_hidden;
        let mut inputs = tokens.clone();
        let mut last = (None, None);
        for [fwd, bwd] in &layout.enc {
            let mut fwd_states = Vec::with_capacity(m);
            let mut state = self.tape.column(vec![0.0; h]);
            for &x in &inputs {
                state = self.gru_cell(*fwd, x, state)?;
                fwd_states.push(state);
            }
            let mut bwd_states = vec![state; m];
            let mut state = self.tape.column(vec![0.0; h]);
            for i in (0..m).rev() {
                state = self.gru_cell(*bwd, inputs[i], state)?;
                bwd_states[i] = state;
            }
            inputs = fwd_states
                .iter()
                .zip(&bwd_states)
                .map(|(&f, &b)| self.tape.concat_rows(&[f, b]))
                .collect::<Result<_>>()?;
            last = (Some(fwd_states[m - 1]), Some(bwd_states[0]));
        }
        let h_mat = self.tape.concat_cols(&inputs)?;
        let h_t = self.tape.transpose(h_mat);
        let (Some(f_last), Some(b_first)) = last else {
            unreachable!("validated configs have at least one encoder layer")
        };
        let summary = self.tape.concat_rows(&[f_last, b_first])?;
        let init_state = self.linear(layout.init_w, layout.init_b, summary)?;
        Ok(Encoded {
            h: h_mat,
            h_t,
            tokens,
            init_state,
        })
    }

    /// Learned input for the first decoder step when no segment is forced.
    pub fn start_token(&self) -> Tensor {
        self.bound[self.params.layout.dec_start]
    }

    /// Advances the decoder with `input` and returns the masked distribution.
    pub fn decode_step(&mut self, enc: &Encoded, state: Tensor, input: Tensor, blocked: &[bool]) -> Result<DecodeOutput> {
        let state = self.decoder_cell(input, state)?;
        let probs = self.attend(enc, state, blocked)?;
        Ok(DecodeOutput { probs, state })
    }

    /// Attention over encoder states from query `state`.
    pub fn attend(&mut self, enc: &Encoded, state: Tensor, blocked: &[bool]) -> Result<Tensor> {
        let layout = &self.params.layout;
        let (att1, att2) = (self.bound[layout.att1], layout.att2.map(|i| self.bound[i]));
        let t = &mut self.tape;
        let q1 = t.matmul(att1, state)?;
        let s1 = t.matmul(enc.h_t, q1)?;
        match att2 {
            Some(att2) => {
                let mu = t.softmax(s1)?;
                let context = t.matmul(enc.h, mu)?;
                let query = t.concat_rows(&[state, context])?;
                let q2 = t.matmul(att2, query)?;
                let s2 = t.matmul(enc.h_t, q2)?;
                t.masked_softmax(s2, blocked)
            }
            None => t.masked_softmax(s1, blocked),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The sampled segment would overflow the upper bound and was dropped.
    EosDuration,
    /// Every segment was selected.
    Exhausted,
}

/// One decoding step as seen by the sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTrace {
    pub probs: Vec<f64>,
    pub blocked: Vec<bool>,
    pub chosen: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub selection: Selection,
    /// Log-probability of each accepted free choice.
    pub step_logprobs: Vec<f64>,
    pub terminated_by: Termination,
    /// Every decode step, including the one that triggered EOS.
    pub steps: Vec<StepTrace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RolloutOptions {
    pub sample_mode: SampleMode,
    pub feasibility_mask: bool,
    pub force_end_segment: bool,
}

impl RolloutOptions {
    pub fn from_config(cfg: &PolicyConfig, inst: &Instance) -> Self {
        RolloutOptions {
            sample_mode: cfg.sample_mode,
            feasibility_mask: cfg.feasibility_mask,
            force_end_segment: inst.force_end_segment(),
        }
    }

    pub fn greedy(mut self) -> Self {
        self.sample_mode = SampleMode::Greedy;
        self
    }
}

fn source_order_duration(inst: &Instance, picked: &[usize]) -> f64 {
    let mut sorted = picked.to_vec();
    sorted.sort_unstable();
    sorted.iter().map(|&i| inst.duration(i)).sum()
}

fn argmax(probs: &[f64], blocked: &[bool]) -> usize {
    let mut best = None;
    for (i, (&p, &b)) in probs.iter().zip(blocked).enumerate() {
        if b {
            continue;
        }
        match best {
            Some((_, bp)) if p <= bp => {}
            _ => best = Some((i, p)),
        }
    }
    best.map(|(i, _)| i).expect("at least one position is open")
}

/// How the next action is chosen during a decode.
enum Chooser<'a, R> {
    Policy(SampleMode, &'a mut R),
    Replay(&'a [usize]),
}

struct Decoded {
    selection: Vec<usize>,
    logprobs: Vec<Tensor>,
    terminated_by: Termination,
    steps: Vec<StepTrace>,
}

fn decode<R: Rng>(
    graph: &mut PolicyGraph<'_>,
    inst: &Instance,
    window: &DurationWindow,
    opts: RolloutOptions,
    mut chooser: Chooser<'_, R>,
) -> Result<Decoded> {
    let enc = graph.encode(inst)?;
    let m = inst.len();
    let mut selected = Vec::new();
    let mut blocked = vec![false; m];
    let mut input = graph.start_token();
    if opts.force_end_segment {
        let end = inst.end_index();
        if inst.duration(end) > window.t_max_s {
            return Err(Error::Infeasible {
                instance: inst.id().to_owned(),
                reason: format!(
                    "end segment lasts {} s, above the {} s limit",
                    inst.duration(end),
                    window.t_max_s
                ),
            });
        }
        selected.push(end);
        blocked[end] = true;
        input = enc.tokens[end];
    }
    let mut state = enc.init_state;
    let mut logprobs = Vec::new();
    let mut steps = Vec::new();
    let mut replay_pos = 0;
    let terminated_by = loop {
        if selected.len() == m {
            break Termination::Exhausted;
        }
        let mut mask = blocked.clone();
        if opts.feasibility_mask {
            for (i, slot) in mask.iter_mut().enumerate() {
                if !*slot {
                    let mut probe = selected.clone();
                    probe.push(i);
                    *slot = source_order_duration(inst, &probe) > window.t_max_s;
                }
            }
            if mask.iter().all(|&b| b) {
                break Termination::EosDuration;
            }
        }
        let out = graph.decode_step(&enc, state, input, &mask)?;
        state = out.state;
        let probs = graph.tape.value(out.probs).to_vec();
        let chosen = match &mut chooser {
            Chooser::Policy(SampleMode::Greedy, _) => argmax(&probs, &mask),
            Chooser::Policy(SampleMode::Sample, rng) => {
                let dist = WeightedIndex::new(&probs).map_err(|_| Error::EmptyAction)?;
                dist.sample(*rng)
            }
            Chooser::Replay(actions) => {
                let Some(&a) = actions.get(replay_pos) else {
                    break Termination::EosDuration;
                };
                replay_pos += 1;
                if mask[a] {
                    return Err(Error::InvalidSelection(format!("replayed action {a} is masked")));
                }
                a
            }
        };
        steps.push(StepTrace {
            probs,
            blocked: mask,
            chosen,
        });
        let mut probe = selected.clone();
        probe.push(chosen);
        if source_order_duration(inst, &probe) > window.t_max_s {
            break Termination::EosDuration;
        }
        let p = graph.tape.slice_rows(out.probs, chosen, 1)?;
        logprobs.push(graph.tape.log(p));
        selected.push(chosen);
        blocked[chosen] = true;
        input = enc.tokens[chosen];
    };
    Ok(Decoded {
        selection: selected,
        logprobs,
        terminated_by,
        steps,
    })
}

/// Rollout recorded on `graph`; returns the log-probability nodes of every free choice.
pub fn rollout_on_graph<R: Rng>(
    graph: &mut PolicyGraph<'_>,
    inst: &Instance,
    window: &DurationWindow,
    opts: RolloutOptions,
    rng: &mut R,
) -> Result<(Rollout, Vec<Tensor>)> {
    let decoded = decode(graph, inst, window, opts, Chooser::Policy(opts.sample_mode, rng))?;
    finish(graph, inst, decoded)
}

fn finish(graph: &PolicyGraph<'_>, inst: &Instance, decoded: Decoded) -> Result<(Rollout, Vec<Tensor>)> {
    let step_logprobs = decoded.logprobs.iter().map(|&t| graph.tape.scalar(t)).collect();
    let selection = Selection::new(inst, decoded.selection, "policy")?;
    Ok((
        Rollout {
            selection,
            step_logprobs,
            terminated_by: decoded.terminated_by,
            steps: decoded.steps,
        },
        decoded.logprobs,
    ))
}

/// Samples (or greedily decodes) one selection.
pub fn rollout<R: Rng>(
    inst: &Instance,
    window: &DurationWindow,
    params: &PolicyParams,
    opts: RolloutOptions,
    rng: &mut R,
) -> Result<Rollout> {
    let mut graph = PolicyGraph::new(params);
    Ok(rollout_on_graph(&mut graph, inst, window, opts, rng)?.0)
}

/// Replays a fixed sequence of free choices, returning their log-probability nodes.
pub fn replay_on_graph(
    graph: &mut PolicyGraph<'_>,
    inst: &Instance,
    window: &DurationWindow,
    opts: RolloutOptions,
    actions: &[usize],
) -> Result<(Rollout, Vec<Tensor>)> {
    let decoded = decode::<rand_chacha::ChaCha8Rng>(graph, inst, window, opts, Chooser::Replay(actions))?;
    finish(graph, inst, decoded)
}

/// Greedy decode as a solver.
pub fn solve_policy(inst: &Instance, window: &DurationWindow, params: &PolicyParams) -> Result<Selection> {
    let opts = RolloutOptions::from_config(params.config(), inst).greedy();
    let mut rng = rng_for(0, &[]);
    Ok(rollout(inst, window, params, opts, &mut rng)?.selection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ImportanceLabel, PplMap, Segment};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture(m: usize, f: usize, dur: f64) -> Instance {
        let segments = (0..m)
            .map(|i| Segment {
                index: i,
                duration_s: dur,
                features: (0..f).map(|k| ((i * 7 + k * 3) % 11) as f64 / 11.0 - 0.5).collect(),
                labels: vec![ImportanceLabel::new(1 + (i % 4) as u8).unwrap()],
                text: None,
            })
            .collect();
        Instance::new("p", segments, PplMap::new(), None, true).unwrap()
    }

    fn small() -> PolicyConfig {
        PolicyConfig::with_dims(4, 5, 3, 1)
    }

    #[test]
    fn manifest_shapes() {
        let cfg = PolicyConfig::desk(32);
        let specs = manifest(&cfg);
        let find = |n: &str| specs.iter().find(|s| s.name == n).unwrap();
        assert_eq!((find("emb.w").rows, find("emb.w").cols), (32, 32));
        assert_eq!((find("att1.w").rows, find("att1.w").cols), (32, 32));
        assert_eq!((find("att2.w").rows, find("att2.w").cols), (32, 64));
        assert_eq!((find("dec.w_hh").rows, find("dec.w_hh").cols), (96, 32));
        let no_glimpse = PolicyConfig {
            glimpse: false,
            ..cfg
        };
        assert!(manifest(&no_glimpse).iter().all(|s| s.name != "att2.w"));
        let bad = PolicyConfig {
            dec_hidden: 7,
            ..cfg
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn full_scale_allocates() {
        let params = PolicyParams::zeros(PolicyConfig::full_scale()).unwrap();
        let emb = params.block("emb.w").unwrap();
        assert_eq!((emb.spec.rows, emb.spec.cols), (768, 2432));
        assert!(params.block("enc.l1.bwd.w_ih").is_some());
        let att2 = params.block("att2.w").unwrap();
        assert_eq!((att2.spec.rows, att2.spec.cols), (512, 1024));
        assert!(params.num_values() > 5_000_000);
    }

    #[test]
    fn encoder_output_shapes() {
        let params = PolicyParams::init(small(), 1).unwrap();
        for m in [1, 4] {
            let inst = fixture(m, 4, 1.0);
            let mut g = PolicyGraph::new(&params);
            let enc = g.encode(&inst).unwrap();
            assert_eq!(g.tape.shape(enc.h), (6, m));
            assert_eq!(g.tape.shape(enc.init_state), (6, 1));
        }
        let wrong = fixture(2, 3, 1.0);
        assert!(matches!(PolicyGraph::new(&params).encode(&wrong), Err(Error::Shape { .. })));
    }

    #[test]
    fn embedding_is_pointwise() {
        let params = PolicyParams::init(small(), 2).unwrap();
        let inst = fixture(3, 4, 1.0);
        let mut segs = inst.segments().to_vec();
        segs.swap(0, 2);
        for (i, s) in segs.iter_mut().enumerate() {
            s.index = i;
        }
        let permuted = Instance::new("q", segs, PplMap::new(), None, true).unwrap();
        let tokens = |inst: &Instance| {
            let mut g = PolicyGraph::new(&params);
            let enc = g.encode(inst).unwrap();
            enc.tokens.iter().map(|&t| g.tape.value(t).to_vec()).collect::<Vec<_>>()
        };
        let (a, b) = (tokens(&inst), tokens(&permuted));
        assert_eq!(a[0], b[2]);
        assert_eq!(a[2], b[0]);
        assert_eq!(a[1], b[1]);
    }

    #[test]
    fn zero_att2_gives_uniform_over_open_positions() {
        let mut params = PolicyParams::init(small(), 3).unwrap();
        params.block_mut("att2.w").unwrap().values.fill(0.0);
        let inst = fixture(3, 4, 1.0);
        let mut g = PolicyGraph::new(&params);
        let enc = g.encode(&inst).unwrap();
        let start = g.start_token();
        let out = g.decode_step(&enc, enc.init_state, start, &[false, true, false]).unwrap();
        assert_eq!(g.tape.value(out.probs), &[0.5, 0.0, 0.5]);
    }

    #[test]
    fn rollout_respects_mask_and_bound() {
        let params = PolicyParams::init(small(), 4).unwrap();
        let inst = fixture(8, 4, 1.7);
        let window = DurationWindow::new(5.0).unwrap();
        for seed in 0..30 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let opts = RolloutOptions::from_config(params.config(), &inst);
            let r = rollout(&inst, &window, &params, opts, &mut rng).unwrap();
            assert_eq!(r.selection.indices[0], 7);
            assert!(r.selection.total_duration_s <= window.t_max_s);
            assert_eq!(r.step_logprobs.len(), r.selection.len() - 1);
            assert!(r.step_logprobs.iter().all(|&l| l <= 0.0));
            for step in &r.steps {
                for (p, b) in step.probs.iter().zip(&step.blocked) {
                    if *b {
                        assert_eq!(*p, 0.0);
                    }
                }
                assert!((step.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            let mut again = ChaCha8Rng::seed_from_u64(seed);
            assert_eq!(r, rollout(&inst, &window, &params, opts, &mut again).unwrap());
        }
    }

    #[test]
    fn exhausted_when_everything_fits() {
        let params = PolicyParams::init(small(), 5).unwrap();
        let inst = fixture(3, 4, 1.0);
        let window = DurationWindow::new(10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let opts = RolloutOptions::from_config(params.config(), &inst);
        let r = rollout(&inst, &window, &params, opts, &mut rng).unwrap();
        assert_eq!(r.terminated_by, Termination::Exhausted);
        assert_eq!(r.selection.temporal, vec![0, 1, 2]);
    }

    #[test]
    fn oversized_end_segment_is_infeasible() {
        let params = PolicyParams::init(small(), 6).unwrap();
        let inst = fixture(3, 4, 13.0);
        let window = DurationWindow::new(10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let opts = RolloutOptions::from_config(params.config(), &inst);
        assert!(matches!(
            rollout(&inst, &window, &params, opts, &mut rng),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn feasibility_mask_blocks_overflow() {
        let params = PolicyParams::init(small(), 7).unwrap().with_runtime(SampleMode::Sample, true);
        let inst = fixture(6, 4, 2.5);
        let window = DurationWindow::new(5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let opts = RolloutOptions::from_config(params.config(), &inst);
        let r = rollout(&inst, &window, &params, opts, &mut rng).unwrap();
        // 2 segments = 5.0 s fit under 6.0; a third would not and is masked.
        assert_eq!(r.selection.len(), 2);
        assert_eq!(r.steps.len(), 1);
    }

    #[test]
    fn replay_reproduces_sampled_logprobs() {
        let params = PolicyParams::init(small(), 8).unwrap();
        let inst = fixture(6, 4, 1.1);
        let window = DurationWindow::new(4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let opts = RolloutOptions::from_config(params.config(), &inst);
        let r = rollout(&inst, &window, &params, opts, &mut rng).unwrap();
        let actions: Vec<usize> = r.selection.indices[1..].to_vec();
        let mut g = PolicyGraph::new(&params);
        let (replayed, _) = replay_on_graph(&mut g, &inst, &window, opts, &actions).unwrap();
        assert_eq!(replayed.step_logprobs, r.step_logprobs);
        assert_eq!(replayed.selection.indices, r.selection.indices);
    }
}
