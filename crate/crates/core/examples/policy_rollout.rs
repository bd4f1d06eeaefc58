//! Decodes one instance with an untrained policy and prints every step's
//! distribution, then round-trips the parameters through a checkpoint.

use msan::data::{generate, GeneratorConfig};
use msan::model::DurationWindow;
use msan::policy::{decode_checkpoint, encode_checkpoint, rollout, PolicyConfig, PolicyParams, RolloutOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> msan::Result<()> {
    let ds = generate(&GeneratorConfig {
        count: 1,
        seed: 5,
        test_fraction: 0.0,
        ..GeneratorConfig::default()
    })?;
    let inst = &ds.train[0];
    let params = PolicyParams::init(PolicyConfig::desk(inst.feature_dim()), 0)?;
    let window = DurationWindow::new(10.0)?;
    let opts = RolloutOptions::from_config(params.config(), inst);
    let r = rollout(inst, &window, &params, opts, &mut ChaCha8Rng::seed_from_u64(1))?;
    println!("{} segments, end segment {} forced first", inst.len(), inst.end_index());
    for (t, step) in r.steps.iter().enumerate() {
        let probs: Vec<String> = step.probs.iter().map(|p| format!("{p:.2}")).collect();
        println!("step {t}: chose {:>2}  [{}]", step.chosen, probs.join(" "));
    }
    println!(
        "selection {:?} (source order {:?}), tau {:.2} s, stopped by {:?}",
        r.selection.indices, r.selection.temporal, r.selection.total_duration_s, r.terminated_by
    );
    let bytes = encode_checkpoint(&params);
    assert_eq!(decode_checkpoint(&bytes)?, params);
    println!("checkpoint: {} parameters, {} bytes", params.num_values(), bytes.len());
    Ok(())
}
