//! Trains the pointer policy at desk scale and compares it with the baselines.
//!
//! cargo run --release --example train_policy -- [epochs] [lr]

use msan::data::{generate, GeneratorConfig};
use msan::policy::{solve_policy, PolicyConfig, PolicyParams};
use msan::scoring::composite_reward;
use msan::solvers::{solve, Method, ObjectiveMode, SolverConfig};
use msan::training::{train, TrainConfig};

fn main() -> msan::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let gen = GeneratorConfig {
        count: 250,
        seed: 11,
        ..GeneratorConfig::default()
    };
    let ds = generate(&gen)?;
    let mut cfg = TrainConfig::desk(10.0);
    if let Some(e) = args.first().and_then(|s| s.parse().ok()) {
        cfg.epochs = e;
    }
    if let Some(lr) = args.get(1).and_then(|s| s.parse().ok()) {
        cfg.lr = lr;
    }
    let init = PolicyParams::init(PolicyConfig::desk(gen.feature_dim), cfg.seed)?;
    let started = std::time::Instant::now();
    let out = train(&ds.train, init, &cfg, None)?;
    for row in &out.log.epochs {
        println!(
            "epoch {}  reward {:.4}  imp {:.4}  coh {:.4}  |A| {:.2}  tau {:.2}  grad {:.4}",
            row.epoch, row.mean_reward, row.mean_imp, row.mean_coh, row.mean_len, row.mean_tau, row.grad_norm
        );
    }
    println!("trained in {:.1?}", started.elapsed());

    let window = cfg.window()?;
    let solver = SolverConfig {
        objective_mode: ObjectiveMode::RewardMean,
        reward: cfg.reward,
        ..SolverConfig::default()
    };
    let mean = |f: &dyn Fn(&msan::model::Instance) -> msan::Result<f64>| -> msan::Result<f64> {
        let v: Vec<f64> = ds.test.iter().map(f).collect::<msan::Result<_>>()?;
        Ok(v.iter().sum::<f64>() / v.len() as f64)
    };
    let policy = mean(&|i| composite_reward(i, &solve_policy(i, &window, &out.params)?, &cfg.reward))?;
    println!("test reward  policy     {policy:.4}");
    for method in [Method::Random, Method::RandomCut, Method::Sam, Method::Oracle] {
        let r = mean(&|i| composite_reward(i, &solve(method, i, &window, &solver)?, &cfg.reward))?;
        println!("test reward  {:<10} {r:.4}", method.as_str());
    }
    Ok(())
}
