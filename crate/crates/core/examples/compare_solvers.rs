//! Runs every baseline on a synthetic test split and prints the metric table.
//!
//! cargo run --release --example compare_solvers -- [target_s]

use msan::cli::{evaluate, summarize_rows};
use msan::data::{generate, GeneratorConfig};
use msan::model::DurationWindow;
use msan::solvers::{Method, SolverConfig};

fn main() -> msan::Result<()> {
    let target: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10.0);
    let ds = generate(&GeneratorConfig {
        count: 200,
        seed: 1,
        max_segments: 16,
        ..GeneratorConfig::default()
    })?;
    let window = DurationWindow::new(target)?;
    let methods = [Method::Random, Method::RandomCut, Method::Sam, Method::Oracle];
    let rows = evaluate(&methods, &ds.test, &window, &SolverConfig::default(), None)?;
    println!("Imp-Coh@{target} on {} test videos (x100)", ds.test.len());
    println!("{:<11} {:>7} {:>7} {:>8} {:>9} {:>7}", "method", "Imp", "Coh", "Overall", "feasible", "eq1");
    for s in summarize_rows(&rows) {
        println!(
            "{:<11} {:>7.2} {:>7.2} {:>8.2} {:>8.0}% {:>7.3}",
            s.method,
            s.imp,
            s.coh,
            s.overall,
            100.0 * s.feasible_rate,
            s.objective
        );
    }
    Ok(())
}
