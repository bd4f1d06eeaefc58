//! Generates a synthetic dataset and prints its calibration statistics.
//!
//! cargo run --release --example generate_dataset -- [count] [seed] [out_dir]

use std::path::Path;

use msan::data::{dataset_stats, generate, save_dataset, GeneratorConfig};

fn main() -> msan::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cfg = GeneratorConfig {
        count: args.first().and_then(|s| s.parse().ok()).unwrap_or(500),
        seed: args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0),
        ..GeneratorConfig::default()
    };
    let ds = generate(&cfg)?;
    let all = dataset_stats(ds.train.iter().chain(&ds.test));
    let test = dataset_stats(&ds.test);
    println!("instances            {}", all.instances);
    println!("segments per video   {:.2}", all.mean_segments);
    println!("segment duration (s) {:.2}", all.mean_segment_duration_s);
    println!("labels per video     {:.2}", all.mean_labels_per_video);
    println!(
        "test pair classes    coherent {:.1}%  incoherent {:.1}%  uncertain {:.1}%  ({} pairs)",
        100.0 * test.coherent_share,
        100.0 * test.incoherent_share,
        100.0 * test.uncertain_share,
        test.annotated_pairs
    );
    if let Some(dir) = args.get(2) {
        let manifest = save_dataset(&ds, Path::new(dir), Some(&cfg))?;
        println!("wrote {}", manifest.display());
    }
    Ok(())
}
