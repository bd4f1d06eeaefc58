//! Scores a hand-picked selection: rewards, the sum objective and metrics.

use msan::model::{
    objective_eq1, CoherenceAnnotation, CoherenceClass, DurationWindow, ImportanceLabel, Instance, PplMap, Segment,
    Selection,
};
use msan::scoring::{composite_reward, coherence_reward, exp_neg_ppl, importance_reward, impcoh_at_t, RewardConfig};

fn main() -> msan::Result<()> {
    let levels: [&[u8]; 4] = [&[1, 2], &[3], &[4, 2], &[4]];
    let mut segments = Vec::new();
    for (i, l) in levels.iter().enumerate() {
        segments.push(Segment {
            index: i,
            duration_s: [2.5, 3.0, 2.0, 3.5][i],
            features: vec![],
            labels: l.iter().map(|&v| ImportanceLabel::new(v)).collect::<msan::Result<_>>()?,
            text: None,
        });
    }
    let mut ppl = PplMap::new();
    let mut ann = CoherenceAnnotation::new();
    for i in 0..4 {
        for j in i + 1..4 {
            let v = 0.4 * (j - i) as f64 + 0.1 * i as f64;
            ppl.insert(i, j, v)?;
            ann.insert(i, j, msan::data::class_for_ppl(v, 1.0, 2.5))?;
        }
    }
    ann.insert(0, 1, CoherenceClass::Incoherent)?;
    let inst = Instance::new("demo", segments, ppl, Some(ann), true)?;

    // Selection order does not matter: scoring always uses source order.
    let sel = Selection::new(&inst, vec![3, 1, 2], "manual")?;
    let window = DurationWindow::new(10.0)?;
    let cfg = RewardConfig::default();
    println!("temporal order {:?}, tau {} s, window [{}, {}]", sel.temporal, sel.total_duration_s, window.t_min_s, window.t_max_s);
    println!("R_imp {:.4}", importance_reward(&inst, &sel, &cfg));
    println!("R_coh {:.4}", coherence_reward(&inst, &sel, &cfg)?);
    println!("R     {:.4} (beta {})", composite_reward(&inst, &sel, &cfg)?, cfg.beta);
    let eq1 = objective_eq1(&inst, &sel, &window, &cfg, |i, j| exp_neg_ppl(&inst, i, j))?;
    println!("sum objective {eq1:?}");
    let m = impcoh_at_t(&inst, &sel, &window, &cfg)?;
    println!("Imp@10 {:.2}  Coh@10 {:.2}  Overall {:.2}", m.imp, m.coh, m.overall);
    Ok(())
}
