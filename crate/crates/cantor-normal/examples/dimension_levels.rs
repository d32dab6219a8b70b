//! The admissible set is covered level by level: level `k` covers it with
//! `prod omega_n` intervals of length `1/(q_1...q_gamma(k))`, and the
//! log-ratio of those two quantities estimates the box dimension. The
//! Hausdorff estimators push the same data into a genuine lower bound.
//!
//! Run with: cargo run --example dimension_levels

use cantor_normal::{
    box_ratio, growth_diagnostics, hausdorff_lower_closed_form, hausdorff_lower_general,
    level_table, BasicSequence, Ladder,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // On the 2n^2 ladder the covering ratio settles near 1/2: windows have
    // about q/a^2 digits while cylinders shrink like 1/q.
    let ladder = Ladder::new(BasicSequence::parse("ref2")?);
    let table = level_table(&ladder, 40)?;
    println!("{:>3} {:>8} {:>8} {:>10}", "k", "gamma", "box len", "ratio");
    for k in [1u64, 2, 4, 8, 16, 32, 40] {
        let row = table.row(k);
        println!("{:>3} {:>8} {:>8} {:>10.6}", row.k, row.gamma, row.box_len, row.ratio);
    }

    // The two Hausdorff estimators agree better and better as the level
    // grows (the closed form only rearranges the general one's sums, up to
    // boundary terms that wash out).
    println!("\nHausdorff lower estimators:");
    println!("{:>4} {:>10} {:>12} {:>8}", "k", "general", "closed form", "gap");
    let mut prev_gap = f64::INFINITY;
    for k in [40u64, 100, 200, 300] {
        let general = hausdorff_lower_general(&ladder, k)?;
        let closed = hausdorff_lower_closed_form(&ladder, k)?;
        let gap = (general - closed).abs();
        println!("{k:>4} {general:>10.6} {closed:>12.6} {gap:>8.5}");
        assert!(gap < prev_gap, "estimator gap should shrink with k");
        prev_gap = gap;
    }
    assert!(prev_gap < 0.05);

    // A slowly growing ladder keeps the ratio high; a tower ladder crushes
    // it toward zero because one huge base dominates every product.
    println!("\nbox-ratio comparison across families:");
    for desc in ["ref2", "slow:3", "geom:8", "tower"] {
        let lad = Ladder::new(BasicSequence::parse(desc)?);
        let k = if desc == "tower" { 4 } else { 12 };
        println!("  {:<8} box_ratio({k:>2}) = {:.6}", desc, box_ratio(&lad, k)?);
    }

    // Growth diagnostics: which logarithmic masses dominate. Quick growth
    // (geom, tower) sends bulk_over_spike toward 0; the full-dimension
    // conditions need the other two columns to vanish instead.
    println!("\ngrowth diagnostics (slow:3):");
    let rows = growth_diagnostics(&BasicSequence::parse("slow:3")?, 10)?;
    println!("{:>3} {:>16} {:>18} {:>16}", "k", "bulk/spike", "anchors/bulk", "spikes/bulk");
    for r in &rows {
        println!(
            "{:>3} {:>16.6} {:>18.6} {:>16.6}",
            r.k, r.bulk_over_spike, r.anchors_over_bulk, r.spikes_over_bulk
        );
    }
    Ok(())
}
