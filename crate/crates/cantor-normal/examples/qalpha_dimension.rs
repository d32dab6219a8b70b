//! The tuned family `qalpha:a/b` plants a huge base at the end of each
//! even level, sized so the covering ratio is dragged down toward `a/b`
//! there while interior levels pull it back toward 1 — the ratio
//! oscillates forever and the box dimension fails to exist. The spike
//! sizes obey an exact logarithmic sandwich, checked here level by level.
//!
//! Run with: cargo run --example qalpha_dimension

use cantor_normal::{box_ratio, BasicSequence, Ladder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seq = BasicSequence::parse("qalpha:1/2")?;

    // The first few terms are tame, then spikes appear at the triangular
    // positions 3, 6, 10, ... of even levels.
    print!("first terms:");
    for n in 1..=10u64 {
        print!(" {}", seq.term(n)?);
    }
    println!();

    // The sandwich on each even-level spike: the planted base's log sits
    // between (b-a)/a times the preceding log-product and that plus a
    // 4 (b-a)/a * k ln k cushion (the cushion is promised only when the
    // power-floor branch of the defining max fired).
    println!("\nspike sandwich for qalpha:1/2:");
    println!("{:>3} {:>9} {:>14} {:>14} {:>14} branch", "k", "position", "lower", "ln q", "upper");
    for k in (2..=24u64).step_by(2) {
        let r = seq.qident_check(k)?;
        assert!(r.ln_v >= r.lower - 1e-9 * r.lower.abs().max(1.0));
        if r.floor_branch {
            assert!(r.holds, "sandwich failed at k = {k}");
        }
        println!(
            "{:>3} {:>9} {:>14.3} {:>14.3} {:>14.3} {}",
            r.k,
            r.position,
            r.lower,
            r.ln_v,
            r.upper,
            if r.floor_branch { "floor" } else { "clamped" },
        );
    }

    // The covering ratio oscillates: near 1/2 right at even levels, back
    // above 0.9 one level later. No limit, no box dimension.
    println!("\ncovering ratio oscillation:");
    let ladder = Ladder::new(seq);
    for k in [16u64, 17, 18, 19, 20, 21] {
        let r = box_ratio(&ladder, k)?;
        println!("  level {k:>2}: {r:.6}");
    }
    let (low, high) = (box_ratio(&ladder, 20)?, box_ratio(&ladder, 21)?);
    assert!((low - 0.5).abs() < 0.05 && high > 0.9);
    println!("\nlevel 20 sits near 1/2, level 21 near 1: the ratio never settles.");
    Ok(())
}
