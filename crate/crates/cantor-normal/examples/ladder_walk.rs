//! Walk the box schedule of a few families: how many boxes of each width
//! are laid down, where each region ends, and why the schedule guarantees
//! a roomy digit window at every position.
//!
//! Run with: cargo run --example ladder_walk

use cantor_normal::{BasicSequence, BoxIndex, Ladder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for descriptor in ["ref2", "slow:3", "geom:8"] {
        let ladder = Ladder::new(BasicSequence::parse(descriptor)?);
        println!("family {descriptor}:");
        println!("  {:>3} {:>8} {:>6} {:>8}", "i", "nu(i+1)", "l_i", "L_i");
        for i in 1..=8 {
            println!(
                "  {:>3} {:>8} {:>6} {:>8}",
                i,
                ladder.nu(i + 1)?,
                ladder.box_count(i)?,
                ladder.region_end(i)?,
            );
        }
        // Round-trip a few positions through the (a, b, c) coordinates.
        for n in [1u64, 5, 12, 100, 1000] {
            let idx = ladder.box_index(n)?;
            let back = ladder.position(idx)?;
            assert_eq!(back, n);
            let BoxIndex { a, b, c } = idx;
            println!("  position {n:>5} = box {b} of width {a}, slot {c}");
        }
        println!();
    }
    Ok(())
}
