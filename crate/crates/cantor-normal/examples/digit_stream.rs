//! Generate digits under different selection policies and watch the
//! admissible windows they choose from. Every policy yields an admissible
//! stream; digit 1 never appears anywhere.
//!
//! Run with: cargo run --example digit_stream

use cantor_normal::{
    digit_window, validate_prefix, BasicSequence, DigitStream, Ladder, SelectionPolicy,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ladder = Ladder::new(BasicSequence::parse("ref2")?);
    println!("windows of the first 10 positions:");
    println!("  {:>2} {:>10} {:>8} {:>8} {:>8}", "n", "(a,b,c)", "q", "lo", "hi");
    for n in 1..=10 {
        let w = digit_window(&ladder, n)?;
        println!(
            "  {:>2} {:>10} {:>8} {:>8} {:>8}",
            n,
            format!("({},{},{})", w.index.a, w.index.b, w.index.c),
            w.q,
            w.lo,
            w.hi
        );
    }

    for policy in [
        SelectionPolicy::Min,
        SelectionPolicy::Max,
        SelectionPolicy::Mid,
        SelectionPolicy::Random { seed: 42 },
    ] {
        let mut stream = DigitStream::new(Ladder::new(BasicSequence::parse("ref2")?), policy);
        let digits = stream.prefix(12)?.to_vec();
        let rendered: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
        println!("{policy:<10} -> {}", rendered.join(", "));

        // Every prefix re-validates against the windows, and digit 1 is
        // structurally impossible.
        let report = validate_prefix(stream.ladder(), &digits)?;
        assert!(report.is_admissible());
        assert!(digits.iter().all(|d| d.to_string() != "1"));
    }
    Ok(())
}
