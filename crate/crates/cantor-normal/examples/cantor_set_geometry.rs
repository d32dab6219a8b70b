//! The admissible points form a Cantor-like set: nudging one digit moves a
//! point by less than the enclosing cylinder, the expansion metric reads
//! off how long two points shadow each other, and every cylinder carries a
//! guaranteed admissible-free gap at its right edge.
//!
//! Run with: cargo run --example cantor_set_geometry

use cantor_normal::{
    gap_interval, metric_distance, validate_prefix, BasicSequence, DigitStream, Ladder, Proximity,
    SelectionPolicy,
};
use num_traits::ToPrimitive;

fn f(r: &cantor_normal::Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut stream =
        DigitStream::new(Ladder::new(BasicSequence::parse("ref2")?), SelectionPolicy::Min);

    // Perturbation: changing the digit at (or just after) position n moves
    // the value by strictly less than 1/(q_1...q_{site-1}).
    println!("perturbations:");
    for n in [1u64, 4, 7, 30] {
        let p = stream.perturb(n)?;
        assert!(p.delta <= p.bound);
        println!(
            "  n = {:>2}: site {:>2} ({:?}), digit {} -> {}, |delta| = {:.3e} <= {:.3e}",
            n,
            p.site,
            p.case,
            p.original,
            p.replacement,
            f(&p.delta),
            f(&p.bound),
        );
    }

    // The expansion metric: distance 1/(q_1...q_{zeta-1}) at the first
    // disagreeing position zeta.
    println!("\nexpansion metric:");
    let base = stream.prefix(12)?.to_vec();
    let mut other =
        DigitStream::new(Ladder::new(BasicSequence::parse("ref2")?), SelectionPolicy::Max);
    let rival = other.prefix(12)?.to_vec();
    match metric_distance(stream.ladder().seq(), &base, &rival)? {
        Proximity::DiffersAt { zeta, distance } => {
            println!("  min vs max policies first differ at position {zeta}; distance {distance}");
        }
        Proximity::AgreesThrough { horizon } => {
            println!("  min and max policies agree through {horizon} digits");
        }
    }
    match metric_distance(stream.ladder().seq(), &base, &base)? {
        Proximity::AgreesThrough { horizon } => println!("  a prefix vs itself: agrees through {horizon}"),
        Proximity::DiffersAt { .. } => unreachable!(),
    }

    // Gap intervals: the right sliver of every digit cylinder is free of
    // admissible points. Certify that for the first few prefix lengths by
    // checking the constructed value never lands in the gap.
    println!("\ncylinder gaps (right-edge slivers with no admissible point):");
    for n in [1u64, 3, 5, 8] {
        let prefix = stream.prefix(n)?.to_vec();
        let gap = gap_interval(stream.ladder(), &prefix)?;
        let x = stream.value(40)?;
        assert!(x < gap.lo || x >= gap.hi);
        println!(
            "  {} digits fixed: gap [{:.6e}, {:.6e}), width {:.3e}",
            n,
            f(&gap.lo),
            f(&gap.hi),
            f(&(&gap.hi - &gap.lo)),
        );
    }

    // And the whole prefix is admissible in the first place.
    let prefix = stream.prefix(40)?.to_vec();
    let report = validate_prefix(stream.ladder(), &prefix)?;
    assert!(report.is_admissible());
    println!("\nvalidated {} digits: admissible", report.checked);
    Ok(())
}
