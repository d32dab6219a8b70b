//! Each box of width `a` drops one point near each multiple of `1/a`, so
//! its points form an almost-arithmetic progression with slack `1/a` and
//! star discrepancy at most `2/a`. Check that exactly, box by box, and
//! pool the segments into the concatenation bound.
//!
//! Run with: cargo run --example box_discrepancy

use cantor_normal::{
    box_check, concat_bound_check, BasicSequence, DigitStream, Ladder, Rational, SelectionPolicy,
};
use num_traits::ToPrimitive;

fn f(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut stream =
        DigitStream::new(Ladder::new(BasicSequence::parse("ref2")?), SelectionPolicy::Mid);

    println!("{:>3} {:>12} {:>12} {:>24}", "a", "D*", "2/a", "progression eta range");
    let mut segments = Vec::new();
    for a in 1..=12u64 {
        let report = box_check(&mut stream, a, 1)?;
        assert!(report.holds);
        let eta = match &report.witness {
            Some(w) => format!("[{:.4}, {:.4}]", f(&w.eta_lo), f(&w.eta_hi)),
            None => "(single point)".into(),
        };
        println!("{:>3} {:>12.6} {:>12.6} {:>24}", a, f(&report.dstar), f(&report.bound), eta);
        segments.push(report.points);
    }

    // Pooling all boxes: the weighted mean of per-box discrepancies bounds
    // the discrepancy of the concatenation.
    let pooled = concat_bound_check(&segments)?;
    println!(
        "\npooled {} points: D* = {:.6} <= bound {:.6} ({})",
        pooled.total,
        f(&pooled.dstar),
        f(&pooled.bound),
        if pooled.holds { "holds" } else { "violated" },
    );
    Ok(())
}
