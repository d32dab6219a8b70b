//! Convergents are exact rationals: build the value of a digit prefix,
//! verify the nesting of successive convergents, and peel digits back off
//! with the shift map.
//!
//! Run with: cargo run --example exact_value

use cantor_normal::{tail_map, BasicSequence, DigitStream, Ladder, Rational, SelectionPolicy};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut stream =
        DigitStream::new(Ladder::new(BasicSequence::parse("ref2")?), SelectionPolicy::Min);

    println!("convergents of the min stream:");
    let mut previous = Rational::new(0.into(), 1.into());
    for n in 1..=8u64 {
        let value = stream.value(n)?;
        assert!(value >= previous, "convergents never step back");
        println!("  v_{n} = {value}  (~{:.10})", value.to_f64().unwrap_or(f64::NAN));
        previous = value;
    }

    // The shift map multiplies by the next base and drops the integer
    // part; the integer part is exactly the next digit.
    let x = stream.value(40)?;
    let seq = stream.ladder().seq();
    let mut t = x.clone();
    print!("digits recovered by shifting: ");
    for n in 0..8u64 {
        let q = Rational::from_integer(BigInt::from(seq.term(n + 1)?));
        let scaled = &t * &q;
        let digit = scaled.floor();
        print!("{} ", digit.to_integer());
        t = scaled - digit;
        // The library's tail map agrees with the running shift.
        assert_eq!(tail_map(seq, &x, n + 1)?, t);
    }
    println!();
    Ok(())
}
