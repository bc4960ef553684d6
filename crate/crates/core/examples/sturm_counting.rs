//! Exact real-root counting for univariate polynomials: floating-point
//! coefficients are converted to integers without rounding and counted with
//! a Sturm sequence over big integers.

use noisyroots::rootcount::{
    count_real_roots_exact, count_roots_1d, count_roots_companion, shift_integer_poly, to_integer_poly,
};

fn main() -> noisyroots::Result<()> {
    // (t − 1)(t − 2)(t − 3)(t² + 1), lowest coefficient first.
    let p = [-6.0, 11.0, -7.0, 7.0, -6.0, 1.0];
    println!("sturm {} companion {}", count_roots_1d(&p)?, count_roots_companion(&p)?);

    // A double root at 1 is counted once.
    let double = [1.0, -2.0, 1.0];
    println!("(t − 1)²: {}", count_roots_1d(&double)?);

    // Two roots 1e-9 apart are still separated.
    let close = [1.0 + 1e-9, -(2.0 + 1e-9), 1.0];
    println!(
        "close pair: sturm {} companion {}",
        count_roots_1d(&close)?,
        count_roots_companion(&close)?
    );

    let ints = to_integer_poly(&[0.5, -1.5, 1.0]);
    println!(
        "integer form of 0.5 − 1.5t + t²: {:?}",
        ints.iter().map(|c| c.to_string()).collect::<Vec<_>>()
    );
    println!(
        "roots {}, after t → t + 3: {}",
        count_real_roots_exact(&ints)?,
        count_real_roots_exact(&shift_integer_poly(&ints, 3))?
    );

    // Wilkinson's polynomial of degree 12.
    let mut w = vec![1.0];
    for k in 1..=12 {
        w = noisyroots::poly::multiply(&w, &[-(k as f64), 1.0]);
    }
    println!(
        "wilkinson 12: sturm {} companion {}",
        count_roots_1d(&w)?,
        count_roots_companion(&w)?
    );
    Ok(())
}
