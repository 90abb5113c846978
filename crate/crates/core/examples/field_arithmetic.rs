//! Counted field operations and delayed reduction of a long dot product.

use ffpluq::field::max_delay;
use ffpluq::{PrimeField, RedLedger};

fn main() -> ffpluq::Result<()> {
    let f = PrimeField::new(131071)?;
    let mut led = RedLedger::new();

    let x = f.mul(70000, 90000, &mut led);
    let y = f.inv(x, &mut led)?;
    println!("70000 * 90000 = {x}, inverse {y}, check {}", f.mul(x, y, &mut led));
    println!("add/sub/neg are free: {} {} {}", f.add(x, y), f.sub(x, y), f.neg(x));

    // worst case: every product is (p-1)^2
    let n_star = f.n_star();
    assert_eq!(n_star, max_delay(131071, 53)?);
    let mut acc = f.accumulator();
    for _ in 0..n_star {
        acc.mul_add(&f, f.p() - 1, f.p() - 1)?;
    }
    let sum = f.reduce(&mut acc, &mut led);
    println!("{n_star} products of (p-1)^2 reduce once to {sum}");

    let narrow = PrimeField::with_acc_bits(131071, 40)?;
    println!("with a 40-bit accumulator only {} products fit", narrow.n_star());
    println!("reductions so far: {led}");
    Ok(())
}
