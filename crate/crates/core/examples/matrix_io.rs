//! Writing and reading the plain-text `.zpm` matrix format.

use std::io::Cursor;

use ffpluq::{Mat, PrimeField};

fn main() -> ffpluq::Result<()> {
    let f = PrimeField::new(7)?;
    let a = Mat::from_rows(&f, &[[1, -1, 9], [0, 3, 14]]);
    let mut buf = Vec::new();
    a.write_zpm(&f, &mut buf)?;
    print!("{}", String::from_utf8_lossy(&buf));

    let (g, b) = Mat::read_zpm(Cursor::new(&buf))?;
    assert_eq!((g, &b), (f, &a));

    let bad = "2 2 7\n1 2\n3 9\n";
    println!("non-canonical entry: {}", Mat::read_zpm(Cursor::new(bad)).unwrap_err());
    Ok(())
}
