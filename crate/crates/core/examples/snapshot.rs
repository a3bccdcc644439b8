//! Writes a field to the text snapshot format and reads it back.

use nlsplit::datagen::{rough_field, RoughDataSpec};
use nlsplit::snapshot::{read_snapshot, write_snapshot};

fn main() -> nlsplit::Result<()> {
    let u = rough_field(&RoughDataSpec::new(1.0, 3, 16))?;
    let mut buf = Vec::new();
    write_snapshot(&u, &mut buf)?;
    let text = String::from_utf8(buf).expect("snapshots are ASCII");
    print!("{text}");

    let back = read_snapshot(text.as_bytes())?;
    assert_eq!(back, u);
    println!("round trip exact");
    Ok(())
}
