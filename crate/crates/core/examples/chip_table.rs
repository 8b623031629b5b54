//! Prints the IEEE 802.15.4 chip table, checks its structure and shows how
//! well the sequences separate under the absolute-correlation decoder.

use msk_collide::signal::IEEE_802_15_4;

fn main() {
    print!("{}", IEEE_802_15_4.to_csv());

    match IEEE_802_15_4.check_structure() {
        Ok(()) => println!("\nstructure: rows 1-7 are 4-chip cyclic shifts of row 0, rows 8-15 invert the odd chips"),
        Err(e) => println!("\nstructure check failed: {e}"),
    }

    println!("\n|correlation| between bipolar sequences:");
    let rows: Vec<_> = (0..16u8)
        .map(|s| IEEE_802_15_4.bipolar(s).unwrap())
        .collect();
    print!("    ");
    for s in 0..16 {
        print!("{s:>4}");
    }
    println!();
    for (a, ra) in rows.iter().enumerate() {
        print!("{a:>4}");
        for rb in &rows {
            let c: i32 = ra
                .iter()
                .zip(rb)
                .map(|(x, y)| (*x as i32) * (*y as i32))
                .sum();
            print!("{:>4}", c.abs());
        }
        println!();
    }
}
