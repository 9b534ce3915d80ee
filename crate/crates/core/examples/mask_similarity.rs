//! Shape similarity between binary masks: descriptors, pairwise scores and
//! the invariances they keep.

use assoc_bench::mask::{self, shapes};
use assoc_bench::Result;

fn main() -> Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/masks");
    let apple = mask::load_mask(format!("{dir}/apple.pgm"), "apple")?;
    let cat = mask::load_mask(format!("{dir}/cat.txt"), "cat")?;
    let banana = mask::load_mask(format!("{dir}/banana.txt"), "banana")?;

    let d = mask::descriptor(&apple);
    println!("apple descriptor: {:?}", d.moments.map(|m| (m * 1e3).round() / 1e3));
    for other in [&cat, &banana] {
        println!(
            "apple ~ {:<7} {:.4}",
            other.class_id(),
            mask::builtin_similarity(&apple, other)
        );
    }

    let shifted = apple.translated(5, -7).expect("stays inside the frame");
    println!("translated copy  {:.6}", mask::builtin_similarity(&apple, &shifted));
    let doubled = apple.resampled(2.0)?;
    println!("2x upsampled     {:.6}", mask::builtin_similarity(&apple, &doubled));

    let big = shapes::disc("disc", 64, 32.0, 32.0, 20.0)?;
    let small = shapes::disc("disc", 64, 32.0, 32.0, 10.0)?;
    println!("disc r20 ~ r10   {:.4}", mask::builtin_similarity(&big, &small));
    Ok(())
}
