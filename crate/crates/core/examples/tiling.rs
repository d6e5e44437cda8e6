// Builds single-cover, replicated and offset mask sets for one geometry and
// round-trips one through its JSON form.
//
//     cargo run --example tiling

use certmask::geometry::{DomainSize, MaskSpec, PatchSpec};
use certmask::tiling::{build, MaskSet, Strategy, TilingConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = TilingConfig::new(DomainSize::new(64, 48)?, MaskSpec::square(16)?, PatchSpec::new(7, 5)?, 6).with_folds(3, 2);
    println!("effective extent (anchors per mask): {:?}", config.effective_extent());
    println!("offset strides: {:?}", config.offset_strides());

    for strategy in [Strategy::Single, Strategy::Replicated, Strategy::Offset] {
        let set = build(&config, strategy)?;
        let wraps = set.placements.iter().filter(|p| p.wrap).count();
        println!("{strategy:<10} {:>4} masks, {wraps} with wrap-around", set.len());
    }

    let set = build(&config, Strategy::Offset)?;
    let json = set.to_json()?;
    let back = MaskSet::from_json(&json)?;
    assert_eq!(back, set);
    println!("first placements: {:?}", &set.placements[..3]);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
