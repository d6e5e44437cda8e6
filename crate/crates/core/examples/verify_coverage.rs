// Exhaustive coverage check, then the same check after deleting one mask.
//
//     cargo run --example verify_coverage

use certmask::coverage::{covering_set, verify};
use certmask::geometry::{Anchor, DomainSize, MaskSpec, PatchSpec};
use certmask::tiling::{replicated_tiling, TilingConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = TilingConfig::new(DomainSize::square(40)?, MaskSpec::square(12)?, PatchSpec::square(5)?, 2);
    let mut set = replicated_tiling(&config)?;
    let report = verify(&set);
    println!(
        "{} masks, {} anchors, multiplicity {}..={}",
        set.len(),
        report.anchors_checked,
        report.min_multiplicity,
        report.max_multiplicity
    );
    assert!(report.is_k_covered(2));

    let anchor = Anchor { ax: 17, ay: 3 };
    println!("masks fully covering a patch at {anchor:?}: {:?}", covering_set(&set, anchor));

    let removed = set.placements.remove(0);
    let report = verify(&set);
    println!(
        "without {removed:?}: min multiplicity {}, {} anchors short, first {:?}",
        report.min_multiplicity,
        report.gap_count,
        report.gaps.first()
    );
    assert!(!report.is_k_covered(2));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
