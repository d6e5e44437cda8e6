// Certification with a lookup-table classifier whose answers are chosen per
// masked view. Shows a certified image and the exact-k exploit: when some
// anchor leaves k or more votes to the adversary, k of them on a fresh class
// win under the exactly-k rule.
//
//     cargo run --example certify_lookup

use certmask::certify::{certify, infer, CertifyOptions};
use certmask::classifier::{LookupTable, Label};
use certmask::geometry::{DomainSize, MaskSpec, PatchSpec};
use certmask::image::Image;
use certmask::masking::{masked_views, FillPolicy};
use certmask::tiling::{offset_tiling, replicated_tiling, TilingConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let image = Image::new(16, 16, 1, (0..256).map(|i| (i * 13 % 256) as u8).collect())?;
    let options = CertifyOptions::default();

    // every masked view says 1, yet both tilings leave some anchor with at
    // least k free votes: k of them on class 0 makes it the lone exact-k class
    let config = TilingConfig::new(DomainSize::square(16)?, MaskSpec::square(8)?, PatchSpec::square(3)?, 2).with_folds(2, 1);
    for (name, set) in [("replicated", replicated_tiling(&config)?), ("offset", offset_tiling(&config)?)] {
        let mut table = LookupTable::new(Label(0), 3)?;
        for view in masked_views(&image, &set, &FillPolicy::Zero)? {
            table.insert(&view, Label(1))?;
        }
        let outcome = infer(&image, &set, &table, &FillPolicy::Zero)?;
        let result = certify(&image, Label(1), &set, &table, &options)?;
        println!("{name}: {} masks, clean {:?} via {:?}, certified={}", set.len(), outcome.label, outcome.rule, result.certified);
        if let Some(alloc) = &result.failing_allocation {
            println!("  witness at {:?}: fixed {:?} + adversarial {:?} -> {:?}", result.failing_anchor.unwrap(), alloc.fixed, alloc.adversarial, alloc.outcome);
        }
    }

    // a single mask as large as the image leaves the adversary nothing
    let whole = TilingConfig::new(DomainSize::square(16)?, MaskSpec::square(16)?, PatchSpec::square(3)?, 1);
    let set = replicated_tiling(&whole)?;
    let mut table = LookupTable::new(Label(0), 3)?;
    table.insert(&masked_views(&image, &set, &FillPolicy::Zero)?[0], Label(2))?;
    let result = certify(&image, Label(2), &set, &table, &options)?;
    println!("universal mask: certified={}", result.certified);
    assert!(result.certified);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
