// A mask that fully covers a patch hides it completely: the masked patched
// image equals the masked clean image byte for byte, for every fill policy.
//
//     cargo run --example neutralization

use certmask::geometry::{fully_covers, Anchor, DomainSize, MaskPlacement, MaskSpec, PatchSpec};
use certmask::image::Image;
use certmask::masking::{apply_mask, apply_patch, FillPolicy};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let domain = DomainSize::square(24)?;
    let (mask, patch) = (MaskSpec::square(8)?, PatchSpec::square(4)?);
    let clean = Image::new(24, 24, 3, (0..24 * 24 * 3).map(|i| (i * 31 % 251) as u8).collect())?;
    let sticker = Image::filled(4, 4, 3, 255)?;
    let anchor = Anchor { ax: 10, ay: 12 };
    let patched = apply_patch(&clean, anchor, patch, &sticker)?;

    let cases = [
        ("inside", MaskPlacement::clipped(8, 10)),
        ("given as x0=-16", MaskPlacement::wrapped(-16, 10, domain)),
        ("one column short", MaskPlacement::clipped(11, 10)),
    ];
    for fill in [FillPolicy::Zero, FillPolicy::Mean, FillPolicy::Constant(vec![128, 64, 32])] {
        for (what, placement) in cases {
            let covers = fully_covers(placement, mask, anchor, patch, domain);
            let same = apply_mask(&clean, placement, mask, &fill)? == apply_mask(&patched, placement, mask, &fill)?;
            println!("{fill:?} {what:<16} covers={covers:<5} identical={same}");
            if covers {
                assert!(same);
            }
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
