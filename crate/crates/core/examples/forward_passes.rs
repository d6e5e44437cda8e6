// Counts classifier calls: one masking round makes n calls, the two-round
// double-masking pattern makes n + n^2.
//
//     cargo run --example forward_passes

use certmask::certify::{certify, double_masking_passes, CertifyOptions};
use certmask::classifier::{CallCounter, Constant, Label};
use certmask::geometry::{DomainSize, MaskSpec, PatchSpec};
use certmask::image::Image;
use certmask::masking::FillPolicy;
use certmask::tiling::{forward_pass_counts, single_cover_2d, TilingConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = TilingConfig::new(DomainSize::square(36)?, MaskSpec::square(8)?, PatchSpec::square(3)?, 1);
    let set = single_cover_2d(&config)?;
    let n = set.len() as u64;
    let image = Image::filled(36, 36, 1, 50)?;
    let counter = CallCounter::new(Constant::new(Label(0), 2)?);

    certify(&image, Label(0), &set, &counter, &CertifyOptions::default())?;
    let single = counter.calls();
    counter.reset();
    double_masking_passes(&image, &set, &counter, &FillPolicy::Zero)?;
    let double = counter.calls();

    println!("n = {n}: single round {single} calls, double masking {double} calls");
    let expected = forward_pass_counts(n);
    assert_eq!((single, double), (expected.certmask, expected.double_masking));
    assert_eq!((single, double), (36, 1332));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
