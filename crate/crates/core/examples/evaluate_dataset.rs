// Clean and certified accuracy over a small on-disk dataset described by a
// `path,label` manifest, classified by mean brightness.
//
//     cargo run --example evaluate_dataset

use certmask::certify::{evaluate_manifest, AdversarySearch, CertifyOptions};
use certmask::classifier::{Label, MeanThreshold};
use certmask::dataset::{Manifest, ManifestEntry};
use certmask::geometry::{DomainSize, MaskSpec, PatchSpec};
use certmask::image::Image;
use certmask::masking::FillPolicy;
use certmask::tiling::{offset_tiling, TilingConfig};
use rand::{Rng, SeedableRng};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let classifier = MeanThreshold::new(vec![85, 170])?;

    let mut manifest = Manifest::default();
    for i in 0..12 {
        let level: u8 = rng.gen();
        let pixels = (0..20 * 20).map(|_| level.saturating_add(rng.gen_range(0..20))).collect();
        let name = format!("img{i:02}.pgm");
        Image::new(20, 20, 1, pixels)?.write(dir.path().join(&name))?;
        // labels are the brightness bucket, wrong for every fourth image
        let bucket = u32::from(level) * 3 / 256;
        let label = if i % 4 == 3 { (bucket + 1) % 3 } else { bucket };
        manifest.entries.push(ManifestEntry { path: name.into(), label: Label(label) });
    }
    let manifest_path = dir.path().join("manifest.csv");
    manifest.write(&manifest_path)?;

    // large masks with 3 x 3 offsets: at least 9 of the 16 votes are fixed at
    // every anchor, more than the adversary's 7
    let config = TilingConfig::new(DomainSize::square(20)?, MaskSpec::square(18)?, PatchSpec::square(2)?, 9).with_folds(3, 3);
    let set = offset_tiling(&config)?;
    for fill in [FillPolicy::Zero, FillPolicy::Mean] {
        let options = CertifyOptions { fill: fill.clone(), search: AdversarySearch::Exact };
        let summary = evaluate_manifest(&manifest_path, &set, &classifier, &options)?;
        println!(
            "{} masks, fill {fill:?}: clean {} ({}/{}), certified {} ({}/{})",
            set.len(),
            summary.clean_accuracy,
            summary.clean_correct,
            summary.total,
            summary.certified_accuracy,
            summary.certified_count,
            summary.total
        );
        assert!(summary.certified_count <= summary.clean_correct);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
