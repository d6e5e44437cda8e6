// Closed-form mask-count bounds next to the counts the constructions achieve.
//
//     cargo run --example bounds

use certmask::cli::{preset, PRESETS};
use certmask::tiling::{constructive_count, theoretical_bounds, Strategy, TilingConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:<14} {:>8} {:>10} {:>8} {:>8} {:>10} {:>8}", "preset", "kfold_lb", "replicated", "offset", "ratio", "built_rep", "built_off");
    for name in PRESETS {
        let (domain, mask, patch) = preset(name).expect("known preset");
        let config = TilingConfig { domain, mask, patch, k: 6, m: 3, n: 2 };
        let b = theoretical_bounds(&config)?;
        let built_rep = constructive_count(&config, Strategy::Replicated)?;
        // offset tiling needs at least m anchors of slack per mask
        let built_off = constructive_count(&config, Strategy::Offset).map_or("-".to_string(), |c| c.to_string());
        println!(
            "{name:<14} {:>8} {:>10} {:>8} {:>8.4} {:>10} {:>8}",
            b.kfold_lb,
            b.replicated_count,
            b.offset_count,
            b.approx_ratio.to_f64(),
            built_rep,
            built_off
        );
    }

    let (domain, mask, patch) = preset("imagenet-3pct").unwrap();
    let b = theoretical_bounds(&TilingConfig { domain, mask, patch, k: 6, m: 3, n: 2 })?;
    assert_eq!((b.kfold_lb, b.replicated_count, b.offset_count), (1044, 1176, 1080));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
