// Drives an out-of-process classifier over the line-JSON stdio protocol. The
// child here is a few lines of POSIX shell that answers every request with
// label 1; any program that speaks the protocol can take its place.
//
//     cargo run --example external_classifier

use std::time::Duration;

use certmask::certify::{infer, predict_all};
use certmask::classifier::{Classifier, ExternalClassifier, Label};
use certmask::geometry::{DomainSize, MaskSpec, PatchSpec};
use certmask::image::Image;
use certmask::masking::FillPolicy;
use certmask::tiling::{replicated_tiling, TilingConfig};

const RESPONDER: &str = r#"
echo '{"ready": true, "classes": 3}'
while IFS= read -r line; do
  id=$(printf '%s' "$line" | sed -n 's/.*"id":\([0-9]*\).*/\1/p')
  echo "{\"id\": $id, \"label\": 1}"
done
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let command = ["sh".to_string(), "-c".to_string(), RESPONDER.to_string()];
    let classifier = ExternalClassifier::spawn(&command, Duration::from_secs(10))?;
    println!("child declares {} classes", classifier.classes());

    let config = TilingConfig::new(DomainSize::square(12)?, MaskSpec::square(6)?, PatchSpec::square(2)?, 1);
    let set = replicated_tiling(&config)?;
    let image = Image::filled(12, 12, 3, 90)?;
    let preds = predict_all(&image, &set, &classifier, &FillPolicy::Zero)?;
    let outcome = infer(&image, &set, &classifier, &FillPolicy::Zero)?;
    println!("{} masked views -> {:?}, aggregate {:?}", preds.len(), preds.labels(), outcome);
    assert_eq!(outcome.label, Label(1));

    let status = classifier.shutdown()?;
    println!("child exited with {status}");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
