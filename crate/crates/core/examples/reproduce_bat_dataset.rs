//! Band-filtered two-exemplar run on a local copy of the public pipistrelle
//! pulse set.
//!
//! Lay the recordings out one folder per label, for example
//! `DATA/PIPI/*.wav`, `DATA/PIPY/*.wav` and `DATA/Silence/*.wav` (keep the
//! 404 longer silence files to match the usual 10384-file subset). Then
//!
//! ```bash
//! cargo run --release -p echomem --example reproduce_bat_dataset -- DATA [LABEL=exemplar.wav ...]
//! ```
//!
//! Without explicit exemplars the pulse nearest each class's median
//! peak-energy frequency is used. The published overall accuracy for this
//! setup is 0.80; the run reports whether it lands within 0.05 of that.
//! Setting `ECHOMEM_BAT_DATA=DATA` makes the acceptance run do the same.

use std::path::Path;

use echomem::dataset::{self, LabeledTree};
use echomem::wav::read_wav;
use echomem::EncodingConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let root = args
        .next()
        .or_else(|| std::env::var(dataset::REAL_DATA_ENV).ok())
        .ok_or("usage: reproduce_bat_dataset DATA [LABEL=exemplar.wav ...]")?;
    let tree = LabeledTree::scan(Path::new(&root))?;
    let cfg = EncodingConfig::default();
    println!("{} fragments, classes {:?}", tree.fragments.len(), tree.classes());

    let chosen: Vec<(String, String)> = args
        .map(|a| a.split_once('=').map(|(l, p)| (l.to_string(), p.to_string())).ok_or(format!("expected LABEL=PATH, got {a}")))
        .collect::<Result<_, _>>()?;
    let report = if chosen.is_empty() {
        for class in tree.classes() {
            let (_, wave) = dataset::typical_exemplar(&tree, &class, &cfg)?;
            println!("exemplar {class}: {}", wave.source_id);
        }
        dataset::run_model2(&tree, &cfg, 0)?
    } else {
        let exemplars = chosen
            .iter()
            .map(|(label, path)| Ok((label.clone(), read_wav(&std::fs::read(path)?, path.clone())?)))
            .collect::<Result<Vec<_>, Box<dyn std::error::Error>>>()?;
        dataset::run_model2_with(&tree, &exemplars, &cfg, 0)?
    };

    print!("\n{}", report.render_text());
    let within = (report.accuracy - 0.80).abs() <= 0.05;
    println!("\naccuracy {:.4} is {} 0.80 +/- 0.05", report.accuracy, if within { "within" } else { "outside" });
    Ok(())
}
