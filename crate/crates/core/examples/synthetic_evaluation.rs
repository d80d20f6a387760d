//! Train on one exemplar per class of a synthetic two-species corpus, classify
//! the whole corpus, and print the confusion matrix and classification report.
//!
//! ```bash
//! cargo run --release -p echomem --example synthetic_evaluation -- [scale] [seed]
//! ```
//!
//! `scale` shrinks the 10384-fragment corpus (default 0.1).

use echomem::eval::{self, LabeledId};
use echomem::pipeline::{self, FragmentSource};
use echomem::synth::CorpusSpec;
use echomem::{DynamicsConfig, EncodingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scale: f64 = args.next().map_or(Ok(0.1), |s| s.parse())?;
    let seed: u64 = args.next().map_or(Ok(2024), |s| s.parse())?;

    let corpus = CorpusSpec::pipistrelle_like(seed).scaled(scale);
    let exemplars: Vec<_> = (0..corpus.classes.len()).map(|k| corpus.exemplar(k)).collect();
    let model = pipeline::train(&exemplars, &EncodingConfig::default(), &DynamicsConfig::default())?;
    for (label, pattern) in model.class_labels.iter().zip(&model.stored_patterns) {
        println!("{label:>5} {pattern}");
    }

    let fragments: Vec<_> = corpus.fragments().collect();
    let truth: Vec<_> = fragments
        .iter()
        .map(|f| LabeledId::new(f.wave.source_id.clone(), f.truth.clone()))
        .collect();
    let inputs: Vec<_> = fragments.into_iter().map(|f| FragmentSource::Wave(f.wave)).collect();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let out = pipeline::classify_batch(&model, &inputs, jobs, false)?;

    let predictions: Vec<_> = out
        .entries
        .iter()
        .map(|e| LabeledId::new(e.source_id.clone(), e.label_str()))
        .collect();
    let cm = eval::score(&predictions, &truth)?;
    let mut csv = Vec::new();
    cm.write_csv(&mut csv)?;
    println!("\n{}", String::from_utf8(csv)?);
    let report = eval::report(&cm)?;
    print!("{}", report.render_text());
    if let Some(recall) = report.excluded.silence_recall() {
        println!("silence recall: {recall:.4}");
    }
    Ok(())
}
