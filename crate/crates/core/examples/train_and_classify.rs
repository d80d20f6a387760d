//! Train on two exemplar pulses, classify a handful of new fragments and
//! write the results CSV to stdout.
//!
//! ```bash
//! cargo run -p echomem --example train_and_classify
//! ```

use echomem::pipeline::{self, classify_batch, write_results_csv, FragmentSource};
use echomem::synth::CorpusSpec;
use echomem::{DynamicsConfig, EncodingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = CorpusSpec::pipistrelle_like(1).scaled(0.002);
    let exemplars: Vec<_> = (0..corpus.classes.len()).map(|k| corpus.exemplar(k)).collect();
    let model = pipeline::train(&exemplars, &EncodingConfig::default(), &DynamicsConfig::default())?;
    eprintln!("{} neurons, classes {:?}", model.n_neurons(), model.class_labels);

    let inputs: Vec<_> = corpus.fragments().map(|f| FragmentSource::Wave(f.wave)).collect();
    let out = classify_batch(&model, &inputs, 0, false)?;
    write_results_csv(&out.entries, std::io::stdout().lock())?;
    for (label, count) in out.summary.counts.iter().filter(|(_, c)| *c > 0) {
        eprintln!("{label}: {count}");
    }

    // A single fragment with its full trace.
    let one = corpus.fragment(0).wave;
    let result = pipeline::classify(&model, &one, true)?;
    let trace = result.trace.expect("network was run");
    eprintln!("\n{} -> {} after {} iterations", result.source_id, result.label, trace.iterations());
    for s in &trace.states {
        eprintln!("  {s}");
    }
    Ok(())
}
