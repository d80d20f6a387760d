//! The same model with and without the 49-51 kHz band filter. Only fragments
//! whose peak-energy frequency falls in that band change label.
//!
//! ```bash
//! cargo run -p echomem --example model2_band_filter
//! ```

use echomem::pipeline::{self, classify_batch, FragmentSource};
use echomem::synth::{ClassSpec, CorpusSpec};
use echomem::{DynamicsConfig, EncodingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut corpus = CorpusSpec::pipistrelle_like(4).scaled(0.002);
    corpus.classes.push(ClassSpec {
        label: "MID".into(),
        center_hz: 50_000.0,
        count: 10,
    });
    let trained = CorpusSpec::pipistrelle_like(4);
    let exemplars: Vec<_> = (0..trained.classes.len()).map(|k| trained.exemplar(k)).collect();
    let model1 = pipeline::train(&exemplars, &EncodingConfig::default(), &DynamicsConfig::default())?;
    let model2 = model1.clone().with_band_reject(true);

    let inputs: Vec<_> = corpus.fragments().map(|f| FragmentSource::Wave(f.wave)).collect();
    let a = classify_batch(&model1, &inputs, 0, false)?;
    let b = classify_batch(&model2, &inputs, 0, false)?;
    println!("{:<20} {:>9} {:>9} {:>9}", "fragment", "F_maxE", "model 1", "model 2");
    for (x, y) in a.entries.iter().zip(&b.entries) {
        let f = x.outcome.as_ref().map_or(f64::NAN, |r| r.f_max_e);
        let mark = if x.label_str() != y.label_str() { "  *" } else { "" };
        println!("{:<20} {:>9.0} {:>9} {:>9}{mark}", x.source_id, f, x.label_str(), y.label_str());
    }
    Ok(())
}
