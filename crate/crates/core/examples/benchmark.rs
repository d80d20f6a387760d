//! Training and batch classification timings with peak resident memory, on
//! the synthetic corpus held in memory.
//!
//! ```bash
//! cargo run --release -p echomem --example benchmark -- [scale] [runs] [jobs]
//! ```

use echomem::bench::benchmark;
use echomem::pipeline::{self, FragmentSource};
use echomem::synth::CorpusSpec;
use echomem::{DynamicsConfig, EncodingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scale: f64 = args.next().map_or(Ok(1.0), |s| s.parse())?;
    let runs: usize = args.next().map_or(Ok(3), |s| s.parse())?;
    let jobs: usize = args.next().map_or(Ok(0), |s| s.parse())?;

    let corpus = CorpusSpec::pipistrelle_like(2024).scaled(scale);
    let exemplars: Vec<_> = (0..corpus.classes.len()).map(|k| corpus.exemplar(k)).collect();
    let model = pipeline::train(&exemplars, &EncodingConfig::default(), &DynamicsConfig::default())?;
    let inputs: Vec<_> = corpus.fragments().map(|f| FragmentSource::Wave(f.wave)).collect();
    print!("{}", benchmark(&model, &inputs, runs, jobs)?.render_text());
    Ok(())
}
