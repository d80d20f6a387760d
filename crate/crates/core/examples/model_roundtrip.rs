//! Save a trained model, read it back, and see how damaged files are rejected.
//!
//! ```bash
//! cargo run -p echomem --example model_roundtrip
//! ```

use echomem::model::{load_model, save_model, MAGIC};
use echomem::pipeline;
use echomem::synth::tone_burst;
use echomem::{DynamicsConfig, EncodingConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let exemplars = vec![
        ("A".to_string(), tone_burst("a", 46_000.0, 0.5, 256_000, 1024)),
        ("B".to_string(), tone_burst("b", 55_000.0, 0.5, 256_000, 1024)),
    ];
    let model = pipeline::train(&exemplars, &EncodingConfig::default(), &DynamicsConfig::default())?;
    let bytes = save_model(&model);
    println!("{} bytes, magic {:?}", bytes.len(), String::from_utf8_lossy(&MAGIC[..7]));
    assert_eq!(load_model(&bytes)?, model);
    println!("reloaded model is identical");

    let mut version = bytes.clone();
    version[8] ^= 0xff;
    let mut flipped = bytes.clone();
    flipped[40] ^= 0x01;
    let truncated = &bytes[..bytes.len() / 2];
    for (what, data) in [("version byte changed", &version[..]), ("one bit flipped", &flipped[..]), ("truncated", truncated)] {
        match load_model(data) {
            Ok(_) => println!("{what}: loaded?"),
            Err(e) => println!("{what}: {e}"),
        }
    }
    Ok(())
}
