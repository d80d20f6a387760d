//! Associative-memory classification of short acoustic fragments.
//!
//! One exemplar recording per class is reduced to its spectral peaks, each
//! peak firing the neuron that covers its frequency band. The resulting
//! bipolar patterns are stored in a Hopfield network by the Hebbian rule.
//! A new fragment is encoded the same way, used as the initial network
//! state, and relaxed until the state stops changing. A final state equal
//! to a stored pattern yields that class; anything else is `UnID`.
//!
//! ```
//! use echomem::{pipeline, spectrum::EncodingConfig, hopfield::DynamicsConfig, synth};
//!
//! let a = synth::tone_burst("a", 46_000.0, 0.5, 256_000, 1024);
//! let b = synth::tone_burst("b", 55_000.0, 0.5, 256_000, 1024);
//! let model = pipeline::train(
//!     &[("A".into(), a.clone()), ("B".into(), b)],
//!     &EncodingConfig::default(),
//!     &DynamicsConfig::default(),
//! )?;
//! let result = pipeline::classify(&model, &a, false)?;
//! assert_eq!(result.label.as_str(), "A");
//! # Ok::<(), echomem::Error>(())
//! ```

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod hopfield;
pub mod model;
pub mod pipeline;
pub mod spectrum;
pub mod synth;
pub mod wav;

pub use error::{Error, Result};
pub use hopfield::{BipolarPattern, DynamicsConfig, MatchKind, MatchOutcome, NetworkTrace, WeightMatrix};
pub use model::TrainedModel;
pub use pipeline::{ClassificationResult, FragmentSource, Label};
pub use spectrum::{EncodingConfig, FrequencyBandMap, PowerSpectrum};
pub use wav::Waveform;
