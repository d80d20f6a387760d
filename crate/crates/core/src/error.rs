use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // network
    #[error("no training patterns supplied")]
    EmptyPatternList,
    #[error("pattern {index} has length {found}, expected {expected}")]
    PatternLengthMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("training pattern {index} contains a neutral (0) entry at neuron {neuron}")]
    ZeroInTrainingPattern { index: usize, neuron: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid weight matrix: {0}")]
    InvalidWeights(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // wav
    #[error("malformed WAV header: {0}")]
    MalformedWav(String),
    #[error("unsupported WAV codec (format tag {format_tag:#06x}, {bits_per_sample} bits)")]
    UnsupportedCodec {
        format_tag: u16,
        bits_per_sample: u16,
    },
    #[error("WAV file contains no sample frames")]
    EmptyWavData,

    // spectrum / encoding
    #[error("fragment has {len} samples, at least 2 are required")]
    FragmentTooShort { len: usize },
    #[error("band {lo} Hz..{hi} Hz lies outside the spectrum range 0..{nyquist} Hz")]
    BandOutsideSpectrum { lo: f64, hi: f64, nyquist: f64 },

    // training / classification
    #[error("exemplar for class `{class}` is silent")]
    SilentExemplar { class: String },
    #[error("classes `{class}` and `{other}` encode to the same pattern")]
    DuplicatePattern { class: String, other: String },
    #[error("invalid class label `{0}`")]
    InvalidLabel(String),
    #[error("{p} patterns exceed the hard capacity limit for {n} neurons")]
    CapacityExceeded { p: usize, n: usize },
    #[error("fragment `{id}`: {source}")]
    Fragment {
        id: String,
        #[source]
        source: Box<Error>,
    },

    // model file
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },
    #[error("model file is truncated")]
    Truncated,
    #[error("model checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("corrupt model: {0}")]
    CorruptModel(String),

    // evaluation
    #[error("fragment `{id}` has unknown truth label `{label}`")]
    UnknownTruthLabel { id: String, label: String },
    #[error("fragment `{id}` has unknown predicted label `{label}`")]
    UnknownPredictedLabel { id: String, label: String },
    #[error("prediction `{id}` has no truth entry")]
    IdMismatch { id: String },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("benchmark needs at least one input and one run")]
    EmptyBenchmark,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_fragment(self, id: &str) -> Self {
        match self {
            e @ Error::Fragment { .. } => e,
            other => Error::Fragment {
                id: id.to_string(),
                source: Box::new(other),
            },
        }
    }

    /// True for errors caused by the filesystem rather than by data content.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Fragment { source, .. } => source.is_io(),
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
