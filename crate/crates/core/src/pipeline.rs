//! Training from exemplars and fragment classification.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hopfield::{self, DynamicsConfig, MatchKind, MatchOutcome, NetworkTrace};
use crate::model::TrainedModel;
use crate::spectrum::{self, EncodingConfig};
use crate::wav::{self, Waveform};

pub const UNID: &str = "UnID";
pub const SILENCE: &str = "Silence";
pub const FILTERED: &str = "Filtered";
/// CSV label for fragments that could not be decoded or encoded.
pub const ERROR: &str = "Error";

const RESERVED_LABELS: [&str; 4] = [UNID, SILENCE, FILTERED, ERROR];

/// Soft capacity bound, as a fraction of the neuron count.
pub const CAPACITY_WARN_RATIO: f64 = 0.15;
/// Hard capacity bound.
pub const CAPACITY_REFUSE_RATIO: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Class(String),
    UnId,
    Silence,
    Filtered,
}

impl Label {
    pub fn as_str(&self) -> &str {
        match self {
            Label::Class(name) => name,
            Label::UnId => UNID,
            Label::Silence => SILENCE,
            Label::Filtered => FILTERED,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub source_id: String,
    pub label: Label,
    /// Absent when the fragment never reached the network.
    pub matched: Option<MatchOutcome>,
    pub iterations: usize,
    pub f_max_e: f64,
    pub trace: Option<NetworkTrace>,
}

fn validate_label(label: &str) -> Result<()> {
    let bad = label.is_empty()
        || label.trim() != label
        || label.contains([',', '"', '\n', '\r', '='])
        || RESERVED_LABELS.iter().any(|r| r.eq_ignore_ascii_case(label));
    if bad {
        return Err(Error::InvalidLabel(label.to_string()));
    }
    Ok(())
}

/// One-shot training: each exemplar's encoding becomes a stored pattern.
pub fn train(
    exemplars: &[(String, Waveform)],
    encoding: &EncodingConfig,
    dynamics: &DynamicsConfig,
) -> Result<TrainedModel> {
    encoding.validate()?;
    let n = encoding.n_neurons;
    dynamics.validate(n)?;
    if exemplars.is_empty() {
        return Err(Error::EmptyPatternList);
    }
    let p = exemplars.len();
    if p as f64 > CAPACITY_REFUSE_RATIO * n as f64 {
        return Err(Error::CapacityExceeded { p, n });
    }
    if p as f64 > CAPACITY_WARN_RATIO * n as f64 {
        warn!("{p} classes on {n} neurons exceeds the ~0.15N recall capacity");
    }

    let band_map = encoding.band_map();
    let mut labels: Vec<String> = Vec::with_capacity(p);
    let mut patterns = Vec::with_capacity(p);
    for (class, wave) in exemplars {
        validate_label(class)?;
        if labels.contains(class) {
            return Err(Error::InvalidLabel(format!("{class} (duplicate class)")));
        }
        let spec = spectrum::compute_spectrum(wave, encoding).map_err(|e| e.in_fragment(&wave.source_id))?;
        if spectrum::is_silence(&spec, encoding) {
            return Err(Error::SilentExemplar { class: class.clone() });
        }
        let pattern = spectrum::encode_pattern(&spec, &band_map).map_err(|e| e.in_fragment(&wave.source_id))?;
        if let Some(k) = patterns.iter().position(|q| q == &pattern) {
            return Err(Error::DuplicatePattern {
                class: class.clone(),
                other: labels[k].clone(),
            });
        }
        labels.push(class.clone());
        patterns.push(pattern);
    }
    let weights = hopfield::hebbian_train(&patterns)?;
    Ok(TrainedModel {
        weights,
        stored_patterns: patterns,
        class_labels: labels,
        band_map,
        encoding: encoding.clone(),
        dynamics: dynamics.clone(),
        band_reject: false,
    })
}

/// Spectrum → silence check → optional band reject → encode → recall → match.
pub fn classify(model: &TrainedModel, wave: &Waveform, want_trace: bool) -> Result<ClassificationResult> {
    let id = &wave.source_id;
    let spec = spectrum::compute_spectrum(wave, &model.encoding).map_err(|e| e.in_fragment(id))?;
    let early = |label| ClassificationResult {
        source_id: id.clone(),
        label,
        matched: None,
        iterations: 0,
        f_max_e: spec.f_max_e,
        trace: None,
    };
    if spectrum::is_silence(&spec, &model.encoding) {
        return Ok(early(Label::Silence));
    }
    if model.band_reject && spectrum::band_reject_49_51(&spec) {
        return Ok(early(Label::Filtered));
    }
    let initial = spectrum::encode_pattern(&spec, &model.band_map).map_err(|e| e.in_fragment(id))?;
    let trace = hopfield::run_to_convergence(&model.weights, &initial, &model.dynamics).map_err(|e| e.in_fragment(id))?;
    let mut matched = hopfield::match_state(trace.final_state(), &model.stored_patterns)?;
    if !trace.converged {
        matched.kind = MatchKind::Spurious;
    }
    let label = match matched.kind {
        MatchKind::Retrieval(k) => Label::Class(model.class_labels[k].clone()),
        _ => Label::UnId,
    };
    Ok(ClassificationResult {
        source_id: id.clone(),
        label,
        matched: Some(matched),
        iterations: trace.iterations(),
        f_max_e: spec.f_max_e,
        trace: want_trace.then_some(trace),
    })
}

/// Where a batch fragment comes from.
#[derive(Debug, Clone)]
pub enum FragmentSource {
    File { id: String, path: PathBuf },
    Bytes { id: String, bytes: Vec<u8> },
    Wave(Waveform),
}

impl FragmentSource {
    pub fn id(&self) -> &str {
        match self {
            FragmentSource::File { id, .. } | FragmentSource::Bytes { id, .. } => id,
            FragmentSource::Wave(w) => &w.source_id,
        }
    }

    pub fn load(&self) -> Result<Waveform> {
        match self {
            FragmentSource::File { id, path } => {
                let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
                wav::read_wav(&bytes, id.clone())
            }
            FragmentSource::Bytes { id, bytes } => wav::read_wav(bytes, id.clone()),
            FragmentSource::Wave(w) => Ok(w.clone()),
        }
    }
}

/// Collects `.wav` files (any case) under `root`, sorted by path. A file
/// root yields itself. Ids are paths relative to `root` with `/` separators.
pub fn discover_wavs(root: &Path) -> Result<Vec<FragmentSource>> {
    if root.is_file() {
        let id = root
            .file_name()
            .map_or_else(|| root.display().to_string(), |n| n.to_string_lossy().into_owned());
        return Ok(vec![FragmentSource::File {
            id,
            path: root.to_path_buf(),
        }]);
    }
    let mut paths = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into())
        })?;
        let is_wav = entry
            .path()
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("wav"));
        if entry.file_type().is_file() && is_wav {
            paths.push(entry.into_path());
        }
    }
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|path| {
            let rel = path.strip_prefix(root).unwrap_or(&path);
            let id = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            FragmentSource::File { id, path }
        })
        .collect())
}

#[derive(Debug)]
pub struct BatchEntry {
    pub source_id: String,
    pub outcome: Result<ClassificationResult>,
}

impl BatchEntry {
    /// Label string as written to CSV.
    pub fn label_str(&self) -> &str {
        match &self.outcome {
            Ok(r) => r.label.as_str(),
            Err(_) => ERROR,
        }
    }
}

/// Per-label totals in a fixed order: classes, UnID, Silence, Filtered, Error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchSummary {
    pub counts: Vec<(String, usize)>,
    pub total: usize,
}

impl BatchSummary {
    pub fn count(&self, label: &str) -> usize {
        self.counts.iter().find(|(l, _)| l == label).map_or(0, |(_, c)| *c)
    }
}

#[derive(Debug)]
pub struct BatchOutput {
    pub entries: Vec<BatchEntry>,
    pub summary: BatchSummary,
}

pub fn summarize(model: &TrainedModel, entries: &[BatchEntry]) -> BatchSummary {
    let mut counts: Vec<(String, usize)> = model
        .class_labels
        .iter()
        .map(String::as_str)
        .chain(RESERVED_LABELS)
        .map(|l| (l.to_string(), 0))
        .collect();
    for e in entries {
        let label = e.label_str();
        if let Some(slot) = counts.iter_mut().find(|(l, _)| l == label) {
            slot.1 += 1;
        }
    }
    BatchSummary {
        counts,
        total: entries.len(),
    }
}

/// Classifies every source on `jobs` worker threads (0 uses every core).
/// Output order matches input order; a failing fragment fills its own slot
/// with the error.
pub fn classify_batch(
    model: &TrainedModel,
    inputs: &[FragmentSource],
    jobs: usize,
    want_trace: bool,
) -> Result<BatchOutput> {
    let run_one = |src: &FragmentSource| BatchEntry {
        source_id: src.id().to_string(),
        outcome: src
            .load()
            .map_err(|e| e.in_fragment(src.id()))
            .and_then(|w| classify(model, &w, want_trace)),
    };
    let entries: Vec<BatchEntry> = if jobs == 1 {
        inputs.iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
        pool.install(|| inputs.par_iter().map(run_one).collect())
    };
    let summary = summarize(model, &entries);
    Ok(BatchOutput { entries, summary })
}

pub(crate) fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// `source_id,label,iterations,overlap`; overlap is empty when the network
/// was not run.
pub fn write_results_csv<W: Write>(entries: &[BatchEntry], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["source_id", "label", "iterations", "overlap"])?;
    for e in entries {
        let (iterations, overlap) = match &e.outcome {
            Ok(r) => (
                r.iterations.to_string(),
                r.matched.map_or_else(String::new, |m| format!("{:.6}", m.overlap)),
            ),
            Err(_) => (String::new(), String::new()),
        };
        w.write_record([e.source_id.as_str(), e.label_str(), &iterations, &overlap])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Iteration-by-iteration view of a recall run: `iteration,energy,state`.
pub fn write_trace_csv<W: Write>(trace: &NetworkTrace, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["iteration", "energy", "state"])?;
    for (i, (state, energy)) in trace.states.iter().zip(&trace.energies).enumerate() {
        w.write_record([i.to_string(), format!("{energy:.9}"), state.glyphs()])?;
    }
    w.flush().map_err(|e| Error::io("<trace output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn exemplar(class: &str, freq: f64) -> (String, Waveform) {
        (class.to_string(), synth::tone_burst(class, freq, 0.5, 256_000, 1024))
    }

    fn two_class_model() -> TrainedModel {
        train(
            &[exemplar("A", 46_000.0), exemplar("B", 55_000.0)],
            &EncodingConfig::default(),
            &DynamicsConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn self_recall() {
        let m = two_class_model();
        assert_eq!(m.n_patterns(), 2);
        assert_eq!(m.n_neurons(), 64);
        for (class, f) in [("A", 46_000.0), ("B", 55_000.0)] {
            let r = classify(&m, &exemplar(class, f).1, true).unwrap();
            assert_eq!(r.label, Label::Class(class.into()));
            assert!(r.iterations <= 2);
            assert!(r.trace.unwrap().converged);
        }
    }

    #[test]
    fn single_exemplar_model() {
        let m = train(&[exemplar("A", 46_000.0)], &EncodingConfig::default(), &DynamicsConfig::default()).unwrap();
        assert_eq!(m.n_patterns(), 1);
    }

    #[test]
    fn silent_exemplar_is_rejected() {
        let silent = ("Q".to_string(), Waveform::new("q", vec![0.0; 512], 256_000).unwrap());
        let err = train(&[exemplar("A", 46_000.0), silent], &EncodingConfig::default(), &DynamicsConfig::default());
        assert!(matches!(err, Err(Error::SilentExemplar { class }) if class == "Q"));
    }

    #[test]
    fn coarse_bands_collide() {
        // 8 neurons over 35-75 kHz gives 5 kHz bands; 46 and 48 kHz share band 2.
        let cfg = EncodingConfig {
            n_neurons: 8,
            ..Default::default()
        };
        let err = train(&[exemplar("A", 46_000.0), exemplar("B", 48_000.0)], &cfg, &DynamicsConfig::default());
        assert!(matches!(err, Err(Error::DuplicatePattern { class, other }) if class == "B" && other == "A"));
    }

    #[test]
    fn labels_are_validated() {
        for bad in ["UnID", "silence", "", "a,b", " A"] {
            let err = train(&[exemplar(bad, 46_000.0)], &EncodingConfig::default(), &DynamicsConfig::default());
            assert!(matches!(err, Err(Error::InvalidLabel(_))), "{bad:?}");
        }
    }

    #[test]
    fn capacity_refusal() {
        let cfg = EncodingConfig {
            n_neurons: 4,
            band_lo: 40_000.0,
            band_hi: 60_000.0,
            ..Default::default()
        };
        let ex: Vec<_> = [41_000.0, 46_000.0, 51_000.0]
            .iter()
            .enumerate()
            .map(|(i, &f)| exemplar(&format!("C{i}"), f))
            .collect();
        assert!(matches!(
            train(&ex, &cfg, &DynamicsConfig::default()),
            Err(Error::CapacityExceeded { p: 3, n: 4 })
        ));
    }

    #[test]
    fn silence_short_circuits() {
        let m = two_class_model();
        let r = classify(&m, &Waveform::new("z", vec![0.0; 700], 256_000).unwrap(), true).unwrap();
        assert_eq!(r.label, Label::Silence);
        assert!(r.trace.is_none() && r.matched.is_none());
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn band_filter() {
        let m = two_class_model();
        let w = synth::tone_burst("f", 50_000.0, 0.5, 256_000, 1024);
        assert_ne!(classify(&m, &w, false).unwrap().label, Label::Filtered);
        let m2 = m.with_band_reject(true);
        let r = classify(&m2, &w, false).unwrap();
        assert_eq!(r.label, Label::Filtered);
        assert!(r.matched.is_none());
    }

    #[test]
    fn batch_empty_and_errors() {
        let m = two_class_model();
        let out = classify_batch(&m, &[], 4, false).unwrap();
        assert!(out.entries.is_empty());
        assert_eq!(out.summary.total, 0);
        assert!(out.summary.counts.iter().all(|(_, c)| *c == 0));

        let inputs = vec![
            FragmentSource::Wave(exemplar("A", 46_000.0).1),
            FragmentSource::Bytes {
                id: "broken".into(),
                bytes: b"not a wav".to_vec(),
            },
            FragmentSource::Wave(exemplar("B", 55_000.0).1),
        ];
        let out = classify_batch(&m, &inputs, 2, false).unwrap();
        assert_eq!(out.entries[1].label_str(), ERROR);
        assert!(matches!(&out.entries[1].outcome, Err(Error::Fragment { id, .. }) if id == "broken"));
        assert_eq!(out.summary.count("A"), 1);
        assert_eq!(out.summary.count("B"), 1);
        assert_eq!(out.summary.count(ERROR), 1);

        let mut csv = Vec::new();
        write_results_csv(&out.entries, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "source_id,label,iterations,overlap");
        assert_eq!(lines[2], "broken,Error,,");
        assert!(lines[1].starts_with("A,A,1,1.000000"), "{}", lines[1]);
    }
}
