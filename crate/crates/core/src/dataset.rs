//! Labelled recordings kept one folder per class, the layout of the public
//! pipistrelle pulse set, and the two-exemplar band-filtered run on it.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{self, ClassificationReport, LabeledId};
use crate::hopfield::DynamicsConfig;
use crate::pipeline::{self, classify_batch, discover_wavs, FragmentSource, SILENCE};
use crate::spectrum::{compute_spectrum, is_silence, EncodingConfig};
use crate::wav::Waveform;

/// Environment variable naming a local copy of the dataset.
pub const REAL_DATA_ENV: &str = "ECHOMEM_BAT_DATA";

/// Every `.wav` under `root/<label>/`, with ids `<label dir>/<relative path>`.
/// A folder named `silence` or `silences` (any case) holds `Silence` truth.
#[derive(Debug, Clone)]
pub struct LabeledTree {
    pub fragments: Vec<FragmentSource>,
    pub truth: Vec<LabeledId>,
}

impl LabeledTree {
    pub fn scan(root: &Path) -> Result<Self> {
        let mut dirs: Vec<_> = std::fs::read_dir(root)
            .map_err(|e| Error::io(root, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        dirs.sort();
        let mut fragments = Vec::new();
        let mut truth = Vec::new();
        for dir in dirs {
            let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let label = if name.eq_ignore_ascii_case("silence") || name.eq_ignore_ascii_case("silences") {
                SILENCE.to_string()
            } else {
                name.clone()
            };
            for src in discover_wavs(&dir)? {
                let FragmentSource::File { id, path } = src else { continue };
                let id = format!("{name}/{id}");
                truth.push(LabeledId::new(id.clone(), label.clone()));
                fragments.push(FragmentSource::File { id, path });
            }
        }
        if fragments.is_empty() {
            return Err(Error::InvalidConfig(format!("{}: no .wav files in class folders", root.display())));
        }
        Ok(LabeledTree { fragments, truth })
    }

    /// Sorted distinct class labels, silence excluded.
    pub fn classes(&self) -> Vec<String> {
        let mut c: Vec<String> = self.truth.iter().filter(|t| t.label != SILENCE).map(|t| t.label.clone()).collect();
        c.sort();
        c.dedup();
        c
    }
}

/// The fragment of `class` whose peak-energy frequency is nearest the class
/// median; ties go to the louder fragment, then the smaller id. Silent or
/// unreadable fragments are never chosen.
pub fn typical_exemplar(tree: &LabeledTree, class: &str, cfg: &EncodingConfig) -> Result<(String, Waveform)> {
    let mut candidates: Vec<(f64, f64, Waveform)> = tree
        .fragments
        .par_iter()
        .zip(&tree.truth)
        .filter(|(_, t)| t.label == class)
        .filter_map(|(src, _)| {
            let wave = src.load().ok()?;
            let s = compute_spectrum(&wave, cfg).ok()?;
            (!is_silence(&s, cfg)).then(|| (s.f_max_e, s.max_power_in(cfg.band_lo, cfg.band_hi), wave))
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::InvalidConfig(format!("no usable fragment of class {class}")));
    }
    let mut freqs: Vec<f64> = candidates.iter().map(|c| c.0).collect();
    freqs.sort_by(f64::total_cmp);
    let median = freqs[freqs.len() / 2];
    candidates.sort_by(|a, b| {
        (a.0 - median)
            .abs()
            .total_cmp(&(b.0 - median).abs())
            .then(b.1.total_cmp(&a.1))
            .then_with(|| a.2.source_id.cmp(&b.2.source_id))
    });
    let (_, _, wave) = candidates.swap_remove(0);
    Ok((class.to_string(), wave))
}

/// Trains on one typical exemplar per class, classifies every other fragment
/// with the 49-51 kHz filter on, and scores against the folder labels.
pub fn run_model2(tree: &LabeledTree, cfg: &EncodingConfig, jobs: usize) -> Result<ClassificationReport> {
    let exemplars = tree
        .classes()
        .iter()
        .map(|c| typical_exemplar(tree, c, cfg))
        .collect::<Result<Vec<_>>>()?;
    run_model2_with(tree, &exemplars, cfg, jobs)
}

/// As [`run_model2`] with caller-chosen exemplars; fragments whose id equals
/// an exemplar's id are left out of the test set.
pub fn run_model2_with(
    tree: &LabeledTree,
    exemplars: &[(String, Waveform)],
    cfg: &EncodingConfig,
    jobs: usize,
) -> Result<ClassificationReport> {
    let model = pipeline::train(exemplars, cfg, &DynamicsConfig::default())?.with_band_reject(true);
    let held_out = |id: &str| exemplars.iter().any(|(_, w)| w.source_id == id);
    let (inputs, truth): (Vec<FragmentSource>, Vec<LabeledId>) = tree
        .fragments
        .iter()
        .zip(&tree.truth)
        .filter(|(src, _)| !held_out(src.id()))
        .map(|(s, t)| (s.clone(), t.clone()))
        .unzip();
    let out = classify_batch(&model, &inputs, jobs, false)?;
    let preds: Vec<LabeledId> = out
        .entries
        .iter()
        .map(|e| LabeledId::new(e.source_id.clone(), e.label_str()))
        .collect();
    eval::report(&eval::score(&preds, &truth)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::tone_burst;
    use crate::wav::{encode_wav, SampleFormat};

    #[test]
    fn folder_labels_and_typical_exemplar() {
        let dir = tempfile::tempdir().unwrap();
        let write = |sub: &str, name: &str, f: f64| {
            let d = dir.path().join(sub);
            std::fs::create_dir_all(&d).unwrap();
            let w = tone_burst(name, f, 0.5, 256_000, 1024);
            std::fs::write(d.join(name), encode_wav(&w.samples, 1, 256_000, SampleFormat::I16)).unwrap();
        };
        write("LO", "a.wav", 45_000.0);
        write("LO", "b.wav", 46_000.0);
        write("LO", "c.wav", 47_000.0);
        write("HI", "d.wav", 55_000.0);
        write("Silence", "s.wav", 0.0);
        let tree = LabeledTree::scan(dir.path()).unwrap();
        assert_eq!(tree.classes(), ["HI", "LO"]);
        assert_eq!(tree.truth.iter().find(|t| t.source_id == "Silence/s.wav").unwrap().label, SILENCE);
        let (label, wave) = typical_exemplar(&tree, "LO", &EncodingConfig::default()).unwrap();
        assert_eq!((label.as_str(), wave.source_id.as_str()), ("LO", "LO/b.wav"));

        let report = run_model2(&tree, &EncodingConfig::default(), 1).unwrap();
        assert_eq!(report.total, 2);
        assert_eq!(report.excluded.silence_detected, 1);
    }
}
