//! Synthetic echolocation-like fragments for tests, examples and desk-scale
//! experiments.
//!
//! Pulses are short downward FM sweeps with a sinusoidal frequency wobble
//! and a cosine taper, embedded in white background noise at a chosen SNR.
//! The wobble splits the spectrum into a few neighbouring peaks, which gives
//! each class a multi-band signature instead of a single band. Each fragment draws from its
//! own ChaCha stream, so corpus generation is reproducible and independent
//! of generation order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::wav::Waveform;

/// Plain sinusoid, no taper and no noise.
pub fn tone_burst(id: &str, freq_hz: f64, amplitude: f64, sample_rate: u32, len: usize) -> Waveform {
    let samples = (0..len)
        .map(|n| amplitude * (2.0 * PI * freq_hz * n as f64 / f64::from(sample_rate)).sin())
        .collect();
    Waveform::new(id, samples, sample_rate).expect("positive sample rate")
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    pub center_hz: f64,
    /// Total sweep width; the pulse runs from `center + sweep/2` down to `center - sweep/2`.
    pub sweep_hz: f64,
    pub duration_s: f64,
    pub amplitude: f64,
    /// Rate of the sinusoidal frequency wobble.
    pub vibrato_hz: f64,
    /// Modulation index of the wobble in radians; 0 gives a plain sweep.
    pub vibrato_index: f64,
}

/// FM pulse samples with a 10% raised-cosine taper at each end.
pub fn fm_pulse(shape: &PulseShape, sample_rate: u32) -> Vec<f64> {
    let fs = f64::from(sample_rate);
    let len = ((shape.duration_s * fs).round() as usize).max(2);
    let taper = ((len as f64 * 0.1) as usize).max(1);
    let f_start = shape.center_hz + shape.sweep_hz / 2.0;
    let rate = -shape.sweep_hz / shape.duration_s;
    (0..len)
        .map(|n| {
            let t = n as f64 / fs;
            let phase = 2.0 * PI * (f_start * t + 0.5 * rate * t * t)
                + shape.vibrato_index * (2.0 * PI * shape.vibrato_hz * t).sin();
            let edge = n.min(len - 1 - n);
            let env = if edge < taper {
                0.5 - 0.5 * (PI * edge as f64 / taper as f64).cos()
            } else {
                1.0
            };
            shape.amplitude * env * phase.sin()
        })
        .collect()
}

fn add_noise(samples: &mut [f64], sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma <= 0.0 {
        return;
    }
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    for s in samples.iter_mut() {
        *s += normal.sample(rng);
    }
}

fn rms(samples: &[f64]) -> f64 {
    (samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64).sqrt()
}

/// A pulse padded with `pad_s` of background on either side, with white
/// noise at `snr_db` relative to the pulse RMS.
pub fn noisy_pulse(id: &str, shape: &PulseShape, sample_rate: u32, pad_s: f64, snr_db: f64, rng: &mut ChaCha8Rng) -> Waveform {
    let pulse = fm_pulse(shape, sample_rate);
    let sigma = rms(&pulse) / 10f64.powf(snr_db / 20.0);
    let pad = (pad_s * f64::from(sample_rate)).round() as usize;
    let mut samples = vec![0.0; pad];
    samples.extend_from_slice(&pulse);
    samples.resize(samples.len() + pad, 0.0);
    add_noise(&mut samples, sigma, rng);
    Waveform::new(id, samples, sample_rate).expect("positive sample rate")
}

/// Background noise only.
pub fn background(id: &str, sigma: f64, len: usize, sample_rate: u32, rng: &mut ChaCha8Rng) -> Waveform {
    let mut samples = vec![0.0; len];
    add_noise(&mut samples, sigma, rng);
    Waveform::new(id, samples, sample_rate).expect("positive sample rate")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassSpec {
    pub label: String,
    pub center_hz: f64,
    pub count: usize,
}

/// Parameters of a synthetic labelled corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub classes: Vec<ClassSpec>,
    pub silences: usize,
    pub sample_rate: u32,
    pub snr_db: f64,
    pub seed: u64,
    /// Per-fragment centre frequency offset is uniform in ±this.
    pub center_jitter_hz: f64,
    pub sweep_hz: f64,
    pub vibrato_hz: f64,
    pub vibrato_index: f64,
    pub duration_ms: (f64, f64),
    pub amplitude: (f64, f64),
    pub pad_ms: f64,
    /// Silence fragments run for this many milliseconds.
    pub silence_ms: (f64, f64),
}

impl CorpusSpec {
    /// Two classes at 46 and 55 kHz plus silences, in the proportions of the
    /// public pipistrelle pulse set (4916 / 5064 / 404).
    pub fn pipistrelle_like(seed: u64) -> Self {
        CorpusSpec {
            classes: vec![
                ClassSpec {
                    label: "PIPI".into(),
                    center_hz: 46_000.0,
                    count: 4916,
                },
                ClassSpec {
                    label: "PIPY".into(),
                    center_hz: 55_000.0,
                    count: 5064,
                },
            ],
            silences: 404,
            sample_rate: 256_000,
            snr_db: 20.0,
            seed,
            center_jitter_hz: 1_000.0,
            sweep_hz: 2_000.0,
            // Index 1.43 puts the carrier and first sidebands at about equal power.
            vibrato_hz: 900.0,
            vibrato_index: 1.43,
            duration_ms: (2.0, 6.0),
            amplitude: (0.05, 0.5),
            pad_ms: 0.5,
            silence_ms: (20.0, 100.0),
        }
    }

    /// Same shape with every count scaled down, at least one per group.
    pub fn scaled(mut self, factor: f64) -> Self {
        for c in &mut self.classes {
            c.count = ((c.count as f64 * factor).round() as usize).max(1);
        }
        self.silences = ((self.silences as f64 * factor).round() as usize).max(1);
        self
    }

    pub fn len(&self) -> usize {
        self.classes.iter().map(|c| c.count).sum::<usize>() + self.silences
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn rng_for(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Clean prototype pulse of class `k`, for training.
    pub fn exemplar(&self, k: usize) -> (String, Waveform) {
        let class = &self.classes[k];
        let shape = PulseShape {
            center_hz: class.center_hz,
            sweep_hz: self.sweep_hz,
            duration_s: 0.5e-3 * (self.duration_ms.0 + self.duration_ms.1),
            amplitude: self.amplitude.1,
            vibrato_hz: self.vibrato_hz,
            vibrato_index: self.vibrato_index,
        };
        let mut rng = self.rng_for(usize::MAX - k);
        let id = format!("exemplar_{}", class.label.to_lowercase());
        (class.label.clone(), noisy_pulse(&id, &shape, self.sample_rate, self.pad_ms * 1e-3, self.snr_db, &mut rng))
    }

    /// Labelled fragment `index`; classes come first in declaration order,
    /// then silences.
    pub fn fragment(&self, index: usize) -> LabeledFragment {
        let mut rng = self.rng_for(index);
        let mut offset = 0;
        for class in &self.classes {
            if index < offset + class.count {
                let id = format!("{}_{:05}.wav", class.label.to_lowercase(), index - offset);
                let shape = PulseShape {
                    center_hz: class.center_hz + rng.gen_range(-1.0..=1.0) * self.center_jitter_hz,
                    sweep_hz: self.sweep_hz,
                    duration_s: rng.gen_range(self.duration_ms.0..=self.duration_ms.1) * 1e-3,
                    amplitude: rng.gen_range(self.amplitude.0..=self.amplitude.1),
                    vibrato_hz: self.vibrato_hz,
                    vibrato_index: self.vibrato_index,
                };
                let wave = noisy_pulse(&id, &shape, self.sample_rate, self.pad_ms * 1e-3, self.snr_db, &mut rng);
                return LabeledFragment {
                    truth: class.label.clone(),
                    wave,
                };
            }
            offset += class.count;
        }
        assert!(index < offset + self.silences, "fragment index {index} out of range");
        let id = format!("silence_{:05}.wav", index - offset);
        // Background level matches the noise floor of the loudest pulses.
        let sigma = self.amplitude.1 * std::f64::consts::FRAC_1_SQRT_2 / 10f64.powf(self.snr_db / 20.0);
        let ms = rng.gen_range(self.silence_ms.0..=self.silence_ms.1);
        let len = (ms * 1e-3 * f64::from(self.sample_rate)).round() as usize;
        LabeledFragment {
            truth: crate::pipeline::SILENCE.to_string(),
            wave: background(&id, sigma, len, self.sample_rate, &mut rng),
        }
    }

    pub fn fragments(&self) -> impl Iterator<Item = LabeledFragment> + '_ {
        (0..self.len()).map(|i| self.fragment(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFragment {
    pub truth: String,
    pub wave: Waveform,
}
