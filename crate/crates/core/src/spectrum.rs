//! Power spectra, silence and band filtering, and spectral peak encoding.
//!
//! A fragment is tapered with a periodic Hann window and zero-padded to a
//! power-of-two transform length. Fragments longer than the transform are
//! averaged over half-overlapping segments. Power is normalised by the
//! squared window sum so a sinusoid of amplitude `a` peaks near `a²/4`
//! regardless of fragment length.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::hopfield::BipolarPattern;
use crate::wav::Waveform;

pub const MIN_FFT_LENGTH: usize = 64;
pub const MAX_ADAPTIVE_FFT_LENGTH: usize = 4096;

/// Inclusive frequency range removed by the Model-2 filter.
pub const BAND_REJECT_HZ: (f64, f64) = (49_000.0, 51_000.0);

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingConfig {
    /// Lower edge of the analysis band mapped onto neurons, Hz.
    pub band_lo: f64,
    /// Upper edge of the analysis band, Hz.
    pub band_hi: f64,
    pub n_neurons: usize,
    /// Peaks below this fraction of the in-band maximum are ignored.
    pub activation_threshold: f64,
    /// Absolute in-band power below which a fragment is silence.
    pub silence_power_floor: f64,
    /// Transform length; `None` picks the smallest power of two covering the
    /// fragment, capped at [`MAX_ADAPTIVE_FFT_LENGTH`].
    pub fft_length: Option<usize>,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        EncodingConfig {
            band_lo: 35_000.0,
            band_hi: 75_000.0,
            n_neurons: 64,
            activation_threshold: 0.5,
            silence_power_floor: 1e-5,
            fft_length: None,
        }
    }
}

impl EncodingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.band_lo > 0.0 && self.band_lo < self.band_hi && self.band_hi.is_finite()) {
            return bad(format!("band {}..{} Hz is not a valid range", self.band_lo, self.band_hi));
        }
        if self.n_neurons < 2 {
            return bad(format!("{} neurons, need at least 2", self.n_neurons));
        }
        if !(self.activation_threshold > 0.0 && self.activation_threshold <= 1.0) {
            return bad(format!("activation threshold {} not in (0, 1]", self.activation_threshold));
        }
        if !(self.silence_power_floor >= 0.0 && self.silence_power_floor.is_finite()) {
            return bad(format!("silence floor {} must be finite and non-negative", self.silence_power_floor));
        }
        if let Some(len) = self.fft_length {
            if !len.is_power_of_two() || len < MIN_FFT_LENGTH {
                return bad(format!("fft length {len} must be a power of two >= {MIN_FFT_LENGTH}"));
            }
        }
        Ok(())
    }

    /// Transform length used for a fragment of `samples` samples.
    pub fn fft_length_for(&self, samples: usize) -> usize {
        self.fft_length.unwrap_or_else(|| {
            samples
                .next_power_of_two()
                .clamp(MIN_FFT_LENGTH, MAX_ADAPTIVE_FFT_LENGTH)
        })
    }

    pub fn band_map(&self) -> FrequencyBandMap {
        FrequencyBandMap::uniform(self.band_lo, self.band_hi, self.n_neurons)
    }
}

/// One-sided power spectrum of a fragment.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    pub sample_rate: u32,
    pub fft_length: usize,
    pub bin_freqs: Vec<f64>,
    pub power: Vec<f64>,
    /// Frequency of the global maximum-power bin.
    pub f_max_e: f64,
    /// Detected in-band peaks, ascending.
    pub peak_freqs: Vec<f64>,
}

impl PowerSpectrum {
    pub fn nyquist(&self) -> f64 {
        f64::from(self.sample_rate) / 2.0
    }

    pub fn bin_width(&self) -> f64 {
        f64::from(self.sample_rate) / self.fft_length as f64
    }

    /// Maximum power over bins in `[lo, hi]`, 0 when no bin falls inside.
    pub fn max_power_in(&self, lo: f64, hi: f64) -> f64 {
        self.in_band(lo, hi).map(|k| self.power[k]).fold(0.0, f64::max)
    }

    fn in_band(&self, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
        self.bin_freqs
            .iter()
            .enumerate()
            .filter(move |(_, &f)| f >= lo && f <= hi)
            .map(|(k, _)| k)
    }
}

/// `edges[i]..edges[i+1]` is the frequency band of neuron `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBandMap {
    edges: Vec<f64>,
}

impl FrequencyBandMap {
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Self {
        let width = hi - lo;
        let mut edges: Vec<f64> = (0..=n).map(|i| lo + width * i as f64 / n as f64).collect();
        edges[n] = hi;
        FrequencyBandMap { edges }
    }

    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 3 {
            return Err(Error::InvalidConfig(format!("{} band edges, need at least 3", edges.len())));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("band edges must be finite and strictly ascending".into()));
        }
        Ok(FrequencyBandMap { edges })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.edges[self.len()]
    }

    /// Bands are left-inclusive and right-exclusive, except the last which
    /// also contains the upper edge.
    pub fn index_of(&self, freq: f64) -> Option<usize> {
        if !(freq >= self.lo() && freq <= self.hi()) {
            return None;
        }
        let n = self.len();
        let idx = self.edges.partition_point(|&e| e <= freq);
        Some((idx - 1).min(n - 1))
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

/// Periodic raised-cosine (Hann) window.
pub fn hann_window(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}

/// Windowed, zero-padded power spectrum with `f_max_e` and in-band peaks.
pub fn compute_spectrum(wave: &Waveform, cfg: &EncodingConfig) -> Result<PowerSpectrum> {
    let len = wave.samples.len();
    if len < 2 {
        return Err(Error::FragmentTooShort { len });
    }
    cfg.validate()?;
    let fft_len = cfg.fft_length_for(len);
    let seg_len = len.min(fft_len);
    let window = hann_window(seg_len);
    let norm = window.iter().sum::<f64>().powi(2);
    let hop = (seg_len / 2).max(1);
    let n_bins = fft_len / 2 + 1;

    let fft = plan(fft_len);
    let mut buf = vec![Complex::new(0.0, 0.0); fft_len];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut power = vec![0.0; n_bins];
    let mut segments = 0usize;
    let mut start = 0;
    while start + seg_len <= len {
        let seg = &wave.samples[start..start + seg_len];
        for (slot, (&s, &w)) in buf.iter_mut().zip(seg.iter().zip(&window)) {
            *slot = Complex::new(s * w, 0.0);
        }
        buf[seg_len..].fill(Complex::new(0.0, 0.0));
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p += c.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = if norm > 0.0 { 1.0 / (norm * segments as f64) } else { 0.0 };
    power.iter_mut().for_each(|p| *p *= scale);

    let bin_width = f64::from(wave.sample_rate) / fft_len as f64;
    let bin_freqs: Vec<f64> = (0..n_bins).map(|k| k as f64 * bin_width).collect();
    let argmax = power
        .iter()
        .enumerate()
        .fold(0, |best, (k, &p)| if p > power[best] { k } else { best });

    let mut spectrum = PowerSpectrum {
        sample_rate: wave.sample_rate,
        fft_length: fft_len,
        f_max_e: bin_freqs[argmax],
        bin_freqs,
        power,
        peak_freqs: Vec::new(),
    };
    spectrum.peak_freqs = detect_peaks(&spectrum, cfg);
    Ok(spectrum)
}

/// In-band local maxima at or above `activation_threshold × in-band max`.
/// A plateau counts once, at its lowest bin, when both sides fall away.
fn detect_peaks(s: &PowerSpectrum, cfg: &EncodingConfig) -> Vec<f64> {
    let max = s.max_power_in(cfg.band_lo, cfg.band_hi);
    if max <= 0.0 {
        return Vec::new();
    }
    let cutoff = cfg.activation_threshold * max;
    let p = &s.power;
    let mut peaks = Vec::new();
    let mut k = 0;
    while k < p.len() {
        let mut end = k;
        while end + 1 < p.len() && p[end + 1] == p[k] {
            end += 1;
        }
        let rises = k == 0 || p[k - 1] < p[k];
        let falls = end + 1 == p.len() || p[end + 1] < p[end];
        let f = s.bin_freqs[k];
        if rises && falls && p[k] > 0.0 && p[k] >= cutoff && f >= cfg.band_lo && f <= cfg.band_hi {
            peaks.push(f);
        }
        k = end + 1;
    }
    peaks
}

pub fn is_silence(s: &PowerSpectrum, cfg: &EncodingConfig) -> bool {
    s.max_power_in(cfg.band_lo, cfg.band_hi) < cfg.silence_power_floor
}

/// True when `f_max_e` lies in 49–51 kHz, both ends inclusive.
pub fn band_reject_49_51(s: &PowerSpectrum) -> bool {
    let (lo, hi) = BAND_REJECT_HZ;
    s.f_max_e >= lo && s.f_max_e <= hi
}

/// +1 for every neuron whose band holds a detected peak, -1 elsewhere.
pub fn encode_pattern(s: &PowerSpectrum, map: &FrequencyBandMap) -> Result<BipolarPattern> {
    if map.lo() < 0.0 || map.hi() > s.nyquist() {
        return Err(Error::BandOutsideSpectrum {
            lo: map.lo(),
            hi: map.hi(),
            nyquist: s.nyquist(),
        });
    }
    let mut active = vec![false; map.len()];
    for &f in &s.peak_freqs {
        if let Some(i) = map.index_of(f) {
            active[i] = true;
        }
    }
    BipolarPattern::from_active(&active)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freqs: &[(f64, f64)], rate: u32, len: usize) -> Waveform {
        let samples = (0..len)
            .map(|n| {
                let t = n as f64 / f64::from(rate);
                freqs.iter().map(|&(f, a)| a * (2.0 * PI * f * t).sin()).sum()
            })
            .collect();
        Waveform::new("tone", samples, rate).unwrap()
    }

    #[test]
    fn pure_tone_peak() {
        let s = compute_spectrum(&tone(&[(46_000.0, 1.0)], 256_000, 1024), &EncodingConfig::default()).unwrap();
        assert_eq!(s.fft_length, 1024);
        assert!((s.f_max_e - 46_000.0).abs() <= 250.0);
        // a²/4 for a bin-centred tone under the normalisation
        let k = (46_000.0 / 250.0) as usize;
        assert!((s.power[k] - 0.25).abs() < 1e-9, "{}", s.power[k]);
    }

    #[test]
    fn zero_waveform_has_no_peaks() {
        let w = Waveform::new("z", vec![0.0; 500], 256_000).unwrap();
        let cfg = EncodingConfig::default();
        let s = compute_spectrum(&w, &cfg).unwrap();
        assert!(s.power.iter().all(|&p| p == 0.0));
        assert!(s.peak_freqs.is_empty());
        assert!(is_silence(&s, &cfg));
        let p = encode_pattern(&s, &cfg.band_map()).unwrap();
        assert!(p.values().iter().all(|&v| v == -1));
    }

    #[test]
    fn too_short() {
        let w = Waveform::new("s", vec![0.1], 1000).unwrap();
        assert!(matches!(
            compute_spectrum(&w, &EncodingConfig::default()),
            Err(Error::FragmentTooShort { len: 1 })
        ));
    }

    #[test]
    fn adaptive_fft_length() {
        let cfg = EncodingConfig::default();
        assert_eq!(cfg.fft_length_for(2), 64);
        assert_eq!(cfg.fft_length_for(1000), 1024);
        assert_eq!(cfg.fft_length_for(1024), 1024);
        assert_eq!(cfg.fft_length_for(100_000), 4096);
    }

    #[test]
    fn long_fragments_are_segment_averaged() {
        let w = tone(&[(46_000.0, 0.5)], 256_000, 20_000);
        let s = compute_spectrum(&w, &EncodingConfig::default()).unwrap();
        assert_eq!(s.fft_length, 4096);
        assert!((s.f_max_e - 46_000.0).abs() <= s.bin_width());
        let peak = s.power.iter().cloned().fold(0.0, f64::max);
        assert!((peak - 0.0625).abs() < 0.01, "{peak}");
    }

    #[test]
    fn band_reject_boundaries() {
        let mut s = compute_spectrum(&tone(&[(46_000.0, 1.0)], 256_000, 1024), &EncodingConfig::default()).unwrap();
        assert!(!band_reject_49_51(&s));
        for (f, rejected) in [(50_000.0, true), (49_000.0, true), (51_000.0, true), (48_999.0, false), (51_001.0, false)] {
            s.f_max_e = f;
            assert_eq!(band_reject_49_51(&s), rejected, "{f}");
        }
    }

    #[test]
    fn band_map_edges_and_index() {
        let m = FrequencyBandMap::uniform(35_000.0, 75_000.0, 64);
        assert_eq!(m.edges()[0], 35_000.0);
        assert_eq!(m.edges()[64], 75_000.0);
        assert_eq!(m.index_of(46_000.0), Some(17));
        assert_eq!(m.index_of(35_000.0), Some(0));
        assert_eq!(m.index_of(35_625.0), Some(1));
        assert_eq!(m.index_of(75_000.0), Some(63));
        assert_eq!(m.index_of(34_999.0), None);
        assert_eq!(m.index_of(75_000.1), None);
        assert!(FrequencyBandMap::from_edges(vec![1.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn encode_rejects_band_beyond_nyquist() {
        let s = compute_spectrum(&tone(&[(10_000.0, 1.0)], 48_000, 512), &EncodingConfig::default()).unwrap();
        let map = EncodingConfig::default().band_map();
        assert!(matches!(encode_pattern(&s, &map), Err(Error::BandOutsideSpectrum { .. })));
    }

    #[test]
    fn config_validation() {
        let mut cfg = EncodingConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.fft_length = Some(100);
        assert!(cfg.validate().is_err());
        cfg.fft_length = Some(32);
        assert!(cfg.validate().is_err());
        let cfg = EncodingConfig {
            activation_threshold: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = EncodingConfig {
            band_lo: 80_000.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn plateau_counts_once_at_lowest_bin() {
        let cfg = EncodingConfig {
            band_lo: 1.0,
            band_hi: 7.0,
            n_neurons: 2,
            ..Default::default()
        };
        let s = PowerSpectrum {
            sample_rate: 16,
            fft_length: 16,
            bin_freqs: (0..9).map(f64::from).collect(),
            power: vec![0.0, 1.0, 3.0, 3.0, 3.0, 1.0, 2.0, 2.0, 5.0],
            f_max_e: 8.0,
            peak_freqs: vec![],
        };
        // bins 2..=4 plateau is a peak; 6..=7 plateau rises into 8, so it is not
        assert_eq!(detect_peaks(&s, &cfg), vec![2.0]);
    }
}
