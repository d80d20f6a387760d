//! From samples to a bipolar pattern: power spectrum, peak-energy frequency,
//! detected peaks and the neurons they switch on.
//!
//! ```bash
//! cargo run -p echomem --example spectrum_and_encoding -- [wav file]
//! ```

use echomem::spectrum::{compute_spectrum, encode_pattern, is_silence, EncodingConfig};
use echomem::synth::{fm_pulse, PulseShape};
use echomem::wav::{read_wav, Waveform};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let wave = match std::env::args().nth(1) {
        Some(path) => read_wav(&std::fs::read(&path)?, path)?,
        None => {
            let shape = PulseShape {
                center_hz: 46_000.0,
                sweep_hz: 2_000.0,
                duration_s: 0.004,
                amplitude: 0.4,
                vibrato_hz: 900.0,
                vibrato_index: 1.43,
            };
            Waveform::new("synthetic pulse", fm_pulse(&shape, 256_000), 256_000)?
        }
    };
    let cfg = EncodingConfig::default();
    let s = compute_spectrum(&wave, &cfg)?;
    println!(
        "{}: {} samples at {} Hz, FFT length {}, bin width {:.1} Hz",
        wave.source_id,
        wave.samples.len(),
        wave.sample_rate,
        s.fft_length,
        s.bin_width()
    );
    println!("peak-energy frequency: {:.0} Hz", s.f_max_e);
    println!("in-band max power: {:.3e}  silence: {}", s.max_power_in(cfg.band_lo, cfg.band_hi), is_silence(&s, &cfg));

    let map = cfg.band_map();
    println!("\npeaks at or above {:.0}% of the in-band max:", cfg.activation_threshold * 100.0);
    for &f in &s.peak_freqs {
        let band = map.index_of(f).expect("peaks are in band");
        println!("  {f:>8.0} Hz -> neuron {band:>2} [{:.0}, {:.0})", map.edges()[band], map.edges()[band + 1]);
    }
    let pattern = encode_pattern(&s, &map)?;
    println!("\npattern ({} of {} active)\n{pattern}", pattern.active_count(), pattern.len());
    Ok(())
}
