//! RIFF/WAVE decoding to normalised mono samples, plus a small encoder used
//! for fixtures and synthetic corpora.

use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// A mono fragment with samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub source_id: String,
}

impl Waveform {
    pub fn new(source_id: impl Into<String>, samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        Ok(Waveform {
            samples,
            sample_rate,
            source_id: source_id.into(),
        })
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    /// Unsigned 8-bit with offset 128.
    U8,
    I16,
    I24,
    I32,
    F32,
}

impl SampleFormat {
    fn bits(self) -> u16 {
        match self {
            SampleFormat::U8 => 8,
            SampleFormat::I16 => 16,
            SampleFormat::I24 => 24,
            SampleFormat::I32 | SampleFormat::F32 => 32,
        }
    }
}

struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    block_align: u16,
    bits: u16,
}

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<Format> {
    if body.len() < 16 {
        return Err(Error::MalformedWav(format!("fmt chunk is {} bytes", body.len())));
    }
    let mut tag = le_u16(body, 0);
    let channels = le_u16(body, 2);
    let sample_rate = le_u32(body, 4);
    let block_align = le_u16(body, 12);
    let bits = le_u16(body, 14);
    if tag == FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) subformat GUID(16)
        if body.len() < 40 {
            return Err(Error::MalformedWav("short WAVE_FORMAT_EXTENSIBLE chunk".into()));
        }
        tag = le_u16(body, 24);
    }
    if channels == 0 {
        return Err(Error::MalformedWav("zero channels".into()));
    }
    if sample_rate == 0 {
        return Err(Error::MalformedWav("zero sample rate".into()));
    }
    let supported = matches!(
        (tag, bits),
        (FORMAT_PCM, 8 | 16 | 24 | 32) | (FORMAT_FLOAT, 32 | 64)
    );
    if !supported {
        return Err(Error::UnsupportedCodec {
            format_tag: tag,
            bits_per_sample: bits,
        });
    }
    let min_align = usize::from(channels) * usize::from(bits / 8);
    if usize::from(block_align) < min_align {
        return Err(Error::MalformedWav(format!(
            "block align {block_align} too small for {channels} x {bits}-bit"
        )));
    }
    Ok(Format {
        tag,
        channels,
        sample_rate,
        block_align,
        bits,
    })
}

fn decode_sample(fmt: &Format, b: &[u8]) -> f64 {
    match (fmt.tag, fmt.bits) {
        (FORMAT_PCM, 8) => (f64::from(b[0]) - 128.0) / 128.0,
        (FORMAT_PCM, 16) => f64::from(i16::from_le_bytes([b[0], b[1]])) / 32_768.0,
        (FORMAT_PCM, 24) => {
            let v = i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8;
            f64::from(v) / 8_388_608.0
        }
        (FORMAT_PCM, 32) => f64::from(i32::from_le_bytes([b[0], b[1], b[2], b[3]])) / 2_147_483_648.0,
        (FORMAT_FLOAT, 32) => f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])).clamp(-1.0, 1.0),
        (FORMAT_FLOAT, 64) => {
            f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]]).clamp(-1.0, 1.0)
        }
        _ => unreachable!("format validated in parse_fmt"),
    }
}

/// Decodes a RIFF/WAVE byte buffer. Multichannel input is averaged to mono.
pub fn read_wav(bytes: &[u8], source_id: impl Into<String>) -> Result<Waveform> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedWav("missing RIFF/WAVE signature".into()));
    }
    let mut fmt = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let declared = le_u32(bytes, pos + 4) as usize;
        let start = pos + 8;
        let end = start.saturating_add(declared).min(bytes.len());
        let body = &bytes[start..end];
        match id {
            b"fmt " => fmt = Some(parse_fmt(body)?),
            // Streaming writers may leave the data size unset; take what is present.
            b"data" => data = Some(body),
            _ => {}
        }
        if data.is_some() && fmt.is_some() {
            break;
        }
        pos = start.saturating_add(declared).saturating_add(declared & 1);
    }
    let fmt = fmt.ok_or_else(|| Error::MalformedWav("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::MalformedWav("no data chunk".into()))?;

    let align = usize::from(fmt.block_align);
    let width = usize::from(fmt.bits / 8);
    let channels = usize::from(fmt.channels);
    let frames = data.len() / align;
    if frames == 0 {
        return Err(Error::EmptyWavData);
    }
    let samples = data
        .chunks_exact(align)
        .map(|frame| {
            let sum: f64 = (0..channels)
                .map(|c| decode_sample(&fmt, &frame[c * width..(c + 1) * width]))
                .sum();
            sum / channels as f64
        })
        .collect();
    Waveform::new(source_id, samples, fmt.sample_rate)
}

/// Encodes interleaved samples (clamped to [-1, 1]) as a canonical 44-byte-header WAV.
pub fn encode_wav(samples: &[f64], channels: u16, sample_rate: u32, format: SampleFormat) -> Vec<u8> {
    let bits = format.bits();
    let width = usize::from(bits / 8);
    let block_align = channels * (bits / 8);
    let data_len = samples.len() * width;
    let tag = if format == SampleFormat::F32 { FORMAT_FLOAT } else { FORMAT_PCM };

    let mut out = Vec::with_capacity(44 + data_len + 1);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len + (data_len & 1)) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * u32::from(block_align)).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in samples {
        let s = s.clamp(-1.0, 1.0);
        match format {
            SampleFormat::U8 => out.push((s * 128.0 + 128.0).round().clamp(0.0, 255.0) as u8),
            SampleFormat::I16 => {
                out.extend_from_slice(&((s * 32_768.0).round().clamp(-32_768.0, 32_767.0) as i16).to_le_bytes())
            }
            SampleFormat::I24 => {
                let v = (s * 8_388_608.0).round().clamp(-8_388_608.0, 8_388_607.0) as i32;
                out.extend_from_slice(&v.to_le_bytes()[..3]);
            }
            SampleFormat::I32 => {
                let v = (s * 2_147_483_648.0).round().clamp(-2_147_483_648.0, 2_147_483_647.0) as i32;
                out.extend_from_slice(&v.to_le_bytes());
            }
            SampleFormat::F32 => out.extend_from_slice(&(s as f32).to_le_bytes()),
        }
    }
    if data_len & 1 == 1 {
        out.push(0);
    }
    out
}
