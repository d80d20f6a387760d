//! Trained model and its binary file format.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "HOPFMEM\0"
//! version      u16
//! body_len     u64      bytes between this field and the checksum
//! body:
//!   n          u32      neurons
//!   p          u32      stored patterns
//!   labels     p × (u32 length, UTF-8 bytes)
//!   edges      (n+1) × f64
//!   encoding   band_lo f64, band_hi f64, threshold f64, silence floor f64,
//!              fft_length u32 (0 = adaptive)
//!   band_reject u8
//!   dynamics   max_iterations u32, has_bias u8, [n × f64]
//!   patterns   p × n × i8
//!   weights    n × n × f64, row-major
//! crc32        u32      over magic, version, body_len and body
//! ```

use crate::error::{Error, Result};
use crate::hopfield::{BipolarPattern, DynamicsConfig, WeightMatrix};
use crate::spectrum::{EncodingConfig, FrequencyBandMap};

pub const MAGIC: &[u8; 8] = b"HOPFMEM\0";
pub const FORMAT_VERSION: u16 = 1;
const PREAMBLE_LEN: usize = 8 + 2 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub weights: WeightMatrix,
    pub stored_patterns: Vec<BipolarPattern>,
    pub class_labels: Vec<String>,
    pub band_map: FrequencyBandMap,
    pub encoding: EncodingConfig,
    pub dynamics: DynamicsConfig,
    /// Label fragments with `f_max_e` in 49–51 kHz as filtered before recall.
    pub band_reject: bool,
}

impl TrainedModel {
    pub fn n_neurons(&self) -> usize {
        self.weights.dim()
    }

    pub fn n_patterns(&self) -> usize {
        self.stored_patterns.len()
    }

    pub fn with_band_reject(mut self, enabled: bool) -> Self {
        self.band_reject = enabled;
        self
    }

    pub(crate) fn check_consistency(&self) -> Result<()> {
        let n = self.n_neurons();
        let corrupt = |m: String| Err(Error::CorruptModel(m));
        if self.stored_patterns.is_empty() || self.stored_patterns.len() != self.class_labels.len() {
            return corrupt(format!(
                "{} patterns for {} labels",
                self.stored_patterns.len(),
                self.class_labels.len()
            ));
        }
        if self.band_map.len() != n || self.encoding.n_neurons != n {
            return corrupt(format!("band map has {} bands for {n} neurons", self.band_map.len()));
        }
        if let Some(p) = self.stored_patterns.iter().find(|p| p.len() != n || !p.is_bipolar()) {
            return corrupt(format!("stored pattern {p} is not a bipolar {n}-vector"));
        }
        self.dynamics.validate(n)?;
        self.encoding.validate()
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn save_model(model: &TrainedModel) -> Vec<u8> {
    let n = model.n_neurons();
    let mut body = Writer(Vec::new());
    body.u32(n as u32);
    body.u32(model.n_patterns() as u32);
    for label in &model.class_labels {
        body.u32(label.len() as u32);
        body.0.extend_from_slice(label.as_bytes());
    }
    for &e in model.band_map.edges() {
        body.f64(e);
    }
    let enc = &model.encoding;
    body.f64(enc.band_lo);
    body.f64(enc.band_hi);
    body.f64(enc.activation_threshold);
    body.f64(enc.silence_power_floor);
    body.u32(enc.fft_length.unwrap_or(0) as u32);
    body.u8(u8::from(model.band_reject));
    body.u32(model.dynamics.max_iterations as u32);
    match &model.dynamics.bias {
        Some(bias) => {
            body.u8(1);
            bias.iter().for_each(|&b| body.f64(b));
        }
        None => body.u8(0),
    }
    for p in &model.stored_patterns {
        body.0.extend(p.values().iter().map(|&v| v as u8));
    }
    for &w in model.weights.as_row_major() {
        body.f64(w);
    }

    let mut out = Vec::with_capacity(PREAMBLE_LEN + body.0.len() + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(body.0.len() as u64).to_le_bytes());
    out.extend_from_slice(&body.0);
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::CorruptModel("field runs past end of body".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn load_model(bytes: &[u8]) -> Result<TrainedModel> {
    if bytes.len() < MAGIC.len() {
        return Err(Error::Truncated);
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < PREAMBLE_LEN {
        return Err(Error::Truncated);
    }
    let version = u16::from_le_bytes([bytes[8], bytes[9]]);
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let body_len = u64::from_le_bytes(bytes[10..18].try_into().expect("8 bytes"));
    let total = usize::try_from(body_len)
        .ok()
        .and_then(|b| b.checked_add(PREAMBLE_LEN + 4))
        .ok_or(Error::Truncated)?;
    if bytes.len() < total {
        return Err(Error::Truncated);
    }
    if bytes.len() > total {
        return Err(Error::CorruptModel(format!("{} trailing bytes", bytes.len() - total)));
    }
    let (payload, tail) = bytes.split_at(total - 4);
    let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }

    let mut r = Reader {
        buf: &payload[PREAMBLE_LEN..],
        pos: 0,
    };
    let n = r.u32()? as usize;
    let p = r.u32()? as usize;
    if n < 2 || p == 0 || p > n {
        return Err(Error::CorruptModel(format!("n = {n}, p = {p}")));
    }
    let class_labels = (0..p)
        .map(|_| {
            let len = r.u32()? as usize;
            String::from_utf8(r.take(len)?.to_vec()).map_err(|_| Error::CorruptModel("label is not UTF-8".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let band_map = FrequencyBandMap::from_edges(r.f64s(n + 1)?)?;
    let band_lo = r.f64()?;
    let band_hi = r.f64()?;
    let activation_threshold = r.f64()?;
    let silence_power_floor = r.f64()?;
    let fft_length = match r.u32()? {
        0 => None,
        len => Some(len as usize),
    };
    let band_reject = r.u8()? != 0;
    let max_iterations = r.u32()? as usize;
    let bias = match r.u8()? {
        0 => None,
        _ => Some(r.f64s(n)?),
    };
    let stored_patterns = (0..p)
        .map(|_| {
            let raw = r.take(n)?;
            BipolarPattern::new(raw.iter().map(|&b| b as i8).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = WeightMatrix::from_row_major(n, r.f64s(n * n)?)?;
    if r.pos != r.buf.len() {
        return Err(Error::CorruptModel("unread bytes after weights".into()));
    }

    let model = TrainedModel {
        weights,
        stored_patterns,
        class_labels,
        band_map,
        encoding: EncodingConfig {
            band_lo,
            band_hi,
            n_neurons: n,
            activation_threshold,
            silence_power_floor,
            fft_length,
        },
        dynamics: DynamicsConfig { max_iterations, bias },
        band_reject,
    };
    model.check_consistency()?;
    Ok(model)
}
