//! Wall-clock and resident-memory measurement of training and batch
//! classification.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::hopfield::hebbian_train;
use crate::model::TrainedModel;
use crate::pipeline::{classify_batch, FragmentSource};

const SAMPLE_INTERVAL: Duration = Duration::from_millis(50);

/// Current resident set size in bytes (Linux `/proc`), `None` elsewhere.
pub fn current_rss_bytes() -> Option<u64> {
    let statm = std::fs::read_to_string("/proc/self/statm").ok()?;
    let pages: u64 = statm.split_whitespace().nth(1)?.parse().ok()?;
    Some(pages * page_size())
}

fn page_size() -> u64 {
    // SAFETY: sysconf has no preconditions.
    let size = unsafe { libc::sysconf(libc::_SC_PAGESIZE) };
    u64::try_from(size).ok().filter(|&s| s > 0).unwrap_or(4096)
}

/// Samples resident memory on a background thread at 20 Hz.
pub struct RssSampler {
    stop: Arc<AtomicBool>,
    handle: thread::JoinHandle<u64>,
}

impl RssSampler {
    pub fn start() -> Self {
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let handle = thread::spawn(move || {
            let mut peak = current_rss_bytes().unwrap_or(0);
            while !flag.load(Ordering::Relaxed) {
                thread::sleep(SAMPLE_INTERVAL);
                peak = peak.max(current_rss_bytes().unwrap_or(0));
            }
            peak
        });
        RssSampler { stop, handle }
    }

    /// Stops sampling and returns the peak in bytes (0 when unavailable).
    pub fn finish(self) -> u64 {
        self.stop.store(true, Ordering::Relaxed);
        let sampled = self.handle.join().unwrap_or(0);
        sampled.max(current_rss_bytes().unwrap_or(0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTiming {
    pub train: Duration,
    pub classify: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub runs: Vec<RunTiming>,
    pub fragments: usize,
    pub mean_train: Duration,
    pub mean_total: Duration,
    pub mean_per_fragment: Duration,
    /// Peak resident set in decimal megabytes, `None` when unavailable.
    pub peak_rss_mb: Option<f64>,
}

impl BenchmarkReport {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        s.push_str("run,train_ms,classify_ms\n");
        for (i, r) in self.runs.iter().enumerate() {
            s.push_str(&format!(
                "{},{:.3},{:.3}\n",
                i + 1,
                r.train.as_secs_f64() * 1e3,
                r.classify.as_secs_f64() * 1e3
            ));
        }
        s.push_str(&format!("fragments: {}\n", self.fragments));
        s.push_str(&format!("mean train: {:.3} ms\n", self.mean_train.as_secs_f64() * 1e3));
        s.push_str(&format!("mean total: {:.3} s\n", self.mean_total.as_secs_f64()));
        s.push_str(&format!(
            "mean per fragment: {:.3} us\n",
            self.mean_per_fragment.as_secs_f64() * 1e6
        ));
        match self.peak_rss_mb {
            Some(mb) => s.push_str(&format!("peak rss: {mb:.2} MB\n")),
            None => s.push_str("peak rss: unavailable\n"),
        }
        s
    }
}

/// Times `runs` repetitions of Hebbian training (from the model's stored
/// patterns) followed by a full batch classification of `inputs`.
pub fn benchmark(model: &TrainedModel, inputs: &[FragmentSource], runs: usize, jobs: usize) -> Result<BenchmarkReport> {
    if inputs.is_empty() || runs == 0 {
        return Err(Error::EmptyBenchmark);
    }
    let sampler = RssSampler::start();
    let mut timings = Vec::with_capacity(runs);
    for _ in 0..runs {
        let t0 = Instant::now();
        let weights = hebbian_train(&model.stored_patterns)?;
        let train = t0.elapsed();
        let retrained = TrainedModel {
            weights,
            ..model.clone()
        };
        let t1 = Instant::now();
        let out = classify_batch(&retrained, inputs, jobs, false)?;
        let classify = t1.elapsed();
        std::hint::black_box(out.summary);
        timings.push(RunTiming { train, classify });
    }
    let peak = sampler.finish();

    let n = runs as u32;
    let mean_train = timings.iter().map(|r| r.train).sum::<Duration>() / n;
    let mean_classify = timings.iter().map(|r| r.classify).sum::<Duration>() / n;
    Ok(BenchmarkReport {
        fragments: inputs.len(),
        mean_train,
        mean_total: mean_train + mean_classify,
        mean_per_fragment: mean_classify / inputs.len() as u32,
        peak_rss_mb: (peak > 0).then(|| peak as f64 / 1e6),
        runs: timings,
    })
}
