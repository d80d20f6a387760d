//! Acceptance run: one PASS / FAIL / SKIP line per criterion, nonzero exit
//! on any FAIL.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use common::{fixtures, oracle};
use echomem::bench::RssSampler;
use echomem::cli;
use echomem::dataset::{self, LabeledTree};
use echomem::eval::{self, LabeledId};
use echomem::hopfield::{hebbian_train, match_state, raw_outer_product, run_to_convergence, BipolarPattern, DynamicsConfig, MatchKind};
use echomem::model::load_model;
use echomem::pipeline::{self, classify_batch, discover_wavs, FILTERED, SILENCE};
use echomem::spectrum::BAND_REJECT_HZ;
use echomem::synth::{ClassSpec, CorpusSpec};
use echomem::wav::{encode_wav, SampleFormat};
use echomem::EncodingConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 2024;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Verdict::{Fail, Pass, Skip};

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn random_pattern(n: usize, rng: &mut impl Rng) -> BipolarPattern {
    BipolarPattern::new((0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect()).unwrap()
}

fn c1_golden_matrix() -> Verdict {
    let x = BipolarPattern::new(vec![1, 1, -1, 1, -1, -1, 1]).unwrap();
    let printed: [[i32; 7]; 7] = [
        [1, 1, -1, 1, -1, -1, 1],
        [1, 1, -1, 1, -1, -1, 1],
        [-1, -1, 1, -1, 1, 1, -1],
        [1, 1, -1, 1, -1, -1, 1],
        [-1, -1, 1, -1, 1, 1, -1],
        [-1, -1, 1, -1, 1, 1, -1],
        [1, 1, -1, 1, -1, -1, 1],
    ];
    let raw = raw_outer_product(&x);
    let ok = raw.len() == 7 && raw.iter().zip(printed).all(|(r, p)| r.as_slice() == p.as_slice());
    verdict(ok, "7x7 outer product equals the printed matrix".into())
}

fn c2_energy_descent() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let cfg = DynamicsConfig::default();
    let mut networks = 0;
    let mut bipolar_traces = 0;
    let mut violations = Vec::new();
    for &n in &[8usize, 16, 32] {
        let p_max = (n / 10).max(1);
        for _ in 0..1000 {
            let p = rng.gen_range(1..=p_max);
            let pats: Vec<_> = (0..p).map(|_| random_pattern(n, &mut rng)).collect();
            let w = hebbian_train(&pats).unwrap();
            let trace = run_to_convergence(&w, &random_pattern(n, &mut rng), &cfg).unwrap();
            networks += 1;
            if !trace.states.iter().all(BipolarPattern::is_bipolar) {
                continue;
            }
            bipolar_traces += 1;
            if trace.energies.windows(2).any(|e| e[1] > e[0] + 1e-12) {
                violations.push(format!("N={n} p={p}"));
            }
        }
    }
    verdict(
        violations.is_empty(),
        format!(
            "{networks} networks, {bipolar_traces} fully bipolar traces, {} violations{}",
            violations.len(),
            if violations.is_empty() { String::new() } else { format!(" ({})", violations.join(", ")) }
        ),
    )
}

fn c3_capacity() -> Verdict {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let cfg = DynamicsConfig::default();
    let n = 100;
    let trials = 20;
    let mut rate = |p: usize| {
        let mut recalled = 0;
        for _ in 0..trials {
            let pats: Vec<_> = (0..p).map(|_| random_pattern(n, &mut rng)).collect();
            let w = hebbian_train(&pats).unwrap();
            for x in &pats {
                let trace = run_to_convergence(&w, x, &cfg).unwrap();
                if trace.converged && trace.final_state() == x {
                    recalled += 1;
                }
            }
        }
        recalled as f64 / (p * trials) as f64
    };
    let r10 = rate(10);
    let r30 = rate(30);
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        r10 >= 0.95 && r30 < r10 && secs < 30.0,
        format!("N=100 self-recall {r10:.3} at p=10, {r30:.3} at p=30, {trials} trials, {secs:.2} s"),
    )
}

fn c4_brute_force() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let cfg = DynamicsConfig::default();
    let (mut starts, mut retrieval, mut reversed, mut spurious, mut mismatches) = (0, 0, 0, 0, Vec::new());
    for n in 2..=10 {
        for p in 1..=2 {
            for _ in 0..3 {
                let pats: Vec<_> = (0..p).map(|_| random_pattern(n, &mut rng)).collect();
                let w = hebbian_train(&pats).unwrap();
                let counts = oracle::integer_weights(&pats);
                for x0 in oracle::all_bipolar_states(n) {
                    starts += 1;
                    let trace = run_to_convergence(&w, &x0, &cfg).unwrap();
                    let (states, converged) = oracle::naive_run(&counts, &x0, cfg.max_iterations);
                    if trace.states != states || trace.converged != converged {
                        mismatches.push(format!("N={n} p={p} x0={x0}"));
                        continue;
                    }
                    let fin = trace.final_state();
                    if !converged || !fin.is_bipolar() {
                        continue;
                    }
                    let kind = match_state(fin, &pats).unwrap().kind;
                    let expected = if let Some(k) = pats.iter().position(|s| s == fin) {
                        retrieval += 1;
                        MatchKind::Retrieval(k)
                    } else if let Some(k) = pats.iter().position(|s| &-s == fin) {
                        reversed += 1;
                        MatchKind::Reversed(k)
                    } else if &oracle::naive_step(&counts, fin) == fin {
                        spurious += 1;
                        MatchKind::Spurious
                    } else {
                        mismatches.push(format!("N={n} p={p}: final {fin} is not a fixed point"));
                        continue;
                    };
                    if kind != expected {
                        mismatches.push(format!("N={n} p={p}: {fin} matched as {kind:?}"));
                    }
                }
            }
        }
    }
    verdict(
        mismatches.is_empty(),
        format!(
            "{starts} starts, bipolar fixed points: {retrieval} retrieval, {reversed} reversed, {spurious} spurious; {} mismatches{}",
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    )
}

fn write_corpus(spec: &CorpusSpec, dir: &Path) -> Vec<LabeledId> {
    fs::create_dir_all(dir).unwrap();
    (0..spec.len())
        .into_par_iter()
        .map(|i| {
            let f = spec.fragment(i);
            let bytes = encode_wav(&f.wave.samples, 1, f.wave.sample_rate, SampleFormat::I16);
            fs::write(dir.join(&f.wave.source_id), bytes).unwrap();
            LabeledId::new(f.wave.source_id, f.truth)
        })
        .collect()
}

fn read_predictions(bytes: &[u8]) -> Vec<LabeledId> {
    let mut reader = csv::Reader::from_reader(bytes);
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            LabeledId::new(&r[0], &r[1])
        })
        .collect()
}

fn cli_run(args: &[&str]) -> (i32, Vec<u8>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("echomem").chain(args.iter().copied()), &mut out, &mut err);
    (code, out, String::from_utf8_lossy(&err).into_owned())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Artifacts of the synthetic end-to-end run shared by later criteria.
struct Experiment {
    _root: tempfile::TempDir,
    corpus_dir: PathBuf,
    model: PathBuf,
    predictions: Vec<u8>,
    train_ms: f64,
    classify_s: f64,
    peak_rss_mb: Option<f64>,
    fragments: usize,
}

fn c5_synthetic(exp: &mut Option<Experiment>) -> Verdict {
    let spec = CorpusSpec::pipistrelle_like(SEED);
    let root = tempfile::tempdir().unwrap();
    let corpus_dir = root.path().join("fragments");
    let truth = write_corpus(&spec, &corpus_dir);

    let mut train_args = vec!["train".to_string()];
    let mut exemplars = Vec::new();
    for k in 0..spec.classes.len() {
        let (label, wave) = spec.exemplar(k);
        let path = root.path().join(format!("exemplar_{label}.wav"));
        fs::write(&path, encode_wav(&wave.samples, 1, wave.sample_rate, SampleFormat::I16)).unwrap();
        train_args.extend(["--exemplar".into(), format!("{label}={}", p(&path))]);
        exemplars.push((label, wave));
    }
    let model = root.path().join("model1.hop");
    train_args.extend(["--out".into(), p(&model).into()]);
    let argv: Vec<&str> = train_args.iter().map(String::as_str).collect();
    let (code, _, err) = cli_run(&argv);
    if code != 0 {
        return Fail(format!("train exited {code}: {err}"));
    }

    let t0 = Instant::now();
    pipeline::train(&exemplars, &EncodingConfig::default(), &DynamicsConfig::default()).unwrap();
    let train_ms = t0.elapsed().as_secs_f64() * 1e3;

    let sampler = RssSampler::start();
    let t1 = Instant::now();
    let (code, predictions, err) = cli_run(&["classify", "--model", p(&model), "--input", p(&corpus_dir), "--jobs", "0"]);
    let classify_s = t1.elapsed().as_secs_f64();
    let peak = sampler.finish();
    if code != 0 {
        return Fail(format!("classify exited {code}: {err}"));
    }

    let preds = read_predictions(&predictions);
    let cm = eval::score(&preds, &truth).unwrap();
    let report = eval::report(&cm).unwrap();
    let silence_recall = report.excluded.silence_recall().unwrap_or(0.0);
    let n_silence = truth.iter().filter(|t| t.label == SILENCE).count();
    *exp = Some(Experiment {
        _root: root,
        corpus_dir,
        model,
        predictions,
        train_ms,
        classify_s,
        peak_rss_mb: (peak > 0).then(|| peak as f64 / 1e6),
        fragments: truth.len(),
    });
    verdict(
        truth.len() == 10_384 && report.accuracy >= 0.95 && silence_recall == 1.0,
        format!(
            "{} fragments ({} silences): accuracy {:.4}, UnID {}, silence recall {:.4}",
            truth.len(),
            n_silence,
            report.accuracy,
            report.unid,
            silence_recall
        ),
    )
}

fn c6_band_filter(exp: &Option<Experiment>) -> Verdict {
    let Some(exp) = exp else {
        return Fail("needs the synthetic run".into());
    };
    let mut mid = CorpusSpec::pipistrelle_like(SEED + 6);
    mid.classes = vec![ClassSpec {
        label: "MID".into(),
        center_hz: 50_000.0,
        count: 200,
    }];
    mid.silences = 0;
    let mid_dir = exp.corpus_dir.with_file_name("fifty_khz");
    write_corpus(&mid, &mid_dir);

    let mut inputs = discover_wavs(&exp.corpus_dir).unwrap();
    inputs.extend(discover_wavs(&mid_dir).unwrap());
    let model1 = load_model(&fs::read(&exp.model).unwrap()).unwrap();
    let model2 = model1.clone().with_band_reject(true);
    let a = classify_batch(&model1, &inputs, 0, false).unwrap();
    let b = classify_batch(&model2, &inputs, 0, false).unwrap();

    let (mut in_band, mut filtered, mut missed, mut changed) = (0, 0, 0, 0);
    for (x, y) in a.entries.iter().zip(&b.entries) {
        let Ok(r) = &x.outcome else { continue };
        let band = r.f_max_e >= BAND_REJECT_HZ.0 && r.f_max_e <= BAND_REJECT_HZ.1;
        let silent = x.label_str() == SILENCE;
        if band && !silent {
            in_band += 1;
            if y.label_str() == FILTERED {
                filtered += 1;
            } else {
                missed += 1;
            }
        } else if y.label_str() != x.label_str() {
            changed += 1;
        }
    }
    verdict(
        in_band > 0 && missed == 0 && changed == 0,
        format!(
            "{} fragments, {in_band} with F_maxE in 49-51 kHz, {filtered} Filtered, {missed} missed, {changed} kept labels changed",
            inputs.len()
        ),
    )
}

fn c7_table_arithmetic() -> Verdict {
    let m1 = eval::report(&fixtures::model1_matrix()).unwrap();
    let m2 = eval::report(&fixtures::model2_matrix()).unwrap();
    let (pi, py) = (m2.metrics(fixtures::PIPI).unwrap(), m2.metrics(fixtures::PIPY).unwrap());
    let checks = [
        (pi.precision, 0.79),
        (py.precision, 0.86),
        (pi.recall, 0.84),
        (py.recall, 0.77),
        (m2.accuracy, 0.80),
        (m1.accuracy, 0.72),
    ];
    let worst = checks.iter().map(|(got, want)| (got - want).abs()).fold(0.0, f64::max);
    verdict(
        worst <= 0.005,
        format!(
            "model 2 precision {:.4}/{:.4} recall {:.4}/{:.4} accuracy {:.4}; model 1 accuracy {:.4}; max deviation {worst:.4}",
            pi.precision, py.precision, pi.recall, py.recall, m2.accuracy, m1.accuracy
        ),
    )
}

fn c8_performance(exp: &Option<Experiment>) -> Verdict {
    let Some(exp) = exp else {
        return Fail("needs the synthetic run".into());
    };
    let rss_ok = exp.peak_rss_mb.map_or(true, |mb| mb <= 500.0);
    let rss = exp.peak_rss_mb.map_or("unavailable".to_string(), |mb| format!("{mb:.1} MB"));
    verdict(
        exp.train_ms <= 50.0 && exp.classify_s <= 60.0 && rss_ok,
        format!(
            "train {:.3} ms, classify {} files {:.2} s, peak RSS {rss}, cores available: {}",
            exp.train_ms,
            exp.fragments,
            exp.classify_s,
            std::thread::available_parallelism().map_or(1, |n| n.get())
        ),
    )
}

fn c9_determinism(exp: &Option<Experiment>) -> Verdict {
    let Some(exp) = exp else {
        return Fail("needs the synthetic run".into());
    };
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut outputs = vec![("0".to_string(), exp.predictions.clone())];
    for jobs in ["1".to_string(), (cores.max(2) * 2).to_string()] {
        let (code, out, err) = cli_run(&["classify", "--model", p(&exp.model), "--input", p(&exp.corpus_dir), "--jobs", &jobs]);
        if code != 0 {
            return Fail(format!("classify --jobs {jobs} exited {code}: {err}"));
        }
        outputs.push((jobs, out));
    }
    let same = outputs.windows(2).all(|w| w[0].1 == w[1].1);
    let jobs: Vec<&str> = outputs.iter().map(|(j, _)| j.as_str()).collect();
    verdict(same, format!("{} byte CSV identical for --jobs {}", outputs[0].1.len(), jobs.join(", ")))
}

fn c10_real_data() -> Verdict {
    let Ok(root) = std::env::var(dataset::REAL_DATA_ENV) else {
        return Skip(format!(
            "set {} to a directory of PIPI/ PIPY/ Silence/ folders; see examples/reproduce_bat_dataset.rs",
            dataset::REAL_DATA_ENV
        ));
    };
    let tree = match LabeledTree::scan(Path::new(&root)) {
        Ok(t) => t,
        Err(e) => return Fail(format!("{root}: {e}")),
    };
    match dataset::run_model2(&tree, &EncodingConfig::default(), 0) {
        Ok(report) => verdict(
            (report.accuracy - 0.80).abs() <= 0.05,
            format!("{} scored fragments, model 2 accuracy {:.4}", report.total, report.accuracy),
        ),
        Err(e) => Fail(e.to_string()),
    }
}

fn main() {
    let mut exp = None;
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Verdict + '_>)> = vec![
        ("golden matrix", Box::new(c1_golden_matrix)),
        ("energy descent", Box::new(c2_energy_descent)),
        ("capacity", Box::new(c3_capacity)),
        ("brute-force oracle", Box::new(c4_brute_force)),
    ];
    let mut failed = 0;
    let mut print = |i: usize, name: &str, v: Verdict| {
        let (tag, detail) = match v {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("C{i:<2} {tag}  {name}: {detail}");
    };
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        print(i + 1, name, f());
    }
    print(5, "synthetic end-to-end", c5_synthetic(&mut exp));
    print(6, "band filter", c6_band_filter(&exp));
    print(7, "table arithmetic", c7_table_arithmetic());
    print(8, "performance envelope", c8_performance(&exp));
    print(9, "determinism", c9_determinism(&exp));
    print(10, "real data", c10_real_data());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
