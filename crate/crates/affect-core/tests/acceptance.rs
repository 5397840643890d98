//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured numbers (run with `--nocapture` to see them). Expected
//! values tagged as derived were computed with the independent oracles in
//! `common` before being frozen here.

mod common;

use affect_core::ecg::{detect_r_peaks, hrv_time_features, RawSignal};
use affect_core::mat::Mat;
use affect_core::nn::{
    backward, decode_checkpoint, encode_checkpoint, forward, init_model, Model, ModelConfig,
};
use affect_core::objective::{ccc, ccc_loss, combined_score};
use affect_core::rng::SplitMix64;
use affect_core::seqdata::synth::{generate_synthetic_corpus, render_ecg, SynthCorpus, SynthSpec};
use affect_core::seqdata::{
    apply_norm, split_subject, Dimension, ModalityStats, NormStats, Role,
};
use affect_core::training::{
    make_windows, personalise, predict_full, pretrain, render_train_report_csv, Personalised,
    Pretrained, TrainConfig, WindowingConfig,
};
use affect_core::ensemble::{
    combined_from_dimension_means, ensemble_mean, render_report_csv, CorpusReport,
    PredictionSequence, ProvenanceTag,
};
use common::{ccc_oracle, dot, feature_rows, lstsq_ridge, mean, peak_match_rate};
use std::sync::OnceLock;
use std::time::Instant;

const CORPUS_SEED: u64 = 2023;

fn standard_spec() -> SynthSpec {
    SynthSpec::default()
}

fn offset_spec() -> SynthSpec {
    SynthSpec {
        subject_offset: 3.0,
        ..SynthSpec::default()
    }
}

fn acceptance_model_cfg() -> ModelConfig {
    ModelConfig::new(vec![8, 6], 32).with_seed(0)
}

fn acceptance_train_cfg() -> TrainConfig {
    TrainConfig {
        // Stage-1 windows on 600-step subjects yield 48 windows; a batch of
        // 16 gives three optimizer steps per epoch, which converges well
        // inside the 100-epoch budget at this scale.
        batch_size: 16,
        ..TrainConfig::default()
    }
}

struct StandardPretrain {
    arousal: Pretrained,
    valence: Pretrained,
}

fn standard_pretrain() -> &'static StandardPretrain {
    static CELL: OnceLock<StandardPretrain> = OnceLock::new();
    CELL.get_or_init(|| {
        let corpus = generate_synthetic_corpus(&standard_spec(), CORPUS_SEED).unwrap();
        let train = corpus.samples_with_role(Role::Train);
        let dev = corpus.samples_with_role(Role::Dev);
        let run = |dim| {
            pretrain(
                &train,
                &dev,
                &acceptance_model_cfg(),
                &acceptance_train_cfg(),
                dim,
                |_, _| {},
            )
            .unwrap()
        };
        StandardPretrain {
            arousal: run(Dimension::Arousal),
            valence: run(Dimension::Valence),
        }
    })
}

struct SubjectOutcome {
    subject_id: String,
    baseline_ccc: f64,
    personalised_ccc: f64,
    personalised: Personalised,
}

struct OffsetPipeline {
    corpus: SynthCorpus,
    pretrained: Pretrained,
    subjects: Vec<SubjectOutcome>,
}

fn personal_test_ccc(
    model: &Model,
    stats: &NormStats,
    corpus_subject: &affect_core::seqdata::AlignedSample,
    dim: Dimension,
) -> f64 {
    let split = split_subject(corpus_subject);
    let test_seg = split.personal_test.expect("test segment present");
    let test_n = apply_norm(&test_seg, stats).unwrap();
    let label = test_n.label(dim).unwrap().values().to_vec();
    let pred = predict_full(model, &test_n, dim, vec![ProvenanceTag::combo("audio+video")])
        .unwrap();
    ccc(pred.values(), &label).unwrap().ccc
}

fn offset_pipeline() -> &'static OffsetPipeline {
    static CELL: OnceLock<OffsetPipeline> = OnceLock::new();
    CELL.get_or_init(|| {
        let dim = Dimension::Arousal;
        let corpus = generate_synthetic_corpus(&offset_spec(), CORPUS_SEED).unwrap();
        let train = corpus.samples_with_role(Role::Train);
        let dev = corpus.samples_with_role(Role::Dev);
        let cfg = acceptance_train_cfg();
        let pretrained = pretrain(&train, &dev, &acceptance_model_cfg(), &cfg, dim, |_, _| {})
            .unwrap();
        let subjects = corpus
            .samples_with_role(Role::Test)
            .iter()
            .map(|subj| {
                let split = split_subject(subj);
                let personalised =
                    personalise(&pretrained.model, &pretrained.stats, &split, &cfg, dim).unwrap();
                SubjectOutcome {
                    subject_id: subj.subject_id().to_string(),
                    baseline_ccc: personal_test_ccc(&pretrained.model, &pretrained.stats, subj, dim),
                    personalised_ccc: personal_test_ccc(
                        &personalised.model,
                        &pretrained.stats,
                        subj,
                        dim,
                    ),
                    personalised,
                }
            })
            .collect();
        OffsetPipeline {
            corpus,
            pretrained,
            subjects,
        }
    })
}

#[test]
fn criterion_01_ccc_unit_suite() {
    let t0 = Instant::now();
    // Identity, anti-concordance, and the hand-worked 6/7 value; every
    // expected value is confirmed against the independent oracle first.
    let cases: [(&[f64], &[f64], f64); 3] = [
        (&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 1.0),
        (&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0], -1.0),
        (&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0], 6.0 / 7.0),
    ];
    for (x, y, expected) in cases {
        assert!((ccc_oracle(x, y) - expected).abs() < 1e-9, "oracle disagrees");
        let got = ccc(x, y).unwrap().ccc;
        assert!((got - expected).abs() < 1e-9, "ccc({x:?}, {y:?}) = {got}");
    }
    // Shift example: CCC is not shift invariant; loss of a +1 shift is 3/7.
    let pred = [2.0, 3.0, 4.0];
    let target = [1.0, 2.0, 3.0];
    assert!((1.0 - ccc_oracle(&pred, &target) - 3.0 / 7.0).abs() < 1e-9);
    let (loss, _) = ccc_loss(&pred, &target).unwrap();
    assert!((loss - 3.0 / 7.0).abs() < 1e-9);
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "took {elapsed:.3} s");
    println!("criterion 01 ccc-unit-suite: PASS ({elapsed:.3} s)");
}

#[test]
fn criterion_02_gradient_suite() {
    let t0 = Instant::now();
    let mut rng = SplitMix64::new(4242);
    let combos = [(1usize, false), (1, true), (2, false), (2, true)];
    let mut configs = 0usize;
    let mut max_rel_model = 0.0_f64;
    let mut max_rel_loss = 0.0_f64;
    let h = 1e-6;
    // The 1e-4 denominator floor makes the bound absolute (1e-9) for
    // near-zero gradients, where central differences carry ~1e-10 of
    // roundoff noise.
    let rel = |a: f64, fd: f64| (a - fd).abs() / a.abs().max(fd.abs()).max(1e-4);

    for round in 0..50 {
        for &(layers, bidirectional) in &combos {
            let t_steps = 2 + rng.index(15);
            let n_mod = 1 + rng.index(2);
            let input_dims: Vec<usize> = (0..n_mod).map(|_| 1 + rng.index(3)).collect();
            let d = 2 + rng.index(7);
            let cfg = ModelConfig::new(input_dims.clone(), d)
                .with_layers(layers)
                .with_bidirectional(bidirectional)
                .with_seed(1000 + round * 4 + layers as u64);
            let model = init_model(&cfg).unwrap();
            let n: usize = input_dims.iter().sum();
            let x = Mat::from_vec(
                t_steps,
                n,
                (0..t_steps * n).map(|_| rng.uniform(-1.0, 1.0)).collect(),
            );
            let target: Vec<f64> = (0..t_steps).map(|_| rng.uniform(-1.0, 1.0)).collect();

            let loss_of = |m: &Model| {
                let (preds, _) = forward(m, &x).unwrap();
                ccc_loss(&preds, &target).unwrap().0
            };

            let (preds, cache) = forward(&model, &x).unwrap();
            let (_, d_pred) = ccc_loss(&preds, &target).unwrap();

            // ccc_loss gradient against finite differences in prediction
            // space.
            for i in 0..t_steps {
                let mut plus = preds.clone();
                plus[i] += h;
                let mut minus = preds.clone();
                minus[i] -= h;
                let fd = (ccc_loss(&plus, &target).unwrap().0
                    - ccc_loss(&minus, &target).unwrap().0)
                    / (2.0 * h);
                let r = rel(d_pred[i], fd);
                max_rel_loss = max_rel_loss.max(r);
                assert!(r < 1e-5, "loss grad: T={t_steps} i={i} rel {r}");
            }

            // Full-model backward against finite differences in parameter
            // space.
            let grads = backward(&model, &cache, &d_pred).unwrap();
            for i in 0..model.param_count() {
                let mut plus = model.clone();
                plus.params_mut()[i] += h;
                let mut minus = model.clone();
                minus.params_mut()[i] -= h;
                let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
                let a = grads.as_slice()[i];
                let r = rel(a, fd);
                max_rel_model = max_rel_model.max(r);
                assert!(
                    r < 1e-5,
                    "model grad: layers={layers} bi={bidirectional} T={t_steps} param={i} \
                     analytic={a} fd={fd} rel={r}"
                );
            }
            configs += 1;
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(configs >= 200);
    assert!(elapsed < 120.0, "took {elapsed:.1} s");
    println!(
        "criterion 02 gradient-suite: PASS ({configs} configs, max rel err \
         model {max_rel_model:.2e} / loss {max_rel_loss:.2e}, {elapsed:.1} s)"
    );
}

/// Direct-formula HRV re-implementation, written independently of the
/// library path: different percentile code, two-pass variances, explicit
/// histogram map.
mod hrv_oracle {
    use std::collections::BTreeMap;

    fn pct(sorted: &[f64], q: f64) -> f64 {
        let rank = q / 100.0 * (sorted.len() - 1) as f64;
        let lo = rank.floor() as usize;
        let hi = rank.ceil() as usize;
        if lo == hi {
            sorted[lo]
        } else {
            sorted[lo] * (hi as f64 - rank) + sorted[hi] * (rank - lo as f64)
        }
    }

    fn sample_std(v: &[f64]) -> f64 {
        if v.len() < 2 {
            return 0.0;
        }
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    }

    pub fn features(nn: &[f64]) -> [f64; 18] {
        let n = nn.len() as f64;
        let mean_nn = nn.iter().sum::<f64>() / n;
        let sdnn = sample_std(nn);
        let diffs: Vec<f64> = (1..nn.len()).map(|i| nn[i] - nn[i - 1]).collect();
        let rmssd = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
        let sdsd = sample_std(&diffs);
        let mut sorted = nn.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = pct(&sorted, 50.0);
        let mut dev: Vec<f64> = nn.iter().map(|v| (v - median).abs()).collect();
        dev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mad = pct(&dev, 50.0) * 1.4826;
        let over = |lim: f64| {
            100.0 * diffs.iter().filter(|d| d.abs() > lim).count() as f64 / diffs.len() as f64
        };
        let mut hist: BTreeMap<i64, usize> = BTreeMap::new();
        for v in nn {
            *hist.entry((v / 7.8125).floor() as i64).or_default() += 1;
        }
        let tallest = *hist.values().max().unwrap() as f64;
        [
            mean_nn,
            sdnn,
            rmssd,
            sdsd,
            sdnn / mean_nn,
            rmssd / mean_nn,
            median,
            mad,
            mad / median,
            pct(&sorted, 75.0) - pct(&sorted, 25.0),
            pct(&sorted, 20.0),
            pct(&sorted, 80.0),
            over(50.0),
            over(20.0),
            sorted[0],
            sorted[sorted.len() - 1],
            sorted[sorted.len() - 1] - sorted[0],
            n / tallest,
        ]
    }
}

#[test]
fn criterion_03_hrv_oracle_suite() {
    let t0 = Instant::now();
    let mut rng = SplitMix64::new(77);
    let mut max_rel = 0.0_f64;
    for trial in 0..1000 {
        let n = 2 + rng.index(49);
        let nn: Vec<f64> = (0..n).map(|_| rng.uniform(300.0, 2000.0)).collect();
        let got = hrv_time_features(&nn).unwrap().to_array();
        let want = hrv_oracle::features(&nn);
        for (k, (g, w)) in got.iter().zip(&want).enumerate() {
            let rel = (g - w).abs() / g.abs().max(w.abs()).max(1.0);
            max_rel = max_rel.max(rel);
            assert!(rel < 1e-9, "trial {trial} feature {k}: {g} vs oracle {w}");
        }
    }
    // The worked example also matches the oracle.
    let got = hrv_time_features(&[800.0, 820.0, 780.0]).unwrap().to_array();
    let want = hrv_oracle::features(&[800.0, 820.0, 780.0]);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12);
    }
    assert_eq!(got[1], 20.0, "SDNN");
    assert!((got[2] - 1000.0_f64.sqrt()).abs() < 1e-12, "RMSSD");
    assert!((got[3] - 1800.0_f64.sqrt()).abs() < 1e-12, "SDSD");
    assert_eq!(got[12], 0.0, "pNN50");
    assert_eq!(got[13], 50.0, "pNN20");
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "took {elapsed:.2} s");
    println!("criterion 03 hrv-oracle-suite: PASS (1000 lists, max rel {max_rel:.2e}, {elapsed:.2} s)");
}

#[test]
fn criterion_04_r_peak_suite() {
    let t0 = Instant::now();
    // Noise-free: every interior beat recovered exactly once.
    let hr: Vec<f64> = (0..240).map(|i| 72.0 + 8.0 * (i as f64 * 0.04).sin()).collect();
    let mut rng = SplitMix64::new(404);
    let (clean, truth) = render_ecg(&hr, 0.0, &mut rng);
    let peaks = detect_r_peaks(&clean).unwrap();
    let end_ms = clean.len() as i64;
    let interior_truth: Vec<i64> = truth
        .iter()
        .copied()
        .filter(|&t| t >= 2000 && t < end_ms - 2000)
        .collect();
    let interior_detected: Vec<usize> = peaks
        .indices()
        .iter()
        .copied()
        .filter(|&p| p >= 2000 && (p as i64) < end_ms - 2000)
        .collect();
    let (recall, precision) = peak_match_rate(&interior_truth, &interior_detected, 50);
    assert_eq!(recall, 1.0, "noise-free recall");
    assert_eq!(precision, 1.0, "noise-free precision");

    // 10 dB SNR relative to the clean trace power.
    let power = clean.samples().iter().map(|v| v * v).sum::<f64>() / clean.len() as f64;
    let sigma = (power / 10.0).sqrt();
    let mut noise_rng = SplitMix64::new(405);
    let noisy = RawSignal::new(
        clean
            .samples()
            .iter()
            .map(|v| v + sigma * noise_rng.normal())
            .collect(),
        1000.0,
        0,
    )
    .unwrap();
    let noisy_peaks = detect_r_peaks(&noisy).unwrap();
    let (noisy_recall, noisy_precision) = peak_match_rate(&truth, noisy_peaks.indices(), 50);
    assert!(noisy_recall >= 0.95, "10 dB recall {noisy_recall}");
    assert!(noisy_precision >= 0.95, "10 dB precision {noisy_precision}");
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "took {elapsed:.2} s");
    println!(
        "criterion 04 r-peak-suite: PASS (clean 1.00/1.00, 10 dB \
         {noisy_recall:.3}/{noisy_precision:.3}, {elapsed:.2} s)"
    );
}

#[test]
fn criterion_05_phys_pipeline() {
    // 80 bpm -> true spacing 750 ms; 60 s of 2 Hz grid -> 120 rows.
    let hr = vec![80.0; 120];
    let mut rng = SplitMix64::new(506);
    let (raw, _) = render_ecg(&hr, 0.0, &mut rng);
    let steps = 120;
    let ecg_2hz = RawSignal::new(
        (0..steps).map(|i| raw.samples()[i * 500]).collect(),
        2.0,
        0,
    )
    .unwrap();
    let resp = RawSignal::new((0..steps).map(|i| (i as f64 * 0.08).sin()).collect(), 2.0, 0)
        .unwrap();
    let bpm = RawSignal::new(hr.clone(), 2.0, 0).unwrap();
    let seq = affect_core::ecg::extract_phys_sequence("s", "phys", &raw, &resp, &bpm, &ecg_2hz)
        .unwrap();
    assert_eq!(seq.len(), 120);
    assert_eq!(seq.dim(), 21);
    let mut worst: f64 = 0.0;
    for row in 10..110 {
        let mean_nn = seq.values().get(row, 3);
        worst = worst.max((mean_nn - 750.0).abs());
        assert!(
            (mean_nn - 750.0).abs() <= 10.0,
            "row {row}: MeanNN {mean_nn}"
        );
    }
    println!("criterion 05 phys-pipeline: PASS (T=120, n=21, worst MeanNN error {worst:.2} ms)");
}

#[test]
fn criterion_06_windowing_suite() {
    // Straight-line enumeration oracle.
    fn oracle(t: usize, win: usize, hop: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        while start < t {
            let end = (start + win).min(t);
            if end - start >= 2 {
                out.push((start, end - start));
            }
            start += hop;
        }
        out
    }

    let spec = SynthSpec {
        train_subjects: 1,
        dev_subjects: 0,
        test_subjects: 0,
        duration_secs: 600,
        ..SynthSpec::default()
    };
    let corpus = generate_synthetic_corpus(&spec, 1).unwrap();
    let full = &corpus.subjects[0].sample;

    let mut rng = SplitMix64::new(606);
    let mut checked = 0;
    for trial in 0..100 {
        let t = 2 + rng.index(1199);
        let win = 2 + rng.index(t.max(3) + 20);
        let hop = 1 + rng.index(win);
        let sample = full.slice_steps(0, t).unwrap();
        let got: Vec<(usize, usize)> =
            make_windows(&sample, &WindowingConfig::new(win, hop), Dimension::Arousal)
                .unwrap()
                .iter()
                .map(|w| (w.start_step, w.features.rows()))
                .collect();
        assert_eq!(got, oracle(t, win, hop), "trial {trial}: T={t} win={win} hop={hop}");
        checked += 1;
    }

    // The worked case: T=600, win=200, hop=100 -> 6 windows.
    let sample = full.slice_steps(0, 600).unwrap();
    let got = make_windows(&sample, &WindowingConfig::new(200, 100), Dimension::Arousal).unwrap();
    assert_eq!(got.len(), 6);
    assert_eq!(oracle(600, 200, 100).len(), 6);
    println!("criterion 06 windowing-suite: PASS ({checked} random triples + 600/200/100 case)");
}

#[test]
fn criterion_07_end_to_end_pretraining() {
    let t0 = Instant::now();
    let pre = standard_pretrain();
    for (dim, out) in [("arousal", &pre.arousal), ("valence", &pre.valence)] {
        assert!(
            out.report.best_dev_ccc >= 0.80,
            "{dim}: best dev CCC {}",
            out.report.best_dev_ccc
        );
        assert!(out.report.epochs.len() <= 100);
    }
    let wall = pre.arousal.report.wall_time_secs + pre.valence.report.wall_time_secs;
    assert!(wall < 600.0, "training wall time {wall:.1} s");
    let elapsed = t0.elapsed().as_secs_f64();
    println!(
        "criterion 07 end-to-end-pretraining: PASS (dev CCC arousal {:.4} @ epoch {}, \
         valence {:.4} @ epoch {}, train wall {:.1} s, test wall {elapsed:.1} s)",
        pre.arousal.report.best_dev_ccc,
        pre.arousal.report.best_epoch,
        pre.valence.report.best_dev_ccc,
        pre.valence.report.best_epoch,
        wall
    );
}

#[test]
fn criterion_08_personalisation_benefit() {
    let dim = Dimension::Arousal;
    let pipe = offset_pipeline();

    // Linear-model oracle: the subject offsets must create at least 0.1 CCC
    // of headroom between a global least-squares readout and the same
    // readout with its intercept refit on each subject's personal-train
    // segment. This validates the corpus difficulty independently of the
    // GRU pipeline.
    let train_samples = pipe.corpus.samples_with_role(Role::Train);
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for s in &train_samples {
        rows.extend(feature_rows(s, true));
        targets.extend(s.label(dim).unwrap().values().iter().copied());
    }
    let weights = lstsq_ridge(&rows, &targets, 1e-6);
    let mut oracle_base = Vec::new();
    let mut oracle_adapted = Vec::new();
    for subj in pipe.corpus.samples_with_role(Role::Test) {
        let split = split_subject(subj);
        let seg_train = split.personal_train.unwrap();
        let seg_test = split.personal_test.unwrap();
        let y_test = seg_test.label(dim).unwrap().values().to_vec();
        let x_test = feature_rows(&seg_test, true);
        let base_pred: Vec<f64> = x_test.iter().map(|r| dot(r, &weights)).collect();
        oracle_base.push(ccc_oracle(&base_pred, &y_test));
        // Intercept correction from the subject's first 60 s.
        let x_tr = feature_rows(&seg_train, true);
        let y_tr = seg_train.label(dim).unwrap().values().to_vec();
        let fit_tr: Vec<f64> = x_tr.iter().map(|r| dot(r, &weights)).collect();
        let bias = mean(&y_tr) - mean(&fit_tr);
        let adapted: Vec<f64> = base_pred.iter().map(|p| p + bias).collect();
        oracle_adapted.push(ccc_oracle(&adapted, &y_test));
    }
    let headroom = mean(&oracle_adapted) - mean(&oracle_base);
    assert!(
        headroom >= 0.1,
        "oracle headroom {headroom:.3} (base {:.3}, adapted {:.3})",
        mean(&oracle_base),
        mean(&oracle_adapted)
    );

    let mut gains = Vec::new();
    for s in &pipe.subjects {
        println!(
            "  {}: pretrained {:.4} -> personalised {:.4} (seed {}, personal-dev {:.4})",
            s.subject_id, s.baseline_ccc, s.personalised_ccc, s.personalised.chosen_seed,
            s.personalised.dev_ccc
        );
        gains.push(s.personalised_ccc - s.baseline_ccc);
    }
    let mean_gain = mean(&gains);
    assert!(mean_gain >= 0.05, "mean personalisation gain {mean_gain:.4}");
    println!(
        "criterion 08 personalisation-benefit: PASS (mean gain {mean_gain:.4} over {} subjects, \
         oracle headroom {headroom:.3})",
        gains.len()
    );
}

#[test]
fn criterion_09_determinism() {
    let pre = standard_pretrain();
    let corpus = generate_synthetic_corpus(&standard_spec(), CORPUS_SEED).unwrap();
    let train = corpus.samples_with_role(Role::Train);
    let dev = corpus.samples_with_role(Role::Dev);
    let cfg = acceptance_train_cfg();
    for (dim, first) in [
        (Dimension::Arousal, &pre.arousal),
        (Dimension::Valence, &pre.valence),
    ] {
        let rerun = pretrain(&train, &dev, &acceptance_model_cfg(), &cfg, dim, |_, _| {})
            .unwrap();
        assert_eq!(
            encode_checkpoint(&rerun.model, &rerun.stats),
            encode_checkpoint(&first.model, &first.stats),
            "{dim}: checkpoint bytes differ between runs"
        );
        assert_eq!(
            render_train_report_csv(&rerun.report),
            render_train_report_csv(&first.report),
            "{dim}: train reports differ between runs"
        );
    }

    // Personalisation path, re-run for the first offset test subject.
    let pipe = offset_pipeline();
    let offset_corpus = generate_synthetic_corpus(&offset_spec(), CORPUS_SEED).unwrap();
    let subj = offset_corpus.samples_with_role(Role::Test)[0];
    let split = split_subject(subj);
    let rerun = personalise(
        &pipe.pretrained.model,
        &pipe.pretrained.stats,
        &split,
        &cfg,
        Dimension::Arousal,
    )
    .unwrap();
    let first = &pipe.subjects[0].personalised;
    assert_eq!(rerun.chosen_seed, first.chosen_seed);
    assert_eq!(rerun.seed_scores, first.seed_scores);
    assert_eq!(
        encode_checkpoint(&rerun.model, &pipe.pretrained.stats),
        encode_checkpoint(&first.model, &pipe.pretrained.stats),
        "personalised checkpoint bytes differ between runs"
    );
    println!("criterion 09 determinism: PASS (pretrain x2 dims and personalise re-runs bit-identical)");
}

#[test]
fn criterion_10_checkpoint_roundtrip() {
    let mut rng = SplitMix64::new(1010);
    for trial in 0..20 {
        let n_mod = 1 + rng.index(3);
        let input_dims: Vec<usize> = (0..n_mod).map(|_| 1 + rng.index(6)).collect();
        let cfg = ModelConfig::new(input_dims.clone(), 1 + rng.index(8))
            .with_layers(1 + rng.index(2))
            .with_bidirectional(rng.index(2) == 1)
            .with_seed(trial);
        let model = init_model(&cfg).unwrap();
        let stats = NormStats::from_parts(
            input_dims
                .iter()
                .enumerate()
                .map(|(i, dim)| ModalityStats {
                    name: format!("m{i}"),
                    mean: (0..*dim).map(|_| rng.normal()).collect(),
                    std: (0..*dim).map(|_| rng.uniform(1e-6, 3.0)).collect(),
                })
                .collect(),
        );
        let bytes = encode_checkpoint(&model, &stats);
        let (model2, stats2) = decode_checkpoint(&bytes).unwrap();
        let bytes2 = encode_checkpoint(&model2, &stats2);
        assert_eq!(bytes, bytes2, "trial {trial}: save-load-save not byte-identical");
    }
    println!("criterion 10 checkpoint-roundtrip: PASS (20 random models)");
}

#[test]
fn criterion_11_combined_score() {
    let means = [(Dimension::Arousal, 0.8386), (Dimension::Valence, 0.8492)];
    let combined = combined_from_dimension_means(&means);
    assert_eq!(combined, 0.8439, "combined score must be exact");
    assert_eq!(combined_score(0.8386, 0.8492), 0.8439);
    let report = CorpusReport {
        rows: vec![],
        dimension_means: means.to_vec(),
        combined,
    };
    assert!(render_report_csv(&report).contains("combined,,0.8439\n"));
    println!("criterion 11 combined-score: PASS (0.8386/0.8492 -> 0.8439 exactly)");
}

/// Reported, not hard-asserted: how often the prediction-level ensemble
/// beats the arithmetic mean of its members' CCCs on synthetic targets.
#[test]
fn ensemble_improvement_rate_report() {
    let corpus = generate_synthetic_corpus(&standard_spec(), CORPUS_SEED).unwrap();
    let target = corpus.subjects[0]
        .sample
        .label(Dimension::Arousal)
        .unwrap()
        .values()
        .to_vec();
    let ts = corpus.subjects[0].sample.timestamps_ms().to_vec();
    let mut wins = 0usize;
    let trials = 50usize;
    for trial in 0..trials {
        let mut rng = SplitMix64::new(9_000 + trial as u64);
        let members: Vec<PredictionSequence> = (0..3)
            .map(|k| {
                let scale = rng.uniform(0.6, 1.3);
                let shift = rng.uniform(-0.3, 0.3);
                let noise = rng.uniform(0.05, 0.35);
                PredictionSequence::new(
                    "s",
                    Dimension::Arousal,
                    ts.clone(),
                    target
                        .iter()
                        .map(|y| scale * y + shift + noise * rng.normal())
                        .collect(),
                    vec![ProvenanceTag::combo(format!("member{k}"))],
                )
                .unwrap()
            })
            .collect();
        let member_mean = mean(
            &members
                .iter()
                .map(|m| ccc_oracle(m.values(), &target))
                .collect::<Vec<f64>>(),
        );
        let ens = ensemble_mean(&members).unwrap();
        if ccc_oracle(ens.values(), &target) >= member_mean {
            wins += 1;
        }
    }
    println!(
        "ensemble improvement rate: {wins}/{trials} trials with ensemble CCC >= mean member CCC"
    );
    assert!(wins * 2 >= trials, "ensemble should win at least half the trials");
}
