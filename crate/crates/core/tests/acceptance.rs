//! Acceptance run: one PASS/FAIL line per criterion, then a nonzero exit if
//! any failed. Built without the libtest harness so the lines always print.

mod common;

use std::time::{Duration, Instant};

use common::{kkt_audit, knn_oracle, median, primal_weights, targets};
use ismclass::detect::{detect_bursts, DetectorConfig};
use ismclass::eval::{
    build_corpus, emit_report, evaluate, run_noise_study, score_detections, split_train_test,
    train_model, Classifier, CorpusConfig, EvalReport, Method, MethodSpec, NoiseStudyConfig,
    ReportFormat, TestRecording, TrainedModel,
};
use ismclass::features::{save_dataset, standardize, FeatureSet, LabeledDataset};
use ismclass::io::{write_iq, write_json};
use ismclass::signal::generate;
use ismclass::{BurstTruth, FrameKind, GeneratorConfig, ProtocolLabel, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RATE: f64 = 20e6;

struct Outcome {
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn timed(f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t = Instant::now();
    let (pass, detail) = f();
    Outcome {
        pass,
        detail,
        elapsed: t.elapsed(),
    }
}

fn us(samples: usize) -> f64 {
    samples as f64 / RATE * 1e6
}

/// Width and spacing rules for one truth list; returns the violations.
fn generator_violations(truth: &BurstTruth) -> Vec<String> {
    let b = &truth.bursts;
    let mut bad = Vec::new();
    for (i, x) in b.iter().enumerate() {
        let w = us(x.end_sample - x.start_sample);
        let ok = match x.kind {
            FrameKind::Beacon => w == 2184.0,
            FrameKind::Rts => w == 50.0,
            FrameKind::Cts | FrameKind::Ack => w == 40.0,
            FrameKind::Data => (1000.0..=3000.0).contains(&w),
            FrameKind::BtData => (2500.0..=2870.0).contains(&w),
            FrameKind::BtAck => (126.0..=366.0).contains(&w),
        };
        if !ok {
            bad.push(format!("{:?} width {w}", x.kind));
        }
        let Some(next) = b.get(i + 1) else { continue };
        let gap = us(next.start_sample.saturating_sub(x.end_sample));
        let gap_ok = match (x.kind, next.kind) {
            (FrameKind::Beacon, _) | (_, FrameKind::Beacon) => true,
            (FrameKind::Rts, FrameKind::Cts)
            | (FrameKind::Cts, FrameKind::Data)
            | (FrameKind::Data, FrameKind::Ack) => gap == 10.0,
            (FrameKind::Ack, FrameKind::Rts) => gap == 50.0,
            (FrameKind::BtData, FrameKind::BtAck) => (200.0..=600.0).contains(&gap),
            (FrameKind::BtAck, FrameKind::BtData) => true,
            (a, c) => {
                bad.push(format!("unexpected {a:?} -> {c:?}"));
                true
            }
        };
        if !gap_ok {
            bad.push(format!("{:?} -> {:?} gap {gap}", x.kind, next.kind));
        }
    }
    bad
}

fn criterion_1() -> (bool, String) {
    let mut violations = Vec::new();
    let mut frames = 0;
    for seed in 0..100u64 {
        for (scenario, dur) in [
            (Scenario::WifiExchange, 0.12),
            (Scenario::Bluetooth, 0.12),
            (Scenario::BeaconOnly, 0.25),
        ] {
            let (_, truth) = generate(&GeneratorConfig::new(scenario, dur, seed), RATE).unwrap();
            frames += truth.len();
            violations.extend(
                generator_violations(&truth)
                    .into_iter()
                    .map(|v| format!("seed {seed} {scenario}: {v}")),
            );
        }
    }
    let detail = format!(
        "{frames} frames over 100 seeds, {} violations {:?}",
        violations.len(),
        violations.iter().take(3).collect::<Vec<_>>()
    );
    (violations.is_empty(), detail)
}

fn criterion_2() -> (bool, String) {
    let cfg = DetectorConfig::default();
    let tol = cfg.edge_tolerance();
    let mut pass = true;
    let mut parts = Vec::new();
    for (scenario, dur) in [
        (Scenario::BeaconOnly, 1.0),
        (Scenario::WifiExchange, 0.25),
        (Scenario::Bluetooth, 0.5),
    ] {
        let (mut worst_p, mut worst_r, mut worst_err) = (1.0f64, 1.0f64, 0);
        let t = Instant::now();
        for seed in 1..=3 {
            let (rec, truth) = generate(&GeneratorConfig::new(scenario, dur, seed), RATE).unwrap();
            let s = score_detections(&detect_bursts(&rec, &cfg).unwrap(), &truth);
            worst_p = worst_p.min(s.precision);
            worst_r = worst_r.min(s.recall);
            worst_err = worst_err.max(s.max_boundary_error);
        }
        let per_second = t.elapsed().as_secs_f64() / (3.0 * dur);
        pass &= worst_p == 1.0 && worst_r == 1.0 && worst_err <= tol && per_second < 60.0;
        parts.push(format!("{scenario}: P {worst_p} R {worst_r} edge {worst_err}/{tol} ({per_second:.2} s per signal second)"));
    }
    (pass, parts.join("; "))
}

fn criterion_3(corpus: &LabeledDataset) -> (bool, String) {
    let by = |l: ProtocolLabel| -> Vec<f64> {
        corpus
            .rows
            .iter()
            .filter(|r| r.label == l)
            .map(|r| r.features.papr_db)
            .collect()
    };
    let (wifi, beacon, bt) = (
        by(ProtocolLabel::Wifi),
        by(ProtocolLabel::WifiBeacon),
        by(ProtocolLabel::Bluetooth),
    );
    let bt_max = bt.iter().cloned().fold(0.0, f64::max);
    let pairs = wifi.len().min(bt.len());
    let wins = wifi.iter().zip(&bt).filter(|(w, b)| w > b).count();
    let frac = wins as f64 / pairs as f64;
    let (mw, mb) = (median(&wifi), median(&beacon));
    let pass = bt_max <= 0.5 && mw >= 5.0 && mb >= 5.0 && frac >= 0.99;
    (pass, format!("Bluetooth max {bt_max:.3} dB; median Wi-Fi {mw:.2} dB, beacon {mb:.2} dB; Wi-Fi > Bluetooth in {wins}/{pairs} pairs"))
}

struct Table {
    train: LabeledDataset,
    test: LabeledDataset,
    models: Vec<TrainedModel>,
    reports: Vec<EvalReport>,
}

/// Trains every method on both feature sets over one standardized split.
fn table(corpus: &LabeledDataset) -> Table {
    let (train, test) = split_train_test(corpus, 0.2, 7, true).unwrap();
    let train = standardize(&train, None).unwrap();
    let test = standardize(&test, train.standardization.as_ref()).unwrap();
    let mut models = Vec::new();
    let mut reports = Vec::new();
    for features in [FeatureSet::TimePlusPapr, FeatureSet::TimeOnly] {
        for method in Method::ALL {
            let m = train_model(&MethodSpec::new(method, features), &train).unwrap();
            reports.push(evaluate(&m, &test).unwrap());
            models.push(m);
        }
    }
    Table {
        train,
        test,
        models,
        reports,
    }
}

fn criterion_4(t: &Table) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut knn_mismatch = 0;
    let mut queries = 0;
    let (mut worst_kkt, mut worst_primal, mut audited) = (0.0f64, 0.0f64, 0);
    let mut unconverged = 0;
    for m in &t.models {
        let f = m.features();
        let rows: Vec<Vec<f64>> = t.train.rows.iter().map(|r| r.features.point(f)).collect();
        match &m.classifier {
            Classifier::Knn(k) => {
                let labels: Vec<_> = t.train.rows.iter().map(|r| r.label).collect();
                for _ in 0..1000 {
                    let q: Vec<f64> = (0..f.dims()).map(|_| rng.random_range(-3.0..3.0)).collect();
                    queries += 1;
                    if k.predict(&q) != knn_oracle(&rows, &labels, k.k, &q) {
                        knn_mismatch += 1;
                    }
                }
            }
            Classifier::Svm(s) => {
                for c in &s.classes {
                    audited += 1;
                    unconverged += usize::from(!c.model.converged);
                    let a = kkt_audit(&c.model, &rows, &targets(&t.train, c.label));
                    worst_kkt = worst_kkt.max(a.max_violation);
                    if m.method() == Method::SvmLinear {
                        let w = primal_weights(&c.model);
                        for x in t.test.rows.iter().map(|r| r.features.point(f)) {
                            let p: f64 =
                                w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + c.model.bias;
                            worst_primal = worst_primal.max((p - c.model.decision_value(&x)).abs());
                        }
                    }
                }
            }
        }
    }
    let pass = knn_mismatch == 0 && unconverged == 0 && worst_kkt <= 1e-3 && worst_primal <= 1e-6;
    (pass, format!(
        "KNN {knn_mismatch} mismatches in {queries} queries; {audited} binary SVMs, {unconverged} unconverged, worst KKT violation {worst_kkt:.2e}; linear primal gap {worst_primal:.2e}"
    ))
}

fn criterion_5(t: &Table) -> (bool, String) {
    let acc = |method: Method, f: FeatureSet| -> &EvalReport {
        t.reports
            .iter()
            .find(|r| r.method == method.name() && r.features_used == f)
            .unwrap()
    };
    let correct = |r: &EvalReport| (0..3).map(|i| r.confusion[i][i]).sum::<usize>();
    let n = t.test.len();
    let mut pass = true;
    let mut parts = Vec::new();
    let full: Vec<f64> = Method::ALL
        .iter()
        .map(|&m| acc(m, FeatureSet::TimePlusPapr).accuracy)
        .collect();
    pass &= full.iter().all(|&a| a >= 0.95);
    // KNN >= Rbf >= Polynomial >= Linear, each within one point.
    let order = [
        Method::Knn,
        Method::SvmRbf,
        Method::SvmPoly,
        Method::SvmLinear,
    ];
    for w in order.windows(2) {
        let (hi, lo) = (
            acc(w[0], FeatureSet::TimePlusPapr),
            acc(w[1], FeatureSet::TimePlusPapr),
        );
        pass &= hi.accuracy + 0.01 >= lo.accuracy;
    }
    // One point of the test set, in rows.
    let point = (n as f64 / 100.0).ceil() as usize;
    for m in Method::ALL {
        let (a3, a2) = (
            acc(m, FeatureSet::TimePlusPapr),
            acc(m, FeatureSet::TimeOnly),
        );
        let gain = correct(a3) as i64 - correct(a2) as i64;
        pass &= gain >= point as i64;
        parts.push(format!(
            "{m} {:.2}% vs time-only {:.2}% (+{gain} rows)",
            100.0 * a3.accuracy,
            100.0 * a2.accuracy
        ));
    }
    (
        pass,
        format!(
            "{n} test rows, 1 point = {point} rows; {}",
            parts.join("; ")
        ),
    )
}

fn criterion_6(train: &LabeledDataset) -> (bool, String) {
    let tests: Vec<TestRecording> = [
        (Scenario::WifiExchange, 0.47),
        (Scenario::Bluetooth, 0.5),
        (Scenario::BeaconOnly, 1.03),
    ]
    .iter()
    .map(|&(s, d)| {
        let (recording, truth) = generate(&GeneratorConfig::new(s, d, 99), RATE).unwrap();
        TestRecording { recording, truth }
    })
    .collect();
    let specs: Vec<MethodSpec> = Method::ALL
        .iter()
        .map(|&m| MethodSpec::new(m, FeatureSet::TimePlusPapr))
        .collect();
    let cfg = NoiseStudyConfig {
        seed: 5,
        ..Default::default()
    };
    let reports = run_noise_study(train, &specs, &tests, &cfg).unwrap();

    let detected: Vec<usize> = reports[0]
        .per_snr
        .iter()
        .map(|p| p.detected_frames)
        .collect();
    let truth = reports[0].per_snr[0].truth_frames;
    let mut pass = detected.windows(2).all(|w| w[0] <= w[1]);
    let low: Vec<usize> = reports[0]
        .per_snr
        .iter()
        .filter(|p| p.snr_db <= 2.0)
        .map(|p| p.detected_frames)
        .collect();
    pass &= !low.is_empty() && low.iter().all(|&d| d * 10 <= truth);

    let mut parts = vec![format!("truth {truth}, detected {detected:?}")];
    for r in &reports {
        let fa: Vec<f64> = r
            .per_snr
            .iter()
            .map(|p| p.frame_accuracy.unwrap_or(0.0))
            .collect();
        let inversions: Vec<f64> = fa
            .windows(2)
            .map(|w| w[0] - w[1])
            .filter(|&d| d > 0.0)
            .collect();
        let ok = inversions.len() <= 1 && inversions.iter().all(|&d| d <= 0.02);
        pass &= ok;
        let spec_acc: Vec<String> = r
            .per_snr
            .iter()
            .map(|p| {
                p.accuracy
                    .map_or("-".into(), |a| format!("{:.1}", 100.0 * a))
            })
            .collect();
        let spec_inv = r
            .per_snr
            .windows(2)
            .filter(|w| matches!((w[0].accuracy, w[1].accuracy), (Some(a), Some(b)) if a > b))
            .count();
        parts.push(format!(
            "{}: frame accuracy % {:?} ({} inversions); per-detection % [{}] ({spec_inv} inversions, informational)",
            r.method,
            fa.iter().map(|a| (1000.0 * a).round() / 10.0).collect::<Vec<_>>(),
            inversions.len(),
            spec_acc.join(", ")
        ));
    }
    (pass, parts.join("; "))
}

/// Every artifact of a short pipeline, as bytes.
fn pipeline_bytes(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let (rec, truth) = generate(&GeneratorConfig::new(Scenario::Mixed, 0.2, 17), RATE).unwrap();
    write_iq(&dir.join("mixed.iq"), &rec).unwrap();
    write_json(&dir.join("mixed.truth.json"), &truth).unwrap();
    let (corpus, _) = build_corpus(&CorpusConfig {
        frames_per_class: 120,
        seed: 17,
        ..Default::default()
    })
    .unwrap();
    let (train, test) = split_train_test(&corpus, 0.2, 17, true).unwrap();
    let train = standardize(&train, None).unwrap();
    let test = standardize(&test, train.standardization.as_ref()).unwrap();
    save_dataset(&dir.join("train.csv"), &train).unwrap();
    save_dataset(&dir.join("test.csv"), &test).unwrap();
    let mut reports = Vec::new();
    for method in Method::ALL {
        let m = train_model(&MethodSpec::new(method, FeatureSet::TimePlusPapr), &train).unwrap();
        write_json(&dir.join(format!("{method}.model.json")), &m).unwrap();
        reports.push(evaluate(&m, &test).unwrap());
    }
    let tests = vec![TestRecording {
        recording: rec,
        truth,
    }];
    let cfg = NoiseStudyConfig {
        snr_grid_db: vec![5.0, 20.0],
        seed: 17,
        ..Default::default()
    };
    reports.extend(
        run_noise_study(
            &train,
            &[MethodSpec::new(Method::Knn, FeatureSet::TimePlusPapr)],
            &tests,
            &cfg,
        )
        .unwrap(),
    );
    std::fs::write(
        dir.join("reports.json"),
        emit_report(&reports, ReportFormat::Json).unwrap(),
    )
    .unwrap();
    std::fs::write(
        dir.join("reports.csv"),
        emit_report(&reports, ReportFormat::Csv).unwrap(),
    )
    .unwrap();

    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn criterion_7() -> (bool, String) {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline_bytes(a.path());
    let second = pipeline_bytes(b.path());
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let pass = first.len() == second.len() && differing.is_empty();
    (
        pass,
        format!(
            "{} artifacts compared, differing: {differing:?}",
            first.len()
        ),
    )
}

fn main() {
    // Listing, or a name filter aimed at another suite, runs nothing.
    let args: Vec<String> = std::env::args().skip(1).collect();
    let filtered_out = args
        .iter()
        .filter(|a| !a.starts_with('-'))
        .any(|a| !"acceptance criterion".contains(a.as_str()));
    if args.iter().any(|a| a == "--list") || filtered_out {
        return;
    }
    let t = Instant::now();
    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    results.push((1, "generator fidelity", timed(criterion_1)));
    results.push((2, "clean detection exactness", timed(criterion_2)));

    let corpus_start = Instant::now();
    let (corpus, _) = build_corpus(&CorpusConfig::default()).unwrap();
    let corpus_time = corpus_start.elapsed();
    let (train, _) = split_train_test(&corpus, 0.2, 7, true).unwrap();

    let (o3, o4, o5, o6) = std::thread::scope(|s| {
        let sweep = s.spawn(|| timed(|| criterion_6(&train)));
        let o3 = timed(|| criterion_3(&corpus));
        let tbl_start = Instant::now();
        let tbl = table(&corpus);
        let tbl_time = tbl_start.elapsed() + corpus_time;
        let o4 = timed(|| criterion_4(&tbl));
        let mut o5 = timed(|| criterion_5(&tbl));
        o5.elapsed += tbl_time;
        o5.pass &= o5.elapsed < Duration::from_secs(300);
        (o3, o4, o5, sweep.join().unwrap())
    });
    let mut o6 = o6;
    o6.pass &= o6.elapsed < Duration::from_secs(600);
    results.push((3, "feature sanity", o3));
    results.push((4, "oracle equivalence", o4));
    results.push((5, "method table reproduction", o5));
    results.push((6, "noise curve reproduction", o6));
    results.push((7, "determinism", timed(criterion_7)));

    let mut o1 = results.remove(0);
    o1.2.pass &= o1.2.elapsed < Duration::from_secs(60);
    results.insert(0, o1);

    println!();
    for (n, name, o) in &results {
        println!(
            "criterion {n} ({name}): {} [{:.1} s] {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.elapsed.as_secs_f64(),
            o.detail
        );
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        results.len() - failed,
        results.len(),
        t.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
