//! Generator and channel checks against independent oracles.

use ismclass::signal::{
    add_awgn, burst_region_power, generate, overlap_fraction, UsRange, NO_NOISE,
};
use ismclass::{BurstTruth, FrameKind, GeneratorConfig, IqRecording, ProtocolLabel, Scenario};
use proptest::prelude::*;

const RATE: f64 = 20e6;

fn us(samples: usize) -> f64 {
    samples as f64 / RATE * 1e6
}

fn gen(scenario: Scenario, duration_s: f64, seed: u64) -> (IqRecording, BurstTruth) {
    generate(&GeneratorConfig::new(scenario, duration_s, seed), RATE).unwrap()
}

/// Maximal runs of nonzero samples, found by scanning the envelope.
fn envelope_runs(rec: &IqRecording) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, s) in rec.samples().iter().enumerate() {
        match (s.norm_sqr() > 0.0, start) {
            (true, None) => start = Some(i),
            (false, Some(b)) => {
                runs.push((b, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(b) = start {
        runs.push((b, rec.len()));
    }
    runs
}

#[test]
fn beacon_one_second_layout() {
    let (rec, truth) = gen(Scenario::BeaconOnly, 1.0, 3);
    assert!((9..=10).contains(&truth.len()), "{}", truth.len());
    for b in truth.iter() {
        assert_eq!(b.end_sample - b.start_sample, 43_680);
        assert_eq!(b.label, ProtocolLabel::WifiBeacon);
        assert_eq!(b.kind, FrameKind::Beacon);
        assert!(b.end_sample <= rec.len());
    }
    for w in truth.bursts.windows(2) {
        assert_eq!(w[1].start_sample - w[0].start_sample, 2_048_000);
    }
}

#[test]
fn short_beacon_recording_has_one_burst() {
    let (_, truth) = gen(Scenario::BeaconOnly, 0.05, 0);
    assert_eq!(truth.len(), 1);
}

#[test]
fn beacon_truth_matches_envelope_scan() {
    for seed in 0..5 {
        let (rec, truth) = gen(Scenario::BeaconOnly, 0.6, seed);
        let spans: Vec<_> = truth
            .iter()
            .map(|b| (b.start_sample, b.end_sample))
            .collect();
        assert_eq!(envelope_runs(&rec), spans);
    }
}

#[test]
fn wifi_cycle_with_fixed_data_width() {
    let cfg = GeneratorConfig {
        wifi_data_frame_us_range: UsRange::new(500.0, 500.0),
        ..GeneratorConfig::new(Scenario::WifiExchange, 0.05, 9)
    };
    let (_, truth) = generate(&cfg, RATE).unwrap();
    let b = &truth.bursts;
    let rts = b.iter().position(|x| x.kind == FrameKind::Rts).unwrap();
    let cycle = &b[rts..rts + 4];
    let kinds: Vec<_> = cycle.iter().map(|x| x.kind).collect();
    assert_eq!(
        kinds,
        [
            FrameKind::Rts,
            FrameKind::Cts,
            FrameKind::Data,
            FrameKind::Ack
        ]
    );
    assert!(cycle.iter().all(|x| x.label == ProtocolLabel::Wifi));
    for w in cycle.windows(2) {
        assert_eq!(w[1].start_sample - w[0].end_sample, 200);
    }
    let datas: Vec<_> = b.iter().filter(|x| x.kind == FrameKind::Data).collect();
    assert!(datas.len() > 3);
    assert!(datas
        .iter()
        .all(|d| d.end_sample - d.start_sample == 10_000));
    // DIFS before the next RTS.
    let next = b[rts + 4..]
        .iter()
        .position(|x| x.kind == FrameKind::Rts)
        .unwrap()
        + rts
        + 4;
    if b[next - 1].kind == FrameKind::Ack {
        assert_eq!(b[next].start_sample - b[next - 1].end_sample, 1000);
    }
}

#[test]
fn wifi_gap_multiset_is_sifs_difs_or_beacon_adjacent() {
    let (_, truth) = gen(Scenario::WifiExchange, 1.0, 4);
    let b = &truth.bursts;
    for w in b.windows(2) {
        let gap = us(w[1].start_sample - w[0].end_sample);
        let beacon_adjacent = w[0].kind == FrameKind::Beacon || w[1].kind == FrameKind::Beacon;
        if !beacon_adjacent {
            assert!(
                gap == 10.0 || gap == 50.0,
                "gap {gap} between {:?} and {:?}",
                w[0].kind,
                w[1].kind
            );
        }
    }
    assert!(b.iter().any(|x| x.kind == FrameKind::Beacon));
}

#[test]
fn bluetooth_ranges_and_constant_envelope() {
    for seed in 0..5 {
        let (rec, truth) = gen(Scenario::Bluetooth, 0.3, seed);
        let b = &truth.bursts;
        for (i, x) in b.iter().enumerate() {
            let w = us(x.end_sample - x.start_sample);
            match x.kind {
                FrameKind::BtData => {
                    assert!((2500.0..=2870.0).contains(&w), "data {w}");
                    if let Some(ack) = b.get(i + 1) {
                        let d = us(ack.start_sample - x.end_sample);
                        assert!((200.0..=600.0).contains(&d), "ack delay {d}");
                    }
                }
                FrameKind::BtAck => assert!((126.0..=366.0).contains(&w), "ack {w}"),
                k => panic!("unexpected {k:?}"),
            }
            let mags: Vec<f32> = rec.samples()[x.start_sample..x.end_sample]
                .iter()
                .map(|s| s.norm())
                .collect();
            let (lo, hi) = mags
                .iter()
                .fold((f32::MAX, 0f32), |(l, h), &m| (l.min(m), h.max(m)));
            assert!(hi - lo < 1e-5, "envelope {lo}..{hi}");
        }
    }
}

/// Independent overlap scan: quadratic pairwise comparison.
fn overlap_oracle(truth: &BurstTruth) -> f64 {
    let b = &truth.bursts;
    let hits = (0..b.len())
        .filter(|&i| {
            (0..b.len()).any(|j| {
                j != i && b[i].start_sample < b[j].end_sample && b[j].start_sample < b[i].end_sample
            })
        })
        .count();
    hits as f64 / b.len() as f64
}

#[test]
fn mixed_is_the_union_of_its_streams() {
    let seed = 21;
    let (rec, truth) = gen(Scenario::Mixed, 1.0, seed);
    let (_, beacons) = gen(Scenario::BeaconOnly, 1.0, seed);
    let (_, bt) = gen(Scenario::Bluetooth, 1.0, seed);
    assert_eq!(truth.count_label(ProtocolLabel::WifiBeacon), beacons.len());
    assert_eq!(truth.count_label(ProtocolLabel::Bluetooth), bt.len());
    let frac = overlap_oracle(&truth);
    assert_eq!(overlap_fraction(&truth), frac);
    let meta: f64 = rec.meta_value("overlap_fraction").unwrap().parse().unwrap();
    assert!((meta - frac).abs() < 1e-12);
}

#[test]
fn generation_is_deterministic() {
    for scenario in [
        Scenario::BeaconOnly,
        Scenario::WifiExchange,
        Scenario::Bluetooth,
        Scenario::Mixed,
    ] {
        let a = gen(scenario, 0.2, 5);
        let b = gen(scenario, 0.2, 5);
        assert_eq!(a.0.samples(), b.0.samples());
        assert_eq!(a.1, b.1);
    }
    let c = gen(Scenario::WifiExchange, 0.2, 6);
    assert_ne!(c.1, gen(Scenario::WifiExchange, 0.2, 5).1);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        GeneratorConfig::new(Scenario::BeaconOnly, 0.0, 0),
        GeneratorConfig::new(Scenario::BeaconOnly, -1.0, 0),
        GeneratorConfig {
            amplitude: 0.0,
            ..GeneratorConfig::default()
        },
        GeneratorConfig {
            wifi_data_frame_us_range: UsRange::new(3000.0, 1000.0),
            ..GeneratorConfig::new(Scenario::WifiExchange, 0.1, 0)
        },
    ];
    for cfg in bad {
        assert!(generate(&cfg, RATE).is_err(), "{cfg:?}");
    }
}

#[test]
fn awgn_infinite_snr_is_identity() {
    let (rec, _) = gen(Scenario::BeaconOnly, 0.2, 1);
    let out = add_awgn(&rec, NO_NOISE, 9).unwrap();
    assert_eq!(out.samples(), rec.samples());
}

#[test]
fn awgn_zero_db_noise_power_matches_signal_power() {
    // 1.03 s of beacons leaves more than 10^6 silent samples between bursts.
    let (rec, truth) = gen(Scenario::BeaconOnly, 1.03, 2);
    let signal = burst_region_power(&rec).unwrap();
    let noisy = add_awgn(&rec, 0.0, 77).unwrap();
    let (a, b) = (truth.bursts[0].end_sample, truth.bursts[1].start_sample);
    let silent = &noisy.samples()[a..b];
    assert!(silent.len() >= 1_000_000);
    let n = silent.len() as f64;
    let power = silent.iter().map(|s| s.norm_sqr() as f64).sum::<f64>() / n;
    assert!((power / signal - 1.0).abs() < 0.05, "{power} vs {signal}");

    // Gaussianity sanity on the in-phase component.
    let mean = silent.iter().map(|s| s.re as f64).sum::<f64>() / n;
    let var = silent
        .iter()
        .map(|s| (s.re as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    assert!(mean.abs() < 0.01 * signal.sqrt());
    assert!((var / (signal / 2.0) - 1.0).abs() < 0.02, "{var}");
    assert_eq!(noisy.len(), rec.len());
    assert_eq!(noisy.sample_rate_hz(), rec.sample_rate_hz());
}

#[test]
fn awgn_is_deterministic_per_seed() {
    let (rec, _) = gen(Scenario::Bluetooth, 0.05, 1);
    let a = add_awgn(&rec, 5.0, 3).unwrap();
    let b = add_awgn(&rec, 5.0, 3).unwrap();
    let c = add_awgn(&rec, 5.0, 4).unwrap();
    assert_eq!(a.samples(), b.samples());
    assert_ne!(a.samples(), c.samples());
}

#[test]
fn awgn_rejects_silence_and_nan() {
    let silent = IqRecording::new(vec![Default::default(); 100], RATE).unwrap();
    assert!(add_awgn(&silent, 10.0, 0).is_err());
    let (rec, _) = gen(Scenario::BeaconOnly, 0.01, 0);
    assert!(add_awgn(&rec, f64::NAN, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truth_is_sorted_in_bounds_and_in_range(
        seed in any::<u64>(),
        scenario in prop::sample::select(vec![Scenario::BeaconOnly, Scenario::WifiExchange, Scenario::Bluetooth]),
        duration in 0.01f64..0.25,
    ) {
        let (rec, truth) = gen(scenario, duration, seed);
        let b = &truth.bursts;
        for x in b {
            prop_assert!(x.start_sample < x.end_sample);
            prop_assert!(x.end_sample <= rec.len());
            let w = us(x.end_sample - x.start_sample);
            let ok = match x.kind {
                FrameKind::Beacon => w == 2184.0,
                FrameKind::Rts => w == 50.0,
                FrameKind::Cts | FrameKind::Ack => w == 40.0,
                FrameKind::Data => (1000.0..=3000.0).contains(&w),
                FrameKind::BtData => (2500.0..=2870.0).contains(&w),
                FrameKind::BtAck => (126.0..=366.0).contains(&w),
            };
            prop_assert!(ok, "{:?} width {}", x.kind, w);
        }
        for w in b.windows(2) {
            prop_assert!(w[0].end_sample <= w[1].start_sample);
        }
    }
}
