use super::*;
use crate::engine::{apply_rule, Alphabet, Builtin, LocalRule};
use crate::measure::BernoulliMeasure;
use crate::rng::CounterRng;
use num_bigint::BigInt;

fn binary() -> Alphabet {
    Alphabet::new(["0", "1"]).unwrap()
}

fn ab() -> Alphabet {
    Alphabet::new(["a", "b"]).unwrap()
}

fn w(a: &Alphabet, t: &str) -> Vec<State> {
    a.parse_word(t).unwrap()
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn occurrences_overlap() {
    let a = ab();
    assert_eq!(occurrences(&w(&a, "aabaa"), &w(&a, "aa")), 2);
    assert_eq!(occurrences(&w(&a, "aaa"), &w(&a, "aa")), 2);
    assert_eq!(occurrences(&w(&a, "ab"), &w(&a, "aba")), 0);
}

#[test]
fn density_examples() {
    let a = ab();
    let d = density(&w(&a, "aabaa"), &w(&a, "aa")).unwrap();
    assert_eq!(d.value, ratio(2, 3));
    assert!(!d.over_unity);

    // |v|_u / (|v| - |u|) can exceed 1 for single letters; flagged, not clamped
    let d = density(&w(&a, "bbbb"), &w(&a, "b")).unwrap();
    assert_eq!(d.value, ratio(4, 3));
    assert!(d.over_unity);

    let d = density(&w(&a, "abab"), &w(&a, "ba")).unwrap();
    assert_eq!(d.value, ratio(1, 2));
    assert!(!d.over_unity);
}

#[test]
fn density_requires_shorter_word() {
    let a = ab();
    assert!(matches!(
        density(&w(&a, "ab"), &w(&a, "ab")),
        Err(StatsError::WordTooLong { word: 2, text: 2 })
    ));
}

#[test]
fn counting_identity_over_all_words() {
    // sum over u in Q^n of occurrences(v, u) = |v| - n + 1
    let rng = CounterRng::new(11);
    for case in 0..300u64 {
        let q = 2 + rng.index(case, 2); // 2 or 3
        let len = 4 + rng.index(case + 1000, 61) as usize; // up to 64
        let v: Vec<State> = (0..len).map(|i| rng.index((case << 16) | i as u64, q)).collect();
        for n in 1..=3usize {
            if n > len {
                continue;
            }
            let mut total = 0u64;
            for code in 0..q.pow(n as u32) {
                let mut u = Vec::with_capacity(n);
                let mut rem = code;
                for _ in 0..n {
                    u.push(rem % q);
                    rem /= q;
                }
                total += occurrences(&v, &u);
            }
            assert_eq!(total, (len - n + 1) as u64, "case {case}, n={n}");
        }
    }
}

#[test]
fn identity_trace_is_constant() {
    let rule = LocalRule::from_builtin(Builtin::Identity, ab()).unwrap();
    let start = crate::engine::Window::torus(w(&ab(), "abbabaab"));
    let trace = crate::engine::evolve(&rule, &start, 6).unwrap();
    let words = vec![w(&ab(), "ab"), w(&ab(), "b")];
    let dt = density_trace(&trace, &words, &[0, 2, 4, 6], TraceMode::Instantaneous).unwrap();
    for row in &dt.values {
        assert_eq!(row, &dt.values[0]);
    }
}

#[test]
fn cesaro_of_alternating_series_tends_to_half() {
    // rows alternating all-a / all-b: instantaneous density of "a" is 1.25/0
    // (over-unity case aside, uses two-letter word to stay in [0,1])
    let a = ab();
    let rows = (0..40)
        .map(|t| {
            let sym = if t % 2 == 0 { "aaaaaaaaaa" } else { "bbbbbbbbbb" };
            crate::engine::Window::torus(w(&a, sym))
        })
        .collect::<Vec<_>>();
    let trace = crate::engine::SpaceTimeTrace { rows };
    let words = vec![w(&a, "aa")];
    let dt = density_trace(&trace, &words, &[39], TraceMode::Cesaro).unwrap();
    let v = dt.values[0][0];
    // instantaneous values alternate 9/8 and 0; the running mean settles near
    // their midpoint
    assert!((v - 0.5625).abs() < 0.02, "cesaro value {v}");
}

#[test]
fn cesaro_dominance_on_synthetic_trace() {
    // if instantaneous values are <= eps after t0, the cesaro value at T is
    // <= (t0 + eps*T)/T
    let t0 = 10usize;
    let total = 200usize;
    let eps = 0.01f64;
    let mut inst = vec![1.0f64; t0];
    inst.extend(vec![eps; total - t0]);
    let mut running = 0.0;
    for (t, v) in inst.iter().enumerate() {
        running += v;
        let cesaro = running / (t + 1) as f64;
        let bound = (t0 as f64 + eps * (t + 1) as f64) / (t + 1) as f64;
        assert!(cesaro <= bound + 1e-12, "t={t}: {cesaro} > {bound}");
    }
}

#[test]
fn stream_trace_matches_materialized_trace() {
    let rule = LocalRule::from_builtin(Builtin::Eca(110), binary()).unwrap();
    let m = BernoulliMeasure::uniform(binary());
    let start = m.sample_window(300, 3, crate::engine::Boundary::Torus);
    let words = vec![w(&binary(), "01"), w(&binary(), "111")];
    let checkpoints = vec![0, 3, 10, 25];
    let trace = crate::engine::evolve(&rule, &start, 25).unwrap();
    for mode in [TraceMode::Instantaneous, TraceMode::Cesaro] {
        let a = density_trace(&trace, &words, &checkpoints, mode).unwrap();
        let b = density_trace_stream(&rule, &start, 25, &words, &checkpoints, mode).unwrap();
        assert_eq!(a.times, b.times);
        for (ra, rb) in a.values.iter().zip(&b.values) {
            for (va, vb) in ra.iter().zip(rb) {
                assert!((va - vb).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn max_rule_density_tracks_oracle() {
    // density of "0" under the max rule decays like the exact pushforward
    let rule = LocalRule::from_builtin(Builtin::Max, binary()).unwrap();
    let m = BernoulliMeasure::uniform(binary());
    let n = 200_000usize;
    let start = m.sample_window(n, 8121, crate::engine::Boundary::Torus);
    let words = vec![w(&binary(), "0")];
    let checkpoints: Vec<u64> = (1..=5).collect();
    let dt =
        density_trace_stream(&rule, &start, 5, &words, &checkpoints, TraceMode::Instantaneous)
            .unwrap();
    for (k, &t) in dt.times.iter().enumerate() {
        let expected = 0.5f64.powi(2 * t as i32 + 1);
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        let got = dt.values[k][0];
        assert!(
            (got - expected).abs() < 4.0 * sigma + 1e-9,
            "t={t}: got {got}, expected {expected}"
        );
    }
}

#[test]
fn persistence_verdicts_for_max_rule() {
    let rule = LocalRule::from_builtin(Builtin::Max, binary()).unwrap();
    let m = BernoulliMeasure::uniform(binary());
    let words = vec![w(&binary(), "0"), w(&binary(), "1")];
    let verdicts = estimate_persistence(
        &rule,
        &m,
        &words,
        &PersistenceOptions {
            horizon: 64,
            replicas: 3,
            width: 20_000,
            boundary: crate::engine::Boundary::Torus,
            seed: 5,
            checkpoints: vec![],
        },
    )
    .unwrap();
    assert_eq!(verdicts[0].verdict, Verdict::VanishingLikely, "{:?}", verdicts[0]);
    assert_eq!(verdicts[1].verdict, Verdict::PersistentLikely, "{:?}", verdicts[1]);
}

#[test]
fn persistence_verdicts_for_traffic_rule() {
    let rule = LocalRule::from_builtin(Builtin::Eca(184), binary()).unwrap();
    let m = BernoulliMeasure::uniform(binary());
    let words = vec![w(&binary(), "00"), w(&binary(), "11"), w(&binary(), "01")];
    let verdicts = estimate_persistence(
        &rule,
        &m,
        &words,
        &PersistenceOptions {
            horizon: 5000,
            replicas: 3,
            width: 2000,
            boundary: crate::engine::Boundary::Torus,
            seed: 6,
            checkpoints: vec![],
        },
    )
    .unwrap();
    assert_eq!(verdicts[0].verdict, Verdict::VanishingLikely, "00: {:?}", verdicts[0]);
    assert_eq!(verdicts[1].verdict, Verdict::VanishingLikely, "11: {:?}", verdicts[1]);
    assert_eq!(verdicts[2].verdict, Verdict::PersistentLikely, "01: {:?}", verdicts[2]);
}

#[test]
fn spreading_symbol_empties_the_rest() {
    let base = LocalRule::from_builtin(Builtin::Identity, ab()).unwrap();
    let rule = crate::engine::spreading_over(&base, "s").unwrap();
    let alphabet = rule.alphabet().clone();
    let m = BernoulliMeasure::new(
        alphabet.clone(),
        vec![ratio(9, 20), ratio(9, 20), ratio(1, 10)],
    )
    .unwrap();
    let words = vec![w(&ab(), "a")];
    let verdicts = estimate_persistence(
        &rule,
        &m,
        &words,
        &PersistenceOptions {
            horizon: 300,
            replicas: 2,
            width: 50_000,
            boundary: crate::engine::Boundary::Torus,
            seed: 7,
            checkpoints: vec![],
        },
    )
    .unwrap();
    assert_eq!(verdicts[0].verdict, Verdict::VanishingLikely);
}

#[test]
fn empty_request_rejected() {
    let rule = LocalRule::from_builtin(Builtin::Max, binary()).unwrap();
    let m = BernoulliMeasure::uniform(binary());
    let opts = PersistenceOptions {
        horizon: 8,
        replicas: 1,
        width: 100,
        boundary: crate::engine::Boundary::Torus,
        seed: 0,
        checkpoints: vec![],
    };
    assert!(matches!(
        estimate_persistence(&rule, &m, &[], &opts),
        Err(StatsError::BadRequest)
    ));
}

#[test]
fn geometric_schedule_is_sorted_unique() {
    let cps = geometric_checkpoints(1000);
    assert_eq!(cps[0], 0);
    assert_eq!(*cps.last().unwrap(), 1000);
    for pair in cps.windows(2) {
        assert!(pair[0] < pair[1]);
    }
}

#[test]
fn csv_export_shape() {
    let rule = LocalRule::from_builtin(Builtin::Identity, ab()).unwrap();
    let start = crate::engine::Window::torus(w(&ab(), "abab"));
    let out = apply_rule(&rule, &start).unwrap();
    let _ = out;
    let trace = crate::engine::evolve(&rule, &start, 2).unwrap();
    let words = vec![w(&ab(), "ab")];
    let dt = density_trace(&trace, &words, &[0, 2], TraceMode::Instantaneous).unwrap();
    let csv = trace_to_csv(&dt, &["ab".to_string()], 0);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "time,word,density,mode,replica");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,ab,"));
}
