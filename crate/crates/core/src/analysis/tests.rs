use super::*;
use crate::engine::{Alphabet, Builtin, LocalRule};
use crate::measure::BernoulliMeasure;
use crate::rng::CounterRng;
use crate::stats::{density_trace_stream, TraceMode};

fn binary() -> Alphabet {
    Alphabet::new(["0", "1"]).unwrap()
}

fn max_rule() -> LocalRule {
    LocalRule::from_builtin(Builtin::Max, binary()).unwrap()
}

#[test]
fn identity_rule_walls_everywhere() {
    let rule = LocalRule::from_builtin(Builtin::Identity, binary()).unwrap();
    let cert = check_wall(&rule, &[0], 32).unwrap();
    match cert.status {
        WallStatus::ProvenByCycle { cycle_start, .. } => assert!(cycle_start <= 1),
        other => panic!("expected proof, got {other:?}"),
    }
}

#[test]
fn max_rule_one_is_a_wall() {
    let cert = check_wall(&max_rule(), &[1], 32).unwrap();
    assert!(matches!(cert.status, WallStatus::ProvenByCycle { .. }), "{cert:?}");
}

#[test]
fn max_rule_zero_is_refuted_with_replayable_witness() {
    let rule = max_rule();
    let cert = check_wall(&rule, &[0], 32).unwrap();
    match cert.status {
        WallStatus::Refuted { time, witness } => {
            assert_eq!(time, 1, "a 1 outside crosses immediately");
            assert!(replay_witness(&rule, &witness), "witness must replay: {witness:?}");
        }
        other => panic!("expected refutation, got {other:?}"),
    }
}

#[test]
fn eca_184_short_walls_all_refuted() {
    // no wall expected for the traffic rule at short lengths
    let rule = LocalRule::from_builtin(Builtin::Eca(184), binary()).unwrap();
    for len in 1..=4usize {
        for code in 0..(1u64 << len) {
            let w: Vec<u64> = (0..len).map(|k| (code >> (len - 1 - k)) & 1).collect();
            let cert = check_wall(&rule, &w, 24).unwrap();
            match cert.status {
                WallStatus::Refuted { ref witness, .. } => {
                    assert!(replay_witness(&rule, witness), "word {w:?}");
                }
                ref other => panic!("word {w:?} should be refuted, got {other:?}"),
            }
        }
    }
}

#[test]
fn proofs_survive_randomized_concrete_probing() {
    // proven certificates must never contradict concrete evolution: compare
    // pairs of configurations agreeing on one side of the wall
    let rule = max_rule();
    let cert = check_wall(&rule, &[1], 16).unwrap();
    let cycle_len = match cert.status {
        WallStatus::ProvenByCycle { cycle_len, .. } => cycle_len,
        other => panic!("expected proof, got {other:?}"),
    };
    let horizon = (2 * cycle_len).max(8);
    let rng = CounterRng::new(914);
    let margin = (horizon as usize) + 2;
    for case in 0..1000u64 {
        let draw = |k: u64| -> Vec<u64> {
            (0..margin).map(|c| rng.index(case * 7 + k * 3 + (c as u64) << 10, 2)).collect()
        };
        let shared = draw(0);
        let fa = draw(1);
        let fb = draw(2);
        // right-protected: differing left parts
        let mut ca = fa.clone();
        ca.push(1);
        ca.extend_from_slice(&shared);
        let mut cb = fb.clone();
        cb.push(1);
        cb.extend_from_slice(&shared);
        let mut wa = crate::engine::Window::exact(ca);
        let mut wb = crate::engine::Window::exact(cb);
        for _ in 0..horizon.min((margin as u64 - 1) / 2) {
            wa = crate::engine::apply_rule(&rule, &wa).unwrap();
            wb = crate::engine::apply_rule(&rule, &wb).unwrap();
            // compare cells right of the wall position (absolute > margin)
            let off = wa.origin as usize;
            for j in 0..wa.cells.len() {
                let abs = off + j;
                if abs > margin {
                    assert_eq!(wa.cells[j], wb.cells[j], "case {case}");
                }
            }
        }
    }
}

#[test]
fn wall_language_of_max_rule() {
    let rule = max_rule();
    let language = persistent_language_via_wall(&rule, &[1], 3, 3, 1 << 20).unwrap();
    let words: Vec<String> = language.iter().map(|w| rule.alphabet().format_word(w)).collect();
    assert_eq!(words, vec!["1", "11", "111"]);
}

#[test]
fn wall_language_grows_with_max_u_and_stabilizes_for_max() {
    let rule = max_rule();
    let l1 = persistent_language_via_wall(&rule, &[1], 1, 3, 1 << 20).unwrap();
    let l3 = persistent_language_via_wall(&rule, &[1], 3, 3, 1 << 20).unwrap();
    for w in &l1 {
        assert!(l3.contains(w));
    }
    assert_eq!(l1, l3, "the max rule stabilizes at 1*");
}

#[test]
fn wall_language_of_identity_contains_all_short_words() {
    let rule = LocalRule::from_builtin(Builtin::Identity, binary()).unwrap();
    let language = persistent_language_via_wall(&rule, &[0], 2, 2, 1 << 16).unwrap();
    let words: Vec<String> = language.iter().map(|w| rule.alphabet().format_word(w)).collect();
    assert_eq!(words, vec!["0", "00", "01", "1", "10", "11"]);
}

#[test]
fn convergence_diagnosis_flags_oscillation() {
    // synthetic alternating densities with stable running means
    let times: Vec<u64> = (0..32).collect();
    let values: Vec<Vec<f64>> =
        (0..32).map(|t| vec![if t % 2 == 0 { 0.9 } else { 0.1 }]).collect();
    let trace = crate::stats::DensityTrace {
        words: vec![vec![0]],
        times,
        values,
        mode: TraceMode::Instantaneous,
    };
    let diag = diagnose_convergence(&trace, 1_000_000.0).unwrap();
    assert_eq!(diag.verdict, ConvergenceVerdict::OscillationDetected);
    let evidence = diag.words[0].oscillation.as_ref().expect("oscillation evidence");
    assert!(evidence.gap > 0.7);
}

#[test]
fn convergence_diagnosis_accepts_constant_trace() {
    let times: Vec<u64> = (0..32).collect();
    let values: Vec<Vec<f64>> = (0..32).map(|_| vec![0.25]).collect();
    let trace = crate::stats::DensityTrace {
        words: vec![vec![0]],
        times,
        values,
        mode: TraceMode::Instantaneous,
    };
    let diag = diagnose_convergence(&trace, 1_000_000.0).unwrap();
    assert_eq!(diag.verdict, ConvergenceVerdict::SimpleConvergenceConsistent);
}

#[test]
fn max_rule_densities_are_convergence_consistent() {
    let rule = max_rule();
    let m = BernoulliMeasure::uniform(binary());
    let start = m.sample_window(3000, 17, crate::engine::Boundary::Torus);
    let checkpoints: Vec<u64> = (0..24).collect();
    let trace = density_trace_stream(
        &rule,
        &start,
        23,
        &[vec![0], vec![1, 1]],
        &checkpoints,
        TraceMode::Instantaneous,
    )
    .unwrap();
    let diag = diagnose_convergence(&trace, 3000.0).unwrap();
    assert_ne!(diag.verdict, ConvergenceVerdict::OscillationDetected);
}

#[test]
fn too_few_checkpoints_rejected() {
    let trace = crate::stats::DensityTrace {
        words: vec![vec![0]],
        times: (0..8).collect(),
        values: (0..8).map(|_| vec![0.5]).collect(),
        mode: TraceMode::Instantaneous,
    };
    assert!(matches!(
        diagnose_convergence(&trace, 100.0),
        Err(AnalysisError::BadRequest(_))
    ));
}

#[test]
fn nilpotency_probe_on_spreading_and_traffic() {
    let base = LocalRule::from_builtin(Builtin::Identity, binary()).unwrap();
    let spreading = crate::engine::spreading_over(&base, "s").unwrap();
    let m = BernoulliMeasure::uniform(spreading.alphabet().clone());
    let verdict = nilpotency_probe(&spreading, &m, 2000, 20_000, 3).unwrap();
    assert_eq!(verdict, NilpotencyVerdict::NilpotentLikely);

    let traffic = LocalRule::from_builtin(Builtin::Eca(184), binary()).unwrap();
    let m2 = BernoulliMeasure::uniform(binary());
    let verdict = nilpotency_probe(&traffic, &m2, 2000, 20_000, 3).unwrap();
    assert_eq!(verdict, NilpotencyVerdict::NotNilpotentLikely);

    let identity = LocalRule::from_builtin(Builtin::Identity, binary()).unwrap();
    let verdict = nilpotency_probe(&identity, &m2, 500, 20_000, 3).unwrap();
    assert_eq!(verdict, NilpotencyVerdict::NotNilpotentLikely);
}
