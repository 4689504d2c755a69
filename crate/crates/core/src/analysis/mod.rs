//! Wall detection, wall-based enumeration of persistent languages, and
//! convergence diagnostics.
//!
//! A word is a wall when no information can cross it in either direction
//! under iteration. The checker tracks, per side, the set of reachable
//! *pairs* of strip contents when the protected side is shared and the other
//! side ranges freely; entering a previously seen set proves the property
//! for all times, and a pair that maps differently into the protected side
//! is a refutation candidate which is only reported once a concrete witness
//! pair of configurations replays the divergence in the engine.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::engine::{apply_rule, Boundary, LocalRule, State, Window};
use crate::rng::CounterRng;
use crate::stats::{DensityTrace, TraceMode};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("possible-set abstraction exceeded the budget of {budget} pairs")]
    StateExplosion { budget: usize },
    #[error("cycle search exceeded the budget of {budget} steps")]
    CycleBudgetExceeded { budget: u64 },
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
}

/// One concrete configuration pair violating a wall condition at time `t`:
/// both contain the candidate word at position 0, agree on the protected
/// side, and their images disagree inside the protected side.
#[derive(Debug, Clone, Serialize)]
pub struct WallWitness {
    /// `left-protected` (condition 1) or `right-protected` (condition 2).
    pub side: String,
    pub time: u64,
    /// Full initial windows (symbol indices), word starting at `word_at`.
    pub first: Vec<State>,
    pub second: Vec<State>,
    pub word_at: usize,
    /// Absolute cell (window coordinate) where the images differ.
    pub diverges_at: usize,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum WallStatus {
    /// No divergence reachable within the horizon; nothing proven beyond it.
    WallUpToHorizon,
    /// The possible-set sequence entered a cycle with no divergence, so the
    /// wall conditions hold for all times.
    ProvenByCycle { cycle_start: u64, cycle_len: u64 },
    /// A concrete replayable violation.
    Refuted { time: u64, witness: WallWitness },
}

#[derive(Debug, Clone, Serialize)]
pub struct WallCertificate {
    pub word: String,
    pub horizon: u64,
    #[serde(flatten)]
    pub status: WallStatus,
}

const DEFAULT_PAIR_BUDGET: usize = 1_000_000;

/// Check whether `word` is a wall for `rule`, up to `horizon` abstraction
/// steps.
pub fn check_wall(
    rule: &LocalRule,
    word: &[State],
    horizon: u64,
) -> Result<WallCertificate, AnalysisError> {
    check_wall_with_budget(rule, word, horizon, DEFAULT_PAIR_BUDGET)
}

pub fn check_wall_with_budget(
    rule: &LocalRule,
    word: &[State],
    horizon: u64,
    budget: usize,
) -> Result<WallCertificate, AnalysisError> {
    if word.is_empty() {
        return Err(AnalysisError::BadRequest("wall candidate must be non-empty".into()));
    }
    let q = rule
        .dense_state_count()
        .ok_or_else(|| AnalysisError::BadRequest("wall checking needs a dense alphabet".into()))?;
    let len = word.len();
    if (q as f64).powi(len as i32) > (1u64 << 31) as f64 {
        return Err(AnalysisError::StateExplosion { budget });
    }

    let mut proof_spans = Vec::new();
    for protect_right in [false, true] {
        match side_analysis(rule, word, horizon, budget, q, protect_right)? {
            SideOutcome::Cycle { start, len } => proof_spans.push((start, len)),
            SideOutcome::Diverged { time } => {
                // only a concrete replay makes it a refutation; the
                // divergence reaches the protected side one step after the
                // ambiguous strip pair, so search one step further
                if let Some(witness) = concrete_witness(rule, word, time + 1, protect_right) {
                    return Ok(WallCertificate {
                        word: rule.alphabet().format_word(word),
                        horizon,
                        status: WallStatus::Refuted { time, witness },
                    });
                } else {
                    return Ok(WallCertificate {
                        word: rule.alphabet().format_word(word),
                        horizon,
                        status: WallStatus::WallUpToHorizon,
                    });
                }
            }
            SideOutcome::HorizonReached => {
                return Ok(WallCertificate {
                    word: rule.alphabet().format_word(word),
                    horizon,
                    status: WallStatus::WallUpToHorizon,
                });
            }
        }
    }
    let (s0, l0) = proof_spans[0];
    let (s1, l1) = proof_spans[1];
    Ok(WallCertificate {
        word: rule.alphabet().format_word(word),
        horizon,
        status: WallStatus::ProvenByCycle { cycle_start: s0.max(s1), cycle_len: l0.max(l1) },
    })
}

enum SideOutcome {
    Cycle { start: u64, len: u64 },
    Diverged { time: u64 },
    HorizonReached,
}

/// Evolve the set of reachable strip pairs for one protected side.
///
/// The free side's `r`-cell context ranges over all words independently for
/// the two configurations; the protected side's context is shared. This
/// over-approximates reachability, so the absence of divergence is sound and
/// any divergence found is re-validated concretely by the caller.
fn side_analysis(
    rule: &LocalRule,
    word: &[State],
    horizon: u64,
    budget: usize,
    q: u64,
    protect_right: bool,
) -> Result<SideOutcome, AnalysisError> {
    let r = rule.radius() as usize;
    let len = word.len();
    let encode = |w: &[State]| -> u64 {
        let mut code = 0u64;
        for &s in w {
            code = code * q + s;
        }
        code
    };
    let decode = |mut code: u64| -> Vec<State> {
        let mut out = vec![0u64; len];
        for k in (0..len).rev() {
            out[k] = code % q;
            code /= q;
        }
        out
    };
    let contexts: Vec<Vec<State>> = all_words(q, r);
    let boundary_contexts: Vec<Vec<State>> = all_words(q, r + 1);

    let mut set: BTreeSet<(u64, u64)> = BTreeSet::new();
    let w0 = encode(word);
    set.insert((w0, w0));
    let mut seen: HashMap<Vec<(u64, u64)>, u64> = HashMap::new();
    seen.insert(set.iter().copied().collect(), 0);

    for t in 1..=horizon {
        // advance the pair set by one step
        let mut next: BTreeSet<(u64, u64)> = BTreeSet::new();
        for &(a, b) in &set {
            let wa = decode(a);
            let wb = decode(b);
            for shared in &contexts {
                for free_a in &contexts {
                    let img_a = strip_image(rule, &wa, free_a, shared, protect_right);
                    for free_b in &contexts {
                        let img_b = strip_image(rule, &wb, free_b, shared, protect_right);
                        next.insert((encode(&img_a), encode(&img_b)));
                        if next.len() > budget {
                            return Err(AnalysisError::StateExplosion { budget });
                        }
                    }
                }
            }
        }
        set = next;
        // divergence test: can some reachable pair map differently into the
        // protected side?
        for &(a, b) in &set {
            if a == b {
                continue;
            }
            let wa = decode(a);
            let wb = decode(b);
            for ctx in &boundary_contexts {
                let (na, nb) = if protect_right {
                    // image of the first protected cell, fed by the strip
                    // tail and r+1 shared cells
                    let mut na: Vec<State> = wa[len - r..].to_vec();
                    na.extend_from_slice(ctx);
                    let mut nb: Vec<State> = wb[len - r..].to_vec();
                    nb.extend_from_slice(ctx);
                    (na, nb)
                } else {
                    let mut na: Vec<State> = ctx.clone();
                    na.extend_from_slice(&wa[..r]);
                    let mut nb: Vec<State> = ctx.clone();
                    nb.extend_from_slice(&wb[..r]);
                    (na, nb)
                };
                if rule.apply(&na) != rule.apply(&nb) {
                    return Ok(SideOutcome::Diverged { time: t });
                }
            }
        }
        let key: Vec<(u64, u64)> = set.iter().copied().collect();
        if let Some(&start) = seen.get(&key) {
            return Ok(SideOutcome::Cycle { start, len: t - start });
        }
        seen.insert(key, t);
    }
    Ok(SideOutcome::HorizonReached)
}

fn strip_image(
    rule: &LocalRule,
    strip: &[State],
    free: &[State],
    shared: &[State],
    protect_right: bool,
) -> Vec<State> {
    let r = rule.radius() as usize;
    let mut padded = Vec::with_capacity(strip.len() + 2 * r);
    if protect_right {
        padded.extend_from_slice(free);
        padded.extend_from_slice(strip);
        padded.extend_from_slice(shared);
    } else {
        padded.extend_from_slice(shared);
        padded.extend_from_slice(strip);
        padded.extend_from_slice(free);
    }
    let mut out = Vec::with_capacity(strip.len());
    for j in 0..strip.len() {
        out.push(rule.apply(&padded[j..j + 2 * r + 1]));
    }
    out
}

fn all_words(q: u64, len: usize) -> Vec<Vec<State>> {
    let total = q.pow(len as u32);
    (0..total)
        .map(|code| {
            let mut w = vec![0u64; len];
            let mut rem = code;
            for k in (0..len).rev() {
                w[k] = rem % q;
                rem /= q;
            }
            w
        })
        .collect()
}

/// Search for a concrete configuration pair violating the wall condition at
/// time `<= t_max`. Exhaustive for shallow times, seeded sampling beyond.
fn concrete_witness(
    rule: &LocalRule,
    word: &[State],
    t_max: u64,
    protect_right: bool,
) -> Option<WallWitness> {
    let q = rule.dense_state_count()?;
    let r = rule.radius() as usize;
    for t in 1..=t_max {
        let margin = r * t as usize + r;
        let exhaustive = (q as f64).powi(3 * margin as i32) <= 250_000.0;
        let found = if exhaustive {
            let words = all_words(q, margin);
            let mut hit = None;
            'outer: for shared in &words {
                for fa in &words {
                    for fb in &words {
                        if fa == fb {
                            continue;
                        }
                        if let Some(w) =
                            try_witness(rule, word, t, shared, fa, fb, protect_right)
                        {
                            hit = Some(w);
                            break 'outer;
                        }
                    }
                }
            }
            hit
        } else {
            let rng = CounterRng::new(0x57A7_7A11 ^ t);
            let mut hit = None;
            for trial in 0..20_000u64 {
                let draw = |k: u64| -> Vec<State> {
                    (0..margin)
                        .map(|c| rng.index(trial * 3_000 + k * 1_000 + c as u64, q))
                        .collect()
                };
                let shared = draw(0);
                let fa = draw(1);
                let fb = draw(2);
                if fa == fb {
                    continue;
                }
                if let Some(w) = try_witness(rule, word, t, &shared, &fa, &fb, protect_right) {
                    hit = Some(w);
                    break;
                }
            }
            hit
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Build the two windows, evolve them `t` steps exactly, and compare the
/// protected side.
fn try_witness(
    rule: &LocalRule,
    word: &[State],
    t: u64,
    shared: &[State],
    free_a: &[State],
    free_b: &[State],
    protect_right: bool,
) -> Option<WallWitness> {
    let r = rule.radius() as usize;
    let margin = shared.len();
    let build = |free: &[State]| -> Vec<State> {
        let mut cells = Vec::with_capacity(2 * margin + word.len());
        if protect_right {
            cells.extend_from_slice(free);
            cells.extend_from_slice(word);
            cells.extend_from_slice(shared);
        } else {
            cells.extend_from_slice(shared);
            cells.extend_from_slice(word);
            cells.extend_from_slice(free);
        }
        cells
    };
    let ca = build(free_a);
    let cb = build(free_b);
    let word_at = margin; // word position in both windows
    let mut wa = Window::new(ca.clone(), 0, Boundary::Exact);
    let mut wb = Window::new(cb.clone(), 0, Boundary::Exact);
    for step in 1..=t {
        wa = apply_rule(rule, &wa).ok()?;
        wb = apply_rule(rule, &wb).ok()?;
        let off = r * step as usize;
        for j in 0..wa.cells.len() {
            let abs = off + j;
            let inside_protected = if protect_right {
                abs >= word_at + word.len()
            } else {
                abs < word_at
            };
            if inside_protected && wa.cells[j] != wb.cells[j] {
                return Some(WallWitness {
                    side: if protect_right { "right-protected" } else { "left-protected" }.into(),
                    time: step,
                    first: ca,
                    second: cb,
                    word_at,
                    diverges_at: abs,
                });
            }
        }
    }
    None
}

/// Replay a refutation witness in the engine, verifying the claimed
/// divergence. Used by tests and by callers that persist certificates.
pub fn replay_witness(rule: &LocalRule, witness: &WallWitness) -> bool {
    let wa = Window::new(witness.first.clone(), 0, Boundary::Exact);
    let wb = Window::new(witness.second.clone(), 0, Boundary::Exact);
    let mut a = wa;
    let mut b = wb;
    for _ in 0..witness.time {
        a = match apply_rule(rule, &a) {
            Ok(x) => x,
            Err(_) => return false,
        };
        b = match apply_rule(rule, &b) {
            Ok(x) => x,
            Err(_) => return false,
        };
    }
    let off = a.origin as usize;
    if witness.diverges_at < off {
        return false;
    }
    let j = witness.diverges_at - off;
    j < a.cells.len() && a.cells[j] != b.cells[j]
}

/// All words occurring in the temporal cycles of the spatially periodic
/// configurations of period `wall · u`, `|u| <= max_u`, truncated to factors
/// of length `<= max_word`.
///
/// This enumerates the persistent language exactly when the wall is certified
/// (the quantification over all `u` is approximated from below by `max_u`).
pub fn persistent_language_via_wall(
    rule: &LocalRule,
    wall: &[State],
    max_u: usize,
    max_word: usize,
    cycle_budget: u64,
) -> Result<Vec<Vec<State>>, AnalysisError> {
    let q = rule
        .dense_state_count()
        .ok_or_else(|| AnalysisError::BadRequest("needs a dense alphabet".into()))?;
    let mut language: BTreeSet<Vec<State>> = BTreeSet::new();
    for ulen in 0..=max_u {
        for u in all_words(q, ulen) {
            let mut period = wall.to_vec();
            period.extend_from_slice(&u);
            collect_cycle_factors(rule, &period, max_word, cycle_budget, &mut language)?;
        }
    }
    Ok(language.into_iter().collect())
}

fn collect_cycle_factors(
    rule: &LocalRule,
    period: &[State],
    max_word: usize,
    cycle_budget: u64,
    language: &mut BTreeSet<Vec<State>>,
) -> Result<(), AnalysisError> {
    // torus evolution with cycle detection
    let mut seen: HashMap<Vec<State>, u64> = HashMap::new();
    let mut rows: Vec<Vec<State>> = Vec::new();
    let mut cur = Window::torus(period.to_vec());
    // torus stepping needs at least 2r+1 cells; tile the period up if short
    let r = rule.radius() as usize;
    if cur.cells.len() < 2 * r + 1 {
        let reps = (2 * r + 1).div_ceil(period.len());
        let mut cells = Vec::with_capacity(period.len() * reps);
        for _ in 0..reps {
            cells.extend_from_slice(period);
        }
        cur = Window::torus(cells);
    }
    let mut t = 0u64;
    loop {
        if let Some(&start) = seen.get(&cur.cells) {
            // cycle rows are those from `start` onwards
            for row in rows.iter().skip(start as usize) {
                add_periodic_factors(row, max_word, language);
            }
            return Ok(());
        }
        seen.insert(cur.cells.clone(), t);
        rows.push(cur.cells.clone());
        if t >= cycle_budget {
            return Err(AnalysisError::CycleBudgetExceeded { budget: cycle_budget });
        }
        cur = apply_rule(rule, &cur)?;
        t += 1;
    }
}

fn add_periodic_factors(row: &[State], max_word: usize, language: &mut BTreeSet<Vec<State>>) {
    // factors of the two-sided periodic configuration with this period
    let n = row.len();
    for len in 1..=max_word.min(n) {
        for start in 0..n {
            let mut w = Vec::with_capacity(len);
            for k in 0..len {
                w.push(row[(start + k) % n]);
            }
            language.insert(w);
        }
    }
    // words longer than the period repeat it
    if max_word > n {
        for len in n + 1..=max_word {
            for start in 0..n {
                let mut w = Vec::with_capacity(len);
                for k in 0..len {
                    w.push(row[(start + k) % n]);
                }
                language.insert(w);
            }
        }
    }
}

/// Per-word convergence classification of a density trace.
#[derive(Debug, Clone, Serialize)]
pub struct WordDiagnosis {
    pub word: String,
    pub instantaneous_trend: f64,
    pub cesaro_trend: f64,
    /// Largest late-time gap between checkpoint densities, in units of the
    /// binomial standard deviation.
    pub oscillation_score: f64,
    pub oscillation: Option<OscillationEvidence>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OscillationEvidence {
    pub time_low: u64,
    pub time_high: u64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceVerdict {
    SimpleConvergenceConsistent,
    OscillationDetected,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceDiagnosis {
    pub verdict: ConvergenceVerdict,
    pub words: Vec<WordDiagnosis>,
}

/// Flag words whose late-time densities oscillate beyond statistical noise
/// while their running means stabilize.
///
/// `n_eff` is the effective sample size behind each density value (window
/// positions times replicas).
pub fn diagnose_convergence(
    trace: &DensityTrace,
    n_eff: f64,
) -> Result<ConvergenceDiagnosis, AnalysisError> {
    if trace.times.len() < 16 {
        return Err(AnalysisError::BadRequest(format!(
            "need at least 16 checkpoints, got {}",
            trace.times.len()
        )));
    }
    if trace.mode != TraceMode::Instantaneous {
        return Err(AnalysisError::BadRequest(
            "diagnosis expects an instantaneous trace".into(),
        ));
    }
    let half = trace.times.len() / 2;
    let mut words = Vec::new();
    let mut any_oscillation = false;
    for (j, w) in trace.words.iter().enumerate() {
        let col: Vec<f64> = trace.values.iter().map(|row| row[j]).collect();
        let late = &col[half..];
        let late_times = &trace.times[half..];
        let (mut lo, mut hi) = (0usize, 0usize);
        for (k, v) in late.iter().enumerate() {
            if *v < late[lo] {
                lo = k;
            }
            if *v > late[hi] {
                hi = k;
            }
        }
        let gap = late[hi] - late[lo];
        let p = late.iter().sum::<f64>() / late.len() as f64;
        let p = p.clamp(1.0 / n_eff, 0.5);
        let sigma = (p * (1.0 - p) / n_eff).sqrt();
        let score = if sigma > 0.0 { gap / sigma } else { 0.0 };
        // running means of the checkpoint values as a Cesàro proxy
        let mut running = 0.0;
        let cesaro: Vec<f64> = col
            .iter()
            .enumerate()
            .map(|(k, v)| {
                running += v;
                running / (k + 1) as f64
            })
            .collect();
        let osc = score > 8.0;
        let cesaro_late = &cesaro[half..];
        let cesaro_gap = cesaro_late.iter().cloned().fold(f64::MIN, f64::max)
            - cesaro_late.iter().cloned().fold(f64::MAX, f64::min);
        // running means over checkpoints settle like 1/k, far slower than
        // the binomial noise floor; stability means the mean's late drift is
        // small against the instantaneous swing
        let cesaro_stable = cesaro_gap < (4.0 * sigma).max(gap / 8.0).max(1e-12);
        if osc && cesaro_stable {
            any_oscillation = true;
        }
        words.push(WordDiagnosis {
            word: format!("{w:?}"),
            instantaneous_trend: slope(late),
            cesaro_trend: slope(cesaro_late),
            oscillation_score: score,
            oscillation: if osc {
                Some(OscillationEvidence {
                    time_low: late_times[lo],
                    time_high: late_times[hi],
                    gap,
                })
            } else {
                None
            },
        });
    }
    let verdict = if any_oscillation {
        ConvergenceVerdict::OscillationDetected
    } else if words.iter().all(|w| w.oscillation_score < 4.0) {
        ConvergenceVerdict::SimpleConvergenceConsistent
    } else {
        ConvergenceVerdict::Undetermined
    };
    Ok(ConvergenceDiagnosis { verdict, words })
}

fn slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mean_x = (n - 1.0) / 2.0;
    let mean_y = values.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, v) in values.iter().enumerate() {
        num += (i as f64 - mean_x) * (v - mean_y);
        den += (i as f64 - mean_x).powi(2);
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NilpotencyVerdict {
    NilpotentLikely,
    NotNilpotentLikely,
    Undetermined,
}

/// Statistical probe for a singleton limit: does exactly one symbol's
/// density trend to 1?
///
/// The underlying decision problem is far beyond any bounded experiment
/// (convergence can outrun every computable horizon), so the verdict is a
/// heuristic on the observed horizon and never a claim about the limit.
pub fn nilpotency_probe(
    rule: &LocalRule,
    measure: &crate::measure::BernoulliMeasure,
    horizon: u64,
    width: usize,
    seed: u64,
) -> Result<NilpotencyVerdict, AnalysisError> {
    let states = rule.alphabet().len();
    let words: Vec<Vec<State>> = (0..states as u64).map(|s| vec![s]).collect();
    let start = measure.sample_window(width, seed, Boundary::Torus);
    let checkpoints = crate::stats::geometric_checkpoints(horizon);
    let trace = crate::stats::density_trace_stream(
        rule,
        &start,
        horizon,
        &words,
        &checkpoints,
        TraceMode::Instantaneous,
    )?;
    let last = trace.values.last().unwrap();
    let n_eff = width as f64;
    let floor = 10.0 * (0.25 / n_eff).sqrt();
    let above: Vec<usize> = (0..last.len()).filter(|&j| last[j] > floor.min(0.01)).collect();
    let top = last.iter().cloned().fold(f64::MIN, f64::max);
    Ok(if above.len() == 1 && top > 0.99 {
        NilpotencyVerdict::NilpotentLikely
    } else if above.len() >= 2 {
        // two persistent symbols rule out a singleton limit
        let second = {
            let mut sorted = last.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            sorted[1]
        };
        if second > 2.0 * floor {
            NilpotencyVerdict::NotNilpotentLikely
        } else {
            NilpotencyVerdict::Undetermined
        }
    } else {
        NilpotencyVerdict::Undetermined
    })
}

#[cfg(test)]
mod tests;
