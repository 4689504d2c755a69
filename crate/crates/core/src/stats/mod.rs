//! Occurrence counting, densities, density traces, and persistence
//! estimation.
//!
//! The density of `u` in `v` is `|v|_u / (|v| - |u|)` with overlapping
//! occurrences counted. The denominator follows the definition used
//! throughout the crate even though it exceeds the number of window positions
//! by one; for single-letter words this can push the value above `1`, which
//! is reported through [`Density::over_unity`] rather than clamped.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{self, Boundary, LocalRule, SpaceTimeTrace, State, Window};
use crate::measure::BernoulliMeasure;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("word of length {word} is not shorter than the text of length {text}")]
    WordTooLong { word: usize, text: usize },
    #[error("checkpoint {0} is outside the trace")]
    BadCheckpoint(u64),
    #[error(transparent)]
    Engine(#[from] engine::EngineError),
    #[error("persistence estimation needs a non-empty word list and at least one replica")]
    BadRequest,
}

/// Number of (overlapping) occurrences of `u` in `v`; `0` when `|u| > |v|`.
pub fn occurrences(text: &[State], word: &[State]) -> u64 {
    if word.is_empty() {
        return text.len() as u64 + 1;
    }
    if word.len() > text.len() {
        return 0;
    }
    let mut n = 0;
    for i in 0..=(text.len() - word.len()) {
        if &text[i..i + word.len()] == word {
            n += 1;
        }
    }
    n
}

/// A density value together with an over-unity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub value: BigRational,
    pub over_unity: bool,
}

impl Density {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

/// `|v|_u / (|v| - |u|)`, requiring `|u| < |v|`.
pub fn density(text: &[State], word: &[State]) -> Result<Density, StatsError> {
    if word.len() >= text.len() {
        return Err(StatsError::WordTooLong { word: word.len(), text: text.len() });
    }
    let count = occurrences(text, word);
    let value = BigRational::new(count.into(), ((text.len() - word.len()) as u64).into());
    let over_unity = value > BigRational::from_integer(1.into());
    Ok(Density { value, over_unity })
}

/// Plain `f64` density, `NaN`-free for valid inputs.
pub fn density_f64(text: &[State], word: &[State]) -> Result<f64, StatsError> {
    Ok(density(text, word)?.to_f64())
}

/// Mode of a [`DensityTrace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    Instantaneous,
    Cesaro,
}

/// Densities of tracked words at a set of checkpoint times.
///
/// In Cesàro mode each row holds running means over *all* steps up to the
/// checkpoint (not just over previous checkpoints); the trace driver
/// accumulates every step it passes.
#[derive(Debug, Clone)]
pub struct DensityTrace {
    pub words: Vec<Vec<State>>,
    pub times: Vec<u64>,
    /// `values[k][w]` = density of word `w` at checkpoint `k`.
    pub values: Vec<Vec<f64>>,
    pub mode: TraceMode,
}

impl DensityTrace {
    pub fn column(&self, word_idx: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[word_idx]).collect()
    }
}

/// Densities of `words` along an existing (small) trace.
pub fn density_trace(
    trace: &SpaceTimeTrace,
    words: &[Vec<State>],
    checkpoints: &[u64],
    mode: TraceMode,
) -> Result<DensityTrace, StatsError> {
    let steps = trace.steps() as u64;
    for &t in checkpoints {
        if t > steps {
            return Err(StatsError::BadCheckpoint(t));
        }
    }
    let mut times: Vec<u64> = checkpoints.to_vec();
    times.sort_unstable();
    times.dedup();
    let mut values = Vec::with_capacity(times.len());
    match mode {
        TraceMode::Instantaneous => {
            for &t in &times {
                let row = &trace.rows[t as usize];
                let mut vals = Vec::with_capacity(words.len());
                for w in words {
                    vals.push(density_f64(&row.cells, w)?);
                }
                values.push(vals);
            }
        }
        TraceMode::Cesaro => {
            let mut sums = vec![0.0; words.len()];
            let mut k = 0usize;
            for t in 0..=steps {
                let row = &trace.rows[t as usize];
                for (j, w) in words.iter().enumerate() {
                    sums[j] += density_f64(&row.cells, w)?;
                }
                if k < times.len() && times[k] == t {
                    values.push(sums.iter().map(|s| s / (t + 1) as f64).collect());
                    k += 1;
                }
            }
        }
    }
    Ok(DensityTrace { words: words.to_vec(), times, values, mode })
}

/// Streaming density trace: evolves `rule` from `start` for `steps` steps and
/// records word densities at the checkpoints without keeping rows.
///
/// In Cesàro mode every intermediate row contributes to the running means, so
/// this walks all steps; in instantaneous mode only checkpoint rows are
/// measured.
pub fn density_trace_stream(
    rule: &LocalRule,
    start: &Window,
    steps: u64,
    words: &[Vec<State>],
    checkpoints: &[u64],
    mode: TraceMode,
) -> Result<DensityTrace, StatsError> {
    let mut times: Vec<u64> = checkpoints.iter().copied().filter(|&t| t <= steps).collect();
    times.sort_unstable();
    times.dedup();
    let shortest_row = match start.boundary {
        Boundary::Exact => start.len().saturating_sub(2 * rule.radius() as usize * steps as usize),
        Boundary::Torus => start.len(),
    };
    if let Some(w) = words.iter().find(|w| w.len() >= shortest_row) {
        return Err(StatsError::WordTooLong { word: w.len(), text: shortest_row });
    }
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    let mut sums = vec![0.0; words.len()];
    let visit_all: Vec<u64> = match mode {
        TraceMode::Cesaro => (0..=steps).collect(),
        TraceMode::Instantaneous => times.clone(),
    };
    let mut k = 0usize;
    let project_and_measure = |row: &Window, sums: &mut Vec<f64>, record: bool, t: u64| {
        let cells: Vec<State> = if matches!(rule.body(), engine::RuleBody::Program(_)) {
            row.cells.iter().map(|&c| rule.project(c)).collect()
        } else {
            row.cells.clone()
        };
        let vals: Vec<f64> = words
            .par_iter()
            .map(|w| density_f64(&cells, w).unwrap_or(f64::NAN))
            .collect();
        match mode {
            TraceMode::Cesaro => {
                for (s, v) in sums.iter_mut().zip(&vals) {
                    *s += v;
                }
                if record {
                    return Some(sums.iter().map(|s| s / (t + 1) as f64).collect::<Vec<_>>());
                }
            }
            TraceMode::Instantaneous => {
                if record {
                    return Some(vals);
                }
            }
        }
        None
    };
    engine::evolve_stream(rule, start, steps, &visit_all, |t, row| {
        let record = k < times.len() && times[k] == t;
        if let Some(vals) = project_and_measure(row, &mut sums, record, t) {
            values.push(vals);
        }
        if record {
            k += 1;
        }
    })?;
    Ok(DensityTrace { words: words.to_vec(), times, values, mode })
}

/// Statistical verdict on whether a word persists under iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    PersistentLikely,
    VanishingLikely,
    Undetermined,
}

/// Verdict plus the evidence it was based on. Verdicts are heuristics: the
/// underlying membership problem is undecidable, so no certainty is claimed.
#[derive(Debug, Clone, Serialize)]
pub struct PersistenceVerdict {
    pub word: String,
    pub verdict: Verdict,
    /// Least-squares slope of density against checkpoint index.
    pub trend_slope: f64,
    pub last_value: f64,
    /// The threshold `ε_v` used: ten binomial standard deviations.
    pub confidence_radius: f64,
}

/// Geometric checkpoint schedule `⌈1.3^k⌉`, deduplicated, capped at
/// `horizon`, and always containing the horizon itself.
pub fn geometric_checkpoints(horizon: u64) -> Vec<u64> {
    let mut out = vec![0u64];
    let mut x = 1.0f64;
    while (x as u64) < horizon {
        out.push(x as u64);
        x *= 1.3;
    }
    out.push(horizon);
    out.sort_unstable();
    out.dedup();
    out
}

/// Options for [`estimate_persistence`].
#[derive(Debug, Clone)]
pub struct PersistenceOptions {
    pub horizon: u64,
    pub replicas: u32,
    pub width: usize,
    pub boundary: Boundary,
    pub seed: u64,
    /// Checkpoints; defaults to the geometric schedule when empty.
    pub checkpoints: Vec<u64>,
}

/// Estimate which of `words` persist under `rule` from `measure`-random
/// starts.
///
/// Runs `replicas` independent evolutions, averages densities at each
/// checkpoint, and classifies by the tail of the schedule: vanishing when the
/// maximum over the last quarter of checkpoints stays below `ε_v` (ten
/// binomial standard deviations), persistent when the minimum exceeds
/// `2 ε_v`, undetermined otherwise.
pub fn estimate_persistence(
    rule: &LocalRule,
    measure: &BernoulliMeasure,
    words: &[Vec<State>],
    opts: &PersistenceOptions,
) -> Result<Vec<PersistenceVerdict>, StatsError> {
    if words.is_empty() || opts.replicas == 0 {
        return Err(StatsError::BadRequest);
    }
    let r = rule.radius() as u64;
    let max_len = words.iter().map(|w| w.len()).max().unwrap_or(1);
    if opts.boundary == Boundary::Exact {
        let needed = (2 * r * opts.horizon) as usize + max_len + 1;
        if opts.width < needed {
            return Err(StatsError::Engine(engine::EngineError::WindowTooSmall {
                needed,
                got: opts.width,
            }));
        }
    }
    let checkpoints = if opts.checkpoints.is_empty() {
        geometric_checkpoints(opts.horizon)
    } else {
        opts.checkpoints.clone()
    };
    let mut mean = vec![vec![0.0f64; words.len()]; checkpoints.len()];
    for rep in 0..opts.replicas {
        let seed = crate::rng::CounterRng::new(opts.seed).stream(rep as u64).at(0);
        let start = measure.sample_window(opts.width, seed, opts.boundary);
        let trace = density_trace_stream(
            rule,
            &start,
            opts.horizon,
            words,
            &checkpoints,
            TraceMode::Instantaneous,
        )?;
        for (k, row) in trace.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                mean[k][j] += v / opts.replicas as f64;
            }
        }
    }

    // effective sample count at a checkpoint: word positions × replicas
    // (rows shrink over time under the exact policy)
    let n_eff = |t: u64, word_len: usize| -> f64 {
        let row = match opts.boundary {
            Boundary::Torus => opts.width,
            Boundary::Exact => opts.width.saturating_sub((2 * r * t) as usize),
        };
        (row.saturating_sub(word_len) as f64 * opts.replicas as f64).max(1.0)
    };

    let tail_start = checkpoints.len() - (checkpoints.len() / 4).max(1);
    let mut out = Vec::with_capacity(words.len());
    for (j, w) in words.iter().enumerate() {
        let col: Vec<f64> = mean.iter().map(|row| row[j]).collect();
        // per-checkpoint noise floor: ε_v(t) = 10 binomial σ at that t
        let mut all_below = true;
        let mut all_above = true;
        let mut last_eps = 0.0;
        for (k, &v) in col.iter().enumerate().skip(tail_start) {
            let n = n_eff(checkpoints[k], w.len());
            let p = v.max(1.0 / n).min(0.5);
            let eps = 10.0 * (p * (1.0 - p) / n).sqrt();
            last_eps = eps;
            if v >= eps {
                all_below = false;
            }
            if v <= 2.0 * eps {
                all_above = false;
            }
        }
        let eps = last_eps;
        let verdict = if all_below {
            Verdict::VanishingLikely
        } else if all_above {
            Verdict::PersistentLikely
        } else {
            Verdict::Undetermined
        };
        // least-squares slope over checkpoint index
        let n = col.len() as f64;
        let mean_x = (n - 1.0) / 2.0;
        let mean_y = col.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, v) in col.iter().enumerate() {
            num += (i as f64 - mean_x) * (v - mean_y);
            den += (i as f64 - mean_x).powi(2);
        }
        out.push(PersistenceVerdict {
            word: format!("{w:?}"),
            verdict,
            trend_slope: if den > 0.0 { num / den } else { 0.0 },
            last_value: *col.last().unwrap(),
            confidence_radius: eps,
        });
    }
    Ok(out)
}

/// Write a density trace as CSV: `time,word,density,mode,replica`.
pub fn trace_to_csv(trace: &DensityTrace, word_names: &[String], replica: u32) -> String {
    let mode = match trace.mode {
        TraceMode::Instantaneous => "instantaneous",
        TraceMode::Cesaro => "cesaro",
    };
    let mut out = String::from("time,word,density,mode,replica\n");
    for (k, &t) in trace.times.iter().enumerate() {
        for (j, name) in word_names.iter().enumerate() {
            out.push_str(&format!("{t},{name},{},{mode},{replica}\n", trace.values[k][j]));
        }
    }
    out
}

#[cfg(test)]
mod tests;
