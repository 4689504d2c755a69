//! Growing computable sequences `i ↦ w_i` with `|w_i| → ∞`.
//!
//! A sequence is produced by a multi-tape Turing machine or by a named
//! builtin generator. The [`reschedule`] wrapper turns any sequence into one
//! with the same persistent language computable within declared time and
//! space bounds; the concrete generator constructions used by the language
//! realizations ([`generators`]) build on both.

pub mod generators;
mod reschedule;
pub mod tm;

pub use reschedule::{compliance_threshold, reschedule, validate_bounds};
pub use tm::{CompiledTm, Move, ResourceReport, RunOutcome, TmSpec, TmTransition};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Alphabet;

#[derive(Debug, Error)]
pub enum SeqError {
    #[error("bad machine or sequence spec: {0}")]
    BadSpec(String),
    #[error("machine ran past the safety cap of {cap} steps on index {index}")]
    CapExceeded { index: u64, cap: u64 },
    #[error("no word of length {length} avoids the forbidden factors")]
    NoValidWord { length: u64 },
    #[error("resource-bound hypothesis violated: {0}")]
    HypothesisViolation(String),
}

/// Declared resource bound as a function of the index.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundExpr {
    /// `ceil(coeff * i^(num/den))`
    Poly { coeff: u64, num: u32, den: u32 },
    /// A quarter of the merge-window gap `t_{i+1} - t_i` with
    /// `t_i = ceil(K^sqrt(i))`; the compute budget inside construction
    /// segments.
    WindowQuarter { base: u32 },
}

impl BoundExpr {
    pub fn eval(&self, i: u64) -> u64 {
        match self {
            BoundExpr::Poly { coeff, num, den } => {
                let x = (i as f64).powf(*num as f64 / *den as f64);
                (*coeff as f64 * x).ceil() as u64
            }
            BoundExpr::WindowQuarter { base } => {
                let t = merge_time(*base, i);
                let t_next = merge_time(*base, i + 1);
                (t_next.saturating_sub(t) / 4).max(1)
            }
        }
    }
}

/// Merge-schedule time `t_i = ceil(K^sqrt(i))`.
pub fn merge_time(base: u32, i: u64) -> u64 {
    let v = (base as f64).powf((i as f64).sqrt());
    if v > u64::MAX as f64 / 2.0 {
        u64::MAX / 2
    } else {
        v.ceil() as u64
    }
}

/// Builtin generators with closed-form words and declared cost models.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SeqBuiltin {
    /// `w_i = word^(i+1)`; linear cost `|w_i|`.
    ConstantPower { word: String },
    /// `w_i = symbol^(i+1)`; linear cost.
    Unary { symbol: String },
    /// `w_i = word^(i+1)` but with an artificial cost of `2^i` steps; used to
    /// exercise the rescheduler on slow inputs.
    ExponentialCost { word: String },
}

/// A growing computable sequence: a generator plus declared resource bounds.
#[derive(Debug, Clone)]
pub struct GrowingSequenceSpec {
    pub alphabet: Alphabet,
    pub generator: Generator,
    /// Safety cap for raw evaluation; the rescheduler is the sanctioned way
    /// to bound resources.
    pub step_cap: u64,
    pub space_cap: u64,
}

#[derive(Debug, Clone)]
pub enum Generator {
    Tm(Arc<CompiledTm>),
    Builtin(SeqBuiltin),
    Rescheduled(Arc<reschedule::Rescheduled>),
    SubshiftAvoider(Arc<generators::SubshiftAvoider>),
    CofWitness(Arc<generators::CofWitness>),
    Rice(Arc<generators::RiceSequence>),
    SlowConvergence(Arc<generators::SlowConvergence>),
}

pub const DEFAULT_STEP_CAP: u64 = 50_000_000;
pub const DEFAULT_SPACE_CAP: u64 = 1 << 24;

impl GrowingSequenceSpec {
    pub fn from_builtin(alphabet: Alphabet, builtin: SeqBuiltin) -> Result<Self, SeqError> {
        // builtin words must parse over the alphabet
        match &builtin {
            SeqBuiltin::ConstantPower { word } | SeqBuiltin::ExponentialCost { word } => {
                alphabet
                    .parse_word(word)
                    .map_err(|e| SeqError::BadSpec(e.to_string()))?;
            }
            SeqBuiltin::Unary { symbol } => {
                alphabet
                    .index_of(symbol)
                    .ok_or_else(|| SeqError::BadSpec(format!("unknown symbol {symbol:?}")))?;
            }
        }
        Ok(GrowingSequenceSpec {
            alphabet,
            generator: Generator::Builtin(builtin),
            step_cap: DEFAULT_STEP_CAP,
            space_cap: DEFAULT_SPACE_CAP,
        })
    }

    pub fn from_tm(spec: &TmSpec) -> Result<Self, SeqError> {
        let compiled = spec.compile()?;
        // the word alphabet is the tape alphabet without the blank
        let names: Vec<String> = spec
            .tape_alphabet
            .iter()
            .filter(|s| **s != spec.blank)
            .cloned()
            .collect();
        let alphabet = Alphabet::new(names).map_err(|e| SeqError::BadSpec(e.to_string()))?;
        Ok(GrowingSequenceSpec {
            alphabet,
            generator: Generator::Tm(Arc::new(compiled)),
            step_cap: DEFAULT_STEP_CAP,
            space_cap: DEFAULT_SPACE_CAP,
        })
    }

    /// Evaluate `w_i` with measured resources.
    ///
    /// For Turing machines the output is re-encoded over the word alphabet
    /// (tape alphabet minus blank). Builtin generators charge their declared
    /// cost model.
    pub fn eval(&self, i: u64) -> Result<(Vec<u64>, ResourceReport), SeqError> {
        match &self.generator {
            Generator::Tm(tm) => {
                match tm.run(i, self.step_cap, self.space_cap) {
                    RunOutcome::Halted { output, steps, cells } => {
                        // map tape symbols to word-alphabet indices
                        let names = tm.output_symbol_names();
                        let mut word = Vec::with_capacity(output.len());
                        for sym in output {
                            let name = &names[sym as usize];
                            match self.alphabet.index_of(name) {
                                Some(ix) => word.push(ix),
                                None => {
                                    return Err(SeqError::BadSpec(format!(
                                        "output contains the blank symbol {name:?}"
                                    )))
                                }
                            }
                        }
                        Ok((word, ResourceReport { index: i, steps, cells }))
                    }
                    RunOutcome::StepCapExceeded { .. } => {
                        Err(SeqError::CapExceeded { index: i, cap: self.step_cap })
                    }
                    RunOutcome::SpaceCapExceeded { .. } => {
                        Err(SeqError::CapExceeded { index: i, cap: self.space_cap })
                    }
                }
            }
            Generator::Builtin(b) => {
                let (word, steps) = builtin_word(&self.alphabet, b, i);
                let cells = word.len() as u64;
                Ok((word, ResourceReport { index: i, steps, cells }))
            }
            Generator::Rescheduled(r) => r.eval(i),
            Generator::SubshiftAvoider(g) => g.eval(i),
            Generator::CofWitness(g) => g.eval(i),
            Generator::Rice(g) => g.eval(i),
            Generator::SlowConvergence(g) => g.eval(i),
        }
    }

    /// True cost (steps) the rescheduler charges for producing `w_i`.
    pub(crate) fn base_cost(&self, i: u64) -> Result<(Vec<u64>, u64, u64), SeqError> {
        match &self.generator {
            Generator::Builtin(SeqBuiltin::ExponentialCost { .. }) => {
                let (word, _) = builtin_word(
                    &self.alphabet,
                    match &self.generator {
                        Generator::Builtin(b) => b,
                        _ => unreachable!(),
                    },
                    i,
                );
                let steps = 1u64.checked_shl(i.min(63) as u32).unwrap_or(u64::MAX);
                let cells = word.len() as u64;
                Ok((word, steps, cells))
            }
            _ => {
                let (word, rep) = self.eval(i)?;
                Ok((word, rep.steps.max(1), rep.cells))
            }
        }
    }

    /// Empirical check that `|w_i|` is monotone unbounded over sampled
    /// indices.
    pub fn check_growing(&self, samples: &[u64]) -> Result<(), SeqError> {
        let mut best = 0usize;
        let mut grew = false;
        for &i in samples {
            let (w, _) = self.eval(i)?;
            if w.len() > best {
                best = w.len();
                grew = true;
            }
        }
        if !grew || best == 0 {
            return Err(SeqError::HypothesisViolation(
                "|w_i| did not grow over the sampled indices".into(),
            ));
        }
        Ok(())
    }
}

fn builtin_word(alphabet: &Alphabet, b: &SeqBuiltin, i: u64) -> (Vec<u64>, u64) {
    match b {
        SeqBuiltin::ConstantPower { word } | SeqBuiltin::ExponentialCost { word } => {
            let base = alphabet.parse_word(word).expect("validated at construction");
            let reps = (i + 1) as usize;
            let mut out = Vec::with_capacity(base.len() * reps);
            for _ in 0..reps {
                out.extend_from_slice(&base);
            }
            let steps = out.len() as u64;
            (out, steps)
        }
        SeqBuiltin::Unary { symbol } => {
            let s = alphabet.index_of(symbol).expect("validated at construction");
            let out = vec![s; (i + 1) as usize];
            let steps = out.len() as u64;
            (out, steps)
        }
    }
}

/// Cantor pairing inverse: `z ↦ (a, b)` with `z = (a+b)(a+b+1)/2 + b`.
pub fn cantor_unpair(z: u64) -> (u64, u64) {
    let w = (((8.0 * z as f64 + 1.0).sqrt() - 1.0) / 2.0).floor() as u64;
    // guard against float edge cases
    let w = if (w + 1) * (w + 2) / 2 <= z {
        w + 1
    } else if w * (w + 1) / 2 > z {
        w - 1
    } else {
        w
    };
    let t = w * (w + 1) / 2;
    let b = z - t;
    (w - b, b)
}

/// Enumeration of triples where every triple has infinitely many preimages:
/// the first Cantor coordinate is decoded as a triple, the second is a free
/// repetition counter.
pub fn triple_schedule(i: u64) -> (u64, u64, u64) {
    let (code, _rep) = cantor_unpair(i);
    let (jk, l) = cantor_unpair(code);
    let (j, k) = cantor_unpair(jk);
    (j, k, l)
}

/// Enumeration of pairs with infinitely many preimages per pair.
pub fn pair_schedule(i: u64) -> (u64, u64) {
    let (code, _rep) = cantor_unpair(i);
    cantor_unpair(code)
}

/// Enumeration of single integers with infinitely many preimages each.
pub fn int_schedule(i: u64) -> u64 {
    cantor_unpair(i).0
}

/// JSON form of a sequence spec: a builtin with parameters or a Turing
/// machine (inline or by file), optionally wrapped by declared bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceSpecFile {
    pub alphabet: Vec<String>,
    pub generator: GeneratorFile,
    #[serde(default)]
    pub time_bound: Option<BoundExpr>,
    #[serde(default)]
    pub space_bound: Option<BoundExpr>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorFile {
    Builtin { builtin: SeqBuiltin },
    TmInline { tm: TmSpec },
    TmFile { path: String },
}

/// Load a sequence spec; when both bounds are present the sequence is wrapped
/// by [`reschedule`].
pub fn sequence_from_file(file: &SequenceSpecFile, base_dir: &std::path::Path) -> Result<GrowingSequenceSpec, SeqError> {
    let alphabet = Alphabet::new(file.alphabet.clone()).map_err(|e| SeqError::BadSpec(e.to_string()))?;
    let raw = match &file.generator {
        GeneratorFile::Builtin { builtin } => {
            GrowingSequenceSpec::from_builtin(alphabet, builtin.clone())?
        }
        GeneratorFile::TmInline { tm } => GrowingSequenceSpec::from_tm(tm)?,
        GeneratorFile::TmFile { path } => {
            let full = base_dir.join(path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| SeqError::BadSpec(format!("cannot read {}: {e}", full.display())))?;
            let tm: TmSpec =
                serde_json::from_str(&text).map_err(|e| SeqError::BadSpec(e.to_string()))?;
            GrowingSequenceSpec::from_tm(&tm)?
        }
    };
    match (&file.time_bound, &file.space_bound) {
        (Some(t), Some(s)) => reschedule(&raw, t.clone(), s.clone()),
        (None, None) => Ok(raw),
        _ => Err(SeqError::BadSpec("time and space bounds must come together".into())),
    }
}
