//! Bernoulli measures, reproducible sampling, and the exact pushforward
//! oracle.
//!
//! Coefficients are arbitrary-precision rationals. JSON numbers are read via
//! their decimal representation, so `0.2` means exactly `1/5`; fraction
//! strings like `"1/3"` are accepted for values with no finite decimal form.
//! All probability arithmetic on the exact path is rational and therefore
//! reproducible bit for bit.

mod pushforward;

pub use pushforward::exact_pushforward;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::engine::{Alphabet, Boundary, EngineError, State, Window};
use crate::rng::CounterRng;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("symbol {0} out of range for the measure's alphabet")]
    UnknownSymbol(State),
    #[error("bad coefficients: {0}")]
    BadCoefficients(String),
    #[error("DP over {required} states exceeds the budget of {budget}; consider a Monte Carlo estimate instead")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("invalid measure file: {0}")]
    Parse(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A Bernoulli (i.i.d. product) measure: one coefficient per state.
#[derive(Debug, Clone)]
pub struct BernoulliMeasure {
    alphabet: Alphabet,
    coefficients: Vec<BigRational>,
    /// Precomputed 64-bit sampling thresholds: cell is state `j` when the
    /// uniform draw falls below `thresholds[j]`.
    thresholds: Vec<u128>,
}

const FLOAT_SUM_TOLERANCE: f64 = 1e-12;

impl BernoulliMeasure {
    pub fn new(alphabet: Alphabet, coefficients: Vec<BigRational>) -> Result<Self, MeasureError> {
        if coefficients.len() != alphabet.len() {
            return Err(MeasureError::BadCoefficients(format!(
                "{} coefficients for {} states",
                coefficients.len(),
                alphabet.len()
            )));
        }
        if coefficients.iter().any(|c| c.is_negative()) {
            return Err(MeasureError::BadCoefficients("negative coefficient".into()));
        }
        let sum: BigRational = coefficients.iter().sum();
        if !sum.is_one() {
            let drift = (sum.to_f64().unwrap_or(f64::NAN) - 1.0).abs();
            if !(drift <= FLOAT_SUM_TOLERANCE) {
                return Err(MeasureError::BadCoefficients(format!(
                    "coefficients sum to {sum}, not 1"
                )));
            }
        }
        let thresholds = sampling_thresholds(&coefficients);
        Ok(BernoulliMeasure { alphabet, coefficients, thresholds })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        let c = BigRational::new(BigInt::one(), BigInt::from(n));
        BernoulliMeasure::new(alphabet, vec![c; n]).expect("uniform is a probability vector")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn coefficient(&self, state: State) -> Result<&BigRational, MeasureError> {
        self.coefficients
            .get(state as usize)
            .ok_or(MeasureError::UnknownSymbol(state))
    }

    /// All coefficients strictly positive.
    pub fn full_support(&self) -> bool {
        self.coefficients.iter().all(|c| c.is_positive())
    }

    /// `μ([u]) = Π_q coeff(q)^{|u|_q}`; position-independent, `1` for the
    /// empty word.
    pub fn cylinder_prob(&self, word: &[State]) -> Result<BigRational, MeasureError> {
        let mut p = BigRational::one();
        for &s in word {
            p *= self.coefficient(s)?;
        }
        Ok(p)
    }

    pub fn cylinder_prob_f64(&self, word: &[State]) -> Result<f64, MeasureError> {
        Ok(self.cylinder_prob(word)?.to_f64().unwrap_or(0.0))
    }

    /// Sample `length` i.i.d. cells. Identical `(seed, length, coefficients)`
    /// give bit-identical windows on every platform; disjoint cell blocks are
    /// generated in parallel from the same per-cell counter stream.
    pub fn sample_window(&self, length: usize, seed: u64, boundary: Boundary) -> Window {
        let rng = CounterRng::new(seed);
        let mut cells = vec![0u64; length];
        let fill = |base: usize, dst: &mut [State]| {
            for (k, d) in dst.iter_mut().enumerate() {
                let draw = rng.at((base + k) as u64) as u128;
                // linear scan: alphabets are small
                let mut state = self.thresholds.len() - 1;
                for (j, &t) in self.thresholds.iter().enumerate() {
                    if draw < t {
                        state = j;
                        break;
                    }
                }
                *d = state as State;
            }
        };
        if length >= 1 << 16 {
            cells
                .par_chunks_mut(1 << 14)
                .enumerate()
                .for_each(|(chunk, dst)| fill(chunk << 14, dst));
        } else {
            fill(0, &mut cells);
        }
        Window::new(cells, 0, boundary)
    }
}

fn sampling_thresholds(coefficients: &[BigRational]) -> Vec<u128> {
    let two64 = BigInt::one() << 64;
    let mut cum = BigRational::zero();
    let mut out = Vec::with_capacity(coefficients.len());
    for c in coefficients {
        cum += c;
        let scaled: BigInt = (cum.numer() * &two64) / cum.denom();
        out.push(scaled.to_u128().unwrap_or(u128::MAX).min(1 << 64));
    }
    if let Some(last) = out.last_mut() {
        *last = 1 << 64;
    }
    out
}

/// Parse a decimal or fraction literal into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, MeasureError> {
    let bad = |t: &str| MeasureError::Parse(format!("cannot parse {t:?} as a rational"));
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad(text))?;
        let d: BigInt = d.trim().parse().map_err(|_| bad(text))?;
        if d.is_zero() {
            return Err(bad(text));
        }
        return Ok(BigRational::new(n, d));
    }
    // decimal with optional exponent
    let (mantissa, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i64>().map_err(|_| bad(text))?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = format!(
        "{}{}",
        if int_part.is_empty() || int_part == "-" { format!("{int_part}0") } else { int_part.to_string() },
        frac_part
    );
    let value: BigInt = digits.parse().map_err(|_| bad(text))?;
    let scale = frac_part.len() as i64 - exp;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::new(value, ten.pow(scale as u32))
    } else {
        BigRational::from(value * ten.pow((-scale) as u32))
    })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CoefficientsSpec {
    Uniform(String),
    PerState(std::collections::BTreeMap<String, serde_json::Value>),
}

#[derive(Debug, Deserialize)]
struct MeasureFile {
    alphabet: Vec<String>,
    coefficients: CoefficientsSpec,
}

/// Load a measure from JSON: `{"alphabet": [...], "coefficients": {"0": 0.2,
/// "1": "4/5"}}`, with `"coefficients": "uniform"` as a shorthand.
pub fn measure_from_json(text: &str) -> Result<BernoulliMeasure, MeasureError> {
    let file: MeasureFile =
        serde_json::from_str(text).map_err(|e| MeasureError::Parse(e.to_string()))?;
    let alphabet = Alphabet::new(file.alphabet).map_err(MeasureError::Engine)?;
    match file.coefficients {
        CoefficientsSpec::Uniform(s) if s == "uniform" => Ok(BernoulliMeasure::uniform(alphabet)),
        CoefficientsSpec::Uniform(s) => {
            Err(MeasureError::Parse(format!("unknown coefficients shorthand {s:?}")))
        }
        CoefficientsSpec::PerState(map) => {
            let mut coefficients = vec![BigRational::zero(); alphabet.len()];
            for (name, value) in &map {
                let idx = alphabet
                    .index_of(name)
                    .ok_or_else(|| MeasureError::Parse(format!("unknown state {name:?}")))?;
                let text = match value {
                    serde_json::Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                coefficients[idx as usize] = parse_rational(&text)?;
            }
            if map.len() != alphabet.len() {
                return Err(MeasureError::Parse("missing coefficients for some states".into()));
            }
            BernoulliMeasure::new(alphabet, coefficients)
        }
    }
}

/// Prefix of a fixed computable configuration whose word densities stay
/// within constant factors of the uniform-measure probabilities: the
/// concatenation of all words over the alphabet in length-lexicographic
/// order, truncated to `length` symbols.
pub fn weakly_generic_prefix(alphabet: &Alphabet, length: usize) -> Vec<State> {
    let q = alphabet.len() as u64;
    let mut out = Vec::with_capacity(length);
    let mut word_len = 1usize;
    'outer: loop {
        // all q^word_len words, lexicographically
        let mut word = vec![0u64; word_len];
        loop {
            for &s in &word {
                out.push(s);
                if out.len() == length {
                    break 'outer;
                }
            }
            // next word in lex order; overflow ends this length
            let mut k = word_len;
            let mut overflow = true;
            while k > 0 {
                k -= 1;
                word[k] += 1;
                if word[k] < q {
                    overflow = false;
                    break;
                }
                word[k] = 0;
            }
            if overflow {
                break;
            }
        }
        word_len += 1;
    }
    out
}

#[cfg(test)]
mod tests;
