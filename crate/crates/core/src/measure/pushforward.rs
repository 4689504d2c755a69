//! Exact pushforward probabilities `A^tμ([u])` by dynamic programming.
//!
//! The probability of seeing `u` at time `t` equals the measure of the set of
//! predecessors `P^t(u)`, the words of length `|u| + 2rt` whose `t`-step
//! image is `u`. Instead of enumerating all `|Q|^{|u|+2rt}` candidates, the
//! DP scans predecessor words left to right keeping only the last `2rt`
//! symbols as its state, and constrains each completed neighborhood through
//! the `t`-fold composed rule. Cost is `O(|u| · |Q|^{2rt+1})` rational
//! additions against `|Q|^{|u|+2rt}` for the naive scan.

use num_rational::BigRational;
use num_traits::Zero;

use super::{BernoulliMeasure, MeasureError};
use crate::engine::{compose_power, flatten_rule, LocalRule, State};

/// Exact value of `A^tμ([u])` as a rational number.
///
/// `budget` caps the flattened composed-rule table at `|Q|^(2rt+1)` entries
/// (the DP state space is `|Q|^{2rt}`).
pub fn exact_pushforward(
    rule: &LocalRule,
    measure: &BernoulliMeasure,
    word: &[State],
    t: u64,
    budget: u128,
) -> Result<BigRational, MeasureError> {
    let q = rule
        .dense_state_count()
        .ok_or(MeasureError::BudgetExceeded { required: u128::MAX, budget })? as usize;
    for &s in word {
        if s as usize >= q {
            return Err(MeasureError::UnknownSymbol(s));
        }
    }
    if measure.alphabet().len() != q {
        return Err(MeasureError::BadCoefficients(
            "measure and rule alphabets differ in size".into(),
        ));
    }
    if t == 0 {
        return measure.cylinder_prob(word);
    }
    if word.is_empty() {
        return Ok(BigRational::from_integer(1.into()));
    }

    let span = 2 * rule.radius() as u128 * t as u128 + 1;
    let required = (q as u128)
        .checked_pow(span.min(u32::MAX as u128) as u32)
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(MeasureError::BudgetExceeded { required, budget });
    }

    let composed = compose_power(rule, t as u32)?;
    let table = flatten_rule(&composed, budget)?;
    let ctx = 2 * composed.radius() as usize; // symbols of look-behind in the DP state

    // weights[s] = total measure of prefixes whose last `ctx` symbols encode `s`
    let states = q.pow(ctx as u32);
    let mut weights = vec![BigRational::zero(); states];
    let mut next = vec![BigRational::zero(); states];

    // Seed with all length-`ctx` prefixes; the weight only depends on the
    // digit multiset, so the big-endian code can be weighted directly.
    for (code, slot) in weights.iter_mut().enumerate() {
        let mut w = BigRational::from_integer(1.into());
        let mut rem = code;
        for _ in 0..ctx {
            w *= measure.coefficient((rem % q) as State)?;
            rem /= q;
        }
        *slot = w;
    }

    // Extend one symbol at a time; each extension completes one output cell.
    for &out_sym in word {
        for n in next.iter_mut() {
            n.set_zero();
        }
        for (code, w) in weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for s in 0..q {
                let full = code * q + s; // neighborhood of length ctx + 1
                if table.apply_dense_index(full) != out_sym {
                    continue;
                }
                let ncode = full % states;
                let contrib = w * measure.coefficient(s as State)?;
                next[ncode] += contrib;
            }
        }
        std::mem::swap(&mut weights, &mut next);
    }

    Ok(weights.iter().sum())
}

impl LocalRule {
    /// Table lookup by dense neighborhood index; only valid for table rules.
    pub(crate) fn apply_dense_index(&self, index: usize) -> State {
        match self.body() {
            crate::engine::RuleBody::Table(t) => t[index],
            _ => unreachable!("apply_dense_index on a non-table rule"),
        }
    }
}
