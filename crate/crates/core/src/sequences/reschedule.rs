//! Resource-bounded rescheduling of growing computable sequences.
//!
//! Given declared bounds `T(i)` and `S(i)`, the rescheduled sequence `w'`
//! satisfies `L_{w'} = L_w` and each `w'_i` is produced within `T(i)` steps
//! and `S(i)` cells (for `i` past a reported threshold). The wrapper
//! simulates the base generator on successive inputs `j = 0, 1, ...` under a
//! step counter budgeted at `λ(i) = ⌊(T(i) − i) / (2i)⌋`, artificially
//! slowing the base so its cost at least doubles per input (input `j`
//! recomputes input `j−1` twice before the real work). When the budget or
//! the space marker at `S(i)` is hit mid-input, the last completed word is
//! emitted; after a completed copy the next input starts only while the
//! counter is still below `λ(i−1)`. The result is, after a finite prefix of
//! empty words, an in-order stutter of the base sequence.

use std::sync::Arc;

use super::tm::ResourceReport;
use super::{BoundExpr, Generator, GrowingSequenceSpec, SeqError};

#[derive(Debug)]
pub struct Rescheduled {
    pub base: GrowingSequenceSpec,
    pub time_bound: BoundExpr,
    pub space_bound: BoundExpr,
}

impl Rescheduled {
    fn lambda(&self, i: u64) -> u64 {
        if i == 0 {
            return 0;
        }
        let t = self.time_bound.eval(i);
        if t <= i {
            0
        } else {
            (t - i) / (2 * i)
        }
    }

    pub fn eval(&self, i: u64) -> Result<(Vec<u64>, ResourceReport), SeqError> {
        let bit_width = |x: u64| 64 - x.leading_zeros() as u64;
        if i == 0 {
            return Ok((Vec::new(), ResourceReport { index: 0, steps: 1, cells: 1 }));
        }
        let lam = self.lambda(i);
        let lam_prev = self.lambda(i - 1);
        let space = self.space_bound.eval(i);

        let mut sigma = 0u64; // charged (slowed) simulated steps
        let mut charged_prev = 0u64; // C(j-1)
        let mut out: Vec<u64> = Vec::new();
        let mut copies = 0u64;
        let mut max_cells = 0u64;
        let mut j = 0u64;
        loop {
            let (word, cost, cells) = match self.base.base_cost(j) {
                Ok(v) => v,
                // an input slower than the safety cap can never fit the
                // budget either; keep the last completed output
                Err(SeqError::CapExceeded { .. }) => break,
                Err(e) => return Err(e),
            };
            let charged = charged_prev
                .saturating_mul(2)
                .saturating_add(cost.max(1));
            if sigma.saturating_add(charged) > lam {
                break;
            }
            if cells > space || word.len() as u64 > space {
                break;
            }
            sigma += charged;
            charged_prev = charged;
            copies += word.len() as u64;
            max_cells = max_cells.max(cells).max(word.len() as u64);
            out = word;
            if sigma >= lam_prev {
                break;
            }
            j += 1;
        }
        let steps = 2 * sigma + copies + bit_width(i + 1) + 4;
        let cells = max_cells + bit_width(lam + 2) + bit_width(i + 2) + 2;
        Ok((out, ResourceReport { index: i, steps, cells }))
    }
}

/// Wrap a sequence so it is computable within `T(i)` steps and `S(i)` cells.
///
/// Sanity checks run at sampled indices and reject bound pairs that violate
/// the scheduling hypotheses (`T(i) ≫ i`, `S(i) ≫ log i`, and slow growth of
/// the per-index budget).
pub fn reschedule(
    base: &GrowingSequenceSpec,
    time_bound: BoundExpr,
    space_bound: BoundExpr,
) -> Result<GrowingSequenceSpec, SeqError> {
    validate_bounds(&time_bound, &space_bound)?;
    let resched = Rescheduled {
        base: base.clone(),
        time_bound,
        space_bound,
    };
    Ok(GrowingSequenceSpec {
        alphabet: base.alphabet.clone(),
        generator: Generator::Rescheduled(Arc::new(resched)),
        step_cap: base.step_cap,
        space_cap: base.space_cap,
    })
}

/// Sampled sanity checks of a `(T, S)` bound pair.
///
/// Asymptotic hypotheses cannot be verified mechanically; violations at the
/// sampled indices are reported, anything beyond that surfaces later as a
/// high compliance threshold.
pub fn validate_bounds(time_bound: &BoundExpr, space_bound: &BoundExpr) -> Result<(), SeqError> {
    let samples: &[u64] = &[64, 256, 1024, 4096];
    let lambda = |i: u64| {
        let t = time_bound.eval(i);
        if t <= i {
            0
        } else {
            (t - i) / (2 * i)
        }
    };
    let mut lam_positive = false;
    for &i in samples {
        if lambda(i) > 0 {
            lam_positive = true;
        }
        // growth condition λ(i+1) < 2 λ(i−1)
        let prev = lambda(i - 1);
        let next = lambda(i + 1);
        if prev > 0 && next >= 2 * prev {
            return Err(SeqError::HypothesisViolation(format!(
                "budget grows too fast at i={i}: λ({}) = {next} ≥ 2·λ({}) = {}",
                i + 1,
                i - 1,
                2 * prev
            )));
        }
        let s = space_bound.eval(i);
        let log_i = 64 - i.leading_zeros() as u64;
        if s < log_i {
            return Err(SeqError::HypothesisViolation(format!(
                "space bound S({i}) = {s} is below log₂(i) = {log_i}"
            )));
        }
    }
    if !lam_positive {
        return Err(SeqError::HypothesisViolation(
            "time bound leaves no simulation budget at any sampled index".into(),
        ));
    }
    Ok(())
}

/// Smallest index in `range` from which measured resources stay within the
/// declared bounds through the end of the range.
pub fn compliance_threshold(
    spec: &GrowingSequenceSpec,
    time_bound: &BoundExpr,
    space_bound: &BoundExpr,
    range: std::ops::RangeInclusive<u64>,
) -> Result<Option<u64>, SeqError> {
    let mut threshold = None;
    for i in range {
        let (_, rep) = spec.eval(i)?;
        let ok = rep.steps <= time_bound.eval(i) && rep.cells <= space_bound.eval(i);
        match (ok, threshold) {
            (true, None) => threshold = Some(i),
            (false, _) => threshold = None,
            _ => {}
        }
    }
    Ok(threshold)
}
