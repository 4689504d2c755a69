//! Concrete growing-sequence constructions used by the language
//! realizations: subshift avoiders, co-finiteness witnesses, the
//! weakly-generic prefix comparison sequence, and the slow-convergence
//! sequence.

use std::sync::Arc;

use super::tm::{CompiledTm, ResourceReport, RunOutcome};
use super::{int_schedule, pair_schedule, triple_schedule, SeqError};
use crate::engine::{evolve, Alphabet, LocalRule, State, Window};
use crate::measure::weakly_generic_prefix;

/// Practical cap on actually-simulated steps; the semantic budgets `2^i`
/// quickly exceed anything runnable, so a machine that is still running at
/// this cap with budget to spare is reported as undecidable-here rather than
/// silently misclassified.
const SIM_CAP: u64 = 1_000_000;

/// An enumeration `index ↦ machine` with decidable-by-construction behavior
/// for the zoo variants.
#[derive(Debug, Clone)]
pub enum MachineEnum {
    /// Every machine halts on every input after one step.
    AlwaysHalt,
    /// No machine ever halts.
    NeverHalt,
    /// Machine `j` halts after exactly `times[j]` steps on every input;
    /// indices past the end never halt.
    HaltAfter(Vec<u64>),
    /// Explicit machines; indices past the end never halt.
    Fixed(Vec<Arc<CompiledTm>>),
}

impl MachineEnum {
    /// `Some(steps)` when machine `index` halts on `input` within `cap`
    /// steps.
    fn halting_steps(&self, index: u64, input: u64, cap: u64) -> Result<Option<u64>, SeqError> {
        match self {
            MachineEnum::AlwaysHalt => Ok(if cap >= 1 { Some(1) } else { None }),
            MachineEnum::NeverHalt => Ok(None),
            MachineEnum::HaltAfter(times) => Ok(match times.get(index as usize) {
                Some(&s) if s <= cap => Some(s),
                _ => None,
            }),
            MachineEnum::Fixed(machines) => match machines.get(index as usize) {
                None => Ok(None),
                Some(tm) => {
                    let practical = cap.min(SIM_CAP);
                    match tm.run(input, practical, 1 << 24) {
                        RunOutcome::Halted { steps, .. } => Ok(Some(steps)),
                        RunOutcome::StepCapExceeded { .. } if practical < cap => {
                            Err(SeqError::CapExceeded { index, cap: practical })
                        }
                        RunOutcome::StepCapExceeded { .. } => Ok(None),
                        RunOutcome::SpaceCapExceeded { .. } => Ok(None),
                    }
                }
            },
        }
    }
}

fn power_of_two_budget(i: u64) -> u64 {
    1u64.checked_shl(i.min(62) as u32).unwrap_or(u64::MAX)
}

/// `w_i` = lexicographically first word of length `i` avoiding the first `i`
/// forbidden factors.
#[derive(Debug)]
pub struct SubshiftAvoider {
    pub alphabet: Alphabet,
    pub forbidden: Vec<Vec<State>>,
}

impl SubshiftAvoider {
    pub fn eval(&self, i: u64) -> Result<(Vec<State>, ResourceReport), SeqError> {
        let q = self.alphabet.len() as State;
        let len = i as usize;
        let active: Vec<&Vec<State>> =
            self.forbidden.iter().take(len).filter(|f| !f.is_empty()).collect();
        let mut word: Vec<State> = Vec::with_capacity(len);
        let mut steps = 0u64;
        // lexicographic depth-first search with suffix checks
        let violates = |word: &[State]| {
            let end = word.len();
            active.iter().any(|f| end >= f.len() && word[end - f.len()..] == f[..])
        };
        let mut next_sym: State = 0;
        loop {
            if word.len() == len {
                return Ok((
                    word,
                    ResourceReport { index: i, steps, cells: len as u64 },
                ));
            }
            steps += 1;
            let mut placed = false;
            for s in next_sym..q {
                word.push(s);
                if violates(&word) {
                    word.pop();
                } else {
                    placed = true;
                    break;
                }
            }
            if placed {
                next_sym = 0;
            } else {
                // backtrack
                loop {
                    match word.pop() {
                        None => return Err(SeqError::NoValidWord { length: i }),
                        Some(s) if s + 1 < q => {
                            next_sym = s + 1;
                            break;
                        }
                        Some(_) => {}
                    }
                }
            }
        }
    }
}

/// Marker symbols of the witness words: `D0 W^j D1 W^k D2`.
pub const COF_MARKERS: [&str; 4] = ["D0", "W", "D1", "D2"];
pub const COF_D0: State = 0;
pub const COF_W: State = 1;
pub const COF_D1: State = 2;
pub const COF_D2: State = 3;

/// Witness sequence for co-finiteness: on `f(i) = (j, k, l)`, machine `j` is
/// simulated on inputs `k ..= k+l` with a total budget of `2^i` steps.
/// A successful index (all halted, not already witnessed by an earlier index
/// with the same triple) emits `(D0 W^j D1 W^k D2)^i`; a failed one emits the
/// filler `W^{i(j+k+3)}`.
#[derive(Debug)]
pub struct CofWitness {
    pub machines: MachineEnum,
}

impl CofWitness {
    pub fn alphabet() -> Alphabet {
        Alphabet::new(COF_MARKERS).unwrap()
    }

    /// Total steps to run machine `j` on all inputs, when all halt within
    /// the budget.
    fn sequence_time(&self, j: u64, k: u64, l: u64, budget: u64) -> Result<Option<u64>, SeqError> {
        let mut total = 0u64;
        for input in k..=k + l {
            let remaining = budget.saturating_sub(total);
            match self.machines.halting_steps(j, input, remaining)? {
                Some(s) => total = total.saturating_add(s),
                None => return Ok(None),
            }
        }
        Ok(Some(total))
    }

    fn successful(&self, i: u64) -> Result<bool, SeqError> {
        let (j, k, l) = triple_schedule(i);
        let tau = match self.sequence_time(j, k, l, power_of_two_budget(i))? {
            Some(t) => t,
            None => return Ok(false),
        };
        // deduplication: an earlier index with the same triple that could
        // already fit the computation claims the witness
        let prior = (0..i).rev().find(|&p| triple_schedule(p) == (j, k, l));
        if let Some(p) = prior {
            if tau <= power_of_two_budget(p) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn eval(&self, i: u64) -> Result<(Vec<State>, ResourceReport), SeqError> {
        let (j, k, l) = triple_schedule(i);
        let _ = l;
        let block = (j + k + 3) as usize;
        let word = if self.successful(i)? {
            let mut w = Vec::with_capacity(block * i as usize);
            for _ in 0..i {
                w.push(COF_D0);
                w.extend(std::iter::repeat(COF_W).take(j as usize));
                w.push(COF_D1);
                w.extend(std::iter::repeat(COF_W).take(k as usize));
                w.push(COF_D2);
            }
            w
        } else {
            vec![COF_W; i as usize * block]
        };
        let cells = word.len() as u64;
        Ok((word, ResourceReport { index: i, steps: cells.max(1), cells }))
    }
}

/// Comparison sequence between a CA's evolution of the weakly generic
/// configuration and its raw prefix: on `f(i) = (k, l)` the machine is
/// simulated on inputs `k ..= k+l` with budget `2^i`; with `ν = ⌊log₂ i⌋`,
/// a failed index emits `v_i^{k+1}` and a successful one `u_i v_i^k`, where
/// `u_i` is the length-`ν` prefix of the weakly generic configuration and
/// `v_i` the length-`ν` prefix of its `ν`-step image.
#[derive(Debug)]
pub struct RiceSequence {
    pub rule: LocalRule,
    pub machine: MachineEnum,
}

impl RiceSequence {
    fn prefixes(&self, nu: usize) -> Result<(Vec<State>, Vec<State>), SeqError> {
        let alphabet = self.rule.alphabet().clone();
        if nu == 0 {
            return Ok((Vec::new(), Vec::new()));
        }
        let r = self.rule.radius() as usize;
        let prefix = weakly_generic_prefix(&alphabet, nu + r * nu);
        let u: Vec<State> = prefix[..nu].to_vec();
        // two-sided extension: cells left of the origin mirror the prefix,
        // so the image at positions [0, nu) is well defined and the identity
        // rule maps the prefix to itself
        let mut cells: Vec<State> = prefix[..r * nu].iter().rev().copied().collect();
        cells.extend_from_slice(&prefix);
        let trace = evolve(&self.rule, &Window::exact(cells), nu as u64)
            .map_err(|e| SeqError::BadSpec(e.to_string()))?;
        let last = trace.rows.last().unwrap();
        let v: Vec<State> = last.cells[..nu].to_vec();
        Ok((u, v))
    }

    pub fn eval(&self, i: u64) -> Result<(Vec<State>, ResourceReport), SeqError> {
        if i == 0 {
            return Ok((Vec::new(), ResourceReport { index: 0, steps: 1, cells: 0 }));
        }
        let nu = (63 - i.leading_zeros() as u64).min(32) as usize;
        let (k, l) = pair_schedule(i);
        let budget = power_of_two_budget(i);
        let mut total = 0u64;
        let mut success = true;
        for input in k..=k + l {
            match self.machine.halting_steps(0, input, budget.saturating_sub(total))? {
                Some(s) => total = total.saturating_add(s),
                None => {
                    success = false;
                    break;
                }
            }
        }
        if success {
            // an earlier index with the same pair already witnessed it
            if let Some(p) = (0..i).rev().find(|&p| pair_schedule(p) == (k, l)) {
                if total <= power_of_two_budget(p) {
                    success = false;
                }
            }
        }
        let (u, v) = self.prefixes(nu)?;
        let mut word = Vec::new();
        if success {
            word.extend_from_slice(&u);
            for _ in 0..k {
                word.extend_from_slice(&v);
            }
        } else {
            for _ in 0..=k {
                word.extend_from_slice(&v);
            }
        }
        let cells = word.len() as u64;
        Ok((word, ResourceReport { index: i, steps: cells.max(1), cells }))
    }
}

/// Sequence whose convergence outruns the halting times of an enumeration:
/// on `f(i) = m`, machine `m` is run on input `0` for `i` steps; the first
/// successful index per machine emits `(1^{m-1} 0)^i`, all others `1^{im}`.
#[derive(Debug)]
pub struct SlowConvergence {
    pub machines: MachineEnum,
}

impl SlowConvergence {
    pub fn alphabet() -> Alphabet {
        Alphabet::new(["0", "1"]).unwrap()
    }

    /// Machine index for a sequence index; shifted so `m ≥ 1`.
    pub fn machine_of(i: u64) -> u64 {
        int_schedule(i) + 1
    }

    fn successful(&self, i: u64) -> Result<bool, SeqError> {
        let m = Self::machine_of(i);
        let steps = match self.machines.halting_steps(m - 1, 0, i)? {
            Some(s) => s,
            None => return Ok(false),
        };
        // only the first index of f^{-1}(m) able to see the halt succeeds
        for prior in 0..i {
            if Self::machine_of(prior) == m && prior >= steps {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn eval(&self, i: u64) -> Result<(Vec<State>, ResourceReport), SeqError> {
        let m = Self::machine_of(i);
        let word = if self.successful(i)? {
            // (1^{m-1} 0)^i over the alphabet {"0", "1"}
            let mut w = Vec::with_capacity((m * i) as usize);
            for _ in 0..i {
                w.extend(std::iter::repeat(1).take(m as usize - 1));
                w.push(0);
            }
            w
        } else {
            vec![1; (i * m) as usize]
        };
        let cells = word.len() as u64;
        Ok((word, ResourceReport { index: i, steps: cells.max(1), cells }))
    }
}
