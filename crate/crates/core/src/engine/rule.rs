use std::fmt;
use std::sync::Arc;

use super::builtins::Builtin;
use super::{Alphabet, EngineError, State};

/// A programmatic radius-1 rule body over structured (non-dense) states.
///
/// The layered construction and the two-phase automaton implement this; their
/// state spaces are far too large to tabulate, so they plug straight into the
/// engine as opaque local functions.
pub trait ProgramRule: Send + Sync {
    /// Image of the neighborhood `(left, center, right)`.
    fn apply3(&self, left: State, center: State, right: State) -> State;
    /// Alphabet used to name projected symbols in I/O and statistics.
    fn observation_alphabet(&self) -> &Alphabet;
    /// Project a raw state to an observation symbol (index into the
    /// observation alphabet).
    fn project(&self, state: State) -> State;
    /// Gray level for space-time rendering.
    fn gray(&self, state: State) -> u8;
    fn name(&self) -> &str;
}

/// The body of a local rule.
#[derive(Clone)]
pub enum RuleBody {
    /// Explicit transition table over a dense alphabet.
    Table(Vec<State>),
    /// Named programmatic rule over a dense alphabet.
    Builtin(Builtin),
    /// `base` iterated `power` times, as a single rule of radius `r * power`.
    Composed { base: Arc<LocalRule>, power: u32 },
    /// Structured-state radius-1 rule (construction, two-phase automaton).
    Program(Arc<dyn ProgramRule>),
}

impl fmt::Debug for RuleBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleBody::Table(t) => write!(f, "Table({} entries)", t.len()),
            RuleBody::Builtin(b) => write!(f, "Builtin({b:?})"),
            RuleBody::Composed { base, power } => {
                write!(f, "Composed({:?}, power {power})", base.body())
            }
            RuleBody::Program(p) => write!(f, "Program({})", p.name()),
        }
    }
}

/// A radius-`r` local map over a finite alphabet.
///
/// The body is total: every neighborhood of length `2r + 1` has exactly one
/// image. Dense-alphabet rules know their alphabet; program rules use
/// structured states and expose a projection for observation.
#[derive(Debug, Clone)]
pub struct LocalRule {
    radius: u32,
    alphabet: Alphabet,
    body: RuleBody,
}

impl LocalRule {
    pub fn from_table(alphabet: Alphabet, radius: u32, table: Vec<State>) -> Result<Self, EngineError> {
        let q = alphabet.len() as u128;
        let required = q.pow(2 * radius + 1);
        if table.len() as u128 != required {
            return Err(EngineError::BudgetExceeded { required, budget: table.len() as u128 });
        }
        for &s in &table {
            if s >= alphabet.len() as u64 {
                return Err(EngineError::StateOutOfRange { state: s, size: alphabet.len() as u64 });
            }
        }
        Ok(LocalRule { radius, alphabet, body: RuleBody::Table(table) })
    }

    pub fn from_builtin(builtin: Builtin, alphabet: Alphabet) -> Result<Self, EngineError> {
        let radius = builtin.radius();
        builtin.check_alphabet(&alphabet)?;
        Ok(LocalRule { radius, alphabet, body: RuleBody::Builtin(builtin) })
    }

    pub fn from_program(rule: Arc<dyn ProgramRule>) -> Self {
        LocalRule {
            radius: 1,
            alphabet: rule.observation_alphabet().clone(),
            body: RuleBody::Program(rule),
        }
    }

    pub(super) fn composed(base: Arc<LocalRule>, power: u32) -> Self {
        LocalRule {
            radius: base.radius * power,
            alphabet: base.alphabet.clone(),
            body: RuleBody::Composed { base, power },
        }
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn body(&self) -> &RuleBody {
        &self.body
    }

    /// For dense rules, the alphabet of states `0..n`. Program rules return
    /// their observation alphabet; their raw state space is not dense.
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Number of raw states when the state space is dense.
    pub fn dense_state_count(&self) -> Option<u64> {
        match &self.body {
            RuleBody::Program(_) => None,
            RuleBody::Composed { base, .. } => base.dense_state_count(),
            _ => Some(self.alphabet.len() as u64),
        }
    }

    /// Project a raw state to an observation symbol for statistics and I/O.
    /// Dense states project to themselves.
    pub fn project(&self, state: State) -> State {
        match &self.body {
            RuleBody::Program(p) => p.project(state),
            _ => state,
        }
    }

    /// Gray level for rendering a state.
    pub fn gray(&self, state: State) -> u8 {
        match &self.body {
            RuleBody::Program(p) => p.gray(state),
            _ => {
                let n = self.alphabet.len() as u64;
                if n <= 1 {
                    0
                } else {
                    (state.min(n - 1) * 255 / (n - 1)) as u8
                }
            }
        }
    }

    /// Image of one neighborhood of length `2r + 1`.
    pub fn apply(&self, neigh: &[State]) -> State {
        debug_assert_eq!(neigh.len(), (2 * self.radius + 1) as usize);
        match &self.body {
            RuleBody::Table(table) => {
                let q = self.alphabet.len() as u64;
                let mut idx = 0u64;
                for &s in neigh {
                    idx = idx * q + s;
                }
                table[idx as usize]
            }
            RuleBody::Builtin(b) => b.apply(neigh),
            RuleBody::Composed { base, power } => {
                let r = base.radius as usize;
                let mut cur = neigh.to_vec();
                for _ in 0..*power {
                    let out_len = cur.len() - 2 * r;
                    let mut out = Vec::with_capacity(out_len);
                    for j in 0..out_len {
                        out.push(base.apply(&cur[j..j + 2 * r + 1]));
                    }
                    cur = out;
                }
                debug_assert_eq!(cur.len(), 1);
                cur[0]
            }
            RuleBody::Program(p) => p.apply3(neigh[0], neigh[1], neigh[2]),
        }
    }
}

pub(super) fn flatten(rule: &LocalRule, budget: u128) -> Result<LocalRule, EngineError> {
    let q = match rule.dense_state_count() {
        Some(q) => q as u128,
        None => {
            return Err(EngineError::BudgetExceeded { required: u128::MAX, budget });
        }
    };
    let span = 2 * rule.radius() + 1;
    let required = q.checked_pow(span).unwrap_or(u128::MAX);
    if required > budget {
        return Err(EngineError::BudgetExceeded { required, budget });
    }
    let size = required as usize;
    let mut table = vec![0u64; size];
    let mut neigh = vec![0u64; span as usize];
    for (idx, slot) in table.iter_mut().enumerate() {
        let mut rem = idx as u64;
        for k in (0..span as usize).rev() {
            neigh[k] = rem % q as u64;
            rem /= q as u64;
        }
        *slot = rule.apply(&neigh);
    }
    LocalRule::from_table(rule.alphabet().clone(), rule.radius(), table)
}
