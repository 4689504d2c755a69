//! Core cellular-automaton semantics: alphabets, local rules, finite windows
//! with a boundary policy, and deterministic evolution.
//!
//! Two boundary policies are supported. Under `Exact`, every application of a
//! radius-`r` rule shrinks the window by `r` cells on each side; the surviving
//! cells carry the exact values the infinite lattice would have. Under
//! `Torus`, the window has constant length and wraps around; this is exact for
//! spatially periodic configurations and is the default for long runs.

mod builtins;
// pub mod io; // enabled once toolbox lands
mod rule;

pub use builtins::{spreading_over, Builtin};
pub use rule::{LocalRule, ProgramRule, RuleBody};

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

/// State type used by the whole engine. Small alphabets use dense indices
/// `0..n`; programmatic rules may pack structured records into the 64 bits.
pub type State = u64;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("window of length {got} is too small: need at least {needed} cells")]
    WindowTooSmall { needed: usize, got: usize },
    #[error("rule table would need {required} entries, over the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("state {state} out of range for alphabet of size {size}")]
    StateOutOfRange { state: State, size: u64 },
    #[error("alphabet must be non-empty with unique symbol names")]
    BadAlphabet,
    #[error("composition power must be at least 1")]
    BadPower,
}

/// An ordered finite set of named symbols with a stable index ↔ name bijection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, EngineError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(EngineError::BadAlphabet);
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(EngineError::BadAlphabet);
            }
        }
        Ok(Alphabet { names })
    }

    /// Alphabet `{"0", "1", ..}` of the given size.
    pub fn numeric(size: usize) -> Self {
        Alphabet {
            names: (0..size).map(|i| i.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn name(&self, state: State) -> Option<&str> {
        self.names.get(state as usize).map(|s| s.as_str())
    }

    pub fn index_of(&self, name: &str) -> Option<State> {
        self.names.iter().position(|n| n == name).map(|i| i as State)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Encode a word given as one symbol name per character cluster.
    ///
    /// Single-character symbol names may be written contiguously ("010");
    /// longer names must be separated by whitespace or commas.
    pub fn parse_word(&self, text: &str) -> Result<Vec<State>, EngineError> {
        let single = self.names.iter().all(|n| n.chars().count() == 1);
        if single && !text.contains([' ', ',']) {
            text.chars()
                .map(|c| {
                    self.index_of(&c.to_string())
                        .ok_or_else(|| EngineError::UnknownSymbol(c.to_string()))
                })
                .collect()
        } else {
            text.split([' ', ','])
                .filter(|t| !t.is_empty())
                .map(|t| {
                    self.index_of(t)
                        .ok_or_else(|| EngineError::UnknownSymbol(t.to_string()))
                })
                .collect()
        }
    }

    pub fn format_word(&self, word: &[State]) -> String {
        let single = self.names.iter().all(|n| n.chars().count() == 1);
        let sep = if single { "" } else { " " };
        word.iter()
            .map(|&s| self.name(s).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(sep)
    }
}

/// Boundary policy of a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Shrinking light cone: results are exact values of the infinite lattice.
    Exact,
    /// Fixed-width wrap-around: exact for spatially periodic configurations.
    Torus,
}

/// A finite block of cells with an origin coordinate and a boundary policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub cells: Vec<State>,
    pub origin: i64,
    pub boundary: Boundary,
}

impl Window {
    pub fn new(cells: Vec<State>, origin: i64, boundary: Boundary) -> Self {
        Window { cells, origin, boundary }
    }

    pub fn exact(cells: Vec<State>) -> Self {
        Self::new(cells, 0, Boundary::Exact)
    }

    pub fn torus(cells: Vec<State>) -> Self {
        Self::new(cells, 0, Boundary::Torus)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Rotate a torus window left by `k` cells.
    pub fn rotated(&self, k: usize) -> Window {
        let n = self.cells.len();
        let mut cells = Vec::with_capacity(n);
        for i in 0..n {
            cells.push(self.cells[(i + k) % n]);
        }
        Window::new(cells, self.origin, self.boundary)
    }
}

/// A sequence of windows indexed by time, produced by iterating one rule.
#[derive(Debug, Clone)]
pub struct SpaceTimeTrace {
    pub rows: Vec<Window>,
}

impl SpaceTimeTrace {
    pub fn steps(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }
}

/// One application of the local rule to a window.
pub fn apply_rule(rule: &LocalRule, w: &Window) -> Result<Window, EngineError> {
    let r = rule.radius() as usize;
    let span = 2 * r + 1;
    if w.len() < span {
        return Err(EngineError::WindowTooSmall { needed: span, got: w.len() });
    }
    match w.boundary {
        Boundary::Exact => {
            let out_len = w.len() - 2 * r;
            let mut out = vec![0; out_len];
            step_exact(rule, &w.cells, &mut out);
            Ok(Window::new(out, w.origin + r as i64, Boundary::Exact))
        }
        Boundary::Torus => {
            let mut out = vec![0; w.len()];
            step_torus(rule, &w.cells, &mut out);
            Ok(Window::new(out, w.origin, Boundary::Torus))
        }
    }
}

/// Iterate the rule `steps` times, keeping every row.
///
/// Under the exact policy the initial window must have length at least
/// `2 * r * steps + 1` so that at least one cell survives.
pub fn evolve(rule: &LocalRule, w: &Window, steps: u64) -> Result<SpaceTimeTrace, EngineError> {
    let r = rule.radius() as u64;
    if w.boundary == Boundary::Exact {
        let needed = (2 * r * steps + 1) as usize;
        if w.len() < needed {
            return Err(EngineError::WindowTooSmall { needed, got: w.len() });
        }
    }
    let mut rows = Vec::with_capacity(steps as usize + 1);
    rows.push(w.clone());
    let mut cur = w.clone();
    for _ in 0..steps {
        cur = apply_rule(rule, &cur)?;
        rows.push(cur.clone());
    }
    Ok(SpaceTimeTrace { rows })
}

/// Streaming evolution: visits `(t, row)` at `t = 0`, every checkpoint, and
/// the final step, without keeping intermediate rows.
///
/// This is the workhorse for long runs; [`evolve`] materializes a full trace
/// and is meant for small windows.
pub fn evolve_stream(
    rule: &LocalRule,
    w: &Window,
    steps: u64,
    checkpoints: &[u64],
    mut visit: impl FnMut(u64, &Window),
) -> Result<Window, EngineError> {
    let r = rule.radius() as u64;
    if w.boundary == Boundary::Exact {
        let needed = (2 * r * steps + 1) as usize;
        if w.len() < needed {
            return Err(EngineError::WindowTooSmall { needed, got: w.len() });
        }
    } else if w.len() < (2 * r + 1) as usize {
        return Err(EngineError::WindowTooSmall { needed: (2 * r + 1) as usize, got: w.len() });
    }
    let mut marks: Vec<u64> = checkpoints.iter().copied().filter(|&t| t <= steps).collect();
    marks.sort_unstable();
    marks.dedup();

    // Bit-packed fast path for elementary rules on a torus.
    if let (RuleBody::Builtin(Builtin::Eca(n)), Boundary::Torus) = (rule.body(), w.boundary) {
        return evolve_eca_torus(*n, w, steps, &marks, &mut visit);
    }

    let mut want = marks.iter().copied().peekable();
    if want.peek() == Some(&0) {
        visit(0, w);
        want.next();
    }
    let mut cur = w.clone();
    let mut scratch = cur.cells.clone();
    for t in 1..=steps {
        match cur.boundary {
            Boundary::Exact => {
                let out_len = cur.len() - 2 * r as usize;
                scratch.truncate(out_len);
                step_exact(rule, &cur.cells, &mut scratch);
                std::mem::swap(&mut cur.cells, &mut scratch);
                cur.cells.truncate(out_len);
                cur.origin += r as i64;
            }
            Boundary::Torus => {
                step_torus(rule, &cur.cells, &mut scratch);
                std::mem::swap(&mut cur.cells, &mut scratch);
            }
        }
        if want.peek() == Some(&t) {
            visit(t, &cur);
            want.next();
        }
    }
    Ok(cur)
}

const PAR_THRESHOLD: usize = 1 << 14;

fn step_exact(rule: &LocalRule, cells: &[State], out: &mut [State]) {
    let r = rule.radius() as usize;
    let span = 2 * r + 1;
    if out.len() >= PAR_THRESHOLD {
        out.par_chunks_mut(1 << 12).enumerate().for_each(|(chunk, dst)| {
            let base = chunk << 12;
            for (j, d) in dst.iter_mut().enumerate() {
                *d = rule.apply(&cells[base + j..base + j + span]);
            }
        });
    } else {
        for (j, d) in out.iter_mut().enumerate() {
            *d = rule.apply(&cells[j..j + span]);
        }
    }
}

fn step_torus(rule: &LocalRule, cells: &[State], out: &mut [State]) {
    let r = rule.radius() as usize;
    let n = cells.len();
    let span = 2 * r + 1;
    let inner = |j: usize, d: &mut State, buf: &mut Vec<State>| {
        if j >= r && j + r < n {
            *d = rule.apply(&cells[j - r..j + r + 1]);
        } else {
            buf.clear();
            for k in 0..span {
                let idx = (j + n + k - r) % n;
                buf.push(cells[idx]);
            }
            *d = rule.apply(buf);
        }
    };
    if n >= PAR_THRESHOLD {
        out.par_chunks_mut(1 << 12).enumerate().for_each(|(chunk, dst)| {
            let base = chunk << 12;
            let mut buf = Vec::with_capacity(span);
            for (j, d) in dst.iter_mut().enumerate() {
                inner(base + j, d, &mut buf);
            }
        });
    } else {
        let mut buf = Vec::with_capacity(span);
        for (j, d) in out.iter_mut().enumerate() {
            inner(j, d, &mut buf);
        }
    }
}

/// Bit-packed torus stepping for elementary CA; cells are stored 64 per word.
fn evolve_eca_torus(
    n: u8,
    w: &Window,
    steps: u64,
    marks: &[u64],
    visit: &mut impl FnMut(u64, &Window),
) -> Result<Window, EngineError> {
    let len = w.len();
    let words = len.div_ceil(64);
    let mut cur = vec![0u64; words];
    for (i, &c) in w.cells.iter().enumerate() {
        if c != 0 {
            cur[i / 64] |= 1 << (i % 64);
        }
    }
    let unpack = |packed: &[u64]| -> Vec<State> {
        (0..len).map(|i| (packed[i / 64] >> (i % 64)) & 1).collect()
    };
    let mut want = marks.iter().copied().peekable();
    if want.peek() == Some(&0) {
        visit(0, w);
        want.next();
    }
    let mut next = vec![0u64; words];
    for t in 1..=steps {
        eca_step_packed(n, &cur, &mut next, len);
        std::mem::swap(&mut cur, &mut next);
        if want.peek() == Some(&t) {
            let row = Window::new(unpack(&cur), w.origin, Boundary::Torus);
            visit(t, &row);
            want.next();
        }
    }
    Ok(Window::new(unpack(&cur), w.origin, Boundary::Torus))
}

/// One step of elementary rule `n` on a packed torus row of `len` cells.
fn eca_step_packed(n: u8, cur: &[u64], out: &mut [u64], len: usize) {
    let words = cur.len();
    let get_bit = |v: &[u64], i: usize| (v[i / 64] >> (i % 64)) & 1;
    // Left/right neighbor lanes, shifted with wrap-around across word borders
    // and across the (possibly partial) last word.
    let last_bits = len - 64 * (words - 1);
    for wi in 0..words {
        let c = cur[wi];
        // bit i of `left` must be cell i-1
        let prev_word = if wi == 0 { words - 1 } else { wi - 1 };
        let prev_top = if wi == 0 {
            get_bit(cur, len - 1)
        } else {
            (cur[prev_word] >> 63) & 1
        };
        let left = (c << 1) | prev_top;
        // bit i of `right` must be cell i+1
        let next_low = if wi == words - 1 {
            get_bit(cur, 0)
        } else {
            cur[wi + 1] & 1
        };
        let bits_here = if wi == words - 1 { last_bits } else { 64 };
        let right = if bits_here == 64 {
            (c >> 1) | (next_low << 63)
        } else {
            (c >> 1) | (next_low << (bits_here - 1))
        };
        let mut res = 0u64;
        for pat in 0..8u8 {
            if (n >> pat) & 1 == 1 {
                let l = if pat & 4 != 0 { left } else { !left };
                let m = if pat & 2 != 0 { c } else { !c };
                let r = if pat & 1 != 0 { right } else { !right };
                res |= l & m & r;
            }
        }
        if bits_here < 64 {
            res &= (1u64 << bits_here) - 1;
        }
        out[wi] = res;
    }
}

/// Materialize a programmatic rule as an explicit transition table.
///
/// Fails with the required size when `|Q|^(2r+1)` exceeds the budget; the
/// layered construction is deliberately out of reach.
pub fn flatten_rule(rule: &LocalRule, budget: u128) -> Result<LocalRule, EngineError> {
    rule::flatten(rule, budget)
}

/// The rule computing `t` iterations in one application; its radius is `r*t`.
pub fn compose_power(rule: &LocalRule, t: u32) -> Result<LocalRule, EngineError> {
    if t == 0 {
        return Err(EngineError::BadPower);
    }
    if t == 1 {
        return Ok(rule.clone());
    }
    Ok(LocalRule::composed(Arc::new(rule.clone()), t))
}
