//! Deterministic multi-tape Turing machines.
//!
//! Input `i` is written in binary (most significant bit first) on tape 0; the
//! output is read off the designated output tape between the leftmost and
//! rightmost non-blank cells after halting. Machines are validated to be
//! deterministic, and halting states have no outgoing transitions.


use serde::{Deserialize, Serialize};

use super::SeqError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    L,
    R,
    S,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TmTransition {
    pub state: String,
    pub read: Vec<String>,
    pub next: String,
    pub write: Vec<String>,
    pub moves: Vec<Move>,
}

/// A multi-tape deterministic Turing machine specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TmSpec {
    #[serde(default)]
    pub name: String,
    pub tapes: usize,
    pub states: Vec<String>,
    pub initial: String,
    pub halting: Vec<String>,
    pub tape_alphabet: Vec<String>,
    pub blank: String,
    /// Tape the output word is read from after halting.
    pub output_tape: usize,
    pub transitions: Vec<TmTransition>,
}

/// Compiled machine with dense state/symbol indices.
#[derive(Debug, Clone)]
pub struct CompiledTm {
    pub spec: TmSpec,
    n_states: usize,
    n_syms: usize,
    initial: usize,
    halting: Vec<bool>,
    blank: u8,
    output_tape: usize,
    tapes: usize,
    /// transition[state * n_syms^tapes + read-code]
    table: Vec<Option<CompiledTransition>>,
    /// symbol indices of "0" and "1" for binary input, when present
    zero_one: Option<(u8, u8)>,
}

#[derive(Debug, Clone)]
struct CompiledTransition {
    next: usize,
    write: Vec<u8>,
    moves: Vec<Move>,
}

/// Measured resources of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub index: u64,
    pub steps: u64,
    pub cells: u64,
}

/// Result of a bounded machine run.
#[derive(Debug, Clone)]
pub enum RunOutcome {
    Halted { output: Vec<u8>, steps: u64, cells: u64 },
    StepCapExceeded { cells: u64 },
    SpaceCapExceeded { steps: u64 },
}

impl TmSpec {
    pub fn compile(&self) -> Result<CompiledTm, SeqError> {
        let find_state = |n: &str| {
            self.states
                .iter()
                .position(|s| s == n)
                .ok_or_else(|| SeqError::BadSpec(format!("unknown state {n:?}")))
        };
        let find_sym = |n: &str| {
            self.tape_alphabet
                .iter()
                .position(|s| s == n)
                .map(|i| i as u8)
                .ok_or_else(|| SeqError::BadSpec(format!("unknown tape symbol {n:?}")))
        };
        if self.tapes == 0 {
            return Err(SeqError::BadSpec("machine needs at least one tape".into()));
        }
        if self.output_tape >= self.tapes {
            return Err(SeqError::BadSpec("output tape out of range".into()));
        }
        let n_states = self.states.len();
        let n_syms = self.tape_alphabet.len();
        if n_syms > 64 {
            return Err(SeqError::BadSpec("tape alphabet too large".into()));
        }
        let blank = find_sym(&self.blank)?;
        let initial = find_state(&self.initial)?;
        let mut halting = vec![false; n_states];
        for h in &self.halting {
            halting[find_state(h)?] = true;
        }
        let code_size = (n_syms as u64).checked_pow(self.tapes as u32).ok_or_else(|| {
            SeqError::BadSpec("read-code space overflow".into())
        })? as usize;
        let mut table: Vec<Option<CompiledTransition>> = vec![None; n_states * code_size];
        for tr in &self.transitions {
            let s = find_state(&tr.state)?;
            if halting[s] {
                return Err(SeqError::BadSpec(format!(
                    "halting state {:?} has an outgoing transition",
                    tr.state
                )));
            }
            if tr.read.len() != self.tapes || tr.write.len() != self.tapes || tr.moves.len() != self.tapes {
                return Err(SeqError::BadSpec("transition arity mismatch".into()));
            }
            let mut code = 0usize;
            for r in &tr.read {
                code = code * n_syms + find_sym(r)? as usize;
            }
            let slot = s * code_size + code;
            if table[slot].is_some() {
                return Err(SeqError::BadSpec(format!(
                    "nondeterministic transition from {:?} reading {:?}",
                    tr.state, tr.read
                )));
            }
            let write = tr.write.iter().map(|w| find_sym(w)).collect::<Result<Vec<_>, _>>()?;
            table[slot] = Some(CompiledTransition { next: find_state(&tr.next)?, write, moves: tr.moves.clone() });
        }
        let zero_one = match (
            self.tape_alphabet.iter().position(|s| s == "0"),
            self.tape_alphabet.iter().position(|s| s == "1"),
        ) {
            (Some(z), Some(o)) => Some((z as u8, o as u8)),
            _ => None,
        };
        Ok(CompiledTm {
            spec: self.clone(),
            n_states,
            n_syms,
            initial,
            halting,
            blank,
            output_tape: self.output_tape,
            tapes: self.tapes,
            table,
            zero_one,
        })
    }
}

#[derive(Debug)]
struct Tape {
    cells: Vec<u8>,
    head: usize,
    low: usize,
    high: usize,
    blank: u8,
}

impl Tape {
    fn new(content: &[u8], blank: u8) -> Self {
        let mut cells = vec![blank; content.len().max(1) + 8];
        cells[4..4 + content.len()].copy_from_slice(content);
        Tape { cells, head: 4, low: 4, high: 4 + content.len().max(1), blank }
    }

    #[inline]
    fn read(&self) -> u8 {
        self.cells[self.head]
    }

    #[inline]
    fn write_and_move(&mut self, sym: u8, mv: Move) {
        self.cells[self.head] = sym;
        match mv {
            Move::S => {}
            Move::R => {
                self.head += 1;
                if self.head == self.cells.len() {
                    self.cells.resize(self.cells.len() * 2, self.blank);
                }
                self.high = self.high.max(self.head + 1);
            }
            Move::L => {
                if self.head == 0 {
                    let grow = self.cells.len();
                    let mut bigger = vec![self.blank; grow + self.cells.len()];
                    bigger[grow..].copy_from_slice(&self.cells);
                    self.cells = bigger;
                    self.head = grow;
                    self.low += grow;
                    self.high += grow;
                }
                self.head -= 1;
                self.low = self.low.min(self.head);
            }
        }
        self.low = self.low.min(self.head);
        self.high = self.high.max(self.head + 1);
    }

    fn extent(&self) -> u64 {
        (self.high - self.low) as u64
    }
}

impl CompiledTm {
    /// Binary encoding written on the input tape; empty alphabet-dependent
    /// fallback when the machine has no "0"/"1" symbols.
    fn encode_input(&self, i: u64) -> Vec<u8> {
        match self.zero_one {
            Some((z, o)) => {
                if i == 0 {
                    return vec![z];
                }
                let bits = 64 - i.leading_zeros();
                (0..bits).rev().map(|b| if (i >> b) & 1 == 1 { o } else { z }).collect()
            }
            None => Vec::new(),
        }
    }

    /// Run on input `i` with step and space caps.
    pub fn run(&self, input: u64, step_cap: u64, space_cap: u64) -> RunOutcome {
        let mut tapes: Vec<Tape> = (0..self.tapes)
            .map(|k| {
                if k == 0 {
                    Tape::new(&self.encode_input(input), self.blank)
                } else {
                    Tape::new(&[], self.blank)
                }
            })
            .collect();
        let mut state = self.initial;
        let mut steps = 0u64;
        let code_size = (self.n_syms as u64).pow(self.tapes as u32) as usize;
        loop {
            if self.halting[state] {
                let out = &tapes[self.output_tape];
                let mut lo = out.low;
                let mut hi = out.high;
                while lo < hi && out.cells[lo] == self.blank {
                    lo += 1;
                }
                while hi > lo && out.cells[hi - 1] == self.blank {
                    hi -= 1;
                }
                let cells = tapes.iter().map(Tape::extent).sum();
                return RunOutcome::Halted { output: out.cells[lo..hi].to_vec(), steps, cells };
            }
            if steps >= step_cap {
                return RunOutcome::StepCapExceeded { cells: tapes.iter().map(Tape::extent).sum() };
            }
            let mut code = 0usize;
            for t in &tapes {
                code = code * self.n_syms + t.read() as usize;
            }
            match &self.table[state * code_size + code] {
                Some(tr) => {
                    for (k, t) in tapes.iter_mut().enumerate() {
                        t.write_and_move(tr.write[k], tr.moves[k]);
                    }
                    state = tr.next;
                    steps += 1;
                }
                // stuck = halt with current output; keeps partial machines total
                None => {
                    let out = &tapes[self.output_tape];
                    let mut lo = out.low;
                    let mut hi = out.high;
                    while lo < hi && out.cells[lo] == self.blank {
                        lo += 1;
                    }
                    while hi > lo && out.cells[hi - 1] == self.blank {
                        hi -= 1;
                    }
                    let cells = tapes.iter().map(Tape::extent).sum();
                    return RunOutcome::Halted { output: out.cells[lo..hi].to_vec(), steps, cells };
                }
            }
            let space: u64 = tapes.iter().map(Tape::extent).sum();
            if space > space_cap {
                return RunOutcome::SpaceCapExceeded { steps };
            }
        }
    }

    pub fn output_symbol_names(&self) -> &[String] {
        &self.spec.tape_alphabet
    }
}

fn two_tape_skeleton(name: &str) -> TmSpec {
    TmSpec {
        name: name.to_string(),
        tapes: 2,
        states: vec![],
        initial: String::new(),
        halting: vec![],
        tape_alphabet: vec!["_".into(), "0".into(), "1".into()],
        blank: "_".into(),
        output_tape: 1,
        transitions: vec![],
    }
}

/// Machine that halts immediately on every input.
pub fn tm_always_halt() -> TmSpec {
    let mut m = two_tape_skeleton("always-halt");
    m.states = vec!["start".into(), "done".into()];
    m.initial = "start".into();
    m.halting = vec!["done".into()];
    for a in ["_", "0", "1"] {
        m.transitions.push(TmTransition {
            state: "start".into(),
            read: vec![a.into(), "_".into()],
            next: "done".into(),
            write: vec![a.into(), "_".into()],
            moves: vec![Move::S, Move::S],
        });
    }
    m
}

/// Machine that never halts (spins in place).
pub fn tm_never_halt() -> TmSpec {
    let mut m = two_tape_skeleton("never-halt");
    m.states = vec!["spin".into()];
    m.initial = "spin".into();
    m.halting = vec![];
    for a in ["_", "0", "1"] {
        m.transitions.push(TmTransition {
            state: "spin".into(),
            read: vec![a.into(), "_".into()],
            next: "spin".into(),
            write: vec![a.into(), "_".into()],
            moves: vec![Move::S, Move::S],
        });
    }
    m
}

/// Machine that halts after exactly `n` extra steps (after one dispatch step).
pub fn tm_halt_after(n: u64) -> TmSpec {
    let mut m = two_tape_skeleton(&format!("halt-after-{n}"));
    m.states = (0..=n).map(|k| format!("s{k}")).collect();
    m.states.push("done".into());
    m.initial = "s0".into();
    m.halting = vec!["done".into()];
    for k in 0..=n {
        let next = if k == n { "done".to_string() } else { format!("s{}", k + 1) };
        for a in ["_", "0", "1"] {
            m.transitions.push(TmTransition {
                state: format!("s{k}"),
                read: vec![a.into(), "_".into()],
                next: next.clone(),
                write: vec![a.into(), "_".into()],
                moves: vec![Move::S, Move::S],
            });
        }
    }
    m
}

/// Machine writing `1^i` on the output tape for input `i` (binary countdown:
/// repeatedly decrement tape 0 and emit one `1` per round).
pub fn tm_unary_writer() -> TmSpec {
    let mut m = two_tape_skeleton("unary-writer");
    m.states = vec![
        "to-end".into(),   // move to the rightmost input digit
        "borrow".into(),   // subtract one, borrowing leftward
        "emit".into(),     // write a 1 on the output tape
        "rewind".into(),   // back to the right end for the next round
        "done".into(),
    ];
    m.initial = "to-end".into();
    m.halting = vec!["done".into()];
    let t = |state: &str, r0: &str, r1: &str, next: &str, w0: &str, w1: &str, m0: Move, m1: Move| TmTransition {
        state: state.into(),
        read: vec![r0.into(), r1.into()],
        next: next.into(),
        write: vec![w0.into(), w1.into()],
        moves: vec![m0, m1],
    };
    // walk right over the input digits
    m.transitions.push(t("to-end", "0", "_", "to-end", "0", "_", Move::R, Move::S));
    m.transitions.push(t("to-end", "1", "_", "to-end", "1", "_", Move::R, Move::S));
    m.transitions.push(t("to-end", "_", "_", "borrow", "_", "_", Move::L, Move::S));
    // borrow: 1 -> 0 stops the borrow; 0 -> 1 continues left; hitting the
    // blank means the value was already zero, so nothing is emitted (the
    // flipped digits no longer matter)
    m.transitions.push(t("borrow", "1", "_", "emit", "0", "_", Move::S, Move::S));
    m.transitions.push(t("borrow", "0", "_", "borrow", "1", "_", Move::L, Move::S));
    m.transitions.push(t("borrow", "_", "_", "done", "_", "_", Move::S, Move::S));
    // emit one unary symbol, then decrement again from the right end
    m.transitions.push(t("emit", "0", "_", "rewind", "0", "1", Move::S, Move::R));
    m.transitions.push(t("emit", "1", "_", "rewind", "1", "1", Move::S, Move::R));
    m.transitions.push(t("rewind", "0", "_", "rewind", "0", "_", Move::R, Move::S));
    m.transitions.push(t("rewind", "1", "_", "rewind", "1", "_", Move::R, Move::S));
    m.transitions.push(t("rewind", "_", "_", "borrow", "_", "_", Move::L, Move::S));
    m
}
