//! A laboratory for one-dimensional cellular automata.
//!
//! The crate provides:
//!
//! * a simulation engine for radius-`r` local rules over finite alphabets,
//!   with an exact shrinking-light-cone mode and a torus mode ([`engine`]);
//! * Bernoulli measures, reproducible sampling, and an exact dynamic-program
//!   oracle for the pushforward probability of a word at time `t` ([`measure`]);
//! * occurrence/density statistics, density traces over time, and statistical
//!   persistence estimation ([`stats`]);
//! * growing computable sequences: a multi-tape Turing-machine interpreter, a
//!   resource-bounded rescheduler, and several concrete sequence generators
//!   ([`sequences`]);
//! * a layered self-organizing construction that realizes the persistent
//!   language of a given sequence as the long-run content of its computation
//!   segments, plus a two-phase synchronization automaton ([`toolbox`]);
//! * wall detection and wall-based language enumeration, and convergence
//!   diagnostics ([`analysis`]).
//!
//! Cell states are `u64` values throughout the engine. Small alphabets use
//! dense indices `0..n`; the layered construction packs a structured record
//! into the same 64 bits.

pub mod analysis;
// pub mod cli;
pub mod engine;
pub mod measure;
// pub mod render;
pub mod rng;
pub mod sequences;
pub mod stats;
// pub mod toolbox;
